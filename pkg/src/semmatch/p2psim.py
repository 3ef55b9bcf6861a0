"""Deterministic simulation of publish / request / bind on a super-peer overlay.

One super peer holds the common ontology and a registry of live peers
with their discovery keywords. Peers publish by matching their export
schema against the ontology (the half agreement stays at the peer, the
mapped ontology refs join its registry keywords), requesters discover
candidates through the registry, broadcast their half agreement, and
every candidate runs the phase-2 comparison locally, replying straight
to the requester. Binding composes the two half agreements at the
provider. The super peer never scores or composes anything; it only
keeps the registry.

Time is a tick counter: every hop costs ``latency_ticks`` and messages
inside the request round may be dropped with ``drop_probability``
(seeded, so a run is a pure function of script and seed). Events are
totally ordered by (tick, sender id, sequence number).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .agreement import (
    DEFAULT_PHASE_TWO,
    FullAgreement,
    PeerMatchResult,
    PhaseTwoConfig,
    VERDICT_NON_SIMILAR,
    compare_half_agreements,
    compose,
)
from .errors import ParseError, TickLimitExceeded, ValidationError
from .matcher import DEFAULT_CONFIG, HalfAgreement, MatchConfig, build_half_agreement
from .schema import KIND_COMMON, Schema, load_schema
from .taxonomy import Taxonomy

SUPER_PEER_ID = "super-peer"

EVENT_KINDS = (
    "register",
    "publish",
    "requestCandidates",
    "candidateList",
    "halfAgreementBroadcast",
    "matchResult",
    "bindRequest",
    "fullAgreement",
    "peerLeave",
)


@dataclass(frozen=True, slots=True)
class SimConfig:
    seed: int = 0
    latency_ticks: int = 1
    drop_probability: float = 0.0
    max_ticks: int = 10_000

    def __post_init__(self):
        if self.latency_ticks < 0:
            raise ValidationError("latency_ticks must be non-negative")
        if not 0.0 <= self.drop_probability <= 1.0:
            raise ValidationError("drop_probability must be in [0, 1]")
        if self.max_ticks <= 0:
            raise ValidationError("max_ticks must be positive")


@dataclass(frozen=True, slots=True)
class SimEvent:
    tick: int
    seq: int
    kind: str
    src: str
    dst: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "seq": self.seq,
            "kind": self.kind,
            "from": self.src,
            "to": self.dst,
            "payload": self.payload,
        }


def events_to_jsonl(events: Iterable[SimEvent]) -> str:
    lines = [
        json.dumps(event.to_dict(), sort_keys=True, separators=(",", ":"))
        for event in events
    ]
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(slots=True)
class RegistryEntry:
    keywords: tuple[str, ...]
    live: bool


@dataclass(slots=True)
class PeerNode:
    peer_id: str
    provider: bool = True
    requester: bool = True
    schema: Schema | None = None
    half_agreement: HalfAgreement | None = None
    inbox: list[SimEvent] = field(default_factory=list)


class SuperPeer:
    """Registry of live peers plus the shared common ontology."""

    def __init__(self, common_ontology: Schema):
        if common_ontology.kind != KIND_COMMON:
            raise ValidationError(
                f"super peer needs a commonOntology schema, got {common_ontology.kind!r}"
            )
        self.common_ontology = common_ontology
        self.registry: dict[str, RegistryEntry] = {}

    def register(self, peer_id: str, keywords: Iterable[str]) -> None:
        entry = self.registry.get(peer_id)
        if entry is not None and entry.live:
            raise ValidationError(f"peer {peer_id} is already registered")
        normalized = tuple(sorted({kw.lower() for kw in keywords}))
        self.registry[peer_id] = RegistryEntry(keywords=normalized, live=True)

    def mark_left(self, peer_id: str) -> None:
        entry = self.registry.get(peer_id)
        if entry is None or not entry.live:
            raise ValidationError(f"peer {peer_id} is not registered")
        entry.live = False

    def extend_keywords(self, peer_id: str, keywords: Iterable[str]) -> None:
        entry = self.registry.get(peer_id)
        if entry is None or not entry.live:
            raise ValidationError(f"peer {peer_id} is not registered")
        entry.keywords = tuple(sorted(set(entry.keywords) | {kw.lower() for kw in keywords}))

    def is_live(self, peer_id: str) -> bool:
        entry = self.registry.get(peer_id)
        return entry is not None and entry.live

    def candidates(self, requester_id: str, query_keywords: Iterable[str]) -> list[str]:
        """Live peers sharing at least one keyword, best overlap first."""
        if not self.is_live(requester_id):
            raise ValidationError(f"requester {requester_id} is not registered")
        query = {kw.lower() for kw in query_keywords}
        ranked = []
        for peer_id, entry in self.registry.items():
            if peer_id == requester_id or not entry.live:
                continue
            shared = len(query & set(entry.keywords))
            if shared > 0:
                ranked.append((-shared, peer_id))
        ranked.sort()
        return [peer_id for _, peer_id in ranked]


class World:
    """Single-super-peer simulation world driving the protocol."""

    def __init__(
        self,
        taxonomy: Taxonomy,
        common_ontology: Schema,
        match_config: MatchConfig = DEFAULT_CONFIG,
        phase_two_config: PhaseTwoConfig = DEFAULT_PHASE_TWO,
        sim_config: SimConfig = SimConfig(),
    ):
        self.taxonomy = taxonomy
        self.super_peer = SuperPeer(common_ontology)
        self.match_config = match_config
        self.phase_two_config = phase_two_config
        self.sim_config = sim_config
        self.peers: dict[str, PeerNode] = {}
        self.clock = 0
        self.events: list[SimEvent] = []
        self.match_results: dict[str, dict[str, PeerMatchResult]] = {}
        self._seq = 0
        self._rng = random.Random(sim_config.seed)

    # -- internals ---------------------------------------------------------

    def _emit(self, tick: int, kind: str, src: str, dst: str, payload: dict) -> SimEvent:
        if tick > self.sim_config.max_ticks:
            raise TickLimitExceeded(
                f"event at tick {tick} exceeds max_ticks={self.sim_config.max_ticks}"
            )
        event = SimEvent(tick=tick, seq=self._seq, kind=kind, src=src, dst=dst, payload=payload)
        self._seq += 1
        self.events.append(event)
        return event

    def _deliver_to_peer(self, event: SimEvent) -> None:
        self.peers[event.dst].inbox.append(event)

    def _dropped(self) -> bool:
        p = self.sim_config.drop_probability
        if p <= 0.0:
            return False
        return self._rng.random() < p

    def _peer(self, peer_id: str) -> PeerNode:
        node = self.peers.get(peer_id)
        if node is None:
            node = PeerNode(peer_id=peer_id)
            self.peers[peer_id] = node
        return node

    def _require_live(self, peer_id: str, role: str) -> PeerNode:
        if not self.super_peer.is_live(peer_id):
            raise ValidationError(f"{role} {peer_id} is not registered")
        return self._peer(peer_id)

    def _advance_to(self, tick: int) -> None:
        if tick > self.sim_config.max_ticks:
            raise TickLimitExceeded(
                f"clock at tick {tick} exceeds max_ticks={self.sim_config.max_ticks}"
            )
        self.clock = max(self.clock, tick)

    # -- protocol operations ------------------------------------------------

    def register(self, peer_id: str, keywords: Iterable[str] = ()) -> None:
        """Register a live peer with its initial discovery keywords."""
        keywords = list(keywords)
        self.super_peer.register(peer_id, keywords)
        self._peer(peer_id)
        tick = self.clock + self.sim_config.latency_ticks
        self._emit(tick, "register", peer_id, SUPER_PEER_ID,
                   {"keywords": sorted({kw.lower() for kw in keywords})})
        self._advance_to(tick)

    def load_peer_schema(self, peer_id: str, schema: Schema) -> None:
        self._peer(peer_id).schema = schema

    def publish(self, peer_id: str) -> HalfAgreement:
        """Build the peer's half agreement and advertise its mapped refs."""
        node = self._require_live(peer_id, "peer")
        if node.schema is None:
            raise ValidationError(f"peer {peer_id} has no schema loaded")
        half = build_half_agreement(
            self.taxonomy,
            node.schema,
            self.super_peer.common_ontology,
            self.match_config,
            peer_id=peer_id,
        )
        node.half_agreement = half
        self.super_peer.extend_keywords(peer_id, half.targets())
        tick = self.clock + self.sim_config.latency_ticks
        self._emit(tick, "publish", peer_id, SUPER_PEER_ID, half.to_dict())
        self._advance_to(tick)
        return half

    def request_candidates(self, requester_id: str, query_keywords: Iterable[str]) -> list[str]:
        """Registry lookup only; no messages are exchanged."""
        return self.super_peer.candidates(requester_id, query_keywords)

    def run_request_round(
        self, requester_id: str, query_keywords: Iterable[str]
    ) -> list[PeerMatchResult]:
        """One full discovery round, replies sorted by descending overlap.

        The requester asks the super peer for candidates, broadcasts its
        half agreement to each of them, and every candidate that has
        published runs the comparison locally and replies directly.
        Either leg of the broadcast/reply exchange may be dropped.
        """
        query_keywords = list(query_keywords)
        requester = self._require_live(requester_id, "requester")
        if requester.half_agreement is None:
            raise ValidationError(f"requester {requester_id} has not published")
        latency = self.sim_config.latency_ticks
        t0 = self.clock
        self._emit(t0 + latency, "requestCandidates", requester_id, SUPER_PEER_ID,
                   {"keywords": sorted({kw.lower() for kw in query_keywords})})
        candidates = self.super_peer.candidates(requester_id, query_keywords)
        self._emit(t0 + 2 * latency, "candidateList", SUPER_PEER_ID, requester_id,
                   {"candidates": candidates})
        if not candidates:
            self._advance_to(t0 + 2 * latency)
            return []
        replies: list[tuple[str, PeerMatchResult]] = []
        for candidate_id in candidates:
            if self._dropped():
                continue  # broadcast lost in transit
            event = self._emit(
                t0 + 3 * latency, "halfAgreementBroadcast", requester_id, candidate_id,
                requester.half_agreement.to_dict(),
            )
            self._deliver_to_peer(event)
            candidate = self.peers[candidate_id]
            if candidate.half_agreement is None:
                continue  # nothing to compare against yet
            result = compare_half_agreements(
                requester.half_agreement, candidate.half_agreement, self.phase_two_config
            )
            if self._dropped():
                continue  # reply lost in transit
            replies.append((candidate_id, result))
        collected: list[PeerMatchResult] = []
        for candidate_id, result in sorted(replies, key=lambda item: item[0]):
            event = self._emit(
                t0 + 4 * latency, "matchResult", candidate_id, requester_id,
                result.to_dict(),
            )
            self._deliver_to_peer(event)
            self.match_results.setdefault(requester_id, {})[candidate_id] = result
            collected.append(result)
        self._advance_to(t0 + 4 * latency)
        collected.sort(key=lambda r: -r.overlap_score)  # stable: arrival order kept on ties
        return collected

    def bind(self, requester_id: str, provider_id: str) -> FullAgreement:
        """Compose the two half agreements; the provider replies directly."""
        requester = self._require_live(requester_id, "requester")
        provider = self._require_live(provider_id, "provider")
        if requester.half_agreement is None:
            raise ValidationError(f"requester {requester_id} has not published")
        if provider.half_agreement is None:
            raise ValidationError(f"provider {provider_id} has not published")
        prior = self.match_results.get(requester_id, {}).get(provider_id)
        if prior is None:
            raise ValidationError(
                f"no match result from {provider_id} to {requester_id}; run a request first"
            )
        if prior.verdict == VERDICT_NON_SIMILAR:
            raise ValidationError(
                f"provider {provider_id} was judged nonSimilar; bind refused"
            )
        latency = self.sim_config.latency_ticks
        t0 = self.clock
        event = self._emit(t0 + latency, "bindRequest", requester_id, provider_id,
                           requester.half_agreement.to_dict())
        self._deliver_to_peer(event)
        full = compose(requester.half_agreement, provider.half_agreement)
        event = self._emit(t0 + 2 * latency, "fullAgreement", provider_id, requester_id,
                           full.to_dict())
        self._deliver_to_peer(event)
        self._advance_to(t0 + 2 * latency)
        return full

    def leave(self, peer_id: str) -> None:
        self._require_live(peer_id, "peer")
        tick = self.clock + self.sim_config.latency_ticks
        self._emit(tick, "peerLeave", peer_id, SUPER_PEER_ID, {})
        self.super_peer.mark_left(peer_id)
        self._advance_to(tick)

    def advance(self, ticks: int) -> None:
        if ticks < 0:
            raise ValidationError("cannot advance by a negative tick count")
        self._advance_to(self.clock + ticks)


# -- scenario scripts --------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ScenarioCommand:
    line: int
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class ScenarioRun:
    events: tuple[SimEvent, ...]
    world: World
    completed: bool
    stop_reason: str | None = None

    def to_jsonl(self) -> str:
        return events_to_jsonl(self.events)


_ARITY = {
    "register": (1, None),
    "load": (2, 2),
    "publish": (1, 1),
    "request": (1, None),
    "bind": (2, 2),
    "leave": (1, 1),
    "tick": (1, 1),
}


def parse_scenario(text: str) -> list[ScenarioCommand]:
    commands: list[ScenarioCommand] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        name, args = parts[0], parts[1:]
        if name not in _ARITY:
            raise ParseError(f"unknown scenario command: {name!r}", line=line_no)
        low, high = _ARITY[name]
        if len(args) < low or (high is not None and len(args) > high):
            raise ParseError(
                f"command {name!r} takes "
                + (f"at least {low}" if high is None else f"{low}" if low == high else f"{low}..{high}")
                + f" arguments, got {len(args)}",
                line=line_no,
            )
        if name == "tick":
            try:
                value = int(args[0])
            except ValueError:
                raise ParseError(f"tick count must be an integer, got {args[0]!r}", line=line_no)
            if value < 0:
                raise ParseError("tick count must be non-negative", line=line_no)
        commands.append(ScenarioCommand(line=line_no, name=name, args=tuple(args)))
    return commands


def run_scenario(
    script: str,
    *,
    taxonomy: Taxonomy,
    common_ontology: Schema,
    base_dir: str | Path = ".",
    match_config: MatchConfig = DEFAULT_CONFIG,
    phase_two_config: PhaseTwoConfig = DEFAULT_PHASE_TWO,
    sim_config: SimConfig = SimConfig(),
) -> ScenarioRun:
    """Execute a scenario script and return the event trace plus final world.

    Schema paths in ``load`` commands resolve relative to ``base_dir``.
    A run that exhausts ``max_ticks`` is reported, not raised: the
    partial trace comes back with ``completed=False``.
    """
    commands = parse_scenario(script)
    world = World(
        taxonomy,
        common_ontology,
        match_config=match_config,
        phase_two_config=phase_two_config,
        sim_config=sim_config,
    )
    base = Path(base_dir)
    for command in commands:
        try:
            if command.name == "register":
                world.register(command.args[0], command.args[1:])
            elif command.name == "load":
                world.load_peer_schema(command.args[0], load_schema(base / command.args[1]))
            elif command.name == "publish":
                world.publish(command.args[0])
            elif command.name == "request":
                world.run_request_round(command.args[0], command.args[1:])
            elif command.name == "bind":
                world.bind(command.args[0], command.args[1])
            elif command.name == "leave":
                world.leave(command.args[0])
            elif command.name == "tick":
                world.advance(int(command.args[0]))
        except TickLimitExceeded as exc:
            return ScenarioRun(
                events=tuple(world.events),
                world=world,
                completed=False,
                stop_reason=f"line {command.line}: {exc}",
            )
        except ValidationError as exc:
            raise ValidationError(f"line {command.line}: {exc}") from exc
    return ScenarioRun(events=tuple(world.events), world=world, completed=True)
