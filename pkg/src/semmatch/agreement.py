"""Phase-2 matchmaking: compare and compose half agreements.

Two peers that mapped their schemas to the same common ontology can be
related through it: comparing their half agreements scores how much of
the requester's mapped vocabulary the provider covers, and composing
them chains each shared ontology ref into a direct peer-to-peer link.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .matcher import HalfAgreement

VERDICT_EXACT_AGREE = "exactAgree"
VERDICT_SIMILAR = "similar"
VERDICT_NON_SIMILAR = "nonSimilar"


@dataclass(frozen=True, slots=True)
class PhaseTwoConfig:
    """Floors for the peer-level verdict on the overlap score."""

    exact_floor: float = 0.9
    similar_floor: float = 0.5

    def __post_init__(self):
        for name in ("exact_floor", "similar_floor"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {value}")


DEFAULT_PHASE_TWO = PhaseTwoConfig()


@dataclass(frozen=True, slots=True)
class PeerMatchResult:
    """Requester-relative relevance of one provider peer."""

    requester_id: str
    provider_id: str
    overlap_score: float
    verdict: str
    shared_targets: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "requesterId": self.requester_id,
            "providerId": self.provider_id,
            "overlapScore": self.overlap_score,
            "verdict": self.verdict,
            "sharedTargets": list(self.shared_targets),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PeerMatchResult":
        return cls(
            requester_id=str(doc["requesterId"]),
            provider_id=str(doc["providerId"]),
            overlap_score=float(doc["overlapScore"]),
            verdict=str(doc["verdict"]),
            shared_targets=tuple(str(t) for t in doc["sharedTargets"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True, slots=True)
class MappingLink:
    """One composed correspondence between two peer schemas."""

    source_ref: str
    target_ref: str
    confidence: float
    via: str

    def to_dict(self) -> dict:
        return {
            "sourceRef": self.source_ref,
            "targetRef": self.target_ref,
            "confidence": self.confidence,
            "via": self.via,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MappingLink":
        return cls(
            source_ref=str(doc["sourceRef"]),
            target_ref=str(doc["targetRef"]),
            confidence=float(doc["confidence"]),
            via=str(doc["via"]),
        )


@dataclass(frozen=True, slots=True)
class FullAgreement:
    """Peer-to-peer mapping produced at bind by composing two half agreements."""

    requester_id: str
    provider_id: str
    links: tuple[MappingLink, ...]

    def to_dict(self) -> dict:
        return {
            "requesterId": self.requester_id,
            "providerId": self.provider_id,
            "links": [link.to_dict() for link in self.links],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "FullAgreement":
        for key in ("requesterId", "providerId", "links"):
            if key not in doc:
                raise ParseError(f"full agreement document is missing {key!r}")
        return cls(
            requester_id=str(doc["requesterId"]),
            provider_id=str(doc["providerId"]),
            links=tuple(MappingLink.from_dict(link) for link in doc["links"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "FullAgreement":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", line=exc.lineno) from exc
        if not isinstance(doc, dict):
            raise ParseError("full agreement document must be a JSON object")
        return cls.from_dict(doc)


def _require_same_ontology(req: HalfAgreement, prov: HalfAgreement) -> None:
    if req.common_ontology_id != prov.common_ontology_id:
        raise ValidationError(
            "half agreements target different common ontologies: "
            f"{req.common_ontology_id!r} vs {prov.common_ontology_id!r}"
        )


def compare_half_agreements(
    req: HalfAgreement,
    prov: HalfAgreement,
    config: PhaseTwoConfig = DEFAULT_PHASE_TWO,
) -> PeerMatchResult:
    """Score how much of the requester's mapping the provider covers.

    The overlap score sums min(requester, provider) confidence over the
    shared ontology targets and divides by the requester's total unit
    confidence, so it reads as "how much of what I mapped does this
    provider also map". exactAgree additionally requires full coverage
    of the requester's targets.
    """
    _require_same_ontology(req, prov)
    req_best = req.best_unit_by_target()
    prov_best = prov.best_unit_by_target()
    shared = tuple(sorted(set(req_best) & set(prov_best)))
    denominator = sum(unit.confidence for unit in req.units)
    numerator = sum(
        min(req_best[t].confidence, prov_best[t].confidence) for t in shared
    )
    overlap = numerator / denominator if denominator > 0 else 0.0
    covers_all = set(req_best) <= set(prov_best)
    if covers_all and overlap >= config.exact_floor:
        verdict = VERDICT_EXACT_AGREE
    elif overlap >= config.similar_floor:
        verdict = VERDICT_SIMILAR
    else:
        verdict = VERDICT_NON_SIMILAR
    return PeerMatchResult(
        requester_id=req.peer_id,
        provider_id=prov.peer_id,
        overlap_score=overlap,
        verdict=verdict,
        shared_targets=shared,
    )


def compose(req: HalfAgreement, prov: HalfAgreement) -> FullAgreement:
    """Chain the two mappings through their shared ontology refs.

    Every ontology target mapped on both sides yields a link from the
    requester's source ref to the provider's source ref, at the minimum
    of the two unit confidences. When several units share a target
    (possible only without one-to-one), they pair off rank by rank in
    descending confidence.
    """
    _require_same_ontology(req, prov)
    by_target_req: dict[str, list] = {}
    for unit in req.units:  # canonical order keeps each list confidence-sorted
        by_target_req.setdefault(unit.target_ref, []).append(unit)
    links: list[MappingLink] = []
    by_target_prov: dict[str, list] = {}
    for unit in prov.units:
        by_target_prov.setdefault(unit.target_ref, []).append(unit)
    for target in sorted(set(by_target_req) & set(by_target_prov)):
        for req_unit, prov_unit in zip(by_target_req[target], by_target_prov[target]):
            links.append(
                MappingLink(
                    source_ref=req_unit.source_ref,
                    target_ref=prov_unit.source_ref,
                    confidence=min(req_unit.confidence, prov_unit.confidence),
                    via=target,
                )
            )
    links.sort(key=lambda l: (-l.confidence, l.source_ref, l.target_ref))
    return FullAgreement(
        requester_id=req.peer_id,
        provider_id=prov.peer_id,
        links=tuple(links),
    )
