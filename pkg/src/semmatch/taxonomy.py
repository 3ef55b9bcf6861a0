"""Lexical taxonomy with hypernym-graph similarity measures.

A :class:`Taxonomy` is an immutable collection of synsets (groups of
synonymous word forms) arranged in an acyclic hypernym graph, possibly
with several roots. It answers sense lookups and computes Wu-Palmer and
path similarity between senses, with a max-over-senses rule for whole
words.

Depth convention: a synset without hypernyms (a root) has depth 1, and
every other synset is one deeper than its shallowest hypernym. This
makes similarity of a sense with itself exactly 1 for both measures.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import IO, Iterable, Mapping

from .errors import ParseError, UnknownRefError, ValidationError

WUP = "wup"
PATH = "path"
MEASURES = (WUP, PATH)


@dataclass(frozen=True, slots=True)
class Synset:
    """One sense: an id, its word forms, and ids of its direct hypernyms."""

    id: str
    lemmas: tuple[str, ...]
    hypernyms: tuple[str, ...] = ()
    gloss: str = ""


@dataclass(frozen=True, slots=True)
class SenseSimilarity:
    """A similarity value in [0, 1] tagged with the measure that produced it."""

    value: float
    measure: str


class Taxonomy:
    """Immutable synset store with depth-indexed similarity queries.

    Construction validates every invariant (unique ids, resolvable and
    acyclic hypernyms, well-formed lemmas) and precomputes depths. All
    queries are pure reads, so a Taxonomy can be shared freely between
    threads or tasks.
    """

    def __init__(self, synsets: Iterable[Synset]):
        by_id: dict[str, Synset] = {}
        for syn in synsets:
            if syn.id in by_id:
                raise ValidationError(f"duplicate synset id: {syn.id}")
            _check_lemmas(syn)
            by_id[syn.id] = syn
        if not by_id:
            raise ValidationError("taxonomy has no synsets")
        for syn in by_id.values():
            for hid in syn.hypernyms:
                if hid not in by_id:
                    raise ValidationError(
                        f"synset {syn.id} has dangling hypernym id: {hid}"
                    )
        self._synsets = by_id
        self._depths = _compute_depths(by_id)
        self._max_depth = max(self._depths.values())
        lemma_index: dict[str, list[str]] = {}
        for sid, syn in by_id.items():
            for lemma in syn.lemmas:
                lemma_index.setdefault(lemma, []).append(sid)
        self._lemma_index = {lemma: tuple(ids) for lemma, ids in lemma_index.items()}
        self._ancestor_cache: dict[str, dict[str, int]] = {}

    @property
    def synsets(self) -> Mapping[str, Synset]:
        return MappingProxyType(self._synsets)

    @property
    def lemma_index(self) -> Mapping[str, tuple[str, ...]]:
        return MappingProxyType(self._lemma_index)

    @property
    def max_depth(self) -> int:
        return self._max_depth

    def depth(self, synset_id: str) -> int:
        self._resolve(synset_id)
        return self._depths[synset_id]

    def senses_of(self, lemma: str) -> list[str]:
        """Ids of all synsets containing the lemma; empty when out of vocabulary."""
        return list(self._lemma_index.get(lemma.lower(), ()))

    def wup_similarity(self, a: str, b: str) -> SenseSimilarity:
        """Wu-Palmer similarity: 2 * depth(lcs) / (depth(a) + depth(b)).

        The least common subsumer is the deepest shared ancestor no
        deeper than either argument (ties broken by smallest synset id).
        Returns 0 when the two senses share no ancestor.
        """
        self._resolve(a)
        self._resolve(b)
        common = self._common_subsumers(a, b)
        if not common:
            return SenseSimilarity(0.0, WUP)
        cap = min(self._depths[a], self._depths[b])
        eligible = [c for c in common if self._depths[c] <= cap]
        lcs = min(eligible, key=lambda c: (-self._depths[c], c))
        value = 2.0 * self._depths[lcs] / (self._depths[a] + self._depths[b])
        return SenseSimilarity(value, WUP)

    def path_similarity(self, a: str, b: str) -> SenseSimilarity:
        """Path similarity: 1 / (1 + shortest hypernym path between a and b).

        The path runs upward from both senses to a shared ancestor;
        returns 0 when no shared ancestor exists.
        """
        self._resolve(a)
        self._resolve(b)
        up_a = self._ancestor_distances(a)
        up_b = self._ancestor_distances(b)
        common = set(up_a) & set(up_b)
        if not common:
            return SenseSimilarity(0.0, PATH)
        dist = min(up_a[c] + up_b[c] for c in common)
        return SenseSimilarity(1.0 / (1.0 + dist), PATH)

    def sense_similarity(self, a: str, b: str, measure: str = WUP) -> SenseSimilarity:
        if measure == WUP:
            return self.wup_similarity(a, b)
        if measure == PATH:
            return self.path_similarity(a, b)
        raise ValidationError(f"unknown similarity measure: {measure!r}")

    def lemma_similarity(
        self,
        word1: str,
        word2: str,
        measure: str = WUP,
        *,
        edit_fallback: bool = False,
    ) -> float:
        """Best similarity over all sense pairs of the two words.

        When either word is out of vocabulary the taxonomy cannot help:
        the score falls back to exact case-insensitive string equality,
        or to a normalized edit-distance score when ``edit_fallback`` is
        set.
        """
        if measure not in MEASURES:
            raise ValidationError(f"unknown similarity measure: {measure!r}")
        senses1 = self.senses_of(word1)
        senses2 = self.senses_of(word2)
        if senses1 and senses2:
            return max(
                self.sense_similarity(s1, s2, measure).value
                for s1 in senses1
                for s2 in senses2
            )
        if word1.lower() == word2.lower():
            return 1.0
        if edit_fallback:
            return _edit_similarity(word1.lower(), word2.lower())
        return 0.0

    def _resolve(self, synset_id: str) -> Synset:
        try:
            return self._synsets[synset_id]
        except KeyError:
            raise UnknownRefError(f"unknown synset id: {synset_id}") from None

    def _ancestor_distances(self, synset_id: str) -> dict[str, int]:
        """Minimum hypernym-edge distance to every subsumer, self included."""
        cached = self._ancestor_cache.get(synset_id)
        if cached is not None:
            return cached
        dist = {synset_id: 0}
        frontier = deque([synset_id])
        while frontier:
            cur = frontier.popleft()
            nxt = dist[cur] + 1
            for hid in self._synsets[cur].hypernyms:
                if hid not in dist or nxt < dist[hid]:
                    dist[hid] = nxt
                    frontier.append(hid)
        self._ancestor_cache[synset_id] = dist
        return dist

    def _common_subsumers(self, a: str, b: str) -> set[str]:
        return set(self._ancestor_distances(a)) & set(self._ancestor_distances(b))


def _check_lemmas(syn: Synset) -> None:
    if not syn.lemmas:
        raise ValidationError(f"synset {syn.id} has no lemmas")
    for lemma in syn.lemmas:
        if not lemma:
            raise ValidationError(f"synset {syn.id} has an empty lemma")
        if lemma != lemma.lower():
            raise ValidationError(f"synset {syn.id}: lemma {lemma!r} is not lowercase")
        if any(ch.isspace() for ch in lemma):
            raise ValidationError(
                f"synset {syn.id}: lemma {lemma!r} contains whitespace"
                " (multiword lemmas use underscores)"
            )


def _compute_depths(by_id: dict[str, Synset]) -> dict[str, int]:
    # Kahn pass over the hypernym DAG: doubles as the cycle check.
    children: dict[str, list[str]] = {sid: [] for sid in by_id}
    pending: dict[str, int] = {}
    queue: deque[str] = deque()
    for sid, syn in by_id.items():
        pending[sid] = len(syn.hypernyms)
        if not syn.hypernyms:
            queue.append(sid)
        for hid in syn.hypernyms:
            children[hid].append(sid)
    depths: dict[str, int] = {}
    while queue:
        sid = queue.popleft()
        syn = by_id[sid]
        if syn.hypernyms:
            depths[sid] = 1 + min(depths[hid] for hid in syn.hypernyms)
        else:
            depths[sid] = 1
        for kid in children[sid]:
            pending[kid] -= 1
            if pending[kid] == 0:
                queue.append(kid)
    if len(depths) != len(by_id):
        stuck = sorted(set(by_id) - set(depths))
        raise ValidationError(
            "hypernym cycle detected involving: " + ", ".join(stuck[:5])
        )
    return depths


def _edit_similarity(a: str, b: str) -> float:
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    prev = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, 1):
        cur = [i]
        for j, ch_b in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ch_a != ch_b)))
        prev = cur
    return 1.0 - prev[-1] / max(len(a), len(b))


def loads_taxonomy(text: str) -> Taxonomy:
    """Parse the line-based taxonomy format.

    Grammar, one synset per line::

        synset <id> | <lemma>[,<lemma>...] | <hypernym-id>[,...] | <gloss>

    The hypernym list is empty for roots, the gloss field is optional,
    ``#`` starts a comment line, and blank lines are ignored.
    """
    synsets: list[Synset] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [part.strip() for part in line.split("|")]
        head = parts[0].split()
        if len(head) != 2 or head[0] != "synset":
            raise ParseError(
                "expected 'synset <id> | lemmas | hypernyms | gloss'", line=line_no
            )
        if len(parts) not in (3, 4):
            raise ParseError(
                f"expected 3 or 4 '|'-separated fields, got {len(parts)}", line=line_no
            )
        lemmas = tuple(t.strip().lower() for t in parts[1].split(",") if t.strip())
        if not lemmas:
            raise ParseError("synset needs at least one lemma", line=line_no)
        for lemma in lemmas:
            if any(ch.isspace() for ch in lemma):
                raise ParseError(
                    f"lemma {lemma!r} contains whitespace (use underscores)",
                    line=line_no,
                )
        hypernyms = tuple(t.strip() for t in parts[2].split(",") if t.strip())
        gloss = parts[3] if len(parts) == 4 else ""
        synsets.append(Synset(head[1], lemmas, hypernyms, gloss))
    return Taxonomy(synsets)


def load_taxonomy(source: str | Path | IO[str] | IO[bytes]) -> Taxonomy:
    """Load a taxonomy from a file path or an open stream."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    return loads_taxonomy(text)
