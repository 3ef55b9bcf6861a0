"""Phase-1 matchmaking: score endpoint pairs against a common ontology.

Every endpoint pair of matching granularity (concept to concept,
qualified attribute to qualified attribute) gets three scores:

* label similarity, a taxonomy-backed token matcher over the labels;
* external similarity, a soft-Jaccard overlap of superclass label sets;
* internal similarity, the same overlap over direct attribute names.

A weighted blend of the three is the pair's confidence, thresholds turn
the confidence into an exact / similar / nonSimilar verdict, and the
surviving pairs form a peer's half agreement with the ontology.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .errors import ParseError, ValidationError
from .schema import KIND_COMMON, KIND_EXPORT, Schema
from .taxonomy import MEASURES, WUP, Taxonomy

VERDICT_EXACT = "exact"
VERDICT_SIMILAR = "similar"
VERDICT_NON_SIMILAR = "nonSimilar"
VERDICTS = (VERDICT_EXACT, VERDICT_SIMILAR, VERDICT_NON_SIMILAR)

_CAMEL_BOUNDARY = re.compile(
    r"(?<=[a-z0-9])(?=[A-Z])"
    r"|(?<=[A-Z])(?=[A-Z][a-z])"
    r"|(?<=[A-Za-z])(?=[0-9])"
    r"|(?<=[0-9])(?=[A-Za-z])"
)
_NON_ALNUM = re.compile(r"[^0-9A-Za-z]+")


@dataclass(frozen=True, slots=True)
class MatchConfig:
    """Thresholds and weights for phase-1 classification.

    The zero-argument configuration is the reference setup: label
    threshold 0.9, external threshold 0.49, confidence threshold 0.75,
    and a 0.7 / 0.3 / 0.0 blend of label, external, and internal scores.

    ``flat_neutral`` shifts the external weight onto the label score for
    pairs whose superclass sets are empty (depth-1 schemas); by default
    such pairs keep external score 0 and their confidence is capped by
    the label weight.
    """

    label_threshold: float = 0.9
    external_threshold: float = 0.49
    confidence_threshold: float = 0.75
    label_weight: float = 0.7
    external_weight: float = 0.3
    internal_weight: float = 0.0
    measure: str = WUP
    one_to_one: bool = True
    flat_neutral: bool = False

    def __post_init__(self):
        for name in ("label_threshold", "external_threshold", "confidence_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {value}")
        weights = (self.label_weight, self.external_weight, self.internal_weight)
        if any(w < 0 for w in weights):
            raise ValidationError("weights must be non-negative")
        if not math.isclose(sum(weights), 1.0, abs_tol=1e-9):
            raise ValidationError(f"weights must sum to 1, got {sum(weights)}")
        if self.measure not in MEASURES:
            raise ValidationError(f"unknown similarity measure: {self.measure!r}")

    def to_dict(self) -> dict:
        return {
            "labelThreshold": self.label_threshold,
            "externalThreshold": self.external_threshold,
            "confidenceThreshold": self.confidence_threshold,
            "labelWeight": self.label_weight,
            "externalWeight": self.external_weight,
            "internalWeight": self.internal_weight,
            "measure": self.measure,
            "oneToOne": self.one_to_one,
            "flatNeutral": self.flat_neutral,
        }

    @classmethod
    def from_dict(cls, doc: dict, base: "MatchConfig | None" = None) -> "MatchConfig":
        """Build a config from wire-format keys, optionally overriding ``base``.

        Threshold values read from files are clamped into [0, 1]; the
        constructor itself stays strict.
        """
        key_map = {
            "labelThreshold": "label_threshold",
            "externalThreshold": "external_threshold",
            "confidenceThreshold": "confidence_threshold",
            "labelWeight": "label_weight",
            "externalWeight": "external_weight",
            "internalWeight": "internal_weight",
            "measure": "measure",
            "oneToOne": "one_to_one",
            "flatNeutral": "flat_neutral",
        }
        clamped = ("label_threshold", "external_threshold", "confidence_threshold")
        overrides = {}
        for key, value in doc.items():
            if key not in key_map:
                raise ParseError(f"unknown match config key: {key!r}")
            field_name = key_map[key]
            if field_name in clamped:
                value = min(1.0, max(0.0, float(value)))
            overrides[field_name] = value
        if base is None:
            return cls(**overrides)
        return replace(base, **overrides)


DEFAULT_CONFIG = MatchConfig()


@dataclass(frozen=True, slots=True)
class AgreementUnit:
    """One scored, classified endpoint correspondence."""

    source_ref: str
    target_ref: str
    label_score: float
    external_score: float
    internal_score: float
    confidence: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "sourceRef": self.source_ref,
            "targetRef": self.target_ref,
            "labelScore": self.label_score,
            "externalScore": self.external_score,
            "internalScore": self.internal_score,
            "confidence": self.confidence,
            "verdict": self.verdict,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AgreementUnit":
        unit = cls(
            source_ref=str(doc["sourceRef"]),
            target_ref=str(doc["targetRef"]),
            label_score=float(doc["labelScore"]),
            external_score=float(doc["externalScore"]),
            internal_score=float(doc["internalScore"]),
            confidence=float(doc["confidence"]),
            verdict=str(doc["verdict"]),
        )
        if unit.verdict not in VERDICTS:
            raise ParseError(f"unknown verdict: {unit.verdict!r}")
        return unit


_UNIT_ORDER: Callable[[AgreementUnit], tuple] = lambda u: (
    -u.confidence,
    u.source_ref,
    u.target_ref,
)


@dataclass(frozen=True, slots=True)
class HalfAgreement:
    """A peer's mapping from its export schema to the common ontology."""

    peer_id: str
    schema_id: str
    common_ontology_id: str
    units: tuple[AgreementUnit, ...]
    config: MatchConfig = field(default_factory=MatchConfig)

    def __post_init__(self):
        ordered = tuple(sorted(self.units, key=_UNIT_ORDER))
        if ordered != self.units:
            raise ValidationError(
                "units must be sorted by descending confidence, sourceRef, targetRef"
            )
        for unit in self.units:
            if unit.verdict == VERDICT_NON_SIMILAR:
                raise ValidationError("half agreements carry no nonSimilar units")
        if self.config.one_to_one:
            sources = [u.source_ref for u in self.units]
            targets = [u.target_ref for u in self.units]
            if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
                raise ValidationError("one-to-one half agreement has duplicate refs")

    def targets(self) -> list[str]:
        return [unit.target_ref for unit in self.units]

    def best_unit_by_target(self) -> dict[str, AgreementUnit]:
        best: dict[str, AgreementUnit] = {}
        for unit in self.units:  # canonical order: first hit has max confidence
            best.setdefault(unit.target_ref, unit)
        return best

    def to_dict(self) -> dict:
        return {
            "peerId": self.peer_id,
            "schemaId": self.schema_id,
            "commonOntologyId": self.common_ontology_id,
            "config": self.config.to_dict(),
            "units": [unit.to_dict() for unit in self.units],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "HalfAgreement":
        for key in ("peerId", "schemaId", "commonOntologyId", "config", "units"):
            if key not in doc:
                raise ParseError(f"half agreement document is missing {key!r}")
        return cls(
            peer_id=str(doc["peerId"]),
            schema_id=str(doc["schemaId"]),
            common_ontology_id=str(doc["commonOntologyId"]),
            units=tuple(AgreementUnit.from_dict(u) for u in doc["units"]),
            config=MatchConfig.from_dict(doc["config"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "HalfAgreement":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", line=exc.lineno) from exc
        if not isinstance(doc, dict):
            raise ParseError("half agreement document must be a JSON object")
        return cls.from_dict(doc)


def tokenize_label(label: str) -> list[str]:
    """Split a label on delimiters, camel-case and digit boundaries.

    Tokens come back lowercase with empties dropped; digit runs stay
    separate tokens ("PO2" -> ["po", "2"]).
    """
    tokens: list[str] = []
    for chunk in _NON_ALNUM.split(label):
        if not chunk:
            continue
        for piece in _CAMEL_BOUNDARY.split(chunk):
            if piece:
                tokens.append(piece.lower())
    return tokens


# Exact assignment is affordable up to this many items on the smaller
# side (2^n dynamic-programming states); larger inputs fall back to the
# greedy sweep, which may undershoot the optimum.
_EXACT_ASSIGNMENT_BOUND = 8


def _assignment_total_exact(
    small: Sequence[str],
    large: Sequence[str],
    similarity: Callable[[str, str], float],
) -> float:
    """Maximum total similarity over injective small-to-large pairings."""
    full = 1 << len(small)
    dp = [0.0] * full
    for item in large:
        sims = [similarity(s, item) for s in small]
        prev = dp
        dp = prev[:]  # skipping this large item is always allowed
        for mask in range(full):
            base = prev[mask]
            for idx, value in enumerate(sims):
                bit = 1 << idx
                if not mask & bit:
                    cand = base + value
                    if cand > dp[mask | bit]:
                        dp[mask | bit] = cand
    return max(dp)


def _assignment_total_greedy(
    small: Sequence[str],
    large: Sequence[str],
    similarity: Callable[[str, str], float],
) -> float:
    """Greedy sweep: repeatedly take the best remaining pair."""
    scored = []
    for i, a in enumerate(small):
        for j, b in enumerate(large):
            key = (a, b) if a <= b else (b, a)
            scored.append((-similarity(a, b), key, i, j))
    scored.sort()
    used_small: set[int] = set()
    used_large: set[int] = set()
    total = 0.0
    for neg_score, _key, i, j in scored:
        if i in used_small or j in used_large:
            continue
        used_small.add(i)
        used_large.add(j)
        total += -neg_score
        if len(used_small) == len(small):
            break
    return total


def _soft_overlap(
    items_a: Sequence[str],
    items_b: Sequence[str],
    similarity: Callable[[str, str], float],
) -> float:
    """Best-pair overlap of two item sequences, normalized by the larger side.

    Items pair off injectively to maximize summed similarity; unmatched
    items contribute 0. The pairing is computed exactly for the small
    inputs that occur in practice (labels, superclass sets) and greedily
    beyond :data:`_EXACT_ASSIGNMENT_BOUND`. Arguments are canonically
    ordered first, so the result is bit-identical under swapping.
    """
    if not items_a and not items_b:
        return 1.0
    if not items_a or not items_b:
        return 0.0
    a = list(items_a)
    b = list(items_b)
    small, large = (a, b) if (len(a), a) <= (len(b), b) else (b, a)
    if len(small) <= _EXACT_ASSIGNMENT_BOUND:
        total = _assignment_total_exact(small, large, similarity)
    else:
        total = _assignment_total_greedy(small, large, similarity)
    return total / max(len(a), len(b))


def label_similarity(
    tax: Taxonomy,
    label1: str,
    label2: str,
    measure: str = WUP,
    *,
    _cache: dict | None = None,
) -> float:
    """Token-level label similarity in [0, 1], symmetric.

    Both labels are tokenized, tokens pair off to maximize total lemma
    similarity, and the pair total is divided by the larger token count.
    """
    tokens1 = tokenize_label(label1)
    tokens2 = tokenize_label(label2)

    if _cache is None:
        word_sim = lambda w1, w2: tax.lemma_similarity(w1, w2, measure)
    else:

        def word_sim(w1: str, w2: str) -> float:
            key = (w1, w2) if w1 <= w2 else (w2, w1)
            hit = _cache.get(key)
            if hit is None:
                hit = tax.lemma_similarity(w1, w2, measure)
                _cache[key] = hit
            return hit

    return _soft_overlap(tokens1, tokens2, word_sim)


def external_similarity(
    tax: Taxonomy,
    schema1: Schema,
    ref1: str,
    schema2: Schema,
    ref2: str,
    measure: str = WUP,
    *,
    _cache: dict | None = None,
) -> float:
    """Soft-Jaccard overlap of the two endpoints' superclass label sets.

    Zero when either set is empty, which is the case for root concepts
    and for every concept of a depth-1 schema.
    """
    labels1 = sorted(schema1.ancestor_labels(ref1))
    labels2 = sorted(schema2.ancestor_labels(ref2))
    if not labels1 or not labels2:
        return 0.0
    sim = lambda a, b: label_similarity(tax, a, b, measure, _cache=_cache)
    return _soft_overlap(labels1, labels2, sim)


def internal_similarity(
    tax: Taxonomy,
    schema1: Schema,
    ref1: str,
    schema2: Schema,
    ref2: str,
    measure: str = WUP,
    *,
    _cache: dict | None = None,
) -> float:
    """Soft-Jaccard overlap of direct attribute-name sets.

    Defined for concept refs only; attribute refs and attribute-free
    concepts score 0.
    """
    concept1, attr1 = schema1.resolve_ref(ref1)
    concept2, attr2 = schema2.resolve_ref(ref2)
    if attr1 is not None or attr2 is not None:
        return 0.0
    names1 = sorted({attr.name for attr in concept1.attributes})
    names2 = sorted({attr.name for attr in concept2.attributes})
    if not names1 or not names2:
        return 0.0
    sim = lambda a, b: label_similarity(tax, a, b, measure, _cache=_cache)
    return _soft_overlap(names1, names2, sim)


def classify(
    label_score: float,
    external_score: float,
    internal_score: float,
    config: MatchConfig = DEFAULT_CONFIG,
    *,
    external_defined: bool = True,
) -> tuple[float, str]:
    """Blend the three scores and classify the pair.

    Returns (confidence, verdict). A pair is exact only when the label
    score, the external score, and the blended confidence all clear
    their thresholds; it is similar when only the confidence does.
    """
    label_weight = config.label_weight
    external_weight = config.external_weight
    if config.flat_neutral and not external_defined:
        label_weight += external_weight
        external_weight = 0.0
    confidence = (
        label_weight * label_score
        + external_weight * external_score
        + config.internal_weight * internal_score
    )
    if (
        label_score >= config.label_threshold
        and external_score >= config.external_threshold
        and confidence >= config.confidence_threshold
    ):
        return confidence, VERDICT_EXACT
    if confidence >= config.confidence_threshold:
        return confidence, VERDICT_SIMILAR
    return confidence, VERDICT_NON_SIMILAR


def score_endpoints(
    tax: Taxonomy,
    export: Schema,
    source_ref: str,
    common_ontology: Schema,
    target_ref: str,
    config: MatchConfig = DEFAULT_CONFIG,
    *,
    _cache: dict | None = None,
) -> AgreementUnit:
    """Score and classify one candidate endpoint pair."""
    concept1, attr1 = export.resolve_ref(source_ref)
    concept2, attr2 = common_ontology.resolve_ref(target_ref)
    if (attr1 is None) != (attr2 is None):
        raise ValidationError(
            f"endpoint granularity mismatch: {source_ref!r} vs {target_ref!r}"
        )
    label1 = attr1.name if attr1 is not None else concept1.label
    label2 = attr2.name if attr2 is not None else concept2.label
    label_score = label_similarity(tax, label1, label2, config.measure, _cache=_cache)
    external_defined = bool(export.ancestor_labels(source_ref)) and bool(
        common_ontology.ancestor_labels(target_ref)
    )
    external_score = external_similarity(
        tax, export, source_ref, common_ontology, target_ref, config.measure, _cache=_cache
    )
    internal_score = internal_similarity(
        tax, export, source_ref, common_ontology, target_ref, config.measure, _cache=_cache
    )
    confidence, verdict = classify(
        label_score,
        external_score,
        internal_score,
        config,
        external_defined=external_defined,
    )
    return AgreementUnit(
        source_ref=source_ref,
        target_ref=target_ref,
        label_score=label_score,
        external_score=external_score,
        internal_score=internal_score,
        confidence=confidence,
        verdict=verdict,
    )


def build_half_agreement(
    tax: Taxonomy,
    export: Schema,
    common_ontology: Schema,
    config: MatchConfig = DEFAULT_CONFIG,
    *,
    peer_id: str | None = None,
) -> HalfAgreement:
    """Score every same-granularity endpoint pair and keep the agreeing ones.

    nonSimilar pairs are dropped. With ``one_to_one`` set (the default)
    a greedy pass by descending confidence, ties broken on
    (sourceRef, targetRef), keeps at most one unit per source and per
    target. The result is deterministic for identical inputs.
    """
    if export.kind != KIND_EXPORT:
        raise ValidationError(f"expected an export schema, got kind {export.kind!r}")
    if common_ontology.kind != KIND_COMMON:
        raise ValidationError(
            f"expected a common ontology, got kind {common_ontology.kind!r}"
        )
    cache: dict = {}
    candidates: list[AgreementUnit] = []
    pools = (
        (export.concept_refs(), common_ontology.concept_refs()),
        (export.attribute_refs(), common_ontology.attribute_refs()),
    )
    for source_pool, target_pool in pools:
        for source_ref in source_pool:
            for target_ref in target_pool:
                unit = score_endpoints(
                    tax, export, source_ref, common_ontology, target_ref, config,
                    _cache=cache,
                )
                if unit.verdict != VERDICT_NON_SIMILAR:
                    candidates.append(unit)
    candidates.sort(key=_UNIT_ORDER)
    if config.one_to_one:
        used_sources: set[str] = set()
        used_targets: set[str] = set()
        selected = []
        for unit in candidates:
            if unit.source_ref in used_sources or unit.target_ref in used_targets:
                continue
            used_sources.add(unit.source_ref)
            used_targets.add(unit.target_ref)
            selected.append(unit)
        candidates = selected
    return HalfAgreement(
        peer_id=peer_id if peer_id is not None else export.id,
        schema_id=export.id,
        common_ontology_id=common_ontology.id,
        units=tuple(candidates),
        config=config,
    )
