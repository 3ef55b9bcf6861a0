"""Precision / recall / F-measure scoring against gold-standard mappings."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

from .agreement import FullAgreement
from .errors import ParseError, ValidationError
from .matcher import HalfAgreement, MatchConfig, build_half_agreement
from .schema import Schema
from .taxonomy import Taxonomy

Pair = tuple[str, str]

_GOLD_HEADER = ("sourceRef", "targetRef")


@dataclass(frozen=True, slots=True)
class GoldMapping:
    """Reference (sourceRef, targetRef) pairs for one schema pair."""

    schema_pair_id: str
    pairs: frozenset[Pair]

    def __post_init__(self):
        if not self.pairs:
            raise ValidationError("gold mapping has no pairs")


@dataclass(frozen=True, slots=True)
class EvalReport:
    found: int
    correct: int
    incorrect: int
    missed: int
    precision: float
    recall: float
    f_measure: float

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "correct": self.correct,
            "incorrect": self.incorrect,
            "missed": self.missed,
            "precision": self.precision,
            "recall": self.recall,
            "fMeasure": self.f_measure,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def produced_pairs(produced: HalfAgreement | FullAgreement | Iterable[Pair]) -> set[Pair]:
    """The (sourceRef, targetRef) set of a mapping, confidences ignored."""
    if isinstance(produced, HalfAgreement):
        return {(u.source_ref, u.target_ref) for u in produced.units}
    if isinstance(produced, FullAgreement):
        return {(l.source_ref, l.target_ref) for l in produced.links}
    return {(str(s), str(t)) for s, t in produced}


def evaluate(
    produced: HalfAgreement | FullAgreement | Iterable[Pair],
    gold: GoldMapping,
) -> EvalReport:
    """Set comparison of produced pairs against the gold pairs.

    Precision is defined as 1.0 when nothing was produced (vacuously
    precise), so threshold sweeps at extreme settings stay total.
    """
    found_pairs = produced_pairs(produced)
    correct = len(found_pairs & gold.pairs)
    found = len(found_pairs)
    incorrect = found - correct
    missed = len(gold.pairs) - correct
    precision = 1.0 if found == 0 else correct / found
    recall = correct / len(gold.pairs)
    f_measure = 0.0 if precision + recall == 0 else (
        2.0 * precision * recall / (precision + recall)
    )
    return EvalReport(
        found=found,
        correct=correct,
        incorrect=incorrect,
        missed=missed,
        precision=precision,
        recall=recall,
        f_measure=f_measure,
    )


def threshold_sweep(
    tax: Taxonomy,
    export: Schema,
    common_ontology: Schema,
    gold: GoldMapping,
    grid: Sequence[MatchConfig],
) -> list[tuple[MatchConfig, EvalReport]]:
    """Evaluate one half agreement per config, preserving grid order."""
    if not grid:
        raise ValidationError("threshold sweep needs a non-empty grid")
    rows = []
    for config in grid:
        half = build_half_agreement(tax, export, common_ontology, config)
        rows.append((config, evaluate(half, gold)))
    return rows


def validate_gold_refs(gold: GoldMapping, source: Schema, target: Schema) -> None:
    """Raise when any gold ref does not resolve in its schema."""
    for source_ref, target_ref in sorted(gold.pairs):
        source.resolve_ref(source_ref)
        target.resolve_ref(target_ref)


def loads_gold(text: str, schema_pair_id: str = "") -> GoldMapping:
    """Parse the tab-separated gold format: a header row then ref pairs."""
    lines = [line for line in text.splitlines()]
    rows: list[Pair] = []
    header_seen = False
    for line_no, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        cells = tuple(cell.strip() for cell in line.split("\t"))
        if not header_seen:
            if cells != _GOLD_HEADER:
                raise ParseError(
                    "gold file must start with header 'sourceRef<TAB>targetRef'",
                    line=line_no,
                )
            header_seen = True
            continue
        if len(cells) != 2 or not all(cells):
            raise ParseError("expected two tab-separated refs", line=line_no)
        rows.append((cells[0], cells[1]))
    if not header_seen:
        raise ParseError("gold file is empty")
    return GoldMapping(schema_pair_id=schema_pair_id, pairs=frozenset(rows))


def load_gold(source: str | Path | IO[str] | IO[bytes], schema_pair_id: str | None = None) -> GoldMapping:
    if isinstance(source, (str, Path)):
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        if schema_pair_id is None:
            schema_pair_id = path.stem
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    return loads_gold(text, schema_pair_id or "")
