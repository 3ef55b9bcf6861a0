"""Concept schemas: peer export schemas and the shared common ontology.

A schema is a set of labeled concepts carrying attributes and is-a
(superclass) edges. Both concepts and attributes are matchable
endpoints; an attribute is addressed by the qualified name
``ConceptLabel.AttributeName`` so that, say, ``BillTo.Name`` and
``ShipTo.Name`` stay distinct even though the attribute names collide.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import IO, Iterable, Mapping

from .errors import ParseError, UnknownRefError, ValidationError

KIND_EXPORT = "exportSchema"
KIND_COMMON = "commonOntology"
KINDS = (KIND_EXPORT, KIND_COMMON)


@dataclass(frozen=True, slots=True)
class Attribute:
    name: str
    type_hint: str | None = None


@dataclass(frozen=True, slots=True)
class Concept:
    id: str
    label: str
    attributes: tuple[Attribute, ...] = ()
    superclasses: tuple[str, ...] = ()


class Schema:
    """Immutable, validated concept hierarchy.

    Labels are unique within a schema and must not contain ``.`` so
    that qualified attribute refs parse unambiguously. Metadata
    keywords are normalized to a lowercase, deduplicated, sorted tuple.
    """

    def __init__(
        self,
        schema_id: str,
        kind: str,
        concepts: Iterable[Concept],
        metadata: Iterable[str] = (),
    ):
        if kind not in KINDS:
            raise ValidationError(f"unknown schema kind: {kind!r}")
        by_id: dict[str, Concept] = {}
        by_label: dict[str, Concept] = {}
        for concept in concepts:
            if concept.id in by_id:
                raise ValidationError(f"duplicate concept id: {concept.id}")
            _check_concept(concept)
            if concept.label in by_label:
                raise ValidationError(
                    f"duplicate concept label: {concept.label!r}"
                    " (labels address endpoints and must be unique)"
                )
            by_id[concept.id] = concept
            by_label[concept.label] = concept
        if not by_id:
            raise ValidationError("schema has no concepts")
        for concept in by_id.values():
            for sid in concept.superclasses:
                if sid not in by_id:
                    raise ValidationError(
                        f"concept {concept.id} has dangling superclass id: {sid}"
                    )
        _check_acyclic(by_id)
        self._id = schema_id
        self._kind = kind
        self._by_id = by_id
        self._by_label = by_label
        self._metadata = tuple(sorted({kw.lower() for kw in metadata}))
        self._closure_cache: dict[str, frozenset[str]] = {}

    @property
    def id(self) -> str:
        return self._id

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def concepts(self) -> Mapping[str, Concept]:
        return MappingProxyType(self._by_id)

    @property
    def metadata(self) -> tuple[str, ...]:
        return self._metadata

    def superclass_closure(self, concept_id: str) -> frozenset[str]:
        """All concept ids reachable over superclass edges, excluding the start."""
        if concept_id not in self._by_id:
            raise UnknownRefError(f"unknown concept id: {concept_id}")
        cached = self._closure_cache.get(concept_id)
        if cached is not None:
            return cached
        seen: set[str] = set()
        frontier = deque(self._by_id[concept_id].superclasses)
        while frontier:
            cur = frontier.popleft()
            if cur in seen:
                continue
            seen.add(cur)
            frontier.extend(self._by_id[cur].superclasses)
        closure = frozenset(seen)
        self._closure_cache[concept_id] = closure
        return closure

    def attribute_concepts(self, concept_id: str) -> list[tuple[str, str]]:
        """Direct attributes as (attribute name, owning concept label) pairs."""
        if concept_id not in self._by_id:
            raise UnknownRefError(f"unknown concept id: {concept_id}")
        concept = self._by_id[concept_id]
        return [(attr.name, concept.label) for attr in concept.attributes]

    def concept_refs(self) -> list[str]:
        return sorted(self._by_label)

    def attribute_refs(self) -> list[str]:
        refs = [
            f"{concept.label}.{attr.name}"
            for concept in self._by_id.values()
            for attr in concept.attributes
        ]
        return sorted(refs)

    def endpoint_refs(self) -> list[str]:
        return self.concept_refs() + self.attribute_refs()

    def resolve_ref(self, ref: str) -> tuple[Concept, Attribute | None]:
        """Resolve a concept label or a ``Label.Attr`` qualified name."""
        concept = self._by_label.get(ref)
        if concept is not None:
            return concept, None
        if "." in ref:
            owner_label, attr_name = ref.rsplit(".", 1)
            concept = self._by_label.get(owner_label)
            if concept is not None:
                for attr in concept.attributes:
                    if attr.name == attr_name:
                        return concept, attr
        raise UnknownRefError(f"unknown endpoint ref in schema {self._id}: {ref!r}")

    def ancestor_labels(self, ref: str) -> frozenset[str]:
        """Superclass label set used by external-structure matching.

        For a concept this is the labels of its superclass closure; for
        a qualified attribute the owning concept joins the set, so even
        attributes of root concepts have a non-empty set.
        """
        concept, attr = self.resolve_ref(ref)
        labels = {self._by_id[cid].label for cid in self.superclass_closure(concept.id)}
        if attr is not None:
            labels.add(concept.label)
        return frozenset(labels)

    def to_dict(self) -> dict:
        return {
            "id": self._id,
            "kind": self._kind,
            "metadata": list(self._metadata),
            "concepts": [
                {
                    "id": concept.id,
                    "label": concept.label,
                    "attributes": [
                        {"name": attr.name, "typeHint": attr.type_hint}
                        for attr in concept.attributes
                    ],
                    "superclasses": sorted(concept.superclasses),
                }
                for concept in sorted(self._by_id.values(), key=lambda c: c.id)
            ],
        }

    def canonical_json(self) -> str:
        """Byte-stable serialization: sorted keys, sorted concept ids."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Schema):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return f"Schema(id={self._id!r}, kind={self._kind!r}, concepts={len(self._by_id)})"


def _check_concept(concept: Concept) -> None:
    if not concept.label:
        raise ValidationError(f"concept {concept.id} has an empty label")
    if "." in concept.label:
        raise ValidationError(
            f"concept {concept.id}: label {concept.label!r} must not contain '.'"
        )
    seen: set[str] = set()
    for attr in concept.attributes:
        if not attr.name:
            raise ValidationError(f"concept {concept.id} has an empty attribute name")
        if "." in attr.name:
            raise ValidationError(
                f"concept {concept.id}: attribute {attr.name!r} must not contain '.'"
            )
        if attr.name in seen:
            raise ValidationError(
                f"concept {concept.id} has duplicate attribute {attr.name!r}"
            )
        seen.add(attr.name)


def _check_acyclic(by_id: dict[str, Concept]) -> None:
    pending = {cid: len(c.superclasses) for cid, c in by_id.items()}
    children: dict[str, list[str]] = {cid: [] for cid in by_id}
    for cid, concept in by_id.items():
        for sid in concept.superclasses:
            children[sid].append(cid)
    queue = deque(cid for cid, n in pending.items() if n == 0)
    done = 0
    while queue:
        cur = queue.popleft()
        done += 1
        for kid in children[cur]:
            pending[kid] -= 1
            if pending[kid] == 0:
                queue.append(kid)
    if done != len(by_id):
        stuck = sorted(cid for cid, n in pending.items() if n > 0)
        raise ValidationError(
            "superclass cycle detected involving: " + ", ".join(stuck[:5])
        )


def schema_from_dict(doc: object) -> Schema:
    if not isinstance(doc, dict):
        raise ParseError("schema document must be a JSON object")
    for key in ("id", "kind", "concepts"):
        if key not in doc:
            raise ParseError(f"schema document is missing {key!r}")
    raw_concepts = doc["concepts"]
    if not isinstance(raw_concepts, list):
        raise ParseError("'concepts' must be an array")
    concepts = []
    for entry in raw_concepts:
        if not isinstance(entry, dict) or "id" not in entry or "label" not in entry:
            raise ParseError("each concept needs at least 'id' and 'label'")
        attributes = []
        for raw_attr in entry.get("attributes", []):
            if not isinstance(raw_attr, dict) or "name" not in raw_attr:
                raise ParseError(
                    f"concept {entry['id']}: each attribute needs a 'name'"
                )
            attributes.append(
                Attribute(str(raw_attr["name"]), raw_attr.get("typeHint"))
            )
        superclasses = entry.get("superclasses", [])
        if not isinstance(superclasses, list):
            raise ParseError(f"concept {entry['id']}: 'superclasses' must be an array")
        concepts.append(
            Concept(
                str(entry["id"]),
                str(entry["label"]),
                tuple(attributes),
                tuple(str(s) for s in superclasses),
            )
        )
    metadata = doc.get("metadata", [])
    if not isinstance(metadata, list):
        raise ParseError("'metadata' must be an array of keywords")
    return Schema(str(doc["id"]), str(doc["kind"]), concepts, metadata)


def loads_schema(text: str) -> Schema:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", line=exc.lineno) from exc
    return schema_from_dict(doc)


def load_schema(source: str | Path | IO[str] | IO[bytes]) -> Schema:
    """Load a schema from a JSON file path or an open stream."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    return loads_schema(text)
