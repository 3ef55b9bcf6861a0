import random
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

import semmatch as sm
from semmatch import MatchConfig, ValidationError
from semmatch.matcher import (
    _soft_overlap,
    build_half_agreement,
    classify,
    external_similarity,
    internal_similarity,
    label_similarity,
    score_endpoints,
    tokenize_label,
)

from helpers import camel_join, optimal_assignment_score


class TestTokenize:
    @pytest.mark.parametrize(
        "label,expected",
        [
            ("BillTo", ["bill", "to"]),
            ("ship_to-Address", ["ship", "to", "address"]),
            ("PO2", ["po", "2"]),
            ("PurchaseOrder", ["purchase", "order"]),
            ("POBox", ["po", "box"]),
            ("", []),
            ("___", []),
        ],
    )
    def test_examples(self, label, expected):
        assert tokenize_label(label) == expected

    @given(st.text(max_size=40))
    def test_tokens_are_lowercase_alnum(self, label):
        for token in tokenize_label(label):
            assert re.fullmatch(r"[0-9a-z]+", token)

    @given(st.lists(st.from_regex(r"[a-z]{1,6}|[0-9]{1,3}", fullmatch=True), max_size=6))
    def test_underscore_join_round_trips(self, tokens):
        assert tokenize_label("_".join(tokens)) == tokens


class TestLabelSimilarity:
    def test_identity(self, tax):
        assert label_similarity(tax, "Name", "Name") == 1.0

    def test_billto_shipto_from_bundled_taxonomy(self, tax):
        # tokens {bill, to} x {ship, to}: the (to, to) pair scores 1.0 and
        # (bill, ship) scores s; the oracle confirms (1 + s) / 2.
        s = tax.lemma_similarity("bill", "ship")
        expected = optimal_assignment_score(
            ["bill", "to"], ["ship", "to"], lambda a, b: tax.lemma_similarity(a, b)
        )
        got = label_similarity(tax, "BillTo", "ShipTo")
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx((1.0 + s) / 2.0, abs=1e-12)
        assert s == 0.0  # bill and ship live in different trees

    def test_same_synset_labels(self, tax):
        assert label_similarity(tax, "Car", "Automobile") == 1.0

    def test_symmetry_is_exact(self, tax):
        rng = random.Random(3)
        vocab = [w for w in sorted(tax.lemma_index) if w.isalpha()]
        for _ in range(100):
            l1 = camel_join([rng.choice(vocab) for _ in range(rng.randint(1, 3))])
            l2 = camel_join([rng.choice(vocab) for _ in range(rng.randint(1, 3))])
            assert label_similarity(tax, l1, l2) == label_similarity(tax, l2, l1)

    def test_matches_brute_force_assignment(self, tax):
        rng = random.Random(5)
        vocab = [w for w in sorted(tax.lemma_index) if w.isalpha()]
        sim = lambda a, b: tax.lemma_similarity(a, b)
        for _ in range(200):
            t1 = [rng.choice(vocab) for _ in range(rng.randint(1, 4))]
            t2 = [rng.choice(vocab) for _ in range(rng.randint(1, 4))]
            expected = optimal_assignment_score(t1, t2, sim)
            got = label_similarity(tax, camel_join(t1), camel_join(t2))
            assert got == pytest.approx(expected, abs=1e-12)

    def test_large_token_counts_use_greedy_fallback(self, tax):
        label = camel_join(
            ["car", "bike", "truck", "bus", "ship", "train", "road", "bridge", "street"]
        )
        assert label_similarity(tax, label, label) == 1.0
        other = camel_join(["bill", "name"] * 5)
        forward = label_similarity(tax, label, other)
        assert forward == label_similarity(tax, other, label)
        assert 0.0 <= forward <= 1.0

    def test_soft_overlap_empty_conventions(self):
        eq = lambda a, b: 1.0 if a == b else 0.0
        assert _soft_overlap([], [], eq) == 1.0
        assert _soft_overlap(["a"], [], eq) == 0.0
        assert _soft_overlap([], ["a"], eq) == 0.0


class TestExternalSimilarity:
    def test_identical_nonempty_sets(self, tax, po_export, po_co):
        value = external_similarity(tax, po_export, "BillTo.Name", po_export, "BillTo.Address")
        assert value == 1.0  # both sets are {BillTo, PurchaseOrder}

    def test_roots_score_zero(self, tax, po_export, po_co):
        assert external_similarity(tax, po_export, "PurchaseOrder", po_co, "PurchaseOrder") == 0.0

    def test_billto_vs_shipto_gap(self, tax, po_export):
        # {BillTo, PurchaseOrder} vs {ShipTo, PurchaseOrder}: the perfect
        # PurchaseOrder pair plus the BillTo/ShipTo label score of 0.5.
        value = external_similarity(tax, po_export, "BillTo.Name", po_export, "ShipTo.Name")
        billto_shipto = label_similarity(tax, "BillTo", "ShipTo")
        assert value == pytest.approx((1.0 + billto_shipto) / 2.0, abs=1e-12)
        assert value < 1.0

    def test_unknown_ref(self, tax, po_export, po_co):
        with pytest.raises(sm.UnknownRefError):
            external_similarity(tax, po_export, "Nope", po_co, "Billing")


class TestInternalSimilarity:
    def test_identical_attribute_sets(self, tax, po_export, po_co):
        assert internal_similarity(tax, po_export, "BillTo", po_co, "Billing") == 1.0

    def test_billto_vs_shipto(self, tax, po_export):
        assert internal_similarity(tax, po_export, "BillTo", po_export, "ShipTo") == 1.0

    def test_attribute_refs_score_zero(self, tax, po_export, po_co):
        assert internal_similarity(tax, po_export, "BillTo.Name", po_co, "Billing.Name") == 0.0

    def test_attribute_free_concept_scores_zero(self, tax, transport_export, transport_co):
        assert internal_similarity(tax, transport_export, "Road", transport_co, "Road") == 0.0

    def test_disjoint_unrelated_attribute_names(self, tax):
        left = sm.Schema(
            "l", "exportSchema",
            [sm.Concept("c", "Thing", attributes=(sm.Attribute("Qzx"),))],
        )
        right = sm.Schema(
            "r", "commonOntology",
            [sm.Concept("c", "Thing", attributes=(sm.Attribute("Wvu"),))],
        )
        assert internal_similarity(tax, left, "Thing", right, "Thing") == 0.0


class TestClassify:
    def test_all_perfect_is_exact(self):
        confidence, verdict = classify(1.0, 1.0, 1.0)
        assert confidence == pytest.approx(1.0, abs=1e-12)
        assert verdict == "exact"

    def test_label_only_is_cut_by_default_weights(self):
        confidence, verdict = classify(1.0, 0.0, 0.0)
        assert confidence == pytest.approx(0.7, abs=1e-12)
        assert verdict == "nonSimilar"

    def test_all_zero(self):
        assert classify(0.0, 0.0, 0.0) == (0.0, "nonSimilar")

    def test_flat_neutral_shifts_external_weight(self):
        config = MatchConfig(flat_neutral=True)
        confidence, verdict = classify(1.0, 0.0, 0.0, config, external_defined=False)
        assert confidence == pytest.approx(1.0, abs=1e-12)
        assert verdict == "similar"  # external gate still blocks "exact"

    def test_flat_neutral_leaves_defined_pairs_alone(self):
        config = MatchConfig(flat_neutral=True)
        confidence, _ = classify(1.0, 0.5, 0.0, config, external_defined=True)
        assert confidence == pytest.approx(0.85, abs=1e-12)

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            MatchConfig(label_weight=0.5, external_weight=0.2, internal_weight=0.2)
        with pytest.raises(ValidationError):
            MatchConfig(label_threshold=1.5)
        with pytest.raises(ValidationError):
            MatchConfig(measure="lch")


class TestBuildHalfAgreement:
    def test_identity_mirror_maps_every_nonroot_endpoint(self, tax, po_mirror, po_co, mirror_half):
        # Root concepts have empty superclass sets, so their external
        # score is 0 and the default weights cap them at 0.7: the root
        # pair itself stays out while everything else self-maps at 1.0.
        by_source = {u.source_ref: u for u in mirror_half.units}
        for ref in po_mirror.endpoint_refs():
            if ref == "PurchaseOrder":
                assert ref not in by_source
                continue
            unit = by_source[ref]
            assert unit.target_ref == ref
            assert unit.confidence == pytest.approx(1.0, abs=1e-12)
            assert unit.verdict == "exact"

    def test_oov_everywhere_yields_empty_agreement(self, tax):
        export = sm.Schema("x", "exportSchema", [sm.Concept("a", "Qzverb")])
        ontology = sm.Schema("y", "commonOntology", [sm.Concept("b", "Xplumf")])
        half = build_half_agreement(tax, export, ontology)
        assert half.units == ()

    def test_po_routes_billto_name_to_billing(self, po_half):
        unit = next(u for u in po_half.units if u.source_ref == "BillTo.Name")
        assert unit.target_ref == "Billing.Name"
        assert unit.verdict == "exact"

    def test_po_expected_unit_set(self, po_half):
        assert [(u.source_ref, u.target_ref) for u in po_half.units] == [
            ("PurchaseOrder.Address", "PurchaseOrder.Address"),
            ("PurchaseOrder.Name", "PurchaseOrder.Name"),
            ("BillTo.Address", "Billing.Address"),
            ("BillTo.Name", "Billing.Name"),
            ("ShipTo.Address", "Shipping.Address"),
            ("ShipTo.Name", "Shipping.Name"),
        ]

    def test_kind_mismatch_is_rejected(self, tax, po_export, po_co):
        with pytest.raises(ValidationError, match="kind|expected"):
            build_half_agreement(tax, po_co, po_co)
        with pytest.raises(ValidationError, match="kind|expected"):
            build_half_agreement(tax, po_export, po_export)

    def test_one_to_one_has_no_duplicate_refs(self, po_half):
        sources = [u.source_ref for u in po_half.units]
        targets = [u.target_ref for u in po_half.units]
        assert len(set(sources)) == len(sources)
        assert len(set(targets)) == len(targets)

    def test_units_sorted_by_confidence_then_refs(self, po_half):
        key = [(-u.confidence, u.source_ref, u.target_ref) for u in po_half.units]
        assert key == sorted(key)

    def test_confidence_matches_weighted_sum(self, po_half):
        config = po_half.config
        for unit in po_half.units:
            expected = (
                config.label_weight * unit.label_score
                + config.external_weight * unit.external_score
                + config.internal_weight * unit.internal_score
            )
            assert unit.confidence == expected

    def test_raising_confidence_threshold_never_adds_units(self, tax, po_export, po_co):
        previous = None
        for threshold in (0.0, 0.25, 0.5, 0.75, 0.9, 1.0):
            config = MatchConfig(confidence_threshold=threshold)
            pairs = {
                (u.source_ref, u.target_ref)
                for u in build_half_agreement(tax, po_export, po_co, config).units
            }
            if previous is not None:
                assert pairs <= previous
            previous = pairs

    def test_weight_scaling_leaves_selection_unchanged(self, tax, po_export, po_co, po_half):
        base = po_half
        for factor in (0.5, 2.0, 3.0):
            total = (0.7 + 0.3 + 0.0) * factor
            config = MatchConfig(
                label_weight=0.7 * factor / total,
                external_weight=0.3 * factor / total,
                internal_weight=0.0,
            )
            scaled = build_half_agreement(tax, po_export, po_co, config, peer_id="p1")
            assert [(u.source_ref, u.target_ref, u.verdict) for u in scaled.units] == [
                (u.source_ref, u.target_ref, u.verdict) for u in base.units
            ]
            for scaled_unit, base_unit in zip(scaled.units, base.units):
                assert scaled_unit.confidence == pytest.approx(base_unit.confidence, abs=1e-12)

    def test_equal_label_score_is_ordered_by_external(self, tax, po_export, po_co):
        correct = score_endpoints(tax, po_export, "BillTo.Name", po_co, "Billing.Name")
        wrong = score_endpoints(tax, po_export, "BillTo.Name", po_co, "Shipping.Name")
        assert correct.label_score == wrong.label_score == 1.0
        assert correct.external_score > wrong.external_score
        assert correct.confidence > wrong.confidence

    def test_granularity_mismatch_is_rejected(self, tax, po_export, po_co):
        with pytest.raises(ValidationError, match="granularity"):
            score_endpoints(tax, po_export, "BillTo", po_co, "Billing.Name")

    def test_build_is_deterministic(self, tax, po_export, po_co):
        first = build_half_agreement(tax, po_export, po_co)
        second = build_half_agreement(tax, po_export, po_co)
        assert first.to_json() == second.to_json()


class TestFlatSchemas:
    def test_default_config_caps_flat_confidence(self, tax, flat_export, flat_co):
        probe = MatchConfig(confidence_threshold=0.0)
        half = build_half_agreement(tax, flat_export, flat_co, probe)
        assert half.units  # candidates exist once the threshold is gone
        for unit in half.units:
            assert unit.confidence <= 0.7 + 1e-12
            assert unit.verdict != "exact"

    def test_default_config_yields_nothing(self, tax, flat_export, flat_co):
        half = build_half_agreement(tax, flat_export, flat_co)
        assert half.units == ()

    def test_flat_neutral_recovers_the_mapping(self, tax, flat_export, flat_co, flat_gold):
        config = MatchConfig(flat_neutral=True)
        half = build_half_agreement(tax, flat_export, flat_co, config)
        report = sm.evaluate(half, flat_gold)
        assert report.recall == 1.0
        assert {u.verdict for u in half.units} == {"similar"}


class TestHalfAgreementDocument:
    def test_json_round_trip(self, po_half):
        again = sm.HalfAgreement.from_json(po_half.to_json())
        assert again == po_half
        assert again.to_json() == po_half.to_json()

    def test_misordered_units_are_rejected(self, po_half):
        units = tuple(reversed(po_half.units))
        with pytest.raises(ValidationError, match="sorted"):
            sm.HalfAgreement(
                peer_id="p",
                schema_id="s",
                common_ontology_id="co",
                units=units,
                config=po_half.config,
            )

    def test_config_snapshot_round_trips(self):
        config = MatchConfig(measure="path", flat_neutral=True)
        assert MatchConfig.from_dict(config.to_dict()) == config

    def test_partial_override(self):
        config = MatchConfig.from_dict({"confidenceThreshold": 0.5}, base=MatchConfig())
        assert config.confidence_threshold == 0.5
        assert config.label_threshold == 0.9

    def test_unknown_config_key_is_rejected(self):
        with pytest.raises(sm.ParseError, match="unknown match config key"):
            MatchConfig.from_dict({"bogusKnob": 1})

    def test_out_of_range_threshold_from_file_is_clamped(self):
        config = MatchConfig.from_dict({"confidenceThreshold": 1.01}, base=MatchConfig())
        assert config.confidence_threshold == 1.0
        with pytest.raises(ValidationError):
            MatchConfig(confidence_threshold=1.01)
