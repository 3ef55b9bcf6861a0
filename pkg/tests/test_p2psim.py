import json

import pytest

import semmatch as sm
from semmatch import SimConfig, ValidationError
from semmatch import bundled
from semmatch.p2psim import SUPER_PEER_ID, World, parse_scenario, run_scenario


@pytest.fixture()
def world(tax, po_co):
    return World(tax, po_co)


def make_world(tax, po_co, **sim_kwargs):
    return World(tax, po_co, sim_config=SimConfig(**sim_kwargs))


def scenario_kwargs(tax, po_co, **sim_kwargs):
    return dict(
        taxonomy=tax,
        common_ontology=po_co,
        base_dir=bundled.scenario_path().parent,
        sim_config=SimConfig(**sim_kwargs),
    )


class TestRegistry:
    def test_register_grows_registry(self, world):
        world.register("p1", ["alpha"])
        assert world.super_peer.is_live("p1")

    def test_duplicate_live_registration_fails(self, world):
        world.register("p1", ["alpha"])
        with pytest.raises(ValidationError, match="already registered"):
            world.register("p1", ["alpha"])

    def test_reregistration_after_leave(self, world):
        world.register("p1", ["alpha"])
        world.leave("p1")
        assert not world.super_peer.is_live("p1")
        world.register("p1", ["beta"])
        assert world.super_peer.is_live("p1")

    def test_left_peer_never_a_candidate(self, world):
        world.register("p1", ["alpha"])
        world.register("p2", ["alpha"])
        assert world.request_candidates("p1", ["alpha"]) == ["p2"]
        world.leave("p2")
        assert world.request_candidates("p1", ["alpha"]) == []


class TestCandidates:
    def test_no_overlap_means_no_candidates(self, world):
        world.register("p1", ["alpha"])
        world.register("p2", ["beta"])
        assert world.request_candidates("p1", ["gamma"]) == []

    def test_ranked_by_shared_count_then_id(self, world):
        world.register("p1", [])
        world.register("p2", ["a"])
        world.register("p3", ["a", "b"])
        world.register("p4", ["b"])
        assert world.request_candidates("p1", ["a", "b"]) == ["p3", "p2", "p4"]

    def test_requester_excluded(self, world):
        world.register("p1", ["a"])
        assert world.request_candidates("p1", ["a"]) == []

    def test_keywords_compared_case_insensitively(self, world):
        world.register("p1", [])
        world.register("p2", ["Alpha"])
        assert world.request_candidates("p1", ["ALPHA"]) == ["p2"]


class TestPublish:
    def test_publish_equals_direct_build(self, world, tax, po_export, po_co):
        world.register("p1", [])
        world.load_peer_schema("p1", po_export)
        half = world.publish("p1")
        direct = sm.build_half_agreement(tax, po_export, po_co, world.match_config, peer_id="p1")
        assert half == direct
        assert world.peers["p1"].half_agreement == direct

    def test_publish_extends_registry_keywords(self, world, po_export):
        world.register("p1", ["seed"])
        world.load_peer_schema("p1", po_export)
        world.publish("p1")
        keywords = world.super_peer.registry["p1"].keywords
        assert "seed" in keywords
        assert "billing.name" in keywords

    def test_publish_with_oov_schema_is_empty_but_succeeds(self, world, tax):
        schema = sm.Schema("weird", "exportSchema", [sm.Concept("q", "Qzverb")])
        world.register("p1", [])
        world.load_peer_schema("p1", schema)
        half = world.publish("p1")
        assert half.units == ()

    def test_unregistered_peer_cannot_publish(self, world, po_export):
        world.load_peer_schema("p1", po_export)
        with pytest.raises(ValidationError, match="not registered"):
            world.publish("p1")


class TestRequestRound:
    def _publish(self, world, peer_id, schema, keywords=()):
        world.register(peer_id, keywords)
        world.load_peer_schema(peer_id, schema)
        world.publish(peer_id)

    def test_clone_candidate_is_exact_agree(self, world, po_export):
        self._publish(world, "p1", po_export)
        self._publish(world, "p2", po_export)
        results = world.run_request_round("p1", ["billing.name"])
        assert len(results) == 1
        assert results[0].provider_id == "p2"
        assert results[0].overlap_score == 1.0
        assert results[0].verdict == "exactAgree"

    def test_zero_candidates(self, world, po_export):
        self._publish(world, "p1", po_export)
        assert world.run_request_round("p1", ["nothing-matches"]) == []

    def test_drop_probability_one_drops_everything(self, tax, po_co, po_export):
        world = make_world(tax, po_co, drop_probability=1.0, seed=9)
        world.register("p1", [])
        world.load_peer_schema("p1", po_export)
        world.publish("p1")
        world.register("p2", [])
        world.load_peer_schema("p2", po_export)
        world.publish("p2")
        assert world.run_request_round("p1", ["billing.name"]) == []

    def test_request_requires_publish(self, world, po_export):
        world.register("p1", [])
        world.load_peer_schema("p1", po_export)
        with pytest.raises(ValidationError, match="has not published"):
            world.run_request_round("p1", ["billing.name"])

    def test_unpublished_candidate_is_skipped(self, world, po_export):
        self._publish(world, "p1", po_export)
        world.register("p2", ["billing.name"])  # registered but never published
        results = world.run_request_round("p1", ["billing.name"])
        assert results == []


class TestBind:
    def _wire(self, world, po_export, po_mirror):
        for peer_id, schema in (("p1", po_export), ("p2", po_mirror)):
            world.register(peer_id, [])
            world.load_peer_schema(peer_id, schema)
            world.publish(peer_id)
        return world.run_request_round("p1", ["billing.name"])

    def test_bind_equals_direct_compose(self, world, tax, po_export, po_mirror, po_co):
        self._wire(world, po_export, po_mirror)
        full = world.bind("p1", "p2")
        req = world.peers["p1"].half_agreement
        prov = world.peers["p2"].half_agreement
        assert full == sm.compose(req, prov)

    def test_bind_without_prior_match_result(self, world, po_export, po_mirror):
        for peer_id, schema in (("p1", po_export), ("p2", po_mirror)):
            world.register(peer_id, [])
            world.load_peer_schema(peer_id, schema)
            world.publish(peer_id)
        with pytest.raises(ValidationError, match="no match result"):
            world.bind("p1", "p2")

    def test_bind_to_non_similar_peer_is_refused(self, world, tax, po_export, transport_export):
        for peer_id, schema, kw in (
            ("p1", po_export, ["shared"]),
            ("p2", transport_export, ["shared"]),
        ):
            world.register(peer_id, kw)
            world.load_peer_schema(peer_id, schema)
            world.publish(peer_id)
        results = world.run_request_round("p1", ["shared"])
        assert results and results[0].verdict == "nonSimilar"
        with pytest.raises(ValidationError, match="nonSimilar"):
            world.bind("p1", "p2")


class TestScenario:
    def test_empty_script_has_empty_trace(self, tax, po_co):
        run = run_scenario("", **scenario_kwargs(tax, po_co))
        assert run.events == ()
        assert run.completed

    def test_three_peer_scenario_is_deterministic(self, tax, po_co):
        script = bundled.scenario_path().read_text(encoding="utf-8")
        first = run_scenario(script, **scenario_kwargs(tax, po_co, seed=42))
        second = run_scenario(script, **scenario_kwargs(tax, po_co, seed=42))
        assert first.to_jsonl() == second.to_jsonl()
        assert first.completed

    def test_seed_is_irrelevant_without_drops(self, tax, po_co):
        script = bundled.scenario_path().read_text(encoding="utf-8")
        a = run_scenario(script, **scenario_kwargs(tax, po_co, seed=1))
        b = run_scenario(script, **scenario_kwargs(tax, po_co, seed=2))
        assert a.to_jsonl() == b.to_jsonl()

    def test_super_peer_never_matches_or_composes(self, tax, po_co):
        script = bundled.scenario_path().read_text(encoding="utf-8")
        run = run_scenario(script, **scenario_kwargs(tax, po_co, seed=42))
        for event in run.events:
            if event.kind in ("matchResult", "fullAgreement"):
                assert event.src != SUPER_PEER_ID

    def test_broadcast_reply_conservation(self, tax, po_co):
        script = bundled.scenario_path().read_text(encoding="utf-8")
        run = run_scenario(script, **scenario_kwargs(tax, po_co, seed=42))
        broadcasts = [e for e in run.events if e.kind == "halfAgreementBroadcast"]
        replies = [e for e in run.events if e.kind == "matchResult"]
        assert len(replies) <= len(broadcasts)
        for reply in replies:
            assert any(
                b.dst == reply.src and b.tick < reply.tick for b in broadcasts
            )

    def test_trace_events_are_totally_ordered(self, tax, po_co):
        script = bundled.scenario_path().read_text(encoding="utf-8")
        run = run_scenario(script, **scenario_kwargs(tax, po_co, seed=42))
        keys = [(e.tick, e.seq) for e in run.events]
        assert keys == sorted(keys)
        assert len({e.seq for e in run.events}) == len(run.events)

    def test_payloads_match_direct_library_calls(self, tax, po_co, po_export, po_mirror):
        script = bundled.scenario_path().read_text(encoding="utf-8")
        run = run_scenario(script, **scenario_kwargs(tax, po_co, seed=42))
        publishes = {e.src: e.payload for e in run.events if e.kind == "publish"}
        direct_p1 = sm.build_half_agreement(tax, po_export, po_co, peer_id="p1")
        assert publishes["p1"] == direct_p1.to_dict()
        final = [e for e in run.events if e.kind == "fullAgreement"][-1]
        direct_p2 = sm.build_half_agreement(tax, po_mirror, po_co, peer_id="p2")
        assert final.payload == sm.compose(direct_p1, direct_p2).to_dict()

    def test_max_ticks_reports_partial_trace(self, tax, po_co):
        script = "register p1 alpha\nregister p2 alpha\ntick 5\n"
        run = run_scenario(script, **scenario_kwargs(tax, po_co, max_ticks=2))
        assert not run.completed
        assert "max_ticks" in run.stop_reason
        assert [e.kind for e in run.events] == ["register", "register"]

    def test_parse_error_reports_line(self):
        with pytest.raises(sm.ParseError) as err:
            parse_scenario("register p1 a\nwarp p2\n")
        assert err.value.line == 2

    def test_semantic_error_reports_line(self, tax, po_co):
        with pytest.raises(ValidationError, match="line 1"):
            run_scenario("publish ghost\n", **scenario_kwargs(tax, po_co))

    def test_jsonl_lines_are_one_event_each(self, tax, po_co):
        script = bundled.scenario_path().read_text(encoding="utf-8")
        run = run_scenario(script, **scenario_kwargs(tax, po_co, seed=42))
        lines = run.to_jsonl().strip().split("\n")
        assert len(lines) == len(run.events)
        for line, event in zip(lines, run.events):
            doc = json.loads(line)
            assert doc["kind"] == event.kind
            assert doc["from"] == event.src
