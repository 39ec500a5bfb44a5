"""Retrieval, alignment, aggregates, prompt assembly, and generation."""

import itertools

import pytest

from genjiko.dialogue import (
    ALIGNED,
    DIVERGENT,
    PARTIALLY_ALIGNED,
    DialogueOrchestrator,
    DynamicRecord,
    DynamicStore,
    KnowledgeDoc,
    StaticStore,
    StubClient,
    ai_match_judgment,
    assemble_prompt,
    class_names,
    compute_alignment,
    default_static_store,
    generate,
    trend_word,
)
from genjiko.dialogue.prompts import AGGREGATE_FLOOR
from genjiko.dialogue.store import AggregateStats
from genjiko.errors import DomainError
from genjiko.genjimon import Judgment, Partition
from genjiko.session import DONE_SMELLING, advance, create_session, propose_judgment, reveal

from conftest import drive_to_smelling, one_hot, play_with_predictions


def doc(doc_id, body, tags=("round",), title=None):
    return KnowledgeDoc(doc_id, frozenset(tags), title or doc_id, body)


class TestRetrieval:
    def test_unique_term_ranks_first(self):
        store = StaticStore([
            doc("a", "plum blossom and rain"),
            doc("b", "sandalwood smoke curls upward"),
            doc("c", "rain on stone paths"),
        ])
        results = store.retrieve("sandalwood", "round", k=3)
        assert results[0][0].doc_id == "b"

    def test_mode_filter_excludes(self):
        store = StaticStore([
            doc("brief-only", "sandalwood basics", tags=("briefing",)),
        ])
        assert store.retrieve("sandalwood", "debrief", k=5) == []
        assert store.retrieve("sandalwood", "briefing", k=5)[0][0].doc_id == "brief-only"

    def test_higher_tf_scores_higher_at_equal_length(self):
        import math

        store = StaticStore([
            doc("thrice", "cedar cedar cedar mист rain fog"),
            doc("once", "cedar rain fog mist dew smoke"),
        ])
        results = store.retrieve("cedar", "round", k=2)
        assert [r[0].doc_id for r in results] == ["thrice", "once"]
        # oracle: bm25 with k1=1.2, b=0.75, lucene idf, equal doc lengths
        n, df, length, avg = 2, 2, 6, 6.0
        idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
        norm = 1 - 0.75 + 0.75 * length / avg
        expect = lambda tf: idf * tf * 2.2 / (tf + 1.2 * norm)
        assert results[0][1] == pytest.approx(expect(3))
        assert results[1][1] == pytest.approx(expect(1))

    def test_insertion_order_irrelevant(self):
        docs = [doc(f"d{i}", f"scent note {i} incense smoke resin") for i in range(6)]
        ranked_fwd = StaticStore(docs).retrieve("incense resin", "round", k=6)
        ranked_rev = StaticStore(reversed(docs)).retrieve("incense resin", "round", k=6)
        assert [(d.doc_id, s) for d, s in ranked_fwd] == [
            (d.doc_id, s) for d, s in ranked_rev
        ]

    def test_tie_breaks_by_doc_id(self):
        docs = [doc("zeta", "cedar rain"), doc("alpha", "cedar rain")]
        results = StaticStore(docs).retrieve("cedar", "round", k=2)
        assert [r[0].doc_id for r in results] == ["alpha", "zeta"]

    def test_empty_store_empty_result(self):
        assert StaticStore([]).retrieve("anything", "round", k=3) == []

    def test_default_store_loads_and_covers_modes(self):
        store = default_static_store()
        assert len(store) >= 6
        for mode in ("briefing", "round", "debrief"):
            assert store.retrieve("incense scent listening", mode, k=2)

    def test_duplicate_doc_id_rejected(self):
        with pytest.raises(DomainError):
            StaticStore([doc("same", "a b"), doc("same", "c d")])


class TestAiMatchJudgment:
    def test_same_argmax_matches_first(self):
        preds = [one_hot(3), one_hot(3)]
        assert ai_match_judgment(preds, 2) == Judgment.match(1)

    def test_different_argmax_is_new(self):
        preds = [one_hot(3), one_hot(1)]
        assert ai_match_judgment(preds, 2) == Judgment.new()

    def test_smallest_matching_round_wins(self):
        preds = [one_hot(2), one_hot(0), one_hot(2), one_hot(0)]
        assert ai_match_judgment(preds, 4) == Judgment.match(2)

    def test_missing_prediction_errors(self):
        with pytest.raises(DomainError):
            ai_match_judgment([one_hot(1), None, one_hot(1)], 3)
        with pytest.raises(DomainError):
            ai_match_judgment([one_hot(1)], 2)

    def test_consistent_with_partition_semantics(self):
        for labels in itertools.product(range(3), repeat=5):
            preds = [one_hot(l) for l in labels]
            judgments = [ai_match_judgment(preds, r) for r in range(2, 6)]
            from genjiko.genjimon import partition_from_judgments

            folded = partition_from_judgments(judgments)
            assert folded == Partition.from_labels(labels)


class TestAlignment:
    def test_new_new_aligned(self):
        a = compute_alignment(Judgment.new(), Judgment.new(), Partition((0,)))
        assert a.verdict == ALIGNED

    def test_match_vs_new_divergent(self):
        a = compute_alignment(Judgment.match(1), Judgment.new(), Partition((0,)))
        assert a.verdict == DIVERGENT

    def test_match_into_different_groups_partial(self):
        prefix = Partition((0, 1, 0))  # rounds 1,3 together; round 2 apart
        a = compute_alignment(Judgment.match(1), Judgment.match(2), prefix)
        assert a.verdict == PARTIALLY_ALIGNED

    def test_match_same_group_different_targets_aligned(self):
        prefix = Partition((0, 1, 0))
        a = compute_alignment(Judgment.match(1), Judgment.match(3), prefix)
        assert a.verdict == ALIGNED

    def test_symmetry(self):
        prefix = Partition((0, 1, 0))
        options = [Judgment.new(), Judgment.match(1), Judgment.match(2), Judgment.match(3)]
        for human in options:
            for ai in options:
                ab = compute_alignment(human, ai, prefix)
                ba = compute_alignment(ai, human, prefix)
                assert ab.verdict == ba.verdict

    def test_bad_target_rejected(self):
        with pytest.raises(DomainError):
            compute_alignment(Judgment.match(5), Judgment.new(), Partition((0,)))


class TestAggregates:
    def test_empty_marker(self):
        stats = DynamicStore().aggregate("seq-x")
        assert stats.session_count == 0 and stats.pair_fractions is None

    def test_two_sessions_same_grouping(self):
        store = DynamicStore()
        store.complete_session("s1", "seq-x", "00123")
        store.complete_session("s2", "seq-x", "00134")
        stats = store.aggregate("seq-x")
        assert stats.session_count == 2
        assert stats.pair_fractions["1-2"] == 1.0

    def test_hand_counted_three_of_four(self):
        store = DynamicStore()
        for _ in range(3):
            store.complete_session("s", "seq-x", "00123")
        store.complete_session("s", "seq-x", "01234")
        stats = store.aggregate("seq-x")
        assert stats.pair_fractions["1-2"] == 0.75
        assert stats.pair_fractions["1-3"] == 0.0

    def test_fractions_bounded_and_stable_under_one_addition(self):
        store = DynamicStore()
        patterns = ["00123", "01234", "00000", "01012"]
        for p in patterns:
            store.complete_session("s", "seq-x", p)
            stats = store.aggregate("seq-x")
            assert all(0 <= v <= 1 for v in stats.pair_fractions.values())
        before = store.aggregate("seq-x")
        store.complete_session("s", "seq-x", "00011")
        after = store.aggregate("seq-x")
        bound = 1 / after.session_count
        for key in before.pair_fractions:
            assert abs(after.pair_fractions[key] - before.pair_fractions[key]) <= bound + 1e-12

    def test_persistence_round_trip(self, tmp_path):
        store = DynamicStore(tmp_path)
        store.complete_session("s1", "seq-x", "00123")
        reloaded = DynamicStore(tmp_path)
        assert reloaded.aggregate("seq-x").session_count == 1

    def test_sequences_isolated(self):
        store = DynamicStore()
        store.complete_session("s1", "seq-x", "00000")
        assert store.aggregate("seq-y").session_count == 0


def round2_session(basic_registry, human=Judgment.match(1), ai_labels=(0, 0)):
    session = drive_to_smelling(create_session("T1", basic_registry))
    from genjiko.session import record_ai_prediction

    session = record_ai_prediction(session, 1, one_hot(ai_labels[0]))
    session = advance(session, DONE_SMELLING)
    from genjiko.session import FINISH_DIALOGUE

    session = advance(session, FINISH_DIALOGUE)
    session = record_ai_prediction(session, 2, one_hot(ai_labels[1]))
    session = advance(session, DONE_SMELLING)
    return propose_judgment(session, human)


class TestAssemble:
    def test_round_bundle_includes_alignment(self, basic_registry):
        session = round2_session(basic_registry)
        bundle = assemble_prompt("round", session, [])
        assert bundle.facts["alignment"]["verdict"] == ALIGNED
        assert bundle.facts["round"] == 2

    def test_vote_distribution_two_decimals(self, basic_registry):
        session = round2_session(basic_registry)
        bundle = assemble_prompt("round", session, [])
        assert bundle.facts["vote_distribution"] == ["0.80", "0.05", "0.05", "0.05", "0.05"]

    def test_aggregates_below_floor_omitted(self, basic_registry):
        session = round2_session(basic_registry)
        low = AggregateStats(session_count=AGGREGATE_FLOOR - 1, pair_fractions={"1-2": 1.0})
        bundle = assemble_prompt("round", session, [], aggregates=low)
        assert "prior_sessions" not in bundle.facts
        high = AggregateStats(session_count=AGGREGATE_FLOOR, pair_fractions={"1-2": 1.0})
        bundle = assemble_prompt("round", session, [], aggregates=high)
        assert bundle.facts["prior_sessions"]["count"] == AGGREGATE_FLOOR

    def test_mode_phase_mismatch(self, basic_registry):
        session = round2_session(basic_registry)
        with pytest.raises(DomainError):
            assemble_prompt("debrief", session, [])

    def test_debrief_bundle_covers_all_rounds_and_score(self, basic_registry):
        js = [Judgment.match(1), Judgment.new(), Judgment.match(2), Judgment.match(3)]
        session = play_with_predictions(
            create_session("T1", basic_registry), js, [0, 0, 1, 0, 1]
        )
        session, _ = reveal(session)
        bundle = assemble_prompt("debrief", session, [])
        assert len(bundle.facts["rounds"]) == 5
        assert bundle.facts["exact"] is True
        assert bundle.facts["pair_matches"] == 10

    def test_budget_respected(self, basic_registry):
        session = round2_session(basic_registry)
        store = default_static_store()
        retrieved = store.retrieve("incense scent sensors", "round", k=3)
        bundle = assemble_prompt("round", session, retrieved, budget=400)
        assert len(bundle.rendered()) <= 400

    def test_trend_words(self):
        assert trend_word(0.5) == "rising"
        assert trend_word(-0.5) == "falling"
        assert trend_word(0.005) == "flat"
        assert trend_word(0.01) == "rising"


class TestGenerate:
    def test_aligned_round_contains_we_agree_and_round(self, basic_registry):
        session = round2_session(basic_registry)
        bundle = assemble_prompt("round", session, [])
        utterance = generate(StubClient(), bundle)
        assert "we agree" in utterance.text
        assert "round 2" in utterance.text.lower()
        assert utterance.alignment == ALIGNED

    def test_divergent_round_names_both_sides(self, basic_registry):
        session = round2_session(basic_registry, human=Judgment.new(), ai_labels=(0, 0))
        bundle = assemble_prompt("round", session, [])
        utterance = generate(StubClient(), bundle)
        assert utterance.alignment == DIVERGENT
        assert "new scent" in utterance.text
        assert "match with round 1" in utterance.text

    def test_stub_is_byte_deterministic(self, basic_registry):
        session = round2_session(basic_registry)
        bundle = assemble_prompt("round", session, [])
        a = generate(StubClient(), bundle).text
        b = generate(StubClient(), bundle).text
        assert a.encode() == b.encode()

    def test_debrief_enumerates_rounds_and_classes(self, basic_registry):
        js = [Judgment.match(1), Judgment.new(), Judgment.match(2), Judgment.match(3)]
        session = play_with_predictions(
            create_session("T1", basic_registry), js, [0, 0, 1, 0, 1]
        )
        session, _ = reveal(session)
        bundle = assemble_prompt("debrief", session, [])
        text = generate(StubClient(), bundle).text
        for r in range(1, 6):
            assert f"round {r}" in text
        names = class_names()
        assert names[0] in text and names[1] in text

    def test_generation_records_into_store(self, basic_registry):
        session = round2_session(basic_registry)
        store = DynamicStore()
        bundle = assemble_prompt("round", session, [])
        generate(StubClient(), bundle, store, session.session_id)
        recorded = store.utterances(session.session_id)
        assert len(recorded) == 1 and "we agree" in recorded[0]["text"]


class TestOrchestrator:
    def test_round_flow_with_sensor_record(self, basic_registry):
        session = round2_session(basic_registry)
        orchestrator = DialogueOrchestrator()
        orchestrator.dynamic_store.record_round(
            DynamicRecord(
                session_id=session.session_id,
                round=2,
                trend_slopes=(0.5, -0.2, 0.0, 2.0, 0.3, 0.8, 0.001, 0.4, 0.2),
                prediction=one_hot(0),
                human_judgment="new",
                ai_judgment=1,
            )
        )
        utterance = orchestrator.round_utterance(session)
        assert "rising" in utterance.text
        assert utterance.retrieved_doc_ids  # something retrieved
        assert orchestrator.dynamic_store.utterances(session.session_id)

    def test_briefing_flow(self, fresh_session):
        orchestrator = DialogueOrchestrator()
        utterance = orchestrator.briefing_utterance(fresh_session)
        assert utterance.mode == "briefing"
        assert "five" in utterance.text.lower()
