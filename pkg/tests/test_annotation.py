import json
import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docforge.annotation import (
    QUALIFICATION_THRESHOLD,
    AgreementMatrix,
    AnnotationError,
    Decision,
    DecisionStore,
    Session,
    apply_review,
    assign_samples,
    fleiss_kappa,
    matrix_from_decisions,
    qualification_score,
)
from docforge.annotation.core import qualifies


def kappa_oracle(rows, n):
    """Direct float transcription of the formula, no shared code with the
    implementation (which works in Fractions)."""
    big_n = len(rows)
    k = len(rows[0])
    po = sum((sum(c * c for c in row) - n) / (n * (n - 1)) for row in rows) / big_n
    pj = [sum(row[j] for row in rows) / (big_n * n) for j in range(k)]
    pe = sum(p * p for p in pj)
    if pe == 1.0:
        assert po == 1.0
        return 1.0
    return (po - pe) / (1 - pe)


def keep(entry, annotator, ts=0.0):
    return Decision(entry_id=entry, annotator_id=annotator, verdict="keep",
                    reason="ok", timestamp=ts)


def remove(entry, annotator, reason="faulty", ts=0.0):
    return Decision(entry_id=entry, annotator_id=annotator, verdict="remove",
                    reason=reason, timestamp=ts)


class TestDecision:
    def test_keep_requires_ok(self):
        with pytest.raises(AnnotationError, match="incompatible"):
            Decision(entry_id="e", annotator_id="a", verdict="keep", reason="faulty")

    def test_remove_requires_complaint(self):
        with pytest.raises(AnnotationError, match="incompatible"):
            Decision(entry_id="e", annotator_id="a", verdict="remove", reason="ok")

    @pytest.mark.parametrize("reason", ["faulty", "out_of_context", "irrelevant", "personal_info"])
    def test_remove_reasons(self, reason):
        d = remove("e", "a", reason=reason)
        assert d.reason == reason

    def test_unknown_verdict(self):
        with pytest.raises(AnnotationError, match="verdict"):
            Decision(entry_id="e", annotator_id="a", verdict="maybe", reason="ok")

    def test_unknown_reason(self):
        with pytest.raises(AnnotationError, match="reason"):
            Decision(entry_id="e", annotator_id="a", verdict="remove", reason="meh")

    def test_round_trip(self):
        d = remove("e1", "ann", reason="irrelevant", ts=12.5)
        assert Decision.from_dict(d.as_dict()) == d


def make_session(**overrides):
    base = dict(
        id="s1",
        annotators=["a", "b"],
        items=["e1", "e2"],
        assignment={"e1": ("a", "b"), "e2": ("a", "b")},
    )
    base.update(overrides)
    return Session(**base)


class TestSession:
    def test_valid(self):
        s = make_session()
        assert s.raters_per_item() == 2

    def test_unregistered_annotator(self):
        with pytest.raises(AnnotationError, match="unregistered"):
            make_session(assignment={"e1": ("a", "zz"), "e2": ("a", "b")})

    def test_duplicate_rater_on_item(self):
        with pytest.raises(AnnotationError, match="twice"):
            make_session(assignment={"e1": ("a", "a"), "e2": ("a", "b")})

    def test_assignment_of_unknown_item(self):
        with pytest.raises(AnnotationError, match="unknown item"):
            make_session(assignment={"e9": ("a", "b")})

    def test_duplicate_annotators(self):
        with pytest.raises(AnnotationError, match="duplicate"):
            make_session(annotators=["a", "a"])

    def test_calibration_needs_gold(self):
        with pytest.raises(AnnotationError, match="gold"):
            make_session(phase="calibration")

    def test_calibration_with_gold(self):
        gold = {"e1": keep("e1", "gold"), "e2": remove("e2", "gold")}
        s = make_session(phase="calibration", gold=gold)
        assert s.gold["e2"].verdict == "remove"

    def test_assigned_to_preserves_item_order(self):
        s = Session(id="s", annotators=["a", "b"], items=["e3", "e1", "e2"],
                    assignment={"e1": ("a",), "e2": ("b",), "e3": ("a",)})
        assert s.assigned_to("a") == ["e3", "e1"]

    def test_assigned_to_unknown(self):
        with pytest.raises(AnnotationError, match="unknown annotator"):
            make_session().assigned_to("zz")

    def test_raters_per_item_nonuniform(self):
        s = Session(id="s", annotators=["a", "b"], items=["e1", "e2"],
                    assignment={"e1": ("a", "b"), "e2": ("a",)})
        with pytest.raises(AnnotationError, match="differing"):
            s.raters_per_item()

    def test_round_trip(self):
        s = make_session()
        again = Session.from_dict(json.loads(json.dumps(s.as_dict())))
        assert again.assignment == s.assignment
        assert again.items == s.items
        assert again.gold is None

    def test_round_trip_with_gold(self):
        gold = {"e1": keep("e1", "gold"), "e2": remove("e2", "gold", reason="personal_info")}
        s = make_session(phase="calibration", gold=gold)
        again = Session.from_dict(json.loads(json.dumps(s.as_dict())))
        assert again.gold["e2"].reason == "personal_info"
        assert again.phase == "calibration"


class TestAgreementMatrix:
    def test_row_sum_mismatch(self):
        with pytest.raises(AnnotationError, match="sums to"):
            AgreementMatrix(rows=[(1, 2)], categories=("k", "r"), raters=2)

    def test_negative_count(self):
        with pytest.raises(AnnotationError, match="negative"):
            AgreementMatrix(rows=[(-1, 3)], categories=("k", "r"), raters=2)

    def test_row_width_mismatch(self):
        with pytest.raises(AnnotationError, match="cells"):
            AgreementMatrix(rows=[(2,)], categories=("k", "r"), raters=2)

    def test_needs_two_raters(self):
        with pytest.raises(AnnotationError, match="2 raters"):
            AgreementMatrix(rows=[(1, 0)], categories=("k", "r"), raters=1)

    def test_needs_two_categories(self):
        with pytest.raises(AnnotationError, match="2 categories"):
            AgreementMatrix(rows=[(2,)], categories=("k",), raters=2)


class TestFleissKappa:
    def test_perfect_agreement_mixed_categories(self):
        m = AgreementMatrix(rows=[(3, 0), (0, 3), (3, 0)], categories=("k", "r"), raters=3)
        assert fleiss_kappa(m) == 1.0

    def test_two_items_opposite_unanimity(self):
        # P_o = 1, P_e = 0.5 -> kappa exactly 1
        m = AgreementMatrix(rows=[(2, 0), (0, 2)], categories=("k", "r"), raters=2)
        assert fleiss_kappa(m) == 1.0

    def test_single_category_consensus(self):
        # all votes in one category: P_e = 1 with P_o = 1, defined as 1.0
        m = AgreementMatrix(rows=[(2, 0), (2, 0)], categories=("k", "r"), raters=2)
        assert fleiss_kappa(m) == 1.0

    def test_empty_matrix(self):
        m = AgreementMatrix(rows=[], categories=("k", "r"), raters=2)
        with pytest.raises(AnnotationError, match="empty"):
            fleiss_kappa(m)

    def test_worst_case_two_raters(self):
        # every item split 1/1: P_o = 0
        m = AgreementMatrix(rows=[(1, 1), (1, 1)], categories=("k", "r"), raters=2)
        assert fleiss_kappa(m) == pytest.approx(-1.0)

    def test_published_worked_example(self):
        # the classic 10-subject, 14-rater, 5-category table; kappa ~ 0.210
        rows = [
            (0, 0, 0, 0, 14), (0, 2, 6, 4, 2), (0, 0, 3, 5, 6), (0, 3, 9, 2, 0),
            (2, 2, 8, 1, 1), (7, 7, 0, 0, 0), (3, 2, 6, 3, 0), (2, 5, 3, 2, 2),
            (6, 5, 2, 1, 0), (0, 2, 2, 3, 7),
        ]
        m = AgreementMatrix(rows=rows, categories=tuple("abcde"), raters=14)
        got = fleiss_kappa(m)
        assert got == pytest.approx(0.20993070442195524, abs=1e-15)
        assert got == pytest.approx(kappa_oracle(rows, 14), abs=1e-12)

    def test_exact_fraction_value(self):
        # 3 items, 2 raters: rows (2,0),(1,1),(0,2)
        # P_o = 2/3, p = (1/2, 1/2), P_e = 1/2, kappa = (2/3 - 1/2)/(1/2) = 1/3
        m = AgreementMatrix(rows=[(2, 0), (1, 1), (0, 2)], categories=("k", "r"), raters=2)
        assert fleiss_kappa(m) == float(Fraction(1, 3))

    @given(
        n=st.integers(2, 5),
        votes=st.lists(
            st.lists(st.integers(0, 3), min_size=2, max_size=5),
            min_size=1, max_size=12,
        ),
    )
    @settings(max_examples=200)
    def test_matches_direct_formula_oracle(self, n, votes):
        k = 4
        rows = []
        for per_rater in votes:
            row = [0] * k
            for i in range(n):
                row[per_rater[i % len(per_rater)] % k] += 1
            rows.append(tuple(row))
        m = AgreementMatrix(rows=rows, categories=("a", "b", "c", "d"), raters=n)
        got = fleiss_kappa(m)
        want = kappa_oracle(rows, n)
        assert math.isclose(got, want, rel_tol=0, abs_tol=1e-12)
        assert -1.0 <= got <= 1.0 + 1e-12


class TestMatrixFromDecisions:
    def test_only_full_rows(self):
        ds = [keep("e1", "a"), remove("e1", "b"), keep("e2", "a")]
        m = matrix_from_decisions(ds, raters=2)
        assert m.rows == [(1, 1)]

    def test_last_write_wins(self):
        ds = [keep("e1", "a"), keep("e1", "b"), remove("e1", "a")]
        m = matrix_from_decisions(ds, raters=2)
        assert m.rows == [(1, 1)]

    def test_item_order_is_first_seen(self):
        ds = [keep("e2", "a"), keep("e1", "a"), keep("e1", "b"), remove("e2", "b")]
        m = matrix_from_decisions(ds, raters=2)
        assert m.rows == [(1, 1), (2, 0)]

    def test_reason_axis(self):
        ds = [remove("e1", "a", reason="faulty"), remove("e1", "b", reason="personal_info")]
        m = matrix_from_decisions(ds, raters=2, by="reason")
        assert m.categories == ("ok", "faulty", "out_of_context", "irrelevant", "personal_info")
        assert m.rows == [(0, 1, 0, 0, 1)]

    def test_unknown_axis(self):
        with pytest.raises(AnnotationError, match="axis"):
            matrix_from_decisions([], raters=2, by="mood")


class TestAssignSamples:
    def test_paper_shape_twenty_items_four_annotators(self):
        items = [f"e{i:02d}" for i in range(20)]
        annotators = ["a", "b", "c", "d"]
        assignment = assign_samples(items, annotators, per_annotator=10,
                                    raters_per_item=2, seed=0)
        assert set(assignment) == set(items)
        assert all(len(set(raters)) == 2 for raters in assignment.values())
        load = Counter(r for raters in assignment.values() for r in raters)
        assert load == {"a": 10, "b": 10, "c": 10, "d": 10}

    def test_partition_case(self):
        assignment = assign_samples(["e1", "e2", "e3", "e4"], ["a", "b"],
                                    per_annotator=2, raters_per_item=1, seed=3)
        buckets = {}
        for item, (rater,) in assignment.items():
            buckets.setdefault(rater, []).append(item)
        assert sorted(len(v) for v in buckets.values()) == [2, 2]
        assert sorted(i for v in buckets.values() for i in v) == ["e1", "e2", "e3", "e4"]

    def test_infeasible_names_both_sides(self):
        with pytest.raises(AnnotationError) as exc:
            assign_samples(["e1", "e2", "e3", "e4", "e5"], ["a", "b"],
                           per_annotator=2, raters_per_item=1)
        msg = str(exc.value)
        assert "5" in msg and "4" in msg and "!=" in msg

    def test_raters_exceed_annotators(self):
        # 2*3 == 2*3 keeps the arithmetic feasible; the rater bound still trips
        with pytest.raises(AnnotationError, match="exceeds"):
            assign_samples(["e1", "e2"], ["a", "b"], per_annotator=3, raters_per_item=3)

    def test_duplicate_items(self):
        with pytest.raises(AnnotationError, match="duplicate item"):
            assign_samples(["e1", "e1"], ["a"], per_annotator=2, raters_per_item=1)

    def test_deterministic_under_seed(self):
        items = [f"e{i}" for i in range(12)]
        annotators = ["a", "b", "c"]
        first = assign_samples(items, annotators, 8, 2, seed=5)
        second = assign_samples(items, annotators, 8, 2, seed=5)
        assert first == second

    def test_seed_changes_assignment(self):
        items = [f"e{i:02d}" for i in range(20)]
        annotators = ["a", "b", "c", "d"]
        assert assign_samples(items, annotators, 10, 2, seed=0) != \
            assign_samples(items, annotators, 10, 2, seed=1)

    def test_keys_keep_input_order(self):
        items = ["z", "m", "a"]
        assignment = assign_samples(items, ["p", "q", "r"], 1, 1, seed=2)
        assert list(assignment) == items

    @given(
        annotators_n=st.integers(2, 6),
        rpi_raw=st.integers(1, 6),
        q=st.integers(1, 4),
        seed=st.integers(0, 99),
    )
    @settings(max_examples=150)
    def test_both_count_constraints_always_hold(self, annotators_n, rpi_raw, q, seed):
        rpi = min(rpi_raw, annotators_n)
        items = [f"e{i}" for i in range(annotators_n * q)]
        annotators = [f"a{i}" for i in range(annotators_n)]
        per_annotator = rpi * q
        assignment = assign_samples(items, annotators, per_annotator, rpi, seed=seed)
        assert set(assignment) == set(items)
        for raters in assignment.values():
            assert len(raters) == rpi
            assert len(set(raters)) == rpi
        load = Counter(r for raters in assignment.values() for r in raters)
        assert all(load[a] == per_annotator for a in annotators)


def calibration_session(n_items=10):
    items = [f"e{i}" for i in range(n_items)]
    gold = {i: keep(i, "gold") for i in items}
    return Session(
        id="cal", annotators=["a"], items=items,
        assignment={i: ("a",) for i in items},
        phase="calibration", gold=gold,
    )


class TestQualification:
    def test_nine_of_ten_passes(self):
        s = calibration_session()
        ds = [keep(f"e{i}", "a") for i in range(9)] + [remove("e9", "a")]
        score = qualification_score("a", s, ds)
        assert score == 0.9
        assert qualifies(score)

    def test_eight_of_ten_fails(self):
        s = calibration_session()
        ds = [keep(f"e{i}", "a") for i in range(8)] + [remove("e8", "a"), remove("e9", "a")]
        score = qualification_score("a", s, ds)
        assert score == 0.8
        assert not qualifies(score)

    def test_all_matching(self):
        s = calibration_session(4)
        ds = [keep(f"e{i}", "a") for i in range(4)]
        assert qualification_score("a", s, ds) == 1.0

    def test_zero_decided_is_error(self):
        s = calibration_session()
        with pytest.raises(AnnotationError, match="decided no"):
            qualification_score("a", s, [])

    def test_requires_calibration_phase(self):
        s = make_session()
        with pytest.raises(AnnotationError, match="calibration"):
            qualification_score("a", s, [keep("e1", "a")])

    def test_revised_decision_counts_once(self):
        s = calibration_session(2)
        ds = [remove("e0", "a"), keep("e0", "a"), keep("e1", "a")]
        assert qualification_score("a", s, ds) == 1.0

    def test_threshold_value(self):
        assert QUALIFICATION_THRESHOLD == 0.90
        assert qualifies(0.90)
        assert not qualifies(0.899)


class TestApplyReview:
    def test_any_remove_drops_split_vote(self):
        ds = [keep("e1", "a"), remove("e1", "b")]
        assert apply_review(["e1"], ds, policy="any_remove") == []

    def test_majority_keeps_split_vote(self):
        ds = [keep("e1", "a"), remove("e1", "b")]
        assert apply_review(["e1"], ds, policy="majority") == ["e1"]

    def test_undecided_entries_kept(self):
        assert apply_review(["e1", "e2"], [remove("e1", "a")]) == ["e2"]

    def test_unknown_policy(self):
        with pytest.raises(AnnotationError, match="policy"):
            apply_review(["e1"], [], policy="consensus")

    def test_decision_for_unknown_entry(self):
        with pytest.raises(AnnotationError, match="unknown entry"):
            apply_review(["e1"], [keep("e9", "a")])

    def test_input_order_preserved(self):
        ids = ["e3", "e1", "e2"]
        assert apply_review(ids, []) == ids

    def test_last_write_wins_per_annotator(self):
        ds = [remove("e1", "a"), keep("e1", "a")]
        assert apply_review(["e1"], ds, policy="any_remove") == ["e1"]

    def test_ten_entry_fixture_hand_applied(self):
        ids = [f"e{i}" for i in range(10)]
        ds = [
            # e0: unanimous keep
            keep("e0", "a"), keep("e0", "b"),
            # e1: unanimous remove
            remove("e1", "a"), remove("e1", "b"),
            # e2: split 1-1
            keep("e2", "a"), remove("e2", "b"),
            # e3: 2 keep 1 remove
            keep("e3", "a"), keep("e3", "b"), remove("e3", "c"),
            # e4: 1 keep 2 remove
            keep("e4", "a"), remove("e4", "b"), remove("e4", "c"),
            # e5: single keep
            keep("e5", "a"),
            # e6: single remove
            remove("e6", "a"),
            # e7, e8, e9: undecided
        ]
        assert apply_review(ids, ds, policy="any_remove") == ["e0", "e5", "e7", "e8", "e9"]
        assert apply_review(ids, ds, policy="majority") == [
            "e0", "e2", "e3", "e5", "e7", "e8", "e9"
        ]

    @given(st.data())
    @settings(max_examples=60)
    def test_any_remove_anti_monotone(self, data):
        ids = [f"e{i}" for i in range(6)]
        annotators = ["a", "b", "c"]
        n = data.draw(st.integers(0, 10))
        ds = []
        for _ in range(n):
            eid = data.draw(st.sampled_from(ids))
            ann = data.draw(st.sampled_from(annotators))
            if data.draw(st.booleans()):
                ds.append(keep(eid, ann))
            else:
                ds.append(remove(eid, ann))
        before = set(apply_review(ids, ds, policy="any_remove"))
        extra = remove(data.draw(st.sampled_from(ids)), "d")
        after = set(apply_review(ids, ds + [extra], policy="any_remove"))
        assert after <= before


class TestDecisionStore:
    def test_append_then_replay(self, tmp_path):
        path = tmp_path / "log.jsonl"
        store = DecisionStore(path)
        store.append(keep("e1", "a"))
        store.append(remove("e2", "b"))
        assert len(store) == 2

        replayed = DecisionStore(path)
        ds = replayed.decisions()
        assert [(d.entry_id, d.verdict) for d in ds] == [("e1", "keep"), ("e2", "remove")]

    def test_append_stamps_time(self, tmp_path):
        store = DecisionStore(tmp_path / "log.jsonl")
        stored = store.append(keep("e1", "a"))
        assert stored.timestamp > 0

    def test_explicit_timestamp_kept(self, tmp_path):
        store = DecisionStore(tmp_path / "log.jsonl")
        stored = store.append(keep("e1", "a", ts=42.0))
        assert stored.timestamp == 42.0

    def test_latest_wins(self, tmp_path):
        store = DecisionStore(tmp_path / "log.jsonl")
        store.append(keep("e1", "a"))
        store.append(remove("e1", "a"))
        latest = store.latest()
        assert latest[("e1", "a")].verdict == "remove"
        assert len(store) == 2  # both logged

    def test_decided_by(self, tmp_path):
        store = DecisionStore(tmp_path / "log.jsonl")
        store.append(keep("e1", "a"))
        store.append(keep("e2", "b"))
        assert store.decided_by("a") == {"e1"}

    def test_corrupt_log_names_line(self, tmp_path):
        path = tmp_path / "log.jsonl"
        good = json.dumps(keep("e1", "a", ts=1.0).as_dict())
        path.write_text(good + "\n{not json\n", encoding="utf-8")
        with pytest.raises(ValueError, match=r"log\.jsonl:2: corrupt"):
            DecisionStore(path)

    def test_invalid_decision_in_log(self, tmp_path):
        path = tmp_path / "log.jsonl"
        row = keep("e1", "a", ts=1.0).as_dict()
        row["verdict"] = "maybe"
        path.write_text(json.dumps(row) + "\n", encoding="utf-8")
        with pytest.raises(ValueError, match="corrupt"):
            DecisionStore(path)

    def test_survives_restart_cycle(self, tmp_path):
        path = tmp_path / "log.jsonl"
        DecisionStore(path).append(keep("e1", "a"))
        DecisionStore(path).append(remove("e2", "b"))
        final = DecisionStore(path)
        assert len(final) == 2
        assert final.decided_by("a") == {"e1"}
        assert final.decided_by("b") == {"e2"}
