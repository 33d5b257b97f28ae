"""Human review stage: assignment, decisions, agreement, qualification.

Kappa is computed in exact rational arithmetic and converted to float once at
the end, so property tests can pin it against a direct-formula oracle tightly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

VERDICTS = ("keep", "remove")
REASONS = ("ok", "faulty", "out_of_context", "irrelevant", "personal_info")
PHASES = ("calibration", "review")

QUALIFICATION_THRESHOLD = 0.90


class AnnotationError(ValueError):
    pass


@dataclass(frozen=True)
class Decision:
    entry_id: str
    annotator_id: str
    verdict: str
    reason: str
    timestamp: float = 0.0

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise AnnotationError(f"unknown verdict {self.verdict!r}")
        if self.reason not in REASONS:
            raise AnnotationError(f"unknown reason {self.reason!r}")
        # a keep carries no complaint; a remove must name one
        if (self.verdict == "keep") != (self.reason == "ok"):
            raise AnnotationError(
                f"verdict {self.verdict!r} is incompatible with reason {self.reason!r}"
            )

    def as_dict(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "annotator_id": self.annotator_id,
            "verdict": self.verdict,
            "reason": self.reason,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Decision":
        return cls(
            entry_id=d["entry_id"],
            annotator_id=d["annotator_id"],
            verdict=d["verdict"],
            reason=d["reason"],
            timestamp=float(d.get("timestamp", 0.0)),
        )


@dataclass
class Session:
    id: str
    annotators: list[str]
    items: list[str]
    assignment: dict[str, tuple[str, ...]]  # entry id -> rater ids
    phase: str = "review"
    gold: dict[str, Decision] | None = None

    def __post_init__(self):
        if self.phase not in PHASES:
            raise AnnotationError(f"unknown phase {self.phase!r}")
        known = set(self.annotators)
        if len(known) != len(self.annotators):
            raise AnnotationError("duplicate annotator ids")
        item_set = set(self.items)
        for entry_id, raters in self.assignment.items():
            if entry_id not in item_set:
                raise AnnotationError(f"assignment references unknown item {entry_id}")
            if len(set(raters)) != len(raters):
                raise AnnotationError(f"item {entry_id} assigned twice to one annotator")
            unknown = set(raters) - known
            if unknown:
                raise AnnotationError(f"unregistered annotators {sorted(unknown)}")
        if self.phase == "calibration":
            missing = item_set - set(self.gold or {})
            if missing:
                raise AnnotationError(
                    f"calibration session lacks gold labels for {len(missing)} items"
                )

    def assigned_to(self, annotator_id: str) -> list[str]:
        if annotator_id not in self.annotators:
            raise AnnotationError(f"unknown annotator {annotator_id!r}")
        return [i for i in self.items if annotator_id in self.assignment.get(i, ())]

    def raters_per_item(self) -> int:
        counts = {len(r) for r in self.assignment.values()}
        if len(counts) != 1:
            raise AnnotationError("items have differing rater counts")
        return counts.pop()

    def as_dict(self) -> dict:
        d = {
            "id": self.id,
            "phase": self.phase,
            "annotators": list(self.annotators),
            "items": list(self.items),
            "assignment": {k: list(v) for k, v in self.assignment.items()},
        }
        if self.gold is not None:
            d["gold"] = {
                k: {"verdict": v.verdict, "reason": v.reason} for k, v in self.gold.items()
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Session":
        gold = None
        if "gold" in d:
            gold = {
                k: Decision(entry_id=k, annotator_id="gold",
                            verdict=v["verdict"], reason=v["reason"])
                for k, v in d["gold"].items()
            }
        return cls(
            id=d["id"],
            annotators=list(d["annotators"]),
            items=list(d["items"]),
            assignment={k: tuple(v) for k, v in d["assignment"].items()},
            phase=d.get("phase", "review"),
            gold=gold,
        )


@dataclass
class AgreementMatrix:
    rows: list[tuple[int, ...]]  # per item: rater count per category
    categories: tuple[str, ...]
    raters: int

    def __post_init__(self):
        if self.raters < 2:
            raise AnnotationError("agreement needs at least 2 raters per item")
        if len(self.categories) < 2:
            raise AnnotationError("agreement needs at least 2 categories")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.categories):
                raise AnnotationError(f"row {i} has {len(row)} cells, expected {len(self.categories)}")
            if any(c < 0 for c in row):
                raise AnnotationError(f"row {i} has a negative count")
            if sum(row) != self.raters:
                raise AnnotationError(f"row {i} sums to {sum(row)}, expected {self.raters}")


def fleiss_kappa(m: AgreementMatrix) -> float:
    """Chance-corrected agreement over m; exact arithmetic internally."""
    if not m.rows:
        raise AnnotationError("empty agreement matrix")
    n = m.raters
    big_n = len(m.rows)

    per_item = [
        Fraction(sum(c * c for c in row) - n, n * (n - 1)) for row in m.rows
    ]
    p_obs = sum(per_item, Fraction(0)) / big_n

    totals = [sum(row[j] for row in m.rows) for j in range(len(m.categories))]
    shares = [Fraction(t, big_n * n) for t in totals]
    p_exp = sum((s * s for s in shares), Fraction(0))

    if p_exp == 1:
        if p_obs == 1:
            return 1.0
        raise AnnotationError("degenerate matrix: expected agreement is 1 with disagreement present")
    return float((p_obs - p_exp) / (1 - p_exp))


def matrix_from_decisions(
    decisions: list[Decision],
    raters: int,
    by: str = "verdict",
) -> AgreementMatrix:
    """Rows for every item that collected exactly `raters` decisions.

    Later decisions by the same annotator on the same item replace earlier
    ones. Items short of the full rater count are left out (no extrapolation).
    """
    if by == "verdict":
        categories = VERDICTS
    elif by == "reason":
        categories = REASONS
    else:
        raise AnnotationError(f"unknown category axis {by!r}")

    latest: dict[tuple[str, str], Decision] = {}
    order: list[str] = []
    for d in decisions:
        if d.entry_id not in order:
            order.append(d.entry_id)
        latest[(d.entry_id, d.annotator_id)] = d

    rows = []
    for entry_id in order:
        votes = [d for (eid, _), d in latest.items() if eid == entry_id]
        if len(votes) != raters:
            continue
        row = [0] * len(categories)
        for d in votes:
            row[categories.index(getattr(d, by))] += 1
        rows.append(tuple(row))
    return AgreementMatrix(rows=rows, categories=categories, raters=raters)


def assign_samples(
    items: list[str],
    annotators: list[str],
    per_annotator: int,
    raters_per_item: int,
    seed: int = 0,
) -> dict[str, tuple[str, ...]]:
    """Each annotator gets exactly per_annotator items, each item exactly
    raters_per_item distinct raters. Deterministic under seed."""
    n_items, n_annot = len(items), len(annotators)
    if len(set(items)) != n_items:
        raise AnnotationError("duplicate item ids")
    if len(set(annotators)) != n_annot:
        raise AnnotationError("duplicate annotator ids")
    lhs = n_items * raters_per_item
    rhs = n_annot * per_annotator
    if lhs != rhs:
        raise AnnotationError(
            f"infeasible assignment: items*raters_per_item = {n_items}*{raters_per_item} = {lhs} "
            f"!= annotators*per_annotator = {n_annot}*{per_annotator} = {rhs}"
        )
    if raters_per_item > n_annot:
        raise AnnotationError(
            f"raters_per_item {raters_per_item} exceeds the {n_annot} annotators available"
        )
    if raters_per_item < 1 or per_annotator < 1:
        raise AnnotationError("counts must be positive")

    rng = random.Random(seed)
    shuffled_items = list(items)
    rng.shuffle(shuffled_items)
    order = list(annotators)
    rng.shuffle(order)

    # walk assignment slots cyclically; consecutive slots of one item are
    # distinct annotators because raters_per_item <= len(annotators)
    assignment: dict[str, tuple[str, ...]] = {}
    slot = 0
    for item in shuffled_items:
        raters = tuple(order[(slot + j) % n_annot] for j in range(raters_per_item))
        assignment[item] = raters
        slot += raters_per_item
    return {item: assignment[item] for item in items}


def qualification_score(
    annotator_id: str,
    session: Session,
    decisions: list[Decision],
) -> float:
    """Share of the annotator's calibration verdicts matching gold."""
    if session.phase != "calibration" or not session.gold:
        raise AnnotationError("qualification requires a calibration session with gold labels")
    latest: dict[str, Decision] = {}
    for d in decisions:
        if d.annotator_id == annotator_id and d.entry_id in session.gold:
            latest[d.entry_id] = d
    if not latest:
        raise AnnotationError(f"annotator {annotator_id!r} decided no calibration items")
    hits = sum(
        1 for eid, d in latest.items() if d.verdict == session.gold[eid].verdict
    )
    return hits / len(latest)


def qualifies(score: float) -> bool:
    return score >= QUALIFICATION_THRESHOLD


def apply_review(
    entry_ids: list[str],
    decisions: list[Decision],
    policy: str = "any_remove",
) -> list[str]:
    """Kept entry ids after the human pass; undecided entries are kept."""
    if policy not in ("any_remove", "majority"):
        raise AnnotationError(f"unknown policy {policy!r}")
    known = set(entry_ids)
    latest: dict[tuple[str, str], Decision] = {}
    for d in decisions:
        if d.entry_id not in known:
            raise AnnotationError(f"decision references unknown entry {d.entry_id}")
        latest[(d.entry_id, d.annotator_id)] = d

    votes: dict[str, list[str]] = {}
    for (eid, _), d in latest.items():
        votes.setdefault(eid, []).append(d.verdict)

    kept = []
    for eid in entry_ids:
        vs = votes.get(eid, [])
        removes = vs.count("remove")
        keeps = vs.count("keep")
        if policy == "any_remove":
            removed = removes > 0
        else:
            removed = removes > keeps
        if not removed:
            kept.append(eid)
    return kept
