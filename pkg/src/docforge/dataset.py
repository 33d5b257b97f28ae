"""Dataset assembly, deterministic splitting, and serialization."""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from ._jsonl import read_jsonl, write_json, write_jsonl
from .extract import ExtractionRecord, stable_id

DEFAULT_KINDS = ("method", "constructor")
DEFAULT_RATIOS = (0.7687, 0.0387, 0.1926)
SPLIT_NAMES = ("train", "validation", "test")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    package: str
    enclosing_class: str
    kind: str
    code: str
    documentation: str
    repo: str
    license_id: str
    uses_lambda: bool

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "package": self.package,
            "enclosing_class": self.enclosing_class,
            "kind": self.kind,
            "code": self.code,
            "documentation": self.documentation,
            "repo": self.repo,
            "license_id": self.license_id,
            "uses_lambda": self.uses_lambda,
        }

    @classmethod
    def from_dict(cls, row: dict) -> "DatasetEntry":
        return cls(
            id=row["id"],
            package=row["package"],
            enclosing_class=row["enclosing_class"],
            kind=row["kind"],
            code=row["code"],
            documentation=row["documentation"],
            repo=row["repo"],
            license_id=row["license_id"],
            uses_lambda=bool(row["uses_lambda"]),
        )


@dataclass(frozen=True)
class BuildConfig:
    kinds: tuple[str, ...] = DEFAULT_KINDS
    include_types: bool = False  # also admit class/interface/enum/record entries

    def allowed(self) -> frozenset:
        kinds = set(self.kinds)
        if self.include_types:
            kinds |= {"class", "interface", "enum", "record"}
        return frozenset(kinds)


@dataclass
class SplitAssignment:
    train: set[str]
    validation: set[str]
    test: set[str]
    seed: int
    ratios: tuple[float, float, float]

    def split_of(self, entry_id: str) -> str:
        for name in SPLIT_NAMES:
            if entry_id in getattr(self, name):
                return name
        raise KeyError(entry_id)

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)


def assemble(kept: list[ExtractionRecord], config: BuildConfig = BuildConfig()) -> list[DatasetEntry]:
    allowed = config.allowed()
    entries = []
    seen: dict[str, ExtractionRecord] = {}
    for record in kept:
        if record.decl.kind not in allowed:
            continue
        if not record.javadoc.raw.startswith("/**") or not record.javadoc.raw.endswith("*/"):
            raise DatasetError(f"record {record.repo}:{record.rel_path} has a malformed doc block")
        entry_id = stable_id(record.repo, record.rel_path, record.decl.span)
        if entry_id in seen:
            prev = seen[entry_id]
            raise DatasetError(
                f"id collision: {record.repo}:{record.rel_path}{record.decl.span} vs "
                f"{prev.repo}:{prev.rel_path}{prev.decl.span}"
            )
        seen[entry_id] = record
        entries.append(
            DatasetEntry(
                id=entry_id,
                package=record.decl.package or "",
                enclosing_class=".".join(record.decl.enclosing_chain),
                kind=record.decl.kind,
                code=record.code,
                documentation=record.javadoc.raw,
                repo=record.repo,
                license_id=record.license_id,
                uses_lambda=record.decl.uses_lambda,
            )
        )
    return entries


def split_sizes(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    n1 = round(ratios[0] * n)
    n2 = round(ratios[1] * n)
    n3 = n - n1 - n2
    if n3 < 0:
        raise DatasetError(f"ratios {ratios} over-allocate {n} entries")
    return n1, n2, n3


def _check_ratios(ratios) -> tuple[float, float, float]:
    if len(ratios) != 3:
        raise DatasetError("exactly three split ratios required")
    if any(r <= 0 for r in ratios):
        raise DatasetError(f"ratios must be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DatasetError(f"ratios must sum to 1, got {sum(ratios)}")
    return tuple(float(r) for r in ratios)


def split(
    entries: list[DatasetEntry],
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> SplitAssignment:
    """Seeded shuffle, then cut at rounded boundaries. Each split lands within
    ±1 of ratio * N."""
    ratios = _check_ratios(ratios)
    if len(entries) < 3:
        raise DatasetError("need at least 3 entries to split")
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise DatasetError("duplicate entry ids")
    rng = random.Random(seed)
    rng.shuffle(ids)
    n1, n2, _ = split_sizes(len(ids), ratios)
    return SplitAssignment(
        train=set(ids[:n1]),
        validation=set(ids[n1 : n1 + n2]),
        test=set(ids[n1 + n2 :]),
        seed=seed,
        ratios=ratios,
    )


def split_stratified(
    entries: list[DatasetEntry],
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> SplitAssignment:
    """The same ratio cut applied within each repo separately."""
    ratios = _check_ratios(ratios)
    if len(entries) < 3:
        raise DatasetError("need at least 3 entries to split")
    assignment = SplitAssignment(train=set(), validation=set(), test=set(), seed=seed, ratios=ratios)
    by_repo: dict[str, list[str]] = {}
    for e in entries:
        by_repo.setdefault(e.repo, []).append(e.id)
    for repo in sorted(by_repo):
        ids = by_repo[repo]
        rng = random.Random(f"{seed}:{repo}")
        rng.shuffle(ids)
        n1, n2, _ = split_sizes(len(ids), ratios)
        assignment.train.update(ids[:n1])
        assignment.validation.update(ids[n1 : n1 + n2])
        assignment.test.update(ids[n1 + n2 :])
    return assignment


def write_dataset(entries: list[DatasetEntry], assignment: SplitAssignment, out_dir: str | Path) -> dict:
    """Write train/validation/test JSONL plus a manifest; returns the manifest."""
    out = Path(out_dir)
    ids = {e.id for e in entries}
    covered = assignment.train | assignment.validation | assignment.test
    if ids != covered:
        raise DatasetError("assignment does not cover the entry set exactly")
    counts = {}
    for name in SPLIT_NAMES:
        members = getattr(assignment, name)
        rows = [e.as_dict() for e in entries if e.id in members]
        counts[name] = write_jsonl(out / f"{name}.jsonl", rows)
    manifest = {
        "counts": counts,
        "total": sum(counts.values()),
        "seed": assignment.seed,
        "ratios": list(assignment.ratios),
        "tool_version": __version__,
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def read_dataset(out_dir: str | Path) -> tuple[list[DatasetEntry], dict[str, list[str]]]:
    out = Path(out_dir)
    entries: list[DatasetEntry] = []
    by_split: dict[str, list[str]] = {}
    for name in SPLIT_NAMES:
        rows = read_jsonl(out / f"{name}.jsonl")
        split_entries = [DatasetEntry.from_dict(r) for r in rows]
        entries.extend(split_entries)
        by_split[name] = [e.id for e in split_entries]
    return entries, by_split


@dataclass
class StatsReport:
    split_totals: dict
    repo_totals: dict
    kind_totals: dict
    lambda_share: float
    code_len_mean: float
    code_len_median: float
    doc_len_mean: float
    doc_len_median: float
    total: int = 0
    split_percent: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "split_totals": self.split_totals,
            "split_percent": self.split_percent,
            "repo_totals": self.repo_totals,
            "kind_totals": self.kind_totals,
            "lambda_share": self.lambda_share,
            "code_len_mean": self.code_len_mean,
            "code_len_median": self.code_len_median,
            "doc_len_mean": self.doc_len_mean,
            "doc_len_median": self.doc_len_median,
        }


def dataset_stats(entries: list[DatasetEntry], assignment: SplitAssignment) -> StatsReport:
    total = len(entries)
    split_totals = {name: len(getattr(assignment, name)) for name in SPLIT_NAMES}
    if sum(split_totals.values()) != total:
        raise DatasetError("split totals do not sum to the corpus total")
    repo_totals: dict[str, int] = {}
    kind_totals: dict[str, int] = {}
    for e in entries:
        repo_totals[e.repo] = repo_totals.get(e.repo, 0) + 1
        kind_totals[e.kind] = kind_totals.get(e.kind, 0) + 1
    code_lens = [len(e.code) for e in entries] or [0]
    doc_lens = [len(e.documentation) for e in entries] or [0]
    return StatsReport(
        split_totals=split_totals,
        split_percent={
            name: round(100.0 * n / total, 2) if total else 0.0 for name, n in split_totals.items()
        },
        repo_totals=dict(sorted(repo_totals.items())),
        kind_totals=dict(sorted(kind_totals.items())),
        lambda_share=round(sum(1 for e in entries if e.uses_lambda) / total, 4) if total else 0.0,
        code_len_mean=round(statistics.fmean(code_lens), 2),
        code_len_median=statistics.median(code_lens),
        doc_len_mean=round(statistics.fmean(doc_lens), 2),
        doc_len_median=statistics.median(doc_lens),
        total=total,
    )
