"""Automated quality screening of extraction records.

Reject rules run in declared order, first match wins; deduplication follows;
PII rules only flag, routing records to human review instead of dropping them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .declarations import signature_matches
from .extract import ExtractionRecord
from .javadoc import JavadocBlock
from .masking import strip_literals

STUB_PREFIXES = ("todo", "auto-generated method stub", "created by")

MIN_CODE_CHARS = 20
MAX_CODE_CHARS = 20_000

_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}")
_CRED_URL_RE = re.compile(
    r"https?://(?:[^\s/@\"']+:[^\s/@\"']+@[^\s\"']+"  # user:pass@host
    r"|[^\s\"']*[?&](?:token|key|secret|password|api_key|access_token)=[^\s\"'&]+)",
    re.IGNORECASE,
)

_OPEN = "([{"
_CLOSE = ")]}"
_MATCH = {")": "(", "]": "[", "}": "{"}


class RuleConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FilterRule:
    id: str
    description: str
    severity: str  # "reject" | "flag"


DEFAULT_RULES: tuple[FilterRule, ...] = (
    FilterRule("javadoc_unterminated", "doc block never closes", "reject"),
    FilterRule("empty_description", "no prose left after gutter stripping", "reject"),
    FilterRule("stub_description", "auto-generated stub text", "reject"),
    FilterRule("unbalanced_code", "brackets do not balance in the masked code", "reject"),
    FilterRule("signature_mismatch", "header fails the declaration pattern", "reject"),
    FilterRule("too_short", "code below the minimum length", "reject"),
    FilterRule("too_long", "code above the maximum length", "reject"),
    FilterRule("pii_email", "email address present", "flag"),
    FilterRule("pii_credential_url", "URL carrying credentials or a token", "flag"),
    FilterRule("pii_author_tag", "author tag naming a person", "flag"),
)


@dataclass(frozen=True)
class FilterConfig:
    min_code_chars: int = MIN_CODE_CHARS
    max_code_chars: int = MAX_CODE_CHARS
    stub_prefixes: tuple[str, ...] = STUB_PREFIXES


@dataclass
class FilterOutcome:
    kept: list[ExtractionRecord] = field(default_factory=list)
    rejected: list[tuple[ExtractionRecord, str]] = field(default_factory=list)
    flags: list[tuple[str, str]] = field(default_factory=list)  # (record_id, rule_id)
    counts: dict = field(default_factory=dict)
    duplicates_dropped: int = 0


def _is_stub(description: str, config: FilterConfig) -> bool:
    lowered = description.strip().lower()
    return any(lowered.startswith(prefix) for prefix in config.stub_prefixes)


def validate_javadoc(block: JavadocBlock, config: FilterConfig = FilterConfig()) -> str | None:
    """Rule id of the first javadoc-level failure, or None when the block passes."""
    if not block.terminated or not block.raw.endswith("*/"):
        return "javadoc_unterminated"
    if not block.description.strip():
        return "empty_description"
    if _is_stub(block.description, config):
        return "stub_description"
    return None


def _brackets_balanced(masked_code: str) -> bool:
    stack: list[str] = []
    for ch in masked_code:
        if ch in _OPEN:
            stack.append(ch)
        elif ch in _CLOSE:
            if not stack or stack[-1] != _MATCH[ch]:
                return False
            stack.pop()
    return not stack


def validate_snippet(record: ExtractionRecord, config: FilterConfig = FilterConfig()) -> str | None:
    """Rule id of the first code-level failure, or None when the snippet passes."""
    masked_code = strip_literals(record.code).masked
    if not _brackets_balanced(masked_code):
        return "unbalanced_code"
    masked_sig = strip_literals(record.decl.signature).masked
    if not signature_matches(masked_sig, record.decl.kind):
        return "signature_mismatch"
    if len(record.code) < config.min_code_chars:
        return "too_short"
    if len(record.code) > config.max_code_chars:
        return "too_long"
    return None


def scan_pii(record: ExtractionRecord) -> list[str]:
    flags = []
    haystack = record.javadoc.raw + "\n" + record.code
    if _EMAIL_RE.search(haystack):
        flags.append("pii_email")
    if _CRED_URL_RE.search(haystack):
        flags.append("pii_credential_url")
    if any(t.name == "author" and t.text.strip() for t in record.javadoc.tags):
        flags.append("pii_author_tag")
    return flags


def _collapse_ws(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def dedup_key(record: ExtractionRecord) -> tuple[str, str]:
    return _collapse_ws(record.code), _collapse_ws(record.javadoc.description)


def deduplicate(records: list[ExtractionRecord]) -> tuple[list[ExtractionRecord], int]:
    """Drop records whose (normalized code, normalized description) repeats.

    The first occurrence in (repo, rel_path, span) order wins; output keeps
    that canonical order.
    """
    ordered = sorted(records, key=lambda r: (r.repo, r.rel_path, r.decl.span))
    seen: set[tuple[str, str]] = set()
    unique = []
    for record in ordered:
        key = dedup_key(record)
        if key in seen:
            continue
        seen.add(key)
        unique.append(record)
    return unique, len(records) - len(unique)


# independent predicates so a custom rule ORDER actually changes which rule
# gets credited when a record violates several
_CHECKS = {
    "javadoc_unterminated": lambda r, cfg: not (r.javadoc.terminated and r.javadoc.raw.endswith("*/")),
    "empty_description": lambda r, cfg: not r.javadoc.description.strip(),
    "stub_description": lambda r, cfg: _is_stub(r.javadoc.description, cfg),
    "unbalanced_code": lambda r, cfg: not _brackets_balanced(strip_literals(r.code).masked),
    "signature_mismatch": lambda r, cfg: not signature_matches(
        strip_literals(r.decl.signature).masked, r.decl.kind
    ),
    "too_short": lambda r, cfg: len(r.code) < cfg.min_code_chars,
    "too_long": lambda r, cfg: len(r.code) > cfg.max_code_chars,
    "pii_email": lambda r, cfg: "pii_email" in scan_pii(r),
    "pii_credential_url": lambda r, cfg: "pii_credential_url" in scan_pii(r),
    "pii_author_tag": lambda r, cfg: "pii_author_tag" in scan_pii(r),
}


def load_rules(path: str | Path) -> tuple[FilterRule, ...]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    raw_rules = data["rules"] if isinstance(data, dict) else data
    rules = []
    for raw in raw_rules:
        rule = FilterRule(
            id=raw["id"],
            description=raw.get("description", ""),
            severity=raw.get("severity", "reject"),
        )
        rules.append(rule)
    _validate_rules(rules)
    return tuple(rules)


def _validate_rules(rules) -> None:
    if not rules:
        raise RuleConfigError("rule set must not be empty")
    ids = [r.id for r in rules]
    if len(ids) != len(set(ids)):
        raise RuleConfigError("duplicate rule ids")
    unknown = [r.id for r in rules if r.id not in _CHECKS]
    if unknown:
        raise RuleConfigError(f"unknown rule ids: {unknown}")
    bad = [r.id for r in rules if r.severity not in ("reject", "flag")]
    if bad:
        raise RuleConfigError(f"bad severity on rules: {bad}")


def apply_filters(
    records: list[ExtractionRecord],
    rules: tuple[FilterRule, ...] = DEFAULT_RULES,
    config: FilterConfig = FilterConfig(),
) -> FilterOutcome:
    _validate_rules(rules)
    outcome = FilterOutcome(counts={r.id: 0 for r in rules})
    reject_rules = [r for r in rules if r.severity == "reject"]
    flag_rules = [r for r in rules if r.severity == "flag"]

    survivors = []
    for record in records:
        hit = None
        for rule in reject_rules:
            if _CHECKS[rule.id](record, config):
                hit = rule.id
                break
        if hit is None:
            survivors.append(record)
        else:
            outcome.rejected.append((record, hit))
            outcome.counts[hit] += 1

    outcome.kept, outcome.duplicates_dropped = deduplicate(survivors)
    outcome.counts["duplicate"] = outcome.duplicates_dropped

    for record in outcome.kept:
        for rule in flag_rules:
            if _CHECKS[rule.id](record, config):
                outcome.flags.append((record.stable_id, rule.id))
                outcome.counts[rule.id] += 1
    return outcome


def outcome_report(outcome: FilterOutcome, total_in: int) -> dict:
    return {
        "input": total_in,
        "kept": len(outcome.kept),
        "rejected": len(outcome.rejected),
        "duplicates_dropped": outcome.duplicates_dropped,
        "flagged_records": len({rid for rid, _ in outcome.flags}),
        "counts": dict(sorted(outcome.counts.items())),
    }
