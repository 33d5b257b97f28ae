"""Pair Javadoc blocks with the declarations they document.

A block pairs with the nearest following declaration when the gap contains
only whitespace and annotation lines, bounded at 5 intervening lines. Each
declaration takes at most one block; unpaired blocks are orphans.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .declarations import Declaration, scan_declarations
from .javadoc import JavadocBlock, JavadocTag, extract_javadoc_blocks
from .masking import MaskedText, strip_literals

MAX_GAP_LINES = 5

_GAP_RE = re.compile(
    r"(?:\s|@\s*[A-Za-z_$][\w$]*(?:\s*\.\s*[A-Za-z_$][\w$]*)*"
    r"(?:\s*\([^()]*(?:\([^()]*\)[^()]*)*\))?)*",
)


@dataclass(frozen=True)
class ExtractionRecord:
    javadoc: JavadocBlock
    decl: Declaration
    code: str
    repo: str
    rel_path: str
    license_id: str

    @property
    def stable_id(self) -> str:
        return stable_id(self.repo, self.rel_path, self.decl.span)


@dataclass
class FileExtraction:
    records: list[ExtractionRecord] = field(default_factory=list)
    orphans: int = 0
    degraded: bool = False
    warnings: list[str] = field(default_factory=list)


def stable_id(repo: str, rel_path: str, span: tuple[int, int]) -> str:
    key = f"{repo}\n{rel_path}\n{span[0]}:{span[1]}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def _gap_is_clean(gap_masked: str) -> bool:
    if _GAP_RE.fullmatch(gap_masked) is None:
        return False
    return gap_masked.count("\n") <= MAX_GAP_LINES + 1


def pair(
    blocks: list[JavadocBlock],
    decls: list[Declaration],
    masked: str,
) -> tuple[list[tuple[JavadocBlock, Declaration]], int]:
    """(pairs, orphan_count); both inputs must come from the same file."""
    pairs: list[tuple[JavadocBlock, Declaration]] = []
    orphans = 0
    taken: set[int] = set()
    by_start = sorted(range(len(decls)), key=lambda i: decls[i].span[0])
    for block in sorted(blocks, key=lambda b: b.span[0]):
        chosen = None
        for i in by_start:
            start = decls[i].span[0]
            if start < block.span[1]:
                continue
            if i in taken:
                break  # the nearest following declaration is already claimed
            if _gap_is_clean(masked[block.span[1] : start]):
                chosen = i
            break
        if chosen is None:
            orphans += 1
        else:
            taken.add(chosen)
            pairs.append((block, decls[chosen]))
    return pairs, orphans


def extract_file(
    repo: str,
    rel_path: str,
    content: str,
    license_id: str = "",
    mt: MaskedText | None = None,
) -> FileExtraction:
    mt = mt if mt is not None else strip_literals(content)
    blocks = extract_javadoc_blocks(mt)
    scan = scan_declarations(mt)
    matched, orphans = pair(blocks, scan.declarations, mt.masked)
    records = [
        ExtractionRecord(
            javadoc=block,
            decl=decl,
            code=mt.original[decl.span[0] : decl.span[1]],
            repo=repo,
            rel_path=rel_path,
            license_id=license_id,
        )
        for block, decl in matched
    ]
    return FileExtraction(
        records=records,
        orphans=orphans,
        degraded=scan.degraded,
        warnings=list(mt.warnings),
    )


# -- JSONL round trip ---------------------------------------------------------


def record_to_row(record: ExtractionRecord) -> dict:
    return {
        "repo": record.repo,
        "rel_path": record.rel_path,
        "package": record.decl.package or "",
        "enclosing_class": ".".join(record.decl.enclosing_chain),
        "kind": record.decl.kind,
        "signature": record.decl.signature,
        "code": record.code,
        "javadoc_raw": record.javadoc.raw,
        "javadoc_description": record.javadoc.description,
        "javadoc_tags": [
            {"name": t.name, "argument": t.argument, "text": t.text} for t in record.javadoc.tags
        ],
        "uses_lambda": record.decl.uses_lambda,
        "license_id": record.license_id,
        "span": list(record.decl.span),
        "javadoc_span": list(record.javadoc.span),
    }


def record_from_row(row: dict) -> ExtractionRecord:
    """Rebuild a record from its JSONL form.

    Declaration internals that the downstream stages never read (body span,
    modifiers) are not serialized and come back empty.
    """
    jd_span = tuple(row.get("javadoc_span", (0, 0)))
    span = tuple(row["span"])
    raw = row["javadoc_raw"]
    block = JavadocBlock(
        raw=raw,
        span=jd_span,
        description=row["javadoc_description"],
        tags=[
            JavadocTag(name=t["name"], argument=t.get("argument"), text=t.get("text", ""))
            for t in row.get("javadoc_tags", [])
        ],
        terminated=raw.endswith("*/"),
    )
    chain = tuple(p for p in row.get("enclosing_class", "").split(".") if p)
    name = chain[-1] if row["kind"] in ("class", "interface", "enum", "record") and chain else ""
    decl = Declaration(
        kind=row["kind"],
        name=name,
        signature=row["signature"],
        span=span,
        body_span=None,
        modifiers=(),
        type_params=None,
        enclosing_chain=chain,
        uses_lambda=bool(row.get("uses_lambda", False)),
        package=row.get("package") or None,
    )
    return ExtractionRecord(
        javadoc=block,
        decl=decl,
        code=row["code"],
        repo=row["repo"],
        rel_path=row["rel_path"],
        license_id=row.get("license_id", ""),
    )
