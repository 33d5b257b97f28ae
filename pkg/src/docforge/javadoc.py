"""Locating and parsing Javadoc blocks.

Works on masked text (see masking.strip_literals) so `/**` sequences inside
string literals or ordinary comments are invisible here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .masking import MaskedText

KNOWN_TAGS = ("param", "return", "throws", "see", "deprecated", "since", "author")

# tags that carry a structured first argument (a name or type)
_ARG_TAGS = {"param", "throws"}

_TAG_LINE_RE = re.compile(r"^@([A-Za-z][A-Za-z0-9]*)\s*(.*)$", re.DOTALL)


@dataclass(frozen=True)
class JavadocTag:
    name: str  # canonical name, or "other"
    argument: str | None
    text: str


@dataclass
class JavadocBlock:
    raw: str
    span: tuple[int, int]
    description: str = ""
    tags: list[JavadocTag] = field(default_factory=list)
    terminated: bool = True


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def strip_gutter(line: str) -> str:
    """Drop the leading whitespace + `*` gutter of one comment line."""
    s = line.lstrip()
    if s.startswith("*"):
        s = s[1:]
        if s.startswith(" "):
            s = s[1:]
    return s.rstrip()


def find_doc_spans(mt: MaskedText) -> list[tuple[int, int, bool]]:
    """(start, end, terminated) for every doc comment, in source order.

    An unterminated trailing block runs to the end of the file.
    """
    masked = mt.masked
    spans = []
    i = 0
    while True:
        start = masked.find("/**", i)
        if start == -1:
            return spans
        if masked.startswith("/**/", start):  # defensive; masking removes these
            i = start + 4
            continue
        close = masked.find("*/", start + 3)
        if close == -1:
            spans.append((start, len(masked), False))
            return spans
        spans.append((start, close + 2, True))
        i = close + 2


def parse_block(raw: str, span: tuple[int, int], terminated: bool = True) -> JavadocBlock:
    """Split a raw `/** ... */` block into description and ordered tags.

    The description is the leading tag-free section, whitespace-normalized.
    Unknown or malformed tags are kept with name="other" (the original tag
    word moves into `argument`) rather than dropped.
    """
    inner = raw
    if inner.startswith("/**"):
        inner = inner[3:]
    if terminated and inner.endswith("*/"):
        inner = inner[:-2]

    lines = [strip_gutter(line) for line in inner.splitlines()]

    desc_parts: list[str] = []
    tags: list[JavadocTag] = []
    current: list[str] | None = None  # buffered lines of the tag in progress

    def flush() -> None:
        if current is None:
            return
        m = _TAG_LINE_RE.match("\n".join(current))
        assert m is not None
        name, rest = m.group(1), m.group(2)
        if name in _ARG_TAGS:
            parts = rest.split(None, 1)
            argument = parts[0] if parts else None
            text = parts[1] if len(parts) > 1 else ""
            tags.append(JavadocTag(name=name, argument=argument, text=_normalize(text)))
        elif name in KNOWN_TAGS:
            tags.append(JavadocTag(name=name, argument=None, text=_normalize(rest)))
        else:
            tags.append(JavadocTag(name="other", argument=name, text=_normalize(rest)))

    for line in lines:
        if _TAG_LINE_RE.match(line):
            flush()
            current = [line]
        elif current is not None:
            current.append(line)
        else:
            desc_parts.append(line)
    flush()

    description = _normalize("\n".join(desc_parts))
    return JavadocBlock(raw=raw, span=span, description=description, tags=tags, terminated=terminated)


def extract_javadoc_blocks(mt: MaskedText) -> list[JavadocBlock]:
    blocks = []
    for start, end, terminated in find_doc_spans(mt):
        blocks.append(parse_block(mt.original[start:end], (start, end), terminated))
    return blocks
