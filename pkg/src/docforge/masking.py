"""Literal-aware masking of Java source text.

Regex-based extraction is only safe once string literals, char literals, text
blocks, line comments, and plain block comments cannot produce false matches.
This module blanks all of those out character-for-character (newlines kept, so
offsets and line numbers survive) while leaving doc comments untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

STRING = "string"
CHAR = "char"
LINE_COMMENT = "line_comment"
BLOCK_COMMENT = "block_comment"
TEXT_BLOCK = "text_block"


@dataclass(frozen=True)
class MaskSpan:
    start: int
    end: int  # exclusive
    kind: str


@dataclass
class MaskedText:
    original: str
    masked: str
    mask_spans: list[MaskSpan] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _blank(text: str, start: int, end: int) -> str:
    # replace everything except line breaks so offsets and line structure hold
    return "".join(ch if ch in "\r\n" else " " for ch in text[start:end])


def strip_literals(content: str) -> MaskedText:
    """Mask literals and non-doc comments; doc comments (`/** ... */`) stay.

    `/**/` is an ordinary (empty) block comment; `/***/` is a doc comment.
    Unterminated strings and chars are masked to the end of their line,
    unterminated block comments and text blocks to the end of the file.
    """
    n = len(content)
    out: list[str] = []
    spans: list[MaskSpan] = []
    warnings: list[str] = []
    i = 0

    def mask(start: int, end: int, kind: str) -> None:
        out.append(_blank(content, start, end))
        spans.append(MaskSpan(start, end, kind))

    while i < n:
        ch = content[i]
        if ch == "/" and content.startswith("//", i):
            end = content.find("\n", i)
            end = n if end == -1 else end
            mask(i, end, LINE_COMMENT)
            i = end
        elif ch == "/" and content.startswith("/*", i):
            if content.startswith("/**", i) and not content.startswith("/**/", i):
                # doc comment: copy through verbatim
                close = content.find("*/", i + 3)
                end = n if close == -1 else close + 2
                if close == -1:
                    warnings.append(f"unterminated doc comment at offset {i}")
                out.append(content[i:end])
                i = end
            else:
                close = content.find("*/", i + 2)
                end = n if close == -1 else close + 2
                if close == -1:
                    warnings.append(f"unterminated block comment at offset {i}")
                mask(i, end, BLOCK_COMMENT)
                i = end
        elif ch == '"' and content.startswith('"""', i):
            end = _scan_quoted(content, i + 3, '"""', multiline=True)
            if end is None:
                warnings.append(f"unterminated text block at offset {i}")
                end = n
            mask(i, end, TEXT_BLOCK)
            i = end
        elif ch == '"' or ch == "'":
            end = _scan_quoted(content, i + 1, ch, multiline=False)
            if end is None:
                line_end = content.find("\n", i)
                end = n if line_end == -1 else line_end
                warnings.append(f"unterminated {'string' if ch == chr(34) else 'char'} literal at offset {i}")
            mask(i, end, STRING if ch == '"' else CHAR)
            i = end
        else:
            out.append(ch)
            i += 1

    masked = "".join(out)
    assert len(masked) == n
    return MaskedText(original=content, masked=masked, mask_spans=spans, warnings=warnings)


def _scan_quoted(content: str, start: int, closer: str, multiline: bool) -> int | None:
    """Offset just past the closing delimiter, or None if it never closes."""
    i = start
    n = len(content)
    while i < n:
        ch = content[i]
        if ch == "\\":
            i += 2
            continue
        if not multiline and ch == "\n":
            return None
        if content.startswith(closer, i):
            return i + len(closer)
        i += 1
    return None


def has_doc_comment(mt: MaskedText) -> bool:
    """True when the masked text still contains a doc-comment opener.

    Plain block comments were blanked out, so any surviving `/**` belongs to a
    doc comment.
    """
    return "/**" in mt.masked
