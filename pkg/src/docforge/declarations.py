"""Declaration extraction over masked Java source.

No AST, no type resolution: brace matching plus a small pattern suite find
type, method, constructor, and field declarations with enough structure for
pairing and context capture. Anything the heuristics cannot place (enum
constants, initializer blocks, local classes, anonymous class bodies, compact
record constructors) is skipped rather than guessed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .masking import MaskedText

TYPE_KINDS = ("class", "interface", "enum", "record")

MODIFIER_WORDS = {
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "default",
    "native",
    "synchronized",
    "strictfp",
    "transient",
    "volatile",
    "sealed",
    "non-sealed",
}

# words that can never be a member name or belong to a member header
_RESERVED = MODIFIER_WORDS | {
    "if",
    "else",
    "for",
    "while",
    "do",
    "switch",
    "case",
    "try",
    "catch",
    "finally",
    "return",
    "throw",
    "new",
    "assert",
    "super",
    "this",
    "instanceof",
    "package",
    "import",
} | set(TYPE_KINDS)

_IDENT = r"[A-Za-z_$][A-Za-z0-9_$]*"
_DOTTED = rf"{_IDENT}(?:\.{_IDENT})*"
_TYPE_DECL_RE = re.compile(rf"\b(class|interface|enum|record)\s+({_IDENT})")
_PACKAGE_RE = re.compile(rf"(?m)^[ \t]*package\s+({_IDENT}(?:\s*\.\s*{_IDENT})*)\s*;")
_NAME_PAREN_RE = re.compile(rf"({_IDENT})\s*\(")
_ANNOTATION_RE = re.compile(rf"@\s*{_DOTTED}")


@dataclass(frozen=True)
class Declaration:
    kind: str  # class | interface | enum | record | method | constructor | field
    name: str
    signature: str
    span: tuple[int, int]  # slice of the original file: header through body or ';'
    body_span: tuple[int, int] | None
    modifiers: tuple[str, ...] = ()
    type_params: str | None = None
    enclosing_chain: tuple[str, ...] = ()
    uses_lambda: bool = False
    package: str | None = None


@dataclass
class DeclarationScan:
    declarations: list[Declaration] = field(default_factory=list)
    degraded: bool = False


def blank_doc_comments(masked: str) -> str:
    """Blank `/** ... */` regions too (newlines kept).

    MaskedText deliberately keeps doc comments; the declaration scanner must
    not read their prose as code, so it works on this stricter variant.
    """
    out = []
    i = 0
    n = len(masked)
    while i < n:
        if masked.startswith("/**", i):
            close = masked.find("*/", i + 3)
            end = n if close == -1 else close + 2
            out.append("".join(ch if ch in "\r\n" else " " for ch in masked[i:end]))
            i = end
        else:
            out.append(masked[i])
            i += 1
    return "".join(out)


def extract_package(mt: MaskedText) -> str | None:
    """Dotted name of the first `package ...;` statement, if any."""
    m = _PACKAGE_RE.search(blank_doc_comments(mt.masked))
    if m is None:
        return None
    return re.sub(r"\s+", "", m.group(1))


def match_brace(masked: str, open_idx: int) -> int | None:
    """Index of the `}` matching the `{` at open_idx, or None if unbalanced."""
    depth = 0
    for i in range(open_idx, len(masked)):
        ch = masked[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i
    return None


def _skip_annotations(masked: str, start: int, end: int) -> int:
    """Offset after any leading annotations (with balanced argument lists)."""
    i = start
    while i < end:
        while i < end and masked[i].isspace():
            i += 1
        if i >= end or masked[i] != "@":
            return i
        if re.match(r"@\s*interface\b", masked[i:end]):
            return i  # '@interface' declares a type, it is not an annotation use
        m = _ANNOTATION_RE.match(masked, i, end)
        if m is None:
            return i
        j = m.end()
        k = j
        while k < end and masked[k].isspace():
            k += 1
        if k < end and masked[k] == "(":
            depth = 0
            while k < end:
                if masked[k] == "(":
                    depth += 1
                elif masked[k] == ")":
                    depth -= 1
                    if depth == 0:
                        k += 1
                        break
                k += 1
            j = k
        i = j
    return i


def _strip_angles(text: str) -> str:
    """Remove balanced `<...>` runs (generics) for token-level inspection."""
    out = []
    depth = 0
    for ch in text:
        if ch == "<":
            depth += 1
        elif ch == ">":
            if depth > 0:
                depth -= 1
            else:
                out.append(ch)
        elif depth == 0:
            out.append(ch)
    return "".join(out)


def _leading_type_params(prefix: str) -> str | None:
    """The `<...>` block opening the non-modifier part of a member header."""
    rest = prefix
    while True:
        m = re.match(rf"\s*({_IDENT})", rest)
        if m and m.group(1) in MODIFIER_WORDS:
            rest = rest[m.end() :]
            continue
        break
    m = re.match(r"\s*<", rest)
    if not m:
        return None
    depth = 0
    for i in range(m.end() - 1, len(rest)):
        if rest[i] == "<":
            depth += 1
        elif rest[i] == ">":
            depth -= 1
            if depth == 0:
                return rest[m.end() - 1 : i + 1]
    return None


_ANNOTATION_USE_RE = re.compile(rf"@\s*{_DOTTED}(?:\s*\([^()]*(?:\([^()]*\)[^()]*)*\))?")


def _drop_annotations(text: str) -> str:
    return _ANNOTATION_USE_RE.sub(" ", text)


def _words(text: str) -> list[str]:
    return [w for w in text.replace("[", " ").replace("]", " ").split() if w]


class _Scanner:
    def __init__(self, mt: MaskedText):
        self.masked = blank_doc_comments(mt.masked)
        self.original = mt.original
        self.package = extract_package(mt)
        self.decls: list[Declaration] = []
        self.degraded = False

    def scan_region(self, lo: int, hi: int, chain: tuple[str, ...], in_enum: bool) -> None:
        """Walk one brace level: the top of the file or a type body."""
        masked = self.masked
        pos = lo
        constants_pending = in_enum  # an enum body starts with its constant list
        while pos < hi:
            while pos < hi and masked[pos].isspace():
                pos += 1
            if pos >= hi:
                return
            if masked[pos] == ";":
                pos += 1
                constants_pending = False
                continue
            if masked[pos] == "}":
                if not chain:
                    self.degraded = True  # stray close at top level
                return
            seg_start = pos
            term_idx, terminator = self._segment(pos, hi)
            if terminator == "{":
                body_close = match_brace(masked, term_idx)
                if body_close is None or body_close >= hi:
                    # keep what precedes the imbalance: a type still yields its
                    # well-formed nested declarations, then scanning stops
                    self.degraded = True
                    if not constants_pending:
                        self._emit_truncated_type(seg_start, term_idx, hi, chain)
                    return
                next_pos = body_close + 1
            elif terminator == ";":
                next_pos = term_idx + 1
            else:
                next_pos = term_idx  # region end or EOF: nothing well-formed here

            if constants_pending:
                if terminator == ";":
                    constants_pending = False
            elif terminator is not None:
                self._classify(seg_start, term_idx, terminator, chain)
            pos = max(next_pos, pos + 1)

    def _segment(self, start: int, hi: int) -> tuple[int, str | None]:
        """Scan to the segment terminator: a level-0 `;` or `{`, else region end."""
        masked = self.masked
        depth = 0
        i = start
        while i < hi:
            ch = masked[i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth = max(0, depth - 1)
            elif depth == 0 and ch in ";{}":
                return i, (ch if ch != "}" else None)
            i += 1
        return hi, None

    # -- classification ---------------------------------------------------

    def _classify(self, seg_start: int, term_idx: int, terminator: str, chain: tuple[str, ...]) -> None:
        decl_start = _skip_annotations(self.masked, seg_start, term_idx)
        if decl_start >= term_idx:
            return
        header = self.masked[decl_start:term_idx]
        eq_at = _level0_eq(header)

        type_m = _TYPE_DECL_RE.search(header)
        if (
            type_m
            and not header[: type_m.start(1)].rstrip().endswith(".")  # Foo.class is not a decl
            and (eq_at is None or type_m.start() < eq_at)
        ):
            self._emit_type(decl_start, term_idx, terminator, chain, header, type_m)
            return
        if not chain:
            return  # members and fields exist only inside a type body

        if eq_at is None:
            member = _match_member(header, chain)
            if member is not None:
                self._emit_member(decl_start, term_idx, terminator, chain, header, member)
                return
        if terminator == ";":
            self._emit_field(decl_start, term_idx, chain, header, eq_at)

    def _emit_truncated_type(self, seg_start: int, term_idx: int, hi: int, chain: tuple[str, ...]) -> None:
        decl_start = _skip_annotations(self.masked, seg_start, term_idx)
        if decl_start >= term_idx:
            return
        header = self.masked[decl_start:term_idx]
        m = _TYPE_DECL_RE.search(header)
        if m is None or header[: m.start(1)].rstrip().endswith("."):
            return  # a member with a broken body is dropped outright
        kind, name = m.group(1), m.group(2)
        self.decls.append(
            Declaration(
                kind=kind,
                name=name,
                signature=self.original[decl_start:term_idx].rstrip(),
                span=(decl_start, hi),
                body_span=(term_idx, hi),
                modifiers=tuple(w for w in _words(_strip_angles(header[: m.start()])) if w in MODIFIER_WORDS),
                type_params=None,
                enclosing_chain=chain,
                uses_lambda=False,
                package=self.package,
            )
        )
        self.scan_region(term_idx + 1, hi, chain + (name,), in_enum=(kind == "enum"))

    def _emit_type(self, decl_start, term_idx, terminator, chain, header, m) -> None:
        kind, name = m.group(1), m.group(2)
        if terminator != "{":
            return  # a type declaration without a body is not valid; skip
        body_close = match_brace(self.masked, term_idx)
        assert body_close is not None  # scan_region checked before classifying
        body_span = (term_idx, body_close + 1)
        modifiers = tuple(w for w in _words(_strip_angles(header[: m.start()])) if w in MODIFIER_WORDS)
        self.decls.append(
            Declaration(
                kind=kind,
                name=name,
                signature=self.original[decl_start:term_idx].rstrip(),
                span=(decl_start, body_close + 1),
                body_span=body_span,
                modifiers=modifiers,
                type_params=None,
                enclosing_chain=chain,
                uses_lambda=False,
                package=self.package,
            )
        )
        self.scan_region(body_span[0] + 1, body_span[1] - 1, chain + (name,), in_enum=(kind == "enum"))

    def _emit_member(self, decl_start, term_idx, terminator, chain, header, member) -> None:
        name, modifiers, type_params, kind = member
        signature = self.original[decl_start:term_idx].rstrip()
        span_end = term_idx + 1
        body_span = None
        uses_lambda = False
        if terminator == "{":
            body_close = match_brace(self.masked, term_idx)
            assert body_close is not None
            if re.search(r"\bdefault\s*$", header):
                # annotation element with an array default: `String[] v() default {...};`
                semi = self.masked.find(";", body_close + 1)
                span_end = (semi + 1) if semi != -1 else body_close + 1
            else:
                body_span = (term_idx, body_close + 1)
                span_end = body_close + 1
                uses_lambda = "->" in self.masked[term_idx : body_close + 1]
        self.decls.append(
            Declaration(
                kind=kind,
                name=name,
                signature=signature,
                span=(decl_start, span_end),
                body_span=body_span,
                modifiers=modifiers,
                type_params=type_params,
                enclosing_chain=chain,
                uses_lambda=uses_lambda,
                package=self.package,
            )
        )

    def _emit_field(self, decl_start, term_idx, chain, header, eq_at) -> None:
        left = header if eq_at is None else header[:eq_at]
        first_declarator = _strip_angles(_drop_annotations(left)).split(",")[0]
        words = _words(first_declarator)
        if any(w in _RESERVED - MODIFIER_WORDS for w in words):
            return
        idents = [w for w in words if re.fullmatch(_DOTTED, w) and w not in MODIFIER_WORDS]
        if len(idents) < 2:
            return  # need at least `Type name`
        name = idents[-1]
        if "." in name:
            return
        self.decls.append(
            Declaration(
                kind="field",
                name=name,
                signature=self.original[decl_start:term_idx].rstrip(),
                span=(decl_start, term_idx + 1),
                body_span=None,
                modifiers=tuple(w for w in words if w in MODIFIER_WORDS),
                type_params=None,
                enclosing_chain=chain,
                uses_lambda=False,
                package=self.package,
            )
        )


def _level0_eq(header: str) -> int | None:
    """Position of the first assignment `=` outside parens, or None."""
    depth = 0
    for i, ch in enumerate(header):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif ch == "=" and depth == 0:
            prev = header[i - 1] if i else ""
            nxt = header[i + 1] if i + 1 < len(header) else ""
            if prev in "=!<>+-*/%&|^" or nxt == "=":
                continue  # comparison or compound operator, not a declarator
            return i
    return None


def _match_member(header: str, chain: tuple[str, ...]):
    """(name, modifiers, type_params, kind) for a method/constructor header."""
    candidate = None
    depth = 0
    i = 0
    while i < len(header):
        ch = header[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif depth == 0 and (ch.isalpha() or ch in "_$"):
            m = _NAME_PAREN_RE.match(header, i)
            if m:
                if header[:i].rstrip().endswith("@"):
                    i = m.end()  # annotation argument list; skip its '('
                    depth += 1
                    continue
                candidate = m
                break
            while i < len(header) and (header[i].isalnum() or header[i] in "_$"):
                i += 1
            continue
        i += 1
    if candidate is None:
        return None
    name = candidate.group(1)
    if name in _RESERVED:
        return None
    prefix = _drop_annotations(header[: candidate.start()])
    type_params = _leading_type_params(prefix)
    words = _words(_strip_angles(prefix))
    modifiers = tuple(w for w in words if w in MODIFIER_WORDS)
    rest = [w for w in words if w not in MODIFIER_WORDS]
    if not rest:
        if chain and name == chain[-1]:
            return name, modifiers, type_params, "constructor"
        return None  # e.g. an enum constant with arguments
    if any(w in _RESERVED for w in rest) or not all(re.fullmatch(_DOTTED, w) for w in rest):
        return None
    return name, modifiers, type_params, "method"


def scan_declarations(mt: MaskedText) -> DeclarationScan:
    scanner = _Scanner(mt)
    scanner.scan_region(0, len(mt.masked), chain=(), in_enum=False)
    scanner.decls.sort(key=lambda d: d.span[0])
    return DeclarationScan(declarations=scanner.decls, degraded=scanner.degraded)


def extract_declarations(mt: MaskedText) -> list[Declaration]:
    return scan_declarations(mt).declarations


def signature_matches(signature_masked: str, kind: str) -> bool:
    """Re-check a serialized signature against the pattern suite (coarse)."""
    sig = signature_masked.strip()
    if not sig:
        return False
    if sig.count("(") != sig.count(")"):
        return False
    if kind in TYPE_KINDS:
        m = _TYPE_DECL_RE.search(sig)
        return m is not None and m.group(1) == kind
    if kind == "field":
        return _level0_eq(sig) is not None or "(" not in _strip_angles(sig)
    if kind in ("method", "constructor"):
        if _match_member(sig, ("?",)) is not None:
            return True
        # a constructor header has no return type, so the generic probe fails;
        # retry against the name the header itself claims
        m = _NAME_PAREN_RE.search(sig)
        return m is not None and _match_member(sig, (m.group(1),)) is not None
    return False
