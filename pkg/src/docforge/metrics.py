"""BLEU and ROUGE-1/2/L/Lsum implemented from scratch over an explicit tokenizer.

ROUGE scores are recall by default (an F1 mode exists but is not the default),
BLEU is corpus-level with clipped n-gram counts pooled across pairs and a
brevity penalty. Both sides of every pair go through the same preprocessing.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

_TOKEN_RE = re.compile(r"@[A-Za-z][A-Za-z0-9]*|[A-Za-z0-9]+|[^\sA-Za-z0-9]")


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenizer and preprocessing knobs.

    Tokens are alphanumeric runs, Javadoc tag words (``@param`` etc.) kept as
    single tokens, and every other punctuation mark as its own token.
    """

    lowercase: bool = True
    strip_gutters: bool = True
    f1: bool = False
    smoothing: bool = False
    sentence_bleu: bool = False

    def as_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "strip_gutters": self.strip_gutters,
            "f1": self.f1,
            "smoothing": self.smoothing,
            "sentence_bleu": self.sentence_bleu,
        }


@dataclass(frozen=True)
class ScorePair:
    candidate: str
    reference: str


@dataclass
class MetricReport:
    bleu: float
    r1: float
    r2: float
    rl: float
    rlsum: float
    n_pairs: int
    degenerate_pairs: int = 0
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "bleu": self.bleu,
            "r1": self.r1,
            "r2": self.r2,
            "rl": self.rl,
            "rlsum": self.rlsum,
            "n_pairs": self.n_pairs,
            "degenerate_pairs": self.degenerate_pairs,
            "config": self.config,
        }


def strip_javadoc_gutters(text: str) -> str:
    """Remove ``/**``/``*/`` delimiters and per-line ``*`` gutters.

    Line structure is preserved so sentence splitting stays meaningful.
    """
    t = text.strip()
    if t.startswith("/**"):
        t = t[3:]
    if t.endswith("*/"):
        t = t[:-2]
    lines = []
    for line in t.splitlines():
        s = line.lstrip()
        if s.startswith("*"):
            s = s[1:]
            if s.startswith(" "):
                s = s[1:]
        lines.append(s.rstrip())
    return "\n".join(lines).strip("\n")


def prepare(text: str, cfg: TokenizerConfig) -> str:
    return strip_javadoc_gutters(text) if cfg.strip_gutters else text


def tokenize(text: str, cfg: TokenizerConfig | None = None) -> list[str]:
    cfg = cfg or TokenizerConfig()
    tokens = _TOKEN_RE.findall(text)
    if cfg.lowercase:
        tokens = [t.lower() for t in tokens]
    return tokens


def _pair_tokens(pair: ScorePair, cfg: TokenizerConfig) -> tuple[list[str], list[str]]:
    return (
        tokenize(prepare(pair.candidate, cfg), cfg),
        tokenize(prepare(pair.reference, cfg), cfg),
    )


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _recall_or_f1(matched: int, ref_total: int, cand_total: int, cfg: TokenizerConfig) -> float:
    if ref_total == 0:
        return 0.0
    recall = matched / ref_total
    if not cfg.f1:
        return recall
    if cand_total == 0 or matched == 0:
        return 0.0
    precision = matched / cand_total
    return 2 * precision * recall / (precision + recall)


def rouge_n(pair: ScorePair, n: int, cfg: TokenizerConfig | None = None) -> float:
    """Clipped n-gram recall: matched n-grams over total reference n-grams."""
    cfg = cfg or TokenizerConfig()
    cand, ref = _pair_tokens(pair, cfg)
    ref_grams = _ngrams(ref, n)
    cand_grams = _ngrams(cand, n)
    matched = sum(min(c, cand_grams[g]) for g, c in ref_grams.items())
    return _recall_or_f1(matched, sum(ref_grams.values()), sum(cand_grams.values()), cfg)


def _lcs_table(a: list[str], b: list[str]) -> list[list[int]]:
    m, n = len(a), len(b)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        row, prev = table[i], table[i - 1]
        ai = a[i - 1]
        for j in range(1, n + 1):
            if ai == b[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = prev[j] if prev[j] >= row[j - 1] else row[j - 1]
    return table


def lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    return _lcs_table(a, b)[len(a)][len(b)]


def lcs_reference_positions(ref: list[str], cand: list[str]) -> set[int]:
    """Reference-token positions of the canonical LCS against ``cand``.

    Canonical rule: matching last tokens are always taken; otherwise the
    reference token is dropped when doing so loses nothing (ties prefer
    consuming the reference). Fixing the rule makes union-LCS well-defined.
    """
    if not ref or not cand:
        return set()
    table = _lcs_table(ref, cand)
    positions: set[int] = set()
    i, j = len(ref), len(cand)
    while i > 0 and j > 0:
        if ref[i - 1] == cand[j - 1]:
            positions.add(i - 1)
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    return positions


def rouge_l(pair: ScorePair, cfg: TokenizerConfig | None = None) -> float:
    """Token-level LCS length over reference token count."""
    cfg = cfg or TokenizerConfig()
    cand, ref = _pair_tokens(pair, cfg)
    matched = lcs_length(ref, cand)
    return _recall_or_f1(matched, len(ref), len(cand), cfg)


def _sentences(text: str, cfg: TokenizerConfig) -> list[list[str]]:
    out = []
    for line in prepare(text, cfg).split("\n"):
        tokens = tokenize(line, cfg)
        if tokens:
            out.append(tokens)
    return out


def rouge_lsum(pair: ScorePair, cfg: TokenizerConfig | None = None) -> float:
    """Summary-level LCS: per reference sentence, the union of canonical LCS
    positions against every candidate sentence, summed and divided by the
    total reference token count."""
    cfg = cfg or TokenizerConfig()
    ref_sents = _sentences(pair.reference, cfg)
    cand_sents = _sentences(pair.candidate, cfg)
    ref_total = sum(len(s) for s in ref_sents)
    if ref_total == 0:
        return 0.0
    matched = 0
    for ref_sent in ref_sents:
        hit: set[int] = set()
        for cand_sent in cand_sents:
            hit |= lcs_reference_positions(ref_sent, cand_sent)
        matched += len(hit)
    cand_total = sum(len(s) for s in cand_sents)
    return _recall_or_f1(matched, ref_total, cand_total, cfg)


def is_degenerate(pair: ScorePair, cfg: TokenizerConfig | None = None) -> bool:
    """True when the reference is too short for the full metric set (R2 needs
    two tokens, RL/RLsum need a non-empty reference)."""
    cfg = cfg or TokenizerConfig()
    return len(tokenize(prepare(pair.reference, cfg), cfg)) < 2


def bleu_corpus(pairs: list[ScorePair], cfg: TokenizerConfig | None = None, max_n: int = 4) -> float:
    """Corpus BLEU: clipped matches and candidate totals pooled per order,
    uniform-weight geometric mean, brevity penalty exp(1 - r/c) when c < r.

    Any pooled precision of zero yields BLEU = 0; no smoothing by default.
    """
    if not pairs:
        raise ValueError("bleu_corpus requires at least one pair")
    cfg = cfg or TokenizerConfig()
    token_pairs = [_pair_tokens(p, cfg) for p in pairs]
    if cfg.sentence_bleu:
        scores = [_bleu_pooled([tp], max_n, cfg.smoothing) for tp in token_pairs]
        return sum(scores) / len(scores)
    return _bleu_pooled(token_pairs, max_n, cfg.smoothing)


def _bleu_pooled(token_pairs: list[tuple[list[str], list[str]]], max_n: int, smoothing: bool) -> float:
    log_sum = 0.0
    for n in range(1, max_n + 1):
        matched = 0
        total = 0
        for cand, ref in token_pairs:
            cand_grams = _ngrams(cand, n)
            ref_grams = _ngrams(ref, n)
            matched += sum(min(c, ref_grams[g]) for g, c in cand_grams.items())
            total += sum(cand_grams.values())
        if smoothing and n > 1:
            matched += 1
            total += 1
        if matched == 0 or total == 0:
            return 0.0
        log_sum += math.log(matched / total)
    c = sum(len(cand) for cand, _ in token_pairs)
    r = sum(len(ref) for _, ref in token_pairs)
    if c == 0:
        return 0.0
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / max_n)


def score_pairs(pairs: list[ScorePair], cfg: TokenizerConfig | None = None) -> MetricReport:
    """Score a run: mean pairwise ROUGE values plus pooled corpus BLEU."""
    if not pairs:
        raise ValueError("score_pairs requires at least one pair")
    cfg = cfg or TokenizerConfig()
    n = len(pairs)
    report = MetricReport(
        bleu=bleu_corpus(pairs, cfg),
        r1=sum(rouge_n(p, 1, cfg) for p in pairs) / n,
        r2=sum(rouge_n(p, 2, cfg) for p in pairs) / n,
        rl=sum(rouge_l(p, cfg) for p in pairs) / n,
        rlsum=sum(rouge_lsum(p, cfg) for p in pairs) / n,
        n_pairs=n,
        degenerate_pairs=sum(1 for p in pairs if is_degenerate(p, cfg)),
        config=cfg.as_dict(),
    )
    return report
