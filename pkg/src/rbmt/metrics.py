"""Corpus BLEU and exact-match accuracy."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

# CJK ideographs, kana, CJK symbols/punctuation and fullwidth forms
_CJK = ("\u2e80-\u2fdf\u3000-\u303f\u3040-\u309f\u30a0-\u30ff\u3100-\u312f\u3190-\u31ff"
        "\u3400-\u4dbf\u4e00-\u9fff\uf900-\ufaff\ufe30-\ufe4f\uff00-\uffef")
_CJK_SPLIT_RE = re.compile(rf"[{_CJK}]|[^{_CJK}]+")


@dataclass(frozen=True)
class BleuConfig:
    max_order: int = 4
    smoothing: str = "epsilon"  # none | epsilon
    tokenization: str = "whitespace"  # whitespace | cjkChar
    epsilon: float = 0.1

    def __post_init__(self) -> None:
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")
        if self.smoothing not in ("none", "epsilon"):
            raise ValueError(f"unknown smoothing {self.smoothing!r}")
        if self.tokenization not in ("whitespace", "cjkChar"):
            raise ValueError(f"unknown tokenization {self.tokenization!r}")


def tokenize_cjk_chars(text: str) -> list[str]:
    """Each CJK character is a token; runs of other characters stay whole."""
    out = []
    for chunk in text.split():
        out.extend(_CJK_SPLIT_RE.findall(chunk))
    return out


def bleu_tokens(text: str, tokenization: str) -> list[str]:
    return tokenize_cjk_chars(text) if tokenization == "cjkChar" else text.split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_stats(hyps: Sequence[str], refs: Sequence[str], cfg: BleuConfig) -> tuple[list[int], list[int], int, int]:
    correct = [0] * cfg.max_order
    total = [0] * cfg.max_order
    hyp_len = ref_len = 0
    for hyp, ref in zip(hyps, refs):
        h, r = bleu_tokens(hyp, cfg.tokenization), bleu_tokens(ref, cfg.tokenization)
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, cfg.max_order + 1):
            hc, rc = _ngrams(h, n), _ngrams(r, n)
            correct[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
            total[n - 1] += max(len(h) - n + 1, 0)
    return correct, total, hyp_len, ref_len


def corpus_bleu(hyps: Sequence[str], refs: Sequence[str], cfg: BleuConfig | None = None) -> float:
    """Corpus-level BLEU in [0, 100] with one reference per hypothesis.

    Orders with no hypothesis n-grams at all are left out of the geometric
    mean; with epsilon smoothing an order with zero matches contributes
    ``epsilon / total`` instead of zero.
    """
    cfg = cfg or BleuConfig()
    if len(hyps) != len(refs):
        raise ValueError(f"length mismatch: {len(hyps)} hypotheses, {len(refs)} references")
    if not hyps:
        raise ValueError("empty corpus")
    correct, total, hyp_len, ref_len = bleu_stats(hyps, refs, cfg)
    if not any(correct):
        return 0.0
    logs = []
    for c, t in zip(correct, total):
        if t == 0:
            break
        if c == 0:
            if cfg.smoothing == "none":
                return 0.0
            logs.append(math.log(cfg.epsilon / t))
        else:
            logs.append(math.log(c / t))
    bp = 1.0 if hyp_len >= ref_len else math.exp(1 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(sum(logs) / len(logs))


def normalize_whitespace(text: str) -> str:
    return " ".join(text.split())


def exact_match(preds: Sequence[str], golds: Sequence[str]) -> float:
    """Fraction of predictions equal to their gold after whitespace normalization."""
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} predictions, {len(golds)} golds")
    if not preds:
        return 0.0
    hits = sum(normalize_whitespace(p) == normalize_whitespace(g) for p, g in zip(preds, golds))
    return hits / len(preds)
