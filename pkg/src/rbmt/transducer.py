"""Tree-to-string transduction: reorder linked constituents, map lexemes through
the tagged lexicon, then run the post-processing substitutions."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Sequence

from rbmt.grammar import GrammarSpec, PostRule, Wildcard
from rbmt.parser import ParseTree, parse, tokenize

MASK64 = (1 << 64) - 1
_ENTITY_TOKEN_RE = re.compile(r"M[0-9]|\[[^\[\]]*\]")


class LexiconGapError(KeyError):
    def __str__(self) -> str:
        return self.args[0] if self.args else "lexicon gap"


@dataclass(frozen=True)
class Provenance:
    kind: str  # lex | literal | entity | post
    source: Any = None


@dataclass(frozen=True)
class TargetSequence:
    tokens: tuple[str, ...] = ()
    provenance: tuple[Provenance, ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def _emit(spec: GrammarSpec, node: ParseTree) -> list[tuple[str, Provenance]]:
    if node.kind == "entity":
        leaf = node.children[0]
        return [(leaf.symbol.name, Provenance("entity", leaf.span))]
    if node.kind == "lex":
        source = " ".join(node.leaves())
        entry = spec.lexicon_index.get((node.symbol, source))
        if entry is None:
            raise LexiconGapError(f"no lexicon entry for ({node.symbol.label}, {source!r})")
        prov = Provenance("lex", entry)
        return [(tok, prov) for tok in entry.target_tokens]
    if node.kind != "rule":
        raise ValueError(f"cannot transduce a bare {node.kind} node")
    rule = node.rule
    out: list[tuple[str, Provenance]] = []
    for j, sym in enumerate(rule.target):
        if sym.terminal:
            out.extend((tok, Provenance("literal", rule)) for tok in sym.name.split())
        else:
            out.extend(_emit(spec, node.children[rule.target_to_source[j]]))
    return out


def transduce(spec: GrammarSpec, tree: ParseTree, post: bool = True) -> TargetSequence:
    """Target-language tokens for ``tree``; ``post=False`` skips post rules."""
    pairs = _emit(spec, tree)
    seq = TargetSequence(tuple(t for t, _ in pairs), tuple(p for _, p in pairs))
    return apply_post_rules(spec, seq) if post else seq


def _match(pattern: Sequence, tokens: Sequence[str], start: int) -> int | None:
    """End index of the leftmost, shortest match of ``pattern`` at ``start``."""

    def go(pi: int, ti: int) -> int | None:
        if pi == len(pattern):
            return ti
        item = pattern[pi]
        if item is Wildcard.RUN:
            for end in range(ti, len(tokens) + 1):
                r = go(pi + 1, end)
                if r is not None:
                    return r
            return None
        if ti >= len(tokens):
            return None
        if item is Wildcard.ONE or item == tokens[ti]:
            return go(pi + 1, ti + 1)
        return None

    return go(0, start)


def apply_post_rule(rule: PostRule, seq: TargetSequence) -> TargetSequence:
    toks, provs = seq.tokens, seq.provenance
    out_t: list[str] = []
    out_p: list[Provenance] = []
    i = 0
    prov = Provenance("post", rule)
    while i < len(toks):
        end = _match(rule.pattern, toks, i)
        if end is None or end == i:
            out_t.append(toks[i])
            out_p.append(provs[i])
            i += 1
            continue
        out_t.extend(rule.replacement)
        out_p.extend([prov] * len(rule.replacement))
        i = end
    return TargetSequence(tuple(out_t), tuple(out_p))


def apply_post_rules(spec: GrammarSpec, seq: TargetSequence) -> TargetSequence:
    """Apply every post rule in ascending rank, one left-to-right pass each."""
    for rule in spec.sorted_post_rules:
        seq = apply_post_rule(rule, seq)
    return seq


def is_entity_token(token: str) -> bool:
    return bool(_ENTITY_TOKEN_RE.fullmatch(token))


def detokenize(seq: TargetSequence | Sequence[str], policy: str = "whitespace") -> str:
    tokens = [t for t in (seq.tokens if isinstance(seq, TargetSequence) else seq) if t]
    if policy == "whitespace":
        return " ".join(tokens)
    if policy != "cjk":
        raise ValueError(f"unknown detokenization policy {policy!r}")
    # CJK: no separators, except a single space on each side of entities
    out = ""
    for tok in tokens:
        if is_entity_token(tok):
            if out and not out.endswith(" "):
                out += " "
            out += tok + " "
        else:
            out += tok
    return out.rstrip(" ")


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def candidate_index(seed: int, record_index: int, count: int) -> int:
    """Deterministic pick in ``range(count)`` from (seed, record index)."""
    if count < 1:
        raise ValueError("count must be positive")
    if count == 1:
        return 0
    mixed = splitmix64((seed & MASK64) ^ splitmix64(record_index & MASK64))
    return mixed % count


def translate_pattern(spec: GrammarSpec, pattern: str, seed: int = 0,
                      record_index: int = 0) -> tuple[TargetSequence, int]:
    """Parse, choose a derivation and transduce; returns (sequence, #derivations)."""
    forest = parse(spec, tokenize(pattern))
    tree = forest.tree(candidate_index(seed, record_index, forest.count))
    return transduce(spec, tree), forest.count


def translate_text(spec: GrammarSpec, pattern: str, seed: int = 0, record_index: int = 0) -> str:
    seq, _ = translate_pattern(spec, pattern, seed, record_index)
    return detokenize(seq, spec.detokenize_policy)
