"""Tokenization and Earley parsing over the source projection of a grammar.

The chart is packed: derivations are counted per (symbol, span) without being
built, and any single tree can be extracted by its canonical index.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

from rbmt.grammar import ENTITY, GrammarSpec, LexEntry, Symbol, SyncRule

MOD_ENTITY_RE = re.compile(r"M[0-9]")
_PIECE_RE = re.compile(r"\s+|\[[^\[\]]*\]|[^\s\[\]]+|.")


class TokenizeError(ValueError):
    pass


class ParseError(ValueError):
    """No derivation covers the input.

    ``prefix`` is the length of the longest prefix the chart recognized and
    ``token`` the first token that could not be consumed (None at end of input).
    """

    def __init__(self, message: str, prefix: int = 0, token: str | None = None):
        super().__init__(message)
        self.prefix = prefix
        self.token = token


class UnknownTokenError(ParseError):
    pass


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    entity_spans: tuple[tuple[int, str, str], ...] = ()

    @cached_property
    def entity_positions(self) -> frozenset[int]:
        return frozenset(i for i, _, _ in self.entity_spans)

    def __len__(self) -> int:
        return len(self.tokens)

    def __str__(self) -> str:
        return " ".join(self.tokens)


def tokenize(pattern: str) -> TokenSequence:
    """Split on whitespace; ``[ ... ]`` spans become single bracketedEntity
    tokens and ``M<d>`` tokens are marked as modEntity."""
    tokens: list[str] = []
    spans: list[tuple[int, str, str]] = []
    for m in _PIECE_RE.finditer(pattern):
        piece = m.group(0)
        if piece.isspace():
            continue
        if piece in ("[", "]"):
            raise TokenizeError(f"unbalanced bracket at offset {m.start()} in {pattern!r}")
        if piece.startswith("["):
            spans.append((len(tokens), "bracketedEntity", piece))
        elif MOD_ENTITY_RE.fullmatch(piece):
            spans.append((len(tokens), "modEntity", piece))
        tokens.append(piece)
    return TokenSequence(tuple(tokens), tuple(spans))


def as_tokens(value: TokenSequence | str | Sequence[str]) -> TokenSequence:
    if isinstance(value, TokenSequence):
        return value
    if isinstance(value, str):
        return tokenize(value)
    return tokenize(" ".join(value))


@dataclass(frozen=True)
class ParseTree:
    symbol: Symbol
    rule: SyncRule | LexEntry | None = None
    children: tuple[ParseTree, ...] = ()
    span: tuple[int, int] = (0, 0)
    kind: str = "token"  # token | rule | lex | entity

    @property
    def rule_id(self) -> str | None:
        if self.kind == "entity":
            return "entity"
        return self.rule.rule_id if self.rule is not None else None

    def leaves(self) -> list[str]:
        if self.kind == "token":
            return [self.symbol.name]
        return [w for c in self.children for w in c.leaves()]

    def __str__(self) -> str:
        if self.kind == "token":
            return self.symbol.name
        if self.kind == "lex":
            return f"{self.symbol.label}({' '.join(self.leaves())})"
        return f"{self.symbol.label}({', '.join(str(c) for c in self.children)})"


class _Table:
    """Integer-coded source projection, cached per grammar."""

    def __init__(self, spec: GrammarSpec):
        self.prods = spec.source_productions
        self.nt_ids: dict[Symbol, int] = {}
        for p in self.prods:
            self._id(p.lhs)
            for s in p.rhs:
                if not s.terminal:
                    self._id(s)
        # rhs item coding: int -> nonterminal, str -> word, None -> entity
        self.rhs: list[tuple] = []
        for p in self.prods:
            items = []
            for s in p.rhs:
                if s == ENTITY:
                    items.append(None)
                elif s.terminal:
                    items.append(s.name)
                else:
                    items.append(self.nt_ids[s])
            self.rhs.append(tuple(items))
        self.lhs = [self.nt_ids[p.lhs] for p in self.prods]
        self.by_lhs: dict[int, list[int]] = {}
        for i, l in enumerate(self.lhs):
            self.by_lhs.setdefault(l, []).append(i)
        self.vocab = {w for items in self.rhs for w in items if isinstance(w, str)}
        self.accepts_entities = any(None in items for items in self.rhs)
        self.start = self.nt_ids.get(spec.start, -1)

    def _id(self, sym: Symbol) -> int:
        return self.nt_ids.setdefault(sym, len(self.nt_ids))


def _table(spec: GrammarSpec) -> _Table:
    t = spec.__dict__.get("_earley_table")
    if t is None:
        t = _Table(spec)
        spec.__dict__["_earley_table"] = t  # frozen dataclass: cache outside the fields
    return t


@dataclass
class ParseForest:
    """All derivations of ``input`` rooted in the grammar's start symbol."""

    input: TokenSequence
    count: int
    _table: _Table = field(repr=False)
    _completed: set = field(repr=False)
    _memo_sym: dict = field(default_factory=dict, repr=False)
    _memo_seq: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return self.count

    def tree(self, index: int = 0) -> ParseTree:
        """The ``index``-th derivation in canonical order."""
        if not 0 <= index < self.count:
            raise IndexError(f"derivation {index} out of range (count {self.count})")
        n = len(self.input)
        return self._unrank_sym(self._table.start, 0, n, index)

    def trees(self) -> Iterator[ParseTree]:
        for k in range(self.count):
            yield self.tree(k)

    # counting -------------------------------------------------------------

    def _count_sym(self, x: int, i: int, j: int) -> int:
        key = (x, i, j)
        if key in self._memo_sym:
            return self._memo_sym[key]
        total = 0
        for p in self._table.by_lhs.get(x, ()):
            if (p, i, j) in self._completed:
                total += self._count_seq(p, 0, i, j)
        self._memo_sym[key] = total
        return total

    def _count_seq(self, p: int, d: int, i: int, j: int) -> int:
        key = (p, d, i, j)
        memo = self._memo_seq
        if key in memo:
            return memo[key]
        rhs = self._table.rhs[p]
        if d == len(rhs):
            res = 1 if i == j else 0
        elif i >= j:
            res = 0
        else:
            item = rhs[d]
            if not isinstance(item, int):
                res = self._count_seq(p, d + 1, i + 1, j) if self._matches(item, i) else 0
            else:
                res = 0
                last = j - (len(rhs) - d - 1)
                for k in range(i + 1, last + 1):
                    c = self._count_sym(item, i, k)
                    if c:
                        res += c * self._count_seq(p, d + 1, k, j)
        memo[key] = res
        return res

    def _matches(self, item: str | None, i: int) -> bool:
        if item is None:
            return i in self.input.entity_positions
        return i not in self.input.entity_positions and self.input.tokens[i] == item

    # extraction -----------------------------------------------------------

    def _unrank_sym(self, x: int, i: int, j: int, k: int) -> ParseTree:
        t = self._table
        for p in t.by_lhs.get(x, ()):
            if (p, i, j) not in self._completed:
                continue
            c = self._count_seq(p, 0, i, j)
            if k < c:
                prod = t.prods[p]
                children = tuple(self._unrank_seq(p, 0, i, j, k))
                if prod.origin is None:
                    kind = "entity"
                elif isinstance(prod.origin, LexEntry):
                    kind = "lex"
                else:
                    kind = "rule"
                return ParseTree(prod.lhs, prod.origin, children, (i, j), kind)
            k -= c
        raise AssertionError("derivation index inconsistent with counts")

    def _unrank_seq(self, p: int, d: int, i: int, j: int, k: int) -> list[ParseTree]:
        rhs = self._table.rhs[p]
        if d == len(rhs):
            return []
        item = rhs[d]
        if not isinstance(item, int):
            leaf = ParseTree(Symbol(self.input.tokens[i], (), True), span=(i, i + 1))
            return [leaf] + self._unrank_seq(p, d + 1, i + 1, j, k)
        last = j - (len(rhs) - d - 1)
        for m in range(i + 1, last + 1):
            head = self._count_sym(item, i, m)
            if not head:
                continue
            rest = self._count_seq(p, d + 1, m, j)
            ways = head * rest
            if k < ways:
                # first child is the most significant digit
                return ([self._unrank_sym(item, i, m, k // rest)]
                        + self._unrank_seq(p, d + 1, m, j, k % rest))
            k -= ways
        raise AssertionError("derivation index inconsistent with counts")


def _earley(t: _Table, toks: TokenSequence) -> tuple[set, int]:
    """Run the recognizer; return completed (prod, start, end) items and the
    length of the longest prefix for which the chart stayed non-empty."""
    n = len(toks.tokens)
    tokens = toks.tokens
    ents = toks.entity_positions
    rhs_of = t.rhs
    lhs_of = t.lhs
    by_lhs = t.by_lhs
    completed: set[tuple[int, int, int]] = set()
    chart: list[list[tuple[int, int, int]]] = [[] for _ in range(n + 1)]
    seen: list[set] = [set() for _ in range(n + 1)]
    waiting: list[dict[int, list]] = [dict() for _ in range(n + 1)]
    predicted: list[set] = [set() for _ in range(n + 1)]

    def add(k: int, item: tuple[int, int, int]) -> None:
        if item not in seen[k]:
            seen[k].add(item)
            chart[k].append(item)

    for p in by_lhs.get(t.start, ()):
        add(0, (p, 0, 0))
    predicted[0].add(t.start)
    reached = 0
    for k in range(n + 1):
        items = chart[k]
        if items:
            reached = k
        w_k = waiting[k]
        pred_k = predicted[k]
        idx = 0
        while idx < len(items):
            p, d, o = items[idx]
            idx += 1
            rhs = rhs_of[p]
            if d == len(rhs):
                completed.add((p, o, k))
                for (p2, d2, o2) in waiting[o].get(lhs_of[p], ()):
                    add(k, (p2, d2 + 1, o2))
                continue
            nxt = rhs[d]
            if isinstance(nxt, int):
                w_k.setdefault(nxt, []).append((p, d, o))
                if nxt not in pred_k:
                    pred_k.add(nxt)
                    for q in by_lhs.get(nxt, ()):
                        add(k, (q, 0, k))
            elif k < n:
                if nxt is None:
                    if k in ents:
                        add(k + 1, (p, d + 1, o))
                elif k not in ents and tokens[k] == nxt:
                    add(k + 1, (p, d + 1, o))
    return completed, reached


def parse(spec: GrammarSpec, tokens: TokenSequence | str | Sequence[str]) -> ParseForest:
    """Parse ``tokens`` with the source projection of ``spec``.

    Raises UnknownTokenError for tokens outside the lexicon, ParseError if
    no derivation of the start symbol spans the whole input.
    """
    toks = as_tokens(tokens)
    t = _table(spec)
    for i, tok in enumerate(toks.tokens):
        if i in toks.entity_positions:
            if not t.accepts_entities:
                raise UnknownTokenError(f"entity {tok!r} but the grammar declares no entity class", i, tok)
        elif tok not in t.vocab:
            raise UnknownTokenError(f"token {tok!r} is not in the lexicon", i, tok)
    completed, reached = _earley(t, toks)
    n = len(toks)
    forest = ParseForest(toks, 0, t, completed)
    forest.count = forest._count_sym(t.start, 0, n) if n else 0
    if forest.count == 0:
        if reached < n:
            bad = toks.tokens[reached]
            raise ParseError(f"no parse: recognized {reached} token(s), stuck at {bad!r}", reached, bad)
        raise ParseError(f"no parse: input {str(toks)!r} is an incomplete sentence", n, None)
    return forest


@dataclass
class AmbiguityReport:
    rows: list[tuple[TokenSequence, int]]
    diagnostics: dict[int, str]

    @property
    def ambiguous(self) -> int:
        return sum(1 for _, c in self.rows if c > 1)

    @property
    def proportion(self) -> float:
        return self.ambiguous / len(self.rows) if self.rows else 0.0


def ambiguity_report(spec: GrammarSpec, inputs: Sequence[TokenSequence | str]) -> AmbiguityReport:
    """Derivation count per input; unparseable inputs get count 0 and a diagnostic."""
    rows = []
    diagnostics = {}
    for i, inp in enumerate(inputs):
        toks = as_tokens(inp)
        try:
            rows.append((toks, parse(spec, toks).count))
        except ParseError as e:
            rows.append((toks, 0))
            diagnostics[i] = str(e)
    return AmbiguityReport(rows, diagnostics)
