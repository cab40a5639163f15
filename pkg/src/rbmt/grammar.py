"""Synchronous context-free grammars with tagged lexicons and inheritable suffixes.

A grammar file is line oriented (UTF-8, ``#`` starts a comment)::

    start VP
    suffix T
    detok cjk
    rule VP -> V NP | NP V
    rule andV -> "and" V | ~ V
    lex V+T "write" => "書き"
    inherit T VP propagate V
    post 1 "A" * "B" => "C"
    entityclass ENT

Nonterminals are written ``Name``, ``Name+Suffix`` or ``Name:k`` (coindex);
terminals are double quoted.  Source terminals are never copied to the
target side; anything quoted on the target side is emitted literally.
"""
from __future__ import annotations

import enum
import re
from collections import defaultdict
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Union


class GrammarError(ValueError):
    """Raised for malformed or inconsistent grammars."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        self.reason = message
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


@dataclass(frozen=True, order=True)
class Symbol:
    """A grammar symbol.  For terminals ``name`` holds the surface text."""

    name: str
    suffixes: tuple[str, ...] = ()
    terminal: bool = False

    @property
    def label(self) -> str:
        return self.name + "".join(self.suffixes)

    @property
    def surface(self) -> str:
        return self.name if self.terminal else ""

    def with_suffix(self, suffix: str) -> Symbol:
        return replace(self, suffixes=self.suffixes + (suffix,))

    def spelled(self) -> str:
        """File syntax for this symbol (without coindex)."""
        if self.terminal:
            return _quote(self.name)
        return "+".join((self.name,) + self.suffixes)

    def __str__(self) -> str:
        return self.name if self.terminal else self.label


def nonterminal(spelling: str) -> Symbol:
    """Build a nonterminal from ``Name`` or ``Name+S1+S2`` notation."""
    name, *suffixes = spelling.split("+")
    return Symbol(name, tuple(suffixes))


# Matches any mod-entity or bracketed entity token during parsing.
ENTITY = Symbol("<entity>", (), True)


@dataclass(frozen=True)
class SyncRule:
    """``head -> <source, target>`` with linked nonterminal occurrences.

    ``links`` pairs (source index, target index) for every nonterminal
    occurrence; ``source_coindex``/``target_coindex`` keep the coindex
    annotations as written so the rule can be serialized faithfully.
    """

    head: Symbol
    source: tuple[Symbol, ...]
    target: tuple[Symbol, ...]
    links: tuple[tuple[int, int], ...]
    source_coindex: tuple[str | None, ...] = ()
    target_coindex: tuple[str | None, ...] = ()
    order: int = 0
    derived: bool = False

    @cached_property
    def target_to_source(self) -> dict[int, int]:
        return {t: s for s, t in self.links}

    @property
    def rule_id(self) -> str:
        return f"rule:{self.order}"

    def body(self) -> tuple:
        return (self.source, self.target, self.links)

    def __str__(self) -> str:
        src = " ".join(_spell_occurrence(s, c) for s, c in zip(self.source, self.source_coindex))
        tgt = " ".join(_spell_occurrence(s, c) for s, c in zip(self.target, self.target_coindex))
        return f"{self.head.spelled()} -> {src} | {tgt or '~'}"


@dataclass(frozen=True)
class LexEntry:
    tag: Symbol
    source: str
    target: str
    order: int = 0

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(self.source.split())

    @property
    def target_tokens(self) -> tuple[str, ...]:
        return tuple(self.target.split())

    @property
    def rule_id(self) -> str:
        return f"lex:{self.order}"


@dataclass(frozen=True)
class SuffixMacro:
    """Derive ``head+suffix`` from a base rule, pushing the suffix onto
    the occurrences named in ``propagate`` (coindexes or symbol spellings)."""

    suffix: str
    head: Symbol
    propagate: tuple[str, ...]
    selector: int | None = None  # 1-based choice among rules with this head


class Wildcard(enum.Enum):
    ONE = "*"
    RUN = "**"


PatternItem = Union[str, Wildcard]


@dataclass(frozen=True)
class PostRule:
    pattern: tuple[PatternItem, ...]
    replacement: tuple[str, ...]
    rank: int
    order: int = 0

    def __str__(self) -> str:
        pat = " ".join(p.value if isinstance(p, Wildcard) else _quote(p) for p in self.pattern)
        rep = " ".join(_quote(r) for r in self.replacement) or "~"
        return f"{self.rank} {pat} => {rep}"


@dataclass(frozen=True)
class Production:
    """One rule of the source projection."""

    lhs: Symbol
    rhs: tuple[Symbol, ...]
    origin: SyncRule | LexEntry | None  # None for entity-class productions
    order: int


@dataclass(frozen=True)
class GrammarSpec:
    start: Symbol
    rules: tuple[SyncRule, ...] = ()
    lexicon: tuple[LexEntry, ...] = ()
    suffixes: tuple[str, ...] = ()
    post_rules: tuple[PostRule, ...] = ()
    macros: tuple[SuffixMacro, ...] = ()
    entity_classes: tuple[Symbol, ...] = ()
    target_language: str | None = None
    detokenize_policy: str = "whitespace"

    @cached_property
    def lexicon_index(self) -> dict[tuple[Symbol, str], LexEntry]:
        return {(e.tag, " ".join(e.words)): e for e in self.lexicon}

    @cached_property
    def source_productions(self) -> tuple[Production, ...]:
        """Source projection in canonical (file) order."""
        prods = [Production(r.head, r.source, r, r.order) for r in self.rules]
        prods += [Production(e.tag, tuple(Symbol(w, (), True) for w in e.words), e, e.order)
                  for e in self.lexicon]
        base = max((p.order for p in prods), default=-1) + 1
        prods += [Production(c, (ENTITY,), None, base + i) for i, c in enumerate(self.entity_classes)]
        prods.sort(key=lambda p: p.order)
        return tuple(prods)

    @cached_property
    def sorted_post_rules(self) -> tuple[PostRule, ...]:
        return tuple(sorted(self.post_rules, key=lambda r: (r.rank, r.order)))

    def defined_symbols(self) -> set[Symbol]:
        return ({r.head for r in self.rules} | {e.tag for e in self.lexicon}
                | set(self.entity_classes))


# ---------------------------------------------------------------------------
# file format

_NT_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_\-']*)((?:\+[A-Za-z_][A-Za-z0-9_]*)*)(?::([A-Za-z0-9_]+))?$")


@dataclass
class _Tok:
    text: str
    quoted: bool
    col: int


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _unescape(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s)


def _spell_occurrence(sym: Symbol, coindex: str | None) -> str:
    return sym.spelled() + (f":{coindex}" if coindex is not None else "")


def _split_line(line: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(line):
        if line[pos].isspace():
            pos += 1
            continue
        if line[pos] == "#":
            break
        if line[pos] == '"':
            m = re.compile(r'"((?:[^"\\]|\\.)*)"').match(line, pos)
            if not m:
                raise GrammarError("unterminated string", lineno, pos + 1)
            toks.append(_Tok(_unescape(m.group(1)), True, pos + 1))
        else:
            m = re.compile(r'[^\s"]+').match(line, pos)
            toks.append(_Tok(m.group(0), False, pos + 1))
        pos = m.end()
    return toks


def _parse_nt(tok: _Tok, lineno: int) -> tuple[Symbol, str | None]:
    if tok.quoted:
        raise GrammarError(f"expected nonterminal, got terminal {tok.text!r}", lineno, tok.col)
    m = _NT_RE.match(tok.text)
    if not m:
        raise GrammarError(f"bad symbol {tok.text!r}", lineno, tok.col)
    suffixes = tuple(s for s in m.group(2).split("+") if s)
    return Symbol(m.group(1), suffixes), m.group(3)


def _parse_side(toks: list[_Tok], lineno: int) -> tuple[list[Symbol], list[str | None], list[int]]:
    syms, coidx, cols = [], [], []
    for t in toks:
        if not t.quoted and t.text == "~":
            continue
        if t.quoted:
            syms.append(Symbol(t.text, (), True))
            coidx.append(None)
        else:
            sym, k = _parse_nt(t, lineno)
            syms.append(sym)
            coidx.append(k)
        cols.append(t.col)
    return syms, coidx, cols


def link_occurrences(source: list[Symbol], source_coindex: list[str | None],
                     target: list[Symbol], target_coindex: list[str | None]
                     ) -> tuple[tuple[int, int], ...]:
    """Build the source/target link bijection; raises GrammarError if ill-formed."""
    src_by_k: dict[str, int] = {}
    src_free: dict[Symbol, list[int]] = defaultdict(list)
    for i, (sym, k) in enumerate(zip(source, source_coindex)):
        if sym.terminal:
            continue
        if k is None:
            src_free[sym].append(i)
        elif k in src_by_k:
            raise GrammarError(f"coindex {k} used twice on source side")
        else:
            src_by_k[k] = i
    for sym, idx in src_free.items():
        if len(idx) > 1:
            raise GrammarError(f"ambiguous link bijection: {sym.label} repeated without coindexes")

    links = []
    used: set[int] = set()
    for j, (sym, k) in enumerate(zip(target, target_coindex)):
        if sym.terminal:
            continue
        if k is not None:
            if k not in src_by_k:
                raise GrammarError(f"target coindex {k} has no source occurrence")
            i = src_by_k[k]
        else:
            cands = src_free.get(sym, [])
            if not cands:
                raise GrammarError(f"ill-formed link bijection: target {sym.label} not linked to source")
            i = cands[0]
        if source[i] != sym:
            raise GrammarError(f"ill-formed link bijection: {source[i].label} linked to {sym.label}")
        if i in used:
            raise GrammarError(f"ill-formed link bijection: {sym.label} emitted twice on target side")
        used.add(i)
        links.append((i, j))
    missing = [source[i].label for i, s in enumerate(source) if not s.terminal and i not in used]
    if missing:
        raise GrammarError(f"ill-formed link bijection: source {', '.join(missing)} dropped on target side")
    return tuple(sorted(links))


def load_grammar(text: str) -> GrammarSpec:
    """Parse, macro-expand and validate a grammar file."""
    start: Symbol | None = None
    suffixes: list[str] = []
    rules: list[SyncRule] = []
    lexicon: list[LexEntry] = []
    lex_seen: dict[tuple[Symbol, str], int] = {}
    posts: list[PostRule] = []
    macros: list[SuffixMacro] = []
    entity_classes: list[Symbol] = []
    lang = None
    detok = "whitespace"
    order = 0
    used_symbols: list[tuple[Symbol, int, int]] = []

    for lineno, line in enumerate(text.splitlines(), 1):
        toks = _split_line(line, lineno)
        if not toks:
            continue
        kw, args = toks[0], toks[1:]
        if kw.quoted:
            raise GrammarError("expected directive", lineno, kw.col)

        def need(n: int) -> None:
            if len(args) != n:
                col = args[n].col if len(args) > n else len(line) + 1
                raise GrammarError(f"'{kw.text}' takes {n} argument(s)", lineno, col)

        if kw.text == "start":
            need(1)
            start, _ = _parse_nt(args[0], lineno)
            used_symbols.append((start, lineno, args[0].col))
        elif kw.text == "suffix":
            need(1)
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", args[0].text) or args[0].quoted:
                raise GrammarError(f"bad suffix name {args[0].text!r}", lineno, args[0].col)
            if args[0].text not in suffixes:
                suffixes.append(args[0].text)
        elif kw.text == "detok":
            need(1)
            if args[0].text not in ("cjk", "whitespace"):
                raise GrammarError("detok must be 'cjk' or 'whitespace'", lineno, args[0].col)
            detok = args[0].text
        elif kw.text == "lang":
            need(1)
            lang = args[0].text
        elif kw.text == "entityclass":
            need(1)
            sym, k = _parse_nt(args[0], lineno)
            if k is not None:
                raise GrammarError("coindex not allowed here", lineno, args[0].col)
            entity_classes.append(sym)
            used_symbols.append((sym, lineno, args[0].col))
        elif kw.text == "rule":
            rules.append(_parse_rule(args, lineno, order, len(line)))
            order += 1
            r = rules[-1]
            used_symbols.extend((s, lineno, 0) for s in (r.head,) + r.source if not s.terminal)
        elif kw.text == "lex":
            if len(args) != 4 or args[2].text != "=>" or args[2].quoted:
                raise GrammarError('expected: lex TAG "source" => "target"', lineno, kw.col)
            tag, k = _parse_nt(args[0], lineno)
            if k is not None:
                raise GrammarError("coindex not allowed on a lexicon tag", lineno, args[0].col)
            if not (args[1].quoted and args[3].quoted):
                raise GrammarError("lexicon source and target must be quoted", lineno, args[1].col)
            source = " ".join(args[1].text.split())
            if not source:
                raise GrammarError("empty lexicon source", lineno, args[1].col)
            key = (tag, source)
            if key in lex_seen:
                raise GrammarError(
                    f"duplicate lexicon entry ({tag.label}, {source!r}), first on line {lex_seen[key]}",
                    lineno, args[1].col)
            lex_seen[key] = lineno
            lexicon.append(LexEntry(tag, source, args[3].text, order))
            order += 1
            used_symbols.append((tag, lineno, args[0].col))
        elif kw.text == "inherit":
            macros.append(_parse_inherit(args, lineno))
        elif kw.text == "post":
            posts.append(_parse_post(args, lineno, len(posts)))
        else:
            raise GrammarError(f"unknown directive {kw.text!r}", lineno, kw.col)

    if start is None:
        raise GrammarError("missing 'start' directive")
    for sym, lineno, col in used_symbols:
        for s in sym.suffixes:
            if s not in suffixes:
                raise GrammarError(f"undeclared suffix {s!r} in {sym.label}", lineno, col or None)
    for m in macros:
        if m.suffix not in suffixes:
            raise GrammarError(f"undeclared suffix {m.suffix!r} in inherit")

    spec = GrammarSpec(
        start=start, rules=tuple(rules), lexicon=tuple(lexicon), suffixes=tuple(suffixes),
        post_rules=tuple(posts), macros=tuple(macros), entity_classes=tuple(entity_classes),
        target_language=lang, detokenize_policy=detok,
    )
    spec = expand_suffixes(spec)
    validate(spec)
    return spec


def read_grammar(path: str | Path) -> GrammarSpec:
    return load_grammar(Path(path).read_text(encoding="utf-8"))


def _parse_rule(args: list[_Tok], lineno: int, order: int, eol: int) -> SyncRule:
    if len(args) < 2 or args[1].text != "->" or args[1].quoted:
        raise GrammarError("expected: rule NT -> source | target", lineno, args[0].col if args else eol)
    head, k = _parse_nt(args[0], lineno)
    if k is not None:
        raise GrammarError("coindex not allowed on rule head", lineno, args[0].col)
    body = args[2:]
    bars = [i for i, t in enumerate(body) if t.text == "|" and not t.quoted]
    if len(bars) != 1:
        col = body[bars[1]].col if len(bars) > 1 else eol + 1
        raise GrammarError("rule needs exactly one '|' between source and target", lineno, col)
    src_toks, tgt_toks = body[:bars[0]], body[bars[0] + 1:]
    src, src_k, _ = _parse_side(src_toks, lineno)
    tgt, tgt_k, _ = _parse_side(tgt_toks, lineno)
    if not src:
        raise GrammarError("empty source side (source epsilon is not allowed)", lineno, args[1].col)
    try:
        links = link_occurrences(src, src_k, tgt, tgt_k)
    except GrammarError as e:
        raise GrammarError(e.reason, lineno, args[0].col) from None
    return SyncRule(head, tuple(src), tuple(tgt), links, tuple(src_k), tuple(tgt_k), order)


def _parse_inherit(args: list[_Tok], lineno: int) -> SuffixMacro:
    if len(args) < 4 or args[2].text != "propagate":
        raise GrammarError("expected: inherit SUFFIX NT propagate REF[,REF...]", lineno,
                           args[0].col if args else 1)
    head_text = args[1].text
    selector = None
    if "@" in head_text:
        head_text, sel = head_text.split("@", 1)
        if not sel.isdigit() or int(sel) < 1:
            raise GrammarError(f"bad rule selector {sel!r}", lineno, args[1].col)
        selector = int(sel)
    head, k = _parse_nt(_Tok(head_text, False, args[1].col), lineno)
    refs = tuple(r for t in args[3:] for r in t.text.split(",") if r)
    if not refs:
        raise GrammarError("inherit needs at least one occurrence to propagate to", lineno, args[2].col)
    return SuffixMacro(args[0].text, head, refs, selector)


def _parse_post(args: list[_Tok], lineno: int, order: int) -> PostRule:
    if not args or args[0].quoted or not re.fullmatch(r"-?\d+", args[0].text):
        raise GrammarError("post rule needs an integer rank", lineno, args[0].col if args else 1)
    arrows = [i for i, t in enumerate(args) if t.text == "=>" and not t.quoted]
    if len(arrows) != 1:
        raise GrammarError("post rule needs exactly one '=>'", lineno, args[0].col)
    pat: list[PatternItem] = []
    for t in args[1:arrows[0]]:
        if t.quoted:
            pat.append(t.text)
        elif t.text in ("*", "**"):
            pat.append(Wildcard(t.text))
        else:
            raise GrammarError(f"pattern tokens must be quoted or '*'/'**', got {t.text!r}", lineno, t.col)
    if all(p is Wildcard.RUN for p in pat):
        raise GrammarError("post pattern may not match the empty sequence", lineno, args[0].col)
    rep = []
    for t in args[arrows[0] + 1:]:
        if t.quoted:
            rep.append(t.text)
        elif t.text != "~":
            raise GrammarError("replacement tokens must be quoted", lineno, t.col)
    return PostRule(tuple(pat), tuple(rep), int(args[0].text), order)


# ---------------------------------------------------------------------------
# suffix inheritance


def _derive(rule: SyncRule, macro: SuffixMacro) -> SyncRule:
    positions = set()
    for ref in macro.propagate:
        if ref in rule.source_coindex:
            hits = [i for i, k in enumerate(rule.source_coindex) if k == ref]
        else:
            sym = nonterminal(ref)
            hits = [i for i, s in enumerate(rule.source) if s == sym]
        if len(hits) != 1:
            what = "missing" if not hits else "ambiguous"
            raise GrammarError(f"inherit {macro.suffix} {macro.head.label}: {what} occurrence {ref!r}")
        positions.add(hits[0])
    src = list(rule.source)
    tgt = list(rule.target)
    t_of = dict(rule.links)
    for i in positions:
        src[i] = src[i].with_suffix(macro.suffix)
        tgt[t_of[i]] = tgt[t_of[i]].with_suffix(macro.suffix)
    return replace(rule, head=rule.head.with_suffix(macro.suffix), source=tuple(src),
                   target=tuple(tgt), derived=True)


def expand_suffixes(spec: GrammarSpec) -> GrammarSpec:
    """Add the rules derived by every SuffixMacro.  Idempotent."""
    rules = list(spec.rules)
    next_order = max([r.order for r in rules] + [e.order for e in spec.lexicon], default=-1) + 1
    for macro in spec.macros:
        base = [r for r in rules if r.head == macro.head and not r.derived]
        if macro.selector is not None:
            base = base[macro.selector - 1:macro.selector]
        if not base:
            raise GrammarError(f"inherit {macro.suffix}: no rule for {macro.head.label}")
        if len(base) > 1:
            raise GrammarError(
                f"inherit {macro.suffix}: {macro.head.label} has {len(base)} rules; select one with "
                f"{macro.head.spelled()}@N")
        derived = _derive(base[0], macro)
        clash = [r for r in rules if r.head == derived.head and r.source == derived.source]
        if any(r.body() != derived.body() for r in clash):
            raise GrammarError(f"suffix collision: {derived.head.label} already defined with a different body")
        if clash:
            continue
        rules.append(replace(derived, order=next_order))
        next_order += 1
    return replace(spec, rules=tuple(rules))


# ---------------------------------------------------------------------------
# validation


def validate(spec: GrammarSpec) -> None:
    """Check the static well-formedness conditions of a grammar."""
    declared = set(spec.suffixes)
    every = [spec.start, *spec.entity_classes]
    for r in spec.rules:
        every += [r.head, *r.source, *r.target]
        if not r.source:
            raise GrammarError(f"rule {r} has an empty source side")
        _check_links(r)
    every += [e.tag for e in spec.lexicon]
    for sym in every:
        if not sym.terminal:
            if not sym.name:
                raise GrammarError("empty nonterminal name")
            bad = [s for s in sym.suffixes if s not in declared]
            if bad:
                raise GrammarError(f"undeclared suffix {bad[0]!r} in {sym.label}")

    labels: dict[str, Symbol] = {}
    for sym in every:
        if sym.terminal:
            continue
        other = labels.setdefault(sym.label, sym)
        if other != sym:
            raise GrammarError(f"symbols {other.spelled()} and {sym.spelled()} share the name {sym.label}")

    seen: set[tuple[Symbol, str]] = set()
    for e in spec.lexicon:
        key = (e.tag, " ".join(e.words))
        if not e.words:
            raise GrammarError(f"empty lexicon source for {e.tag.label}")
        if key in seen:
            raise GrammarError(f"duplicate lexicon entry ({e.tag.label}, {key[1]!r})")
        seen.add(key)

    defined = spec.defined_symbols()
    if spec.start not in defined:
        raise GrammarError(f"start symbol {spec.start.label} has no rules or lexicon entries")
    children: dict[Symbol, set[Symbol]] = defaultdict(set)
    for r in spec.rules:
        children[r.head].update(s for s in r.source if not s.terminal)
    stack, reached = [spec.start], {spec.start}
    while stack:
        for c in children[stack.pop()]:
            if c not in defined:
                raise GrammarError(f"nonterminal {c.label} is used but never defined")
            if c not in reached:
                reached.add(c)
                stack.append(c)

    _check_unit_cycles(spec)


def _check_links(r: SyncRule) -> None:
    src_nt = [i for i, s in enumerate(r.source) if not s.terminal]
    tgt_nt = [j for j, s in enumerate(r.target) if not s.terminal]
    if sorted(i for i, _ in r.links) != src_nt or sorted(j for _, j in r.links) != tgt_nt:
        raise GrammarError(f"ill-formed link bijection in {r}")
    for i, j in r.links:
        if r.source[i] != r.target[j]:
            raise GrammarError(f"ill-formed link bijection in {r}: {r.source[i].label} vs {r.target[j].label}")


def _check_unit_cycles(spec: GrammarSpec) -> None:
    unit: dict[Symbol, set[Symbol]] = defaultdict(set)
    for r in spec.rules:
        if len(r.source) == 1 and not r.source[0].terminal:
            unit[r.head].add(r.source[0])
    state: dict[Symbol, int] = {}

    def visit(sym: Symbol, path: list[Symbol]) -> None:
        state[sym] = 1
        for nxt in sorted(unit[sym]):
            if state.get(nxt) == 1:
                cyc = path[path.index(nxt):] + [nxt] if nxt in path else [sym, nxt]
                raise GrammarError("cycle in source projection: " + " -> ".join(s.label for s in cyc))
            if nxt not in state:
                visit(nxt, path + [nxt])
        state[sym] = 2

    for sym in sorted(unit):
        if sym not in state:
            visit(sym, [sym])


# ---------------------------------------------------------------------------
# serialization


def serialize_grammar(spec: GrammarSpec) -> str:
    """Canonical text form; ``load_grammar(serialize_grammar(g)) == g``."""
    out = [f"start {spec.start.spelled()}"]
    out += [f"suffix {s}" for s in spec.suffixes]
    if spec.target_language:
        out.append(f"lang {spec.target_language}")
    out.append(f"detok {spec.detokenize_policy}")
    out += [f"entityclass {c.spelled()}" for c in spec.entity_classes]
    items: list[tuple[int, str]] = []
    for r in spec.rules:
        if not r.derived:
            items.append((r.order, f"rule {r}"))
    for e in spec.lexicon:
        items.append((e.order, f"lex {e.tag.spelled()} {_quote(e.source)} => {_quote(e.target)}"))
    out += [text for _, text in sorted(items)]
    for m in spec.macros:
        head = m.head.spelled() + (f"@{m.selector}" if m.selector else "")
        out.append(f"inherit {m.suffix} {head} propagate {','.join(m.propagate)}")
    out += [f"post {p}" for p in spec.post_rules]
    return "\n".join(out) + "\n"

