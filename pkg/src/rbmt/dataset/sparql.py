"""Pattern-level SPARQL handling for CFQ/MCWQ style queries.

Only the fragment used by the benchmark is covered: ``ASK`` and
``SELECT DISTINCT ?v`` forms, a WHERE block of triples separated by ``.``,
and trailing ``FILTER ( a != b )`` constraints.  Predicates may be joined
with ``|`` or ``,`` and are kept as opaque strings.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

VAR_RE = re.compile(r"\?[A-Za-z_][A-Za-z0-9_]*")
PLACEHOLDER_RE = re.compile(r"M[0-9]")
ENTITY_RE = re.compile(r"wd:Q[0-9]+")
_NODE_RE = re.compile(r"\?[A-Za-z_][A-Za-z0-9_]*|M[0-9]|[A-Za-z][A-Za-z0-9]*:[A-Za-z0-9_]+")
_PRED_ATOM_RE = re.compile(r"\^?[A-Za-z][A-Za-z0-9]*:[A-Za-z0-9_]+(?:[|/]\^?[A-Za-z][A-Za-z0-9]*:[A-Za-z0-9_]+)*")
_SPARQL_TOKEN_RE = re.compile(r"[{}()]|,|!=|[^\s{}(),]+")


class SparqlSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str


@dataclass(frozen=True)
class Filter:
    left: str
    right: str


@dataclass(frozen=True)
class SparqlQuery:
    form: str  # "ASK" or "SELECT DISTINCT"
    projection: str | None = None
    triples: tuple[Triple, ...] = ()
    filters: tuple[Filter, ...] = ()
    # whitespace before the closing brace, kept so patterns round-trip byte-exactly
    close_sep: str = " "

    def canonical(self) -> SparqlQuery:
        return replace(self, close_sep=" ")

    def terms(self) -> list[str]:
        out = []
        for t in self.triples:
            out += [t.subject, t.object]
        for f in self.filters:
            out += [f.left, f.right]
        return out

    def variables(self) -> set[str]:
        return {t for t in self.terms() if VAR_RE.fullmatch(t)}

    def placeholders(self) -> set[str]:
        return {t for t in self.terms() if PLACEHOLDER_RE.fullmatch(t)}

    def __str__(self) -> str:
        return to_sparql(self)


def _head(q: SparqlQuery) -> str:
    return "ASK" if q.form == "ASK" else f"SELECT DISTINCT {q.projection}"


def to_sparql(q: SparqlQuery) -> str:
    items = [f"{t.subject} {t.predicate} {t.object}" for t in q.triples]
    items += [f"FILTER ( {f.left} != {f.right} )" for f in q.filters]
    if not items:
        return f"{_head(q)} WHERE {{ }}"
    return f"{_head(q)} WHERE {{ {' . '.join(items)}{q.close_sep}}}"


def _check_node(term: str, where: str) -> str:
    if not _NODE_RE.fullmatch(term):
        raise SparqlSyntaxError(f"bad {where} term {term!r}")
    return term


def _check_predicate(tokens: list[str]) -> str:
    if not tokens or tokens[0] == "," or tokens[-1] == ",":
        raise SparqlSyntaxError(f"bad predicate {' '.join(tokens)!r}")
    for i, tok in enumerate(tokens):
        if (i % 2 == 1) != (tok == ","):
            raise SparqlSyntaxError(f"bad predicate {' '.join(tokens)!r}")
        if tok != "," and not _PRED_ATOM_RE.fullmatch(tok):
            raise SparqlSyntaxError(f"bad predicate {tok!r}")
    return " ".join(tokens)


def _parse_head(toks: list[str], opener: str) -> tuple[str, str | None, int]:
    if toks[:3] == ["ASK", "WHERE", opener]:
        return "ASK", None, 3
    if toks[:2] == ["SELECT", "DISTINCT"] and len(toks) > 4 and toks[3:5] == ["WHERE", opener]:
        if not VAR_RE.fullmatch(toks[2]):
            raise SparqlSyntaxError(f"bad projection {toks[2]!r}")
        return "SELECT DISTINCT", toks[2], 5
    raise SparqlSyntaxError(f"unsupported query head {' '.join(toks[:5])!r}")


def _split_items(body: list[str]) -> list[list[str]]:
    items: list[list[str]] = [[]]
    depth = 0
    for tok in body:
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise SparqlSyntaxError("unbalanced parentheses")
        if tok == "." and depth == 0:
            items.append([])
        else:
            items[-1].append(tok)
    if depth:
        raise SparqlSyntaxError("unbalanced parentheses")
    if items == [[]]:
        return []
    if any(not it for it in items):
        raise SparqlSyntaxError("empty item between '.' separators")
    return items


def _parse_filter(item: list[str]) -> Filter:
    if len(item) != 6 or item[1] != "(" or item[3] != "!=" or item[5] != ")":
        raise SparqlSyntaxError(f"unsupported FILTER {' '.join(item)!r}")
    return Filter(_check_node(item[2], "filter"), _check_node(item[4], "filter"))


def _collect(items: Iterable[list[str]], parse_triple) -> tuple[tuple[Triple, ...], tuple[Filter, ...]]:
    triples, filters = [], []
    for item in items:
        if item[0] == "FILTER":
            filters.append(_parse_filter(item))
        else:
            if filters:
                raise SparqlSyntaxError("triples after FILTER are not supported")
            triples.append(parse_triple(item))
    return tuple(triples), tuple(filters)


def parse_sparql(text: str) -> SparqlQuery:
    matches = list(_SPARQL_TOKEN_RE.finditer(text))
    toks = [m.group(0) for m in matches]
    if not toks:
        raise SparqlSyntaxError("empty query")
    form, proj, pos = _parse_head(toks, "{")
    if toks[-1] != "}" or "}" in toks[pos:-1] or "{" in toks[pos:]:
        raise SparqlSyntaxError("WHERE block must end the query with a single '}'")
    body = toks[pos:-1]

    def triple(item: list[str]) -> Triple:
        if len(item) < 3 or any(t in "()" for t in item):
            raise SparqlSyntaxError(f"bad triple {' '.join(item)!r}")
        return Triple(_check_node(item[0], "subject"), _check_predicate(item[1:-1]),
                      _check_node(item[-1], "object"))

    triples, filters = _collect(_split_items(body), triple)
    close_sep = ""
    if len(matches) >= 2 and matches[-1].start() > matches[-2].end():
        close_sep = " "
    return SparqlQuery(form, proj, triples, filters, close_sep)


def to_rir(q: SparqlQuery) -> str:
    """``{``/``}`` become ``lb``/``rb`` and each triple ``s p o`` becomes
    ``( s ( p ) ( o ) )``; FILTERs are kept verbatim."""
    items = [f"( {t.subject} ( {t.predicate} ) ( {t.object} ) )" for t in q.triples]
    items += [f"FILTER ( {f.left} != {f.right} )" for f in q.filters]
    body = " . ".join(items)
    return f"{_head(q)} WHERE lb {body + ' ' if body else ''}rb"


def from_rir(text: str) -> SparqlQuery:
    toks = text.split()
    if not toks:
        raise SparqlSyntaxError("empty RIR string")
    form, proj, pos = _parse_head(toks, "lb")
    if toks[-1] != "rb" or "rb" in toks[pos:-1] or "lb" in toks[pos:]:
        raise SparqlSyntaxError("RIR must end with a single 'rb'")

    def triple(item: list[str]) -> Triple:
        # ( s ( p ... ) ( o ) )
        if (len(item) < 8 or item[0] != "(" or item[2] != "(" or item[-1] != ")"
                or item[-2] != ")" or item[-4] != "(" or item[-5] != ")"):
            raise SparqlSyntaxError(f"malformed RIR triple {' '.join(item)!r}")
        pred = item[3:-5]
        if "(" in pred or ")" in pred:
            raise SparqlSyntaxError(f"malformed RIR triple {' '.join(item)!r}")
        return Triple(_check_node(item[1], "subject"), _check_predicate(pred),
                      _check_node(item[-3], "object"))

    triples, filters = _collect(_split_items(toks[pos:-1]), triple)
    return SparqlQuery(form, proj, triples, filters)


def parse_any(text: str) -> SparqlQuery:
    """Parse either surface SPARQL or RIR."""
    return from_rir(text) if "lb" in text.split() else parse_sparql(text)


def ground_sparql(q: SparqlQuery, bindings: Mapping[str, str] | Iterable) -> SparqlQuery:
    """Replace M-placeholders with ``wd:<QID>`` terms.

    ``bindings`` is a mapping placeholder -> QID or an iterable of objects
    with ``placeholder`` and ``qid`` attributes.
    """
    qids = _qid_map(bindings)
    missing = sorted(q.placeholders() - set(qids))
    if missing:
        raise KeyError(f"unbound placeholder(s): {', '.join(missing)}")

    def sub(term: str) -> str:
        return f"wd:{qids[term]}" if PLACEHOLDER_RE.fullmatch(term) else term

    return replace(
        q,
        triples=tuple(Triple(sub(t.subject), t.predicate, sub(t.object)) for t in q.triples),
        filters=tuple(Filter(sub(f.left), sub(f.right)) for f in q.filters),
    )


def _qid_map(bindings) -> dict[str, str]:
    if isinstance(bindings, Mapping):
        return dict(bindings)
    return {b.placeholder: b.qid for b in bindings}
