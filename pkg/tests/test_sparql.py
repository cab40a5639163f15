import pytest
from hypothesis import given, settings, strategies as st

from rbmt.dataset.sparql import (Filter, SparqlQuery, SparqlSyntaxError, Triple, from_rir, ground_sparql,
                                 parse_any, parse_sparql, to_rir, to_sparql)

SPOUSE_PATTERN = "ASK WHERE { M0 wdt:P1431 ?x0 . ?x0 wdt:P26 M1 . FILTER ( ?x0 != M1 )}"
SPOUSE_GROUNDED = ("ASK WHERE { wd:Q829979 wdt:P1431 ?x0 . ?x0 wdt:P26 wd:Q61597 . "
                 "FILTER ( ?x0 != wd:Q61597 )}")
HALLUC_ZH = "SELECT DISTINCT ?x0 WHERE { M0 wdt:P453 ?x0 . ?x0 wdt:P27 wd:Q148 }"
HALLUC_ZH_RIR = "SELECT DISTINCT ?x0 WHERE lb ( M0 ( wdt:P453 ) ( ?x0 ) ) . ( ?x0 ( wdt:P27 ) ( wd:Q148 ) ) rb"


def test_parse_spouse_example():
    q = parse_sparql(SPOUSE_PATTERN)
    assert q.form == "ASK"
    assert q.triples == (Triple("M0", "wdt:P1431", "?x0"), Triple("?x0", "wdt:P26", "M1"))
    assert q.filters == (Filter("?x0", "M1"),)
    assert to_sparql(q) == SPOUSE_PATTERN


def test_ground_spouse_example():
    q = ground_sparql(parse_sparql(SPOUSE_PATTERN), {"M0": "Q829979", "M1": "Q61597"})
    assert to_sparql(q) == SPOUSE_GROUNDED


def test_ground_keeps_variables_and_triple_count():
    q = parse_sparql(SPOUSE_PATTERN)
    g = ground_sparql(q, {"M0": "Q1", "M1": "Q2"})
    assert g.variables() == q.variables()
    assert len(g.triples) == len(q.triples)
    assert not g.placeholders()


def test_ground_without_placeholders_is_identity():
    q = parse_sparql(HALLUC_ZH.replace("M0", "wd:Q5"))
    assert ground_sparql(q, {}) == q


def test_ground_partial_bindings():
    with pytest.raises(KeyError, match="M1"):
        ground_sparql(parse_sparql(SPOUSE_PATTERN), {"M0": "Q829979"})


def test_halluc_rir():
    assert to_rir(parse_sparql(HALLUC_ZH)) == HALLUC_ZH_RIR
    assert to_sparql(from_rir(HALLUC_ZH_RIR)) == HALLUC_ZH


def test_empty_body():
    q = SparqlQuery("ASK")
    assert to_rir(q) == "ASK WHERE lb rb"
    assert from_rir("ASK WHERE lb rb") == q
    assert parse_sparql(to_sparql(q)) == q


def test_spouse_example_rir_round_trip():
    q = parse_sparql(SPOUSE_PATTERN)
    assert from_rir(to_rir(q)) == q.canonical()
    assert parse_any(to_rir(q)) == q.canonical()


def test_predicate_unions_survive():
    text = "SELECT DISTINCT ?x0 WHERE { ?x0 wdt:P40|wdt:P355 M0 . ?x0 wdt:P106 wd:Q33999 }"
    q = parse_sparql(text)
    assert q.triples[0].predicate == "wdt:P40|wdt:P355"
    assert from_rir(to_rir(q)) == q


@pytest.mark.parametrize("text", [
    "ASK { M0 wdt:P1 ?x0 }",
    "ASK WHERE { M0 wdt:P1 }",
    "ASK WHERE { M0 wdt:P1 ?x0",
    "DESCRIBE WHERE { }",
    "ASK WHERE { M0 wdt:P1 ?x0 . FILTER ( ?x0 = M0 ) }",
])
def test_bad_sparql(text):
    with pytest.raises(SparqlSyntaxError):
        parse_sparql(text)


@pytest.mark.parametrize("text", [
    "ASK WHERE lb ( M0 ( wdt:P1 ) ( ?x0 ) rb",
    "ASK WHERE lb ( M0 ( wdt:P1 ) ( ?x0 ) ) . rb rb",
    "ASK WHERE lb ( M0 ( wdt:P1 ) ( ?x0 ) ) frob rb",
    "",
])
def test_bad_rir(text):
    with pytest.raises(SparqlSyntaxError):
        from_rir(text)


nodes = st.one_of(
    st.integers(0, 3).map(lambda i: f"?x{i}"),
    st.integers(0, 9).map(lambda i: f"M{i}"),
    st.integers(1, 99999).map(lambda i: f"wd:Q{i}"),
)
preds = st.lists(st.integers(1, 9999).map(lambda i: f"wdt:P{i}"), min_size=1, max_size=2).map("|".join)
queries = st.builds(
    lambda form, proj, triples, filters: SparqlQuery(form, proj if form != "ASK" else None,
                                                     tuple(triples), tuple(filters)),
    st.sampled_from(["ASK", "SELECT DISTINCT"]),
    st.integers(0, 3).map(lambda i: f"?x{i}"),
    st.lists(st.builds(Triple, nodes, preds, nodes), max_size=5),
    st.lists(st.builds(Filter, nodes, nodes), max_size=2),
)


@settings(max_examples=300, deadline=None)
@given(queries)
def test_rir_round_trip_property(q):
    assert from_rir(to_rir(q)) == q.canonical()
    assert parse_sparql(to_sparql(q)) == q
