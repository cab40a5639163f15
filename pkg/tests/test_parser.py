import random

import pytest
from hypothesis import given, settings, strategies as st

from rbmt.grammar import GrammarError, LexEntry, SyncRule, load_grammar
from rbmt.parser import (ParseError, ParseTree, TokenizeError, UnknownTokenError, ambiguity_report, parse,
                         tokenize)
from rbmt.transducer import detokenize

from oracles import TERMS, count_derivations, random_grammar, sample_sentence

# S -> A B | C D with A -> a, B -> b c, C -> a b, D -> c: "a b c" has exactly two derivations
TWO_WAY = """\
start S
rule S -> A B | A B
rule S -> C D | C D
rule A -> "a" | "x"
rule B -> "b" "c" | "y"
rule C -> "a" "b" | "z"
rule D -> "c" | "w"
"""


def check_sound(spec, forest, tree: ParseTree) -> None:
    toks = forest.input
    i, j = tree.span
    assert tree.leaves() == list(toks.tokens[i:j])
    if tree.kind == "token":
        return
    if tree.kind == "entity":
        assert tree.symbol in spec.entity_classes
        assert j == i + 1 and i in toks.entity_positions
        return
    if tree.kind == "lex":
        assert isinstance(tree.rule, LexEntry) and tree.rule.tag == tree.symbol
        assert tuple(tree.leaves()) == tree.rule.words
        return
    assert isinstance(tree.rule, SyncRule) and tree.rule.head == tree.symbol
    assert len(tree.children) == len(tree.rule.source)
    pos = i
    for child, sym in zip(tree.children, tree.rule.source):
        assert child.span[0] == pos
        pos = child.span[1]
        if sym.terminal:
            assert child.kind == "token" and child.symbol.name == sym.name
        else:
            assert child.symbol == sym
            check_sound(spec, forest, child)
    assert pos == j


def test_tokenize_mod_entities():
    ts = tokenize("Did M1 's spouse executive produce M0")
    assert len(ts) == 7
    assert ts.entity_spans == ((1, "modEntity", "M1"), (6, "modEntity", "M0"))


def test_tokenize_brackets():
    ts = tokenize("Did [Erika Mann] 's spouse executive produce [Friedemann Bach]")
    assert len(ts) == 7
    assert [(i, k) for i, k, _ in ts.entity_spans] == [(1, "bracketedEntity"), (6, "bracketedEntity")]
    assert ts.tokens[1] == "[Erika Mann]"


def test_tokenize_empty():
    assert tokenize("").tokens == ()
    assert tokenize("   ").tokens == ()


@pytest.mark.parametrize("text", ["Did [Erika Mann 's", "a ] b", "[a [b] c]"])
def test_tokenize_unbalanced(text):
    with pytest.raises(TokenizeError):
        tokenize(text)


def test_coordination_parse(coord_ja):
    forest = parse(coord_ja, "write and edit a film")
    assert forest.count == 1
    assert str(forest.tree(0)) == "VP(V(VT(write), andV(and, V(edit))), NP(a film))"


def test_minimal_parse():
    spec = load_grammar('start S\nlex S "hi" => "こんにちは"\n')
    forest = parse(spec, "hi")
    assert forest.count == 1
    tree = forest.tree(0)
    assert tree.kind == "lex" and tree.children[0].symbol.name == "hi"


def test_two_way_ambiguity():
    spec = load_grammar(TWO_WAY)
    forest = parse(spec, "a b c")
    assert forest.count == 2
    # canonical order follows rule-file order
    assert [str(t) for t in forest.trees()] == ["S(A(a), B(b, c))", "S(C(a, b), D(c))"]


def test_ambiguity_report():
    spec = load_grammar(TWO_WAY)
    rep = ambiguity_report(spec, ["a b c"])
    assert [c for _, c in rep.rows] == [2]
    assert rep.proportion == 1.0


def test_ambiguity_report_unambiguous(coord_ja):
    rep = ambiguity_report(coord_ja, ["write a film", "edit a film", "write and edit a film"])
    assert [c for _, c in rep.rows] == [1, 1, 1]
    assert rep.proportion == 0.0


def test_ambiguity_report_keeps_going_on_failures(coord_ja):
    rep = ambiguity_report(coord_ja, ["write a film", "film a write", "sing a film"])
    assert [c for _, c in rep.rows] == [1, 0, 0]
    assert set(rep.diagnostics) == {1, 2}


def test_no_parse_reports_prefix(coord_ja):
    with pytest.raises(ParseError) as info:
        parse(coord_ja, "write and a film")
    assert info.value.prefix == 2
    assert info.value.token == "a"


def test_unknown_token(coord_ja):
    with pytest.raises(UnknownTokenError) as info:
        parse(coord_ja, "sing a film")
    assert info.value.token == "sing"


def test_empty_input_is_no_parse(coord_ja):
    with pytest.raises(ParseError):
        parse(coord_ja, "")


def test_entities_only_match_entity_classes(mini_zh):
    assert parse(mini_zh, "Did M1 's spouse executive produce M0").count == 1
    assert parse(mini_zh, "Did [Erika Mann] 's spouse executive produce [Friedemann Bach]").count == 1
    with pytest.raises(ParseError):
        parse(mini_zh, "Did M1 's M0 produce M0")


def test_demo_ambiguities(demo_zh):
    assert parse(demo_zh, "Was M0 an art director").count == 2
    assert parse(demo_zh, "Was the spouse of M0 's sibling a writer").count == 2
    assert parse(demo_zh, "Was M0 's spouse a writer").count == 1


def test_trees_are_sound(demo_zh):
    for p in ["Was M0 an art director", "Did the spouse of M0 's child produce M1",
              "Did M0 direct and edit M1", "What film did the sibling of M0 's parent produce"]:
        forest = parse(demo_zh, p)
        for tree in forest.trees():
            assert tree.symbol == demo_zh.start
            assert tree.span == (0, len(forest.input))
            check_sound(demo_zh, forest, tree)


def test_enumeration_stable(demo_zh):
    p = "Was the spouse of M0 's sibling an art director"
    a = [str(t) for t in parse(demo_zh, p).trees()]
    b = [str(t) for t in parse(demo_zh, p).trees()]
    assert a == b and len(a) == 4 and len(set(a)) == 4


def test_tree_index_out_of_range(coord_ja):
    forest = parse(coord_ja, "write a film")
    with pytest.raises(IndexError):
        forest.tree(1)


def _toy(seed):
    rng = random.Random(seed)
    while True:
        g = random_grammar(rng)
        try:
            return g, load_grammar(g.text), rng
        except GrammarError:
            continue


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_counts_match_brute_force(seed):
    g, spec, rng = _toy(seed)
    inputs = [[rng.choice(TERMS) for _ in range(rng.randint(1, 8))] for _ in range(2)]
    s = sample_sentence(g, rng)
    if s and len(s) <= 8:
        inputs.append(s)
    for toks in inputs:
        expected = count_derivations(g, toks)
        try:
            forest = parse(spec, toks)
        except ParseError:
            assert expected == 0
            continue
        assert forest.count == expected
        for k in range(min(forest.count, 20)):
            check_sound(spec, forest, forest.tree(k))


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_tokenization_round_trip(seed):
    g, spec, rng = _toy(seed)
    s = sample_sentence(g, rng)
    if not s or len(s) > 8:
        return
    direct = parse(spec, s)
    again = parse(spec, tokenize(detokenize(list(s), "whitespace")))
    assert direct.count == again.count
    assert [str(t) for t in direct.trees()] == [str(t) for t in again.trees()]
