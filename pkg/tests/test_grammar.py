import random

import pytest
from hypothesis import given, settings, strategies as st

from rbmt import data_path
from rbmt.grammar import (GrammarError, Symbol, expand_suffixes, load_grammar, nonterminal, read_grammar,
                          serialize_grammar)

from oracles import random_grammar

VP_BASE = """\
start VP
suffix T
rule VP -> V NP | NP V
lex NP "a film" => "映画を"
lex V "write" => "書きます"
lex V+T "write" => "書き"
"""


def test_coordination_fixture_shape(coord_ja):
    assert coord_ja.start == nonterminal("VP")
    assert len(coord_ja.rules) == 3
    assert len(coord_ja.lexicon) == 5
    assert coord_ja.suffixes == ("T",)
    assert coord_ja.detokenize_policy == "cjk"


def test_minimal_grammar():
    spec = load_grammar('start S\nlex S "hi" => "こんにちは"\n')
    assert spec.rules == ()
    assert len(spec.lexicon) == 1
    assert spec.lexicon[0].target_tokens == ("こんにちは",)


def test_repeated_nonterminal_needs_coindex():
    with pytest.raises(GrammarError, match="ambiguous link bijection"):
        load_grammar('start S\nrule S -> V V | V V\nlex V "x" => "y"\n')


def test_coindexed_repeat_links_by_index():
    spec = load_grammar('start S\nrule S -> V:1 "and" V:2 | V:2 V:1\nlex V "x" => "y"\n')
    rule = spec.rules[0]
    assert rule.target_to_source == {0: 2, 1: 0}


@pytest.mark.parametrize("text, message", [
    ("start S\nrule S -> A | B\nlex A \"a\" => \"b\"\nlex B \"b\" => \"c\"\n", "link bijection"),
    ("start S\nrule S -> A+X | A+X\nlex A+X \"a\" => \"b\"\n", "undeclared suffix"),
    ('start S\nlex S "a" => "b"\nlex S "a" => "c"\n', "duplicate lexicon entry"),
    ('start S\nlex T "a" => "b"\n', "start symbol"),
    ('start S\nrule S -> A | A\n', "never defined"),
    ('start S\nrule S -> A | A\nrule A -> S | S\nlex A "a" => "b"\n', "cycle"),
    ('start S\nrule S -> ~ | ~\n', "empty source"),
    ('start S\nfrobnicate S\n', "unknown directive"),
    ('rule S -> "a" | "b"\n', "missing 'start'"),
])
def test_load_errors(text, message):
    with pytest.raises(GrammarError, match=message):
        load_grammar(text)


def test_error_carries_position():
    with pytest.raises(GrammarError) as info:
        load_grammar('start S\nlex S "a" => "b"\nlex S "a" => "c"\n')
    assert info.value.line == 3
    assert info.value.column is not None


def test_epsilon_placeholder_is_ignored():
    a = load_grammar('start S\nrule S -> "and" V | ~ V\nlex V "x" => "y"\n')
    b = load_grammar('start S\nrule S -> "and" V | V\nlex V "x" => "y"\n')
    assert a.rules[0].target == b.rules[0].target


def test_suffix_order_matters():
    t = "start S\nsuffix T\nsuffix U\nrule S -> X+T+U | X+T+U\nlex X+T+U \"a\" => \"b\"\nlex X+U+T \"a\" => \"c\"\n"
    spec = load_grammar(t)
    tags = {e.tag for e in spec.lexicon}
    assert Symbol("X", ("T", "U")) in tags and Symbol("X", ("U", "T")) in tags


def test_display_name_collision_rejected():
    with pytest.raises(GrammarError, match="share the name"):
        load_grammar('start S\nsuffix T\nrule S -> VT V+T | VT V+T\nlex VT "a" => "b"\nlex V+T "c" => "d"\n')


def test_inherit_derives_suffixed_rule():
    spec = load_grammar(VP_BASE + "inherit T VP propagate V\n")
    derived = [r for r in spec.rules if r.derived]
    assert len(derived) == 1
    assert str(derived[0]) == "VP+T -> V+T NP | NP V+T"


def test_no_macros_is_identity():
    spec = load_grammar(VP_BASE)
    assert expand_suffixes(spec) == spec


def test_expansion_idempotent_and_monotone():
    spec = read_grammar(data_path("inherit_ja.scfg"))
    base = [r for r in spec.rules if not r.derived]
    assert len(spec.rules) == len(base) + len(spec.macros)
    assert expand_suffixes(spec) == spec
    assert expand_suffixes(expand_suffixes(spec)) == spec


def test_inherit_selects_rule_by_position():
    spec = read_grammar(data_path("inherit_ja.scfg"))
    derived = [str(r) for r in spec.rules if r.derived]
    assert derived == ["VP+T -> V+T NP | NP V+T"]


def test_inherit_needs_selector_for_multiple_rules():
    text = "start VP\nsuffix T\nrule VP -> V NP | NP V\nrule VP -> V | V\nlex V \"a\" => \"b\"\n" \
           "lex V+T \"a\" => \"c\"\nlex NP \"n\" => \"m\"\ninherit T VP propagate V\n"
    with pytest.raises(GrammarError, match="select one"):
        load_grammar(text)


def test_suffix_collision():
    text = VP_BASE + "rule VP+T -> V+T NP | V+T NP\ninherit T VP@1 propagate V\n"
    with pytest.raises(GrammarError, match="suffix collision"):
        load_grammar(text)


def test_inherit_missing_occurrence():
    with pytest.raises(GrammarError, match="missing occurrence"):
        load_grammar(VP_BASE + "inherit T VP propagate ADJ\n")


@pytest.mark.parametrize("name", ["coord_ja.scfg", "inherit_ja.scfg", "mini_zh.scfg", "demo_zh.scfg"])
def test_round_trip_bundled(name):
    spec = read_grammar(data_path(name))
    text = serialize_grammar(spec)
    again = load_grammar(text)
    assert again == spec
    assert serialize_grammar(again) == text


def test_post_rules_parse_and_round_trip():
    spec = load_grammar('start S\nlex S "a" => "x"\npost 2 "A" * "B" => "C"\npost 1 "X" ** => ~\n')
    assert [r.rank for r in spec.sorted_post_rules] == [1, 2]
    assert load_grammar(serialize_grammar(spec)) == spec


def test_post_pattern_matching_nothing_rejected():
    with pytest.raises(GrammarError, match="empty sequence"):
        load_grammar('start S\nlex S "a" => "x"\npost 1 ** => "C"\n')


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_random_grammars_round_trip_and_are_well_formed(seed):
    try:
        spec = load_grammar(random_grammar(random.Random(seed)).text)
    except GrammarError:
        return
    assert load_grammar(serialize_grammar(spec)) == spec
    for r in spec.rules:
        assert not r.head.terminal and r.source
        src_nt = sorted(i for i, s in enumerate(r.source) if not s.terminal)
        tgt_nt = sorted(j for j, s in enumerate(r.target) if not s.terminal)
        assert sorted(i for i, _ in r.links) == src_nt
        assert sorted(j for _, j in r.links) == tgt_nt
        assert all(r.source[i] == r.target[j] for i, j in r.links)
