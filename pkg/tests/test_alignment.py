import pytest

from icmaus import (
    Alignment,
    EngineParams,
    build_alignments,
    compose,
    compute_frequency_table,
    new_pattern,
    parse_kb_text,
    project_alignment,
    unify_alignment,
)
from icmaus.errors import ContractError, LegalityError
from icmaus.knowledge import Pattern

SENTENCE = "S N 0 j o h n #N V 1 r u n s #V #S"


def col(a, symbol, row=0):
    for c, cells in enumerate(a.columns):
        if a.symbol(c) == symbol and any(r == row for r, _ in cells):
            return c
    raise LookupError(symbol)


@pytest.fixture(scope="module")
def parse(grammar_kb):
    return build_alignments(new_pattern("j o h n r u n s"), grammar_kb)[0]


def test_parse_rows(parse):
    rows = sorted(p.text for p in parse.alignment.rows[1:])
    assert rows == ["N 0 j o h n #N", "S N #N V #V #S", "V 1 r u n s #V"]


def test_parse_projection(parse):
    assert " ".join(project_alignment(parse.alignment)) == SENTENCE
    assert len(project_alignment(parse.alignment)) == len(SENTENCE.split()) == 16


def test_unify_parse(parse):
    assert unify_alignment(parse.alignment).text == SENTENCE


def test_single_row():
    a = Alignment.single(new_pattern("q r"))
    assert project_alignment(a) == ("q", "r")
    assert unify_alignment(a).symbols == ("q", "r")
    assert a.is_legal()


def test_full_match_unifies():
    new = new_pattern("a b")
    a = Alignment.single(new).extend(Pattern("p1", ("a", "b"), 1), [(0, 0), (1, 1)])
    assert unify_alignment(a).text == "a b"


def test_unordered_rows_are_illegal():
    new = new_pattern("a b")
    a = Alignment.single(new).extend(Pattern("p1", ("a", "x", "b"), 1), [(0, 0), (1, 2)])
    a = a.extend(Pattern("p2", ("a", "y", "b"), 1), [(col(a, "a"), 0), (col(a, "b"), 2)])
    assert not a.is_legal()
    assert a.illegal_pairs()
    with pytest.raises(LegalityError):
        project_alignment(a)


def test_crossing_row_raises():
    new = new_pattern("a b")
    with pytest.raises(LegalityError):
        Alignment.single(new).extend(Pattern("p1", ("b", "a"), 1), [(0, 1), (1, 0)])


class TestContracts:
    def test_row_zero_is_new(self):
        with pytest.raises(ContractError):
            Alignment((Pattern("p1", ("a",), 1),), (((0, 0),),))

    def test_mixed_column(self):
        new = new_pattern("a")
        with pytest.raises(ContractError):
            Alignment.single(new).extend(Pattern("p1", ("b",), 1), [(0, 0)])

    def test_self_column(self):
        new = new_pattern("a")
        p = Pattern("p1", ("a", "a"), 1)
        a = Alignment.single(new).extend(p, [(0, 0)])
        with pytest.raises(ContractError):
            a.extend(p, [(col(a, "a", 1), 0)])

    def test_position_hit_twice(self):
        new = new_pattern("a a")
        with pytest.raises(ContractError):
            Alignment.single(new).extend(Pattern("p1", ("a",), 1), [(0, 0), (1, 0)])

    def test_remove_new(self):
        with pytest.raises(ContractError):
            Alignment.single(new_pattern("a")).without_row(0)


def test_without_row_restores(parse):
    a = parse.alignment
    b = a.without_row(len(a.rows) - 1)
    assert len(b.rows) == len(a.rows) - 1
    assert b.is_legal()


def test_key_ignores_construction_order():
    kb = parse_kb_text("alarm phone_alarm_call (980)\nearthquake alarm (20)")
    new = new_pattern("phone_alarm_call")
    t = compute_frequency_table(kb, new)
    x = compose(new, list(kb.patterns), t)
    y = compose(new, list(kb.patterns), t)
    assert x.key() == y.key()
    assert x == y


def test_compose_places_rows(alarm_kb):
    new = new_pattern("phone_alarm_call radio_earthquake_announcement")
    rows = [alarm_kb.find(t.split()) for t in (
        "alarm phone_alarm_call", "earthquake alarm", "earthquake radio_earthquake_announcement")]
    a = compose(new, rows, compute_frequency_table(alarm_kb, new))
    assert a.is_legal()
    assert a.matched_new_positions() == (0, 1)
    assert len(a.rows) == 4


def test_fast_legality_agrees_with_pair_listing():
    from hypothesis import given, settings
    from hypothesis import strategies as st

    from icmaus.engine import score_alignment
    from oracles import all_alignments

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.sampled_from("abc"), min_size=1, max_size=4),
           st.lists(st.sampled_from("abc"), min_size=1, max_size=3),
           st.lists(st.sampled_from("abc"), min_size=1, max_size=3))
    def check(new, p, q):
        if p == q:
            q = q + ["a"]
        kb = parse_kb_text(f"{' '.join(p)} (2)\n{' '.join(q)} (3)")
        for a in all_alignments(new_pattern(new), kb, legal_only=False):
            assert a.is_legal() == (not a.illegal_pairs())

    check()
