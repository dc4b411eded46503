import pytest
from hypothesis import given, settings, strategies as st

from bca import (XOS, Additive, Bidder, Capped, Coverage, ItemSet, SizeLimitError, Table,
                 UniverseError, check_class, liquid, liquid_xos_clause, xos_clause)
from bca.valuations import subsets

from conftest import valuations


def S(*members, m=2):
    return ItemSet.of(members, m)


def test_additive_value():
    assert Additive((3, 5)).value(S(0, 1)) == 8


@pytest.mark.parametrize("v", [Additive((3, 5)), XOS(((4, 0), (0, 4))),
                               Coverage((frozenset({0}), frozenset({0, 1})), (2, 3)),
                               Capped(Additive((3, 5)), 6)])
def test_empty_set_is_zero(v):
    assert v.value(ItemSet.empty(2)) == 0
    assert v.table[0] == 0


def test_capped_value():
    assert Capped(Additive((3, 5)), 6).value(S(0, 1)) == 6


def test_liquid_caps_at_budget():
    w = liquid(Bidder(Additive((10,)), 2))
    assert isinstance(w, Capped)
    assert w.value(ItemSet.of([0], 1)) == 2


def test_liquid_is_idempotent():
    b = Bidder(Additive((10,)), 2)
    w = liquid(b)
    assert liquid(Bidder(w, 2)) is w


def test_liquid_inactive_cap():
    v = XOS(((4, 1), (0, 3)))
    w = liquid(Bidder(v, 100))
    assert all(w.value(T) == v.value(T) for T in subsets(2))


def test_footnote_liquid_values(footnote):
    b = footnote.bidders[0]
    w = liquid(b)
    assert b.valuation.value(S(0)) == b.valuation.value(S(0, 1)) == 10
    assert b.valuation.value(S(1)) == 2
    assert w.value(S(0)) == w.value(S(1)) == w.value(S(0, 1)) == 2


def test_xos_clause_unique_maximiser():
    assert xos_clause(XOS(((4, 0), (0, 4))), S(0)).weights == (4, 0)


def test_xos_clause_tie_goes_to_lowest_index():
    v = XOS(((4, 0), (0, 4)))
    # both clauses give 4 on {0, 1}
    assert [sum(c) for c in v.clauses] == [4, 4]
    assert xos_clause(v, S(0, 1)).weights == (4, 0)


def test_additive_is_single_clause_xos():
    for T in subsets(2):
        assert xos_clause(Additive((3, 5)), T).weights == (3, 5)


def test_xos_clause_rejects_tables():
    with pytest.raises(TypeError):
        xos_clause(Table((0, 1, 1, 3)), S(0))


def test_liquid_clause_truncates_running_prefix():
    v = Additive((4, 3, 2))
    assert liquid_xos_clause(v, 5, ItemSet.full(3)).weights == (4, 1, 0)


def test_liquid_clause_inactive_cap_restricts_to_set():
    v = Additive((4, 3, 2))
    assert liquid_xos_clause(v, 100, ItemSet.of([0, 2], 3)).weights == (4, 0, 2)


def test_liquid_clause_zero_budget():
    assert liquid_xos_clause(Additive((4, 3, 2)), 0, ItemSet.full(3)).weights == (0, 0, 0)


def test_check_class_coverage_submodular():
    v = Coverage((frozenset({0, 1}), frozenset({1, 2}), frozenset({2})), (1, 2, 3))
    assert check_class(v, "submodular")


def test_check_class_additive_submodular():
    assert check_class(Additive((1, 1)), "submodular")


def test_check_class_subadditive_witness():
    stub = Table.from_dict(2, {(0,): 1, (1,): 1, (0, 1): 3})
    rep = check_class(stub, "subadditive")
    assert not rep
    assert {frozenset(rep.witness[0]), frozenset(rep.witness[1])} == {frozenset({0}), frozenset({1})}


def test_check_class_monotone_witness():
    stub = Table.from_dict(2, {(0,): 2, (0, 1): 1})
    rep = check_class(stub, "monotone")
    assert not rep and rep.witness == (S(0), S(0, 1))


def test_xos_is_not_always_submodular():
    # item 2 adds 0 to {0} but 1 to {0, 1}
    v = XOS(((1, 0, 0), (0, 1, 1)))
    assert not check_class(v, "submodular")
    assert check_class(v, "subadditive")
    assert check_class(v, "xos-dominated-by")


def test_check_class_size_cap():
    with pytest.raises(SizeLimitError):
        check_class(Additive((1.0,) * 11), "monotone")


def test_value_rejects_universe_mismatch():
    with pytest.raises(UniverseError):
        Additive((1, 2)).value(ItemSet.of([0], 3))


def test_itemset_validation():
    with pytest.raises(UniverseError):
        ItemSet.of([3], 3)
    with pytest.raises(SizeLimitError):
        ItemSet(0, 25)
    assert list(ItemSet.of([4, 1], 6)) == [1, 4]
    assert len(ItemSet.full(5)) == 5


def test_negative_weights_rejected():
    with pytest.raises(ValueError):
        Additive((1, -1))
    with pytest.raises(ValueError):
        Bidder(Additive((1,)), -1)


@settings(max_examples=200, deadline=None)
@given(valuations())
def test_table_matches_direct_evaluation(v):
    for T in subsets(v.m):
        assert v.table[T.mask] == pytest.approx(v.value(T), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(valuations(), st.integers(0, 64 * 40).map(lambda k: k / 64))
def test_capped_evaluates_to_min(v, B):
    w = Capped(v, B)
    for T in subsets(v.m):
        assert w.value(T) == min(v.value(T), B)


@settings(max_examples=100, deadline=None)
@given(valuations(max_items=5))
def test_generated_valuations_are_normalised_and_monotone(v):
    assert v.value(ItemSet.empty(v.m)) == 0
    assert check_class(v, "monotone")


@settings(max_examples=100, deadline=None)
@given(valuations(max_items=5))
def test_clause_oracle_is_sound(v):
    # explicit double loop, independent of the vectorised checker
    for X in subsets(v.m):
        a = xos_clause(v, X)
        assert a.value(X) == pytest.approx(v.value(X), abs=1e-9)
        for Y in subsets(v.m):
            assert a.value(Y) <= v.value(Y) + 1e-9


@settings(max_examples=150, deadline=None)
@given(valuations(max_items=5, kinds=("coverage",)), st.sampled_from([0, 0.5, 1, 2]))
def test_capping_keeps_coverage_submodular(v, frac):
    B = frac * v.value(ItemSet.full(v.m))
    assert check_class(liquid(Bidder(v, B)), "submodular")


@settings(max_examples=150, deadline=None)
@given(valuations(max_items=5, kinds=("xos", "additive")), st.sampled_from([0, 0.5, 1, 2]))
def test_liquid_clause_dominated_and_tight(v, frac):
    B = frac * v.value(ItemSet.full(v.m))
    for X in subsets(v.m):
        a = liquid_xos_clause(v, B, X)
        assert a.value(X) == pytest.approx(min(v.value(X), B), abs=1e-9)
        for Y in subsets(v.m):
            assert a.value(Y) <= min(v.value(Y), B) + 1e-9


def test_capping_keeps_subadditive_stub_subadditive():
    # v(U) = 3 < v({0}) + v({1}) + ... ; subadditive but neither XOS nor submodular
    stub = Table.from_dict(3, {(0,): 2, (1,): 2, (2,): 2, (0, 1): 2, (0, 2): 3, (1, 2): 3, (0, 1, 2): 4})
    assert check_class(stub, "subadditive")
    assert check_class(stub, "monotone")
    for B in (0, 1, 2, 2.5, 3, 4, 8):
        assert check_class(Capped(stub, B), "subadditive")
