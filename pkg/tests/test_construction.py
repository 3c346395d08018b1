from fractions import Fraction

import pytest

from proxinorm.construction import (
    ConstructionTable,
    TableParams,
    dyadic_lt,
    growth_tail_majorant,
    iter_level,
    rational_grid,
    square_tail_majorant,
    vector_height,
)
from proxinorm.errors import DepthBudgetError
from proxinorm.vectors import SparseVec, l1_norm


def test_first_entry_is_zero_vector_with_tag_one(table):
    u, a = table.entry(1)
    assert u.is_zero() and a == 1


def test_entry_idempotent(table):
    assert table.entry(7) == table.entry(7)


def test_determinism_across_tables():
    t1 = ConstructionTable(TableParams(depth_budget=400))
    t2 = ConstructionTable(TableParams(depth_budget=400))
    assert list(t1.prefix(400)) == list(t2.prefix(400))


def test_growth_conditions_on_prefix(table):
    prev = 0
    for _, u, a in table.prefix(500):
        assert a > prev
        if not u.is_zero():
            assert a > u.max_support()
            assert a >= l1_norm(u)
        prev = a


def test_height_function():
    assert vector_height(SparseVec.zero()) == 1
    assert vector_height(SparseVec.unit(1)) == 2
    assert vector_height(SparseVec({1: Fraction(1, 3)})) == 4
    assert vector_height(SparseVec({5: 1})) == 5
    assert vector_height(SparseVec({1: Fraction(-3, 1)})) == 4


def test_rational_grid_sizes():
    assert rational_grid(1) == []
    assert rational_grid(2) == [Fraction(-1), Fraction(1)]
    assert len(rational_grid(3)) == 6
    assert len(rational_grid(4)) == 10


def test_level_recurrence():
    """Every vector of a level reappears in the next level."""
    lvl2 = list(iter_level(2))
    lvl3 = set(iter_level(3))
    assert len(lvl2) == 9
    for v in lvl2:
        assert v in lvl3


def test_occurrences_grow_between_levels(table):
    """A vector's tag set strictly grows from one enumeration level to the next."""
    e1 = SparseVec.unit(1)
    lvl2_end = 1 + 9  # levels 1 and 2
    lvl3_end = lvl2_end + len(list(iter_level(3)))
    early = table.tag_set(e1, lvl2_end)
    later = table.tag_set(e1, lvl3_end)
    assert set(early) < set(later)


def test_tag_set_within_prefix_tags(table):
    x = SparseVec({1: Fraction(1, 2), 2: -1})
    tags = table.tag_set(x, 500)
    all_tags = {a for _, _, a in table.prefix(500)}
    assert set(tags) <= all_tags


def test_min_occurrence_tag_beyond_support(table):
    """Eq-(1-2)-style consequence checked for several nonzero vectors."""
    for x in [SparseVec.unit(1), SparseVec({1: 1, 2: 1}), SparseVec({1: Fraction(1, 2), 2: -1})]:
        tags = table.tag_set(x, 500)
        assert tags and min(tags) > x.max_support()
        assert min(tags) >= l1_norm(x)


def test_tail_bound_strictly_decreasing(table):
    for K in range(0, 40):
        assert table.tail_bound(K) > table.tail_bound(K + 1)


def test_tail_bound_below_two(table):
    assert table.tail_bound(0) < 2


def test_tail_bound_dominates_fifty_exact_terms(table):
    for K in (0, 5, 17):
        exact = Fraction(0)
        for k in range(K + 1, K + 51):
            a = table.tag(k)
            exact += Fraction(1 + a, 1 << a * a)
        assert table.tail_bound(K) >= exact


def test_majorants_dominate_plain_series():
    # 30 raw terms of each series must stay below the closed-form bounds.
    for m in (1, 2, 5):
        growth = sum(Fraction(1 + n, 1 << n * n) for n in range(m, m + 30))
        squares = sum(Fraction(1, 1 << n * n) for n in range(m, m + 30))
        assert growth_tail_majorant(m) >= growth
        assert square_tail_majorant(m) >= squares


def test_growth_prefix_dyadic_matches_fractions(table):
    num, exp = table.growth_prefix_dyadic(25)
    direct = sum(
        Fraction(1 + a, 1 << a * a) for _, _, a in table.prefix(25)
    )
    assert Fraction(num, 1 << exp) == direct
    assert dyadic_lt(num, exp, Fraction(2)) == (direct < 2)


def test_depth_budget_enforced():
    small = ConstructionTable(TableParams(depth_budget=10))
    small.entry(10)
    with pytest.raises(DepthBudgetError):
        small.entry(11)


def test_weight_tail_bounds_bracket_exact_sum(table):
    for k in (2, 9, 30):
        lo, hi = table.weight_tail_bound(k)
        exact_head = Fraction(0)
        for l in range(k + 1, k + 51):
            a = table.tag(l)
            exact_head += Fraction(1, 1 << a * a)
        assert lo <= exact_head <= hi
        glo, ghi = table.weight_tail_bound(k, grain_bits=table.tag(k) ** 2 + 100)
        assert glo <= lo and ghi >= hi
