import pytest

from cqa.core import parse_database, repairs, solutions
from cqa.errors import LimitExceeded
from cqa.generators import gen_dn
from cqa.oracle import (certain, certain_by_enumeration, counterexample_by_enumeration,
                        counterexample_repair, minimal_repairs)
from cqa.queries import Q1, Q2, Q4

from helpers import QUERIES, random_db, recursive_certain

Q2_DB = "R1(a; b)\nR2(b; a)\nR2(b; c)"


def test_consistent_with_solution_is_certain():
    assert certain(parse_database("R1(a; b)\nR2(b; c)"), Q1)


def test_q2_example_not_certain():
    db = parse_database(Q2_DB)
    assert not certain(db, Q2)
    assert not certain_by_enumeration(db, Q2)


def test_q2_counterexample_picks_r2_b_c():
    db = parse_database(Q2_DB)
    for find in (counterexample_repair, counterexample_by_enumeration):
        r = find(db, Q2)
        assert r is not None
        assert {str(f) for f in r} == {"R1(a, b)", "R2(b, c)"}
        assert not solutions(r.facts, Q2)


def test_certain_instance_has_no_counterexample():
    assert counterexample_repair(gen_dn(4), Q4) is None


def test_d4_certain():
    assert certain(gen_dn(4), Q4)
    assert certain_by_enumeration(gen_dn(4), Q4)


def test_minimal_repairs_q2_example():
    db = parse_database(Q2_DB)
    (r,) = minimal_repairs(db, Q2)
    assert {str(f) for f in r} == {"R1(a, b)", "R2(b, c)"}


def test_minimal_repairs_consistent_db():
    db = parse_database("R1(a; b)\nR2(b; a)")
    assert minimal_repairs(db, Q2) == set(repairs(db))


@pytest.mark.parametrize("seed", range(10))
def test_minimal_repairs_minimize(seed):
    db = random_db(Q2, seed, n_blocks=5)
    best = minimal_repairs(db, Q2)
    low = min(len(solutions(r.facts, Q2)) for r in repairs(db))
    assert best and all(len(solutions(r.facts, Q2)) == low for r in best)
    if low == 0:
        assert best == {r for r in repairs(db) if not solutions(r.facts, Q2)}


def test_search_budget_enforced():
    with pytest.raises(LimitExceeded):
        certain(gen_dn(5), Q4, limit=5)


@pytest.mark.parametrize("name", sorted(QUERIES))
def test_search_enumeration_and_recursion_agree(name):
    q = QUERIES[name]
    for seed in range(25):
        db = random_db(q, seed, n_blocks=5)
        expected = recursive_certain(db, q)
        assert certain(db, q) == expected
        assert certain_by_enumeration(db, q) == expected
        r = counterexample_repair(db, q)
        assert (r is None) == expected
        if r is not None:
            assert not solutions(r.facts, q)
            assert all(len(set(b) & r.facts) == 1 for b in db.blocks)
