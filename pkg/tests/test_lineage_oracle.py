import itertools

import pytest
from hypothesis import given, strategies as st

from probkg.errors import MissingProbabilityError, OracleCapExceeded
from probkg.lineage import DnfLineage, h_map, to_lineage
from probkg.oracle import prob_possible_worlds
from probkg.query import match_query
from probkg.semiring import FlatPolynomial, build_symbolic, evaluate

from conftest import FIG_PROBS, derivation_lists


def test_to_lineage():
    assert str(to_lineage([{1, 3}, {2, 3}])) == "(e1&e3)|(e2&e3)"
    assert str(to_lineage([{3, 4}])) == "(e3&e4)"
    assert to_lineage([{1}, {1}]) == DnfLineage.of([{1}])
    assert len(to_lineage([{1}, {1}])) == 1


def test_lineage_rejects_empty():
    with pytest.raises(ValueError):
        to_lineage([])
    with pytest.raises(ValueError):
        to_lineage([set()])


def test_h_map_examples():
    assert str(h_map(to_lineage([{1, 3}, {2, 3}]))) == "e1e3+e2e3-e1e2e3"
    assert h_map(to_lineage([{1}])) == FlatPolynomial.var(1)


@given(derivation_lists)
def test_h_map_equals_fold(derivs):
    assert h_map(to_lineage(derivs)) == build_symbolic(derivs)


@given(derivation_lists, st.frozensets(st.integers(1, 8), max_size=3))
def test_h_map_absorbs_supersets(derivs, extra):
    base = to_lineage(derivs)
    widened = DnfLineage.of(list(base.conjuncts) + [derivs[0] | extra])
    assert h_map(widened) == h_map(base)


def test_oracle_examples():
    assert prob_possible_worlds(to_lineage([{1, 3}, {2, 3}]), FIG_PROBS) == pytest.approx(0.564, abs=1e-12)
    half = dict.fromkeys(range(1, 4), 0.5)
    assert prob_possible_worlds(to_lineage([{1, 2}, {1, 3}]), half) == pytest.approx(0.375, abs=1e-12)
    assert prob_possible_worlds(to_lineage([{3, 5}]), FIG_PROBS) == pytest.approx(0.36, abs=1e-12)


def test_oracle_errors():
    wide = to_lineage([set(range(1, 30))])
    with pytest.raises(OracleCapExceeded):
        prob_possible_worlds(wide, dict.fromkeys(range(1, 30), 0.5))
    with pytest.raises(MissingProbabilityError):
        prob_possible_worlds(to_lineage([{1, 2}]), {1: 0.5})


def test_oracle_chunked_enumeration():
    # more than one chunk of worlds
    lineage = to_lineage([set(range(1, 12)), set(range(11, 22))])
    probs = dict.fromkeys(range(1, 22), 0.9)
    assert prob_possible_worlds(lineage, probs) == pytest.approx(evaluate(h_map(lineage), probs), abs=1e-9)


@given(derivation_lists, st.frozensets(st.integers(1, 8), min_size=1, max_size=4),
       st.randoms(use_true_random=False))
def test_oracle_bounded_and_monotone(derivs, extra, rnd):
    probs = {v: rnd.random() for v in range(1, 9)}
    before = prob_possible_worlds(to_lineage(derivs), probs)
    after = prob_possible_worlds(to_lineage(derivs + [extra]), probs)
    assert -1e-12 <= before <= after + 1e-12
    assert after <= 1 + 1e-12


def test_oracle_matches_world_sum(flights, one_stop):
    ids = list(flights.edges)
    for a in match_query(flights, one_stop):
        lin = to_lineage(a.derivations)
        direct = sum(flights.world_probability(w) for k in range(len(ids) + 1)
                     for w in itertools.combinations(ids, k)
                     if any(c <= set(w) for c in lin.conjuncts))
        assert prob_possible_worlds(lin, flights.probs) == pytest.approx(direct, abs=1e-12)
        assert evaluate(h_map(lin), flights.probs) == pytest.approx(direct, abs=1e-12)
