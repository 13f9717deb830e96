import itertools
import random

import pytest
from hypothesis import given, strategies as st

from probkg.errors import CoefficientOverflowError, MissingProbabilityError
from probkg.lineage import to_lineage
from probkg.oracle import prob_possible_worlds
from probkg.semiring import (
    ONE,
    ZERO,
    FlatPolynomial,
    GeneralPolynomial,
    build_symbolic,
    evaluate,
    flat,
    from_conjunct,
    monomial_count,
    oplus,
    oplus_incremental,
    otimes,
    render,
)

from conftest import FIG_PROBS, derivation_lists

P = FlatPolynomial.parse
p1, p2, p3 = (FlatPolynomial.var(i) for i in (1, 2, 3))

# elements of the generated set: symbolic expressions and their products
generated = st.one_of(
    st.just(ZERO),
    st.just(ONE),
    derivation_lists.map(build_symbolic),
    st.tuples(derivation_lists, derivation_lists).map(
        lambda t: otimes(build_symbolic(t[0]), build_symbolic(t[1]))),
)

general = st.dictionaries(
    st.lists(st.tuples(st.integers(1, 4), st.integers(0, 3)), max_size=3).map(tuple),
    st.integers(-5, 5), max_size=5,
).map(GeneralPolynomial)


def test_flat_examples():
    assert flat(GeneralPolynomial({((1, 2), (2, 1)): 3})) == P("3·e1e2")
    assert flat(GeneralPolynomial({(): 7})) == FlatPolynomial.constant(7)
    assert flat(GeneralPolynomial({((1, 2),): 1, ((1, 1),): -1})) == ZERO


def test_otimes_examples():
    assert otimes(p1, p1) == p1
    assert otimes(p1 + p2, p2) == P("e1e2+e2")
    assert otimes(P("e1e2-3e4"), ZERO) == ZERO


def test_oplus_examples():
    assert oplus(P("e1e3"), P("e2e3")) == P("e1e3+e2e3-e1e2e3")
    assert oplus(P("e1e3+e4"), ZERO) == P("e1e3+e4")
    assert oplus(p1, p1) == p1


def test_from_conjunct():
    assert from_conjunct({3, 4}) == P("e3e4")
    assert from_conjunct([1, 1, 3]) == P("e1e3")
    assert from_conjunct({7}) == FlatPolynomial.var(7)


def test_build_symbolic_table1():
    sym = build_symbolic([{1, 3}, {2, 3}])
    assert render(sym) == "e1e3+e2e3-e1e2e3"
    assert render(build_symbolic([{3, 4}])) == "e3e4"
    assert evaluate(sym, FIG_PROBS) == pytest.approx(0.564, abs=1e-12)
    assert evaluate(P("e3e4"), FIG_PROBS) == pytest.approx(0.48, abs=1e-12)
    assert evaluate(P("e3e5"), FIG_PROBS) == pytest.approx(0.36, abs=1e-12)
    with pytest.raises(ValueError):
        build_symbolic([])


def test_incremental_table2():
    sin_mun = oplus_incremental(P("e1e3+e2e3-e1e2e3"), [{1, 6}, {2, 6}])
    assert sin_mun == build_symbolic([{1, 3}, {2, 3}, {1, 6}, {2, 6}])
    assert evaluate(sin_mun, FIG_PROBS) == pytest.approx(0.6392, abs=1e-12)
    del_bar = oplus_incremental(P("e3e4"), [{6, 4}])
    assert del_bar == P("e3e4+e4e6-e3e4e6")
    assert evaluate(del_bar, FIG_PROBS) == pytest.approx(0.544, abs=1e-12)
    assert evaluate(oplus_incremental(P("e3e5"), [{6, 5}]), FIG_PROBS) == pytest.approx(0.408, abs=1e-12)
    assert oplus_incremental(del_bar, []) == del_bar


def test_order_of_operations():
    half = {1: 0.5, 2: 0.5, 3: 0.5}
    symbolic_first = evaluate(build_symbolic([{1, 2}, {1, 3}]), half)
    # substituting first combines numbers, so e1 counts twice in the product term
    a = evaluate(from_conjunct({1, 2}), half)
    b = evaluate(from_conjunct({1, 3}), half)
    substitute_first = a + b - a * b
    assert symbolic_first == pytest.approx(0.375, abs=1e-12)
    assert substitute_first == pytest.approx(0.4375, abs=1e-12)


def test_render_and_parse():
    assert render(ZERO) == "0"
    f = P("2·e1e2 - e3 + 4")
    assert render(f) == "-e3+2·e1e2+4"
    assert P(render(f)) == f
    assert P("e1e3+e2e3−e1e2e3") == build_symbolic([{1, 3}, {2, 3}])
    assert str(P("e2+e1")) == "e1+e2"
    with pytest.raises(ValueError):
        P("e1+x")


def test_monomial_count():
    assert monomial_count(P("e1e3+e2e3-e1e2e3")) == 3
    assert monomial_count(ZERO) == 0


def test_evaluate_missing_probability():
    with pytest.raises(MissingProbabilityError):
        evaluate(P("e1e9"), {1: 0.5})


def test_overflow_is_checked():
    big = FlatPolynomial({(1,): 2**62})
    with pytest.raises(CoefficientOverflowError):
        big + big
    with pytest.raises(CoefficientOverflowError):
        otimes(big, FlatPolynomial.constant(4))
    with pytest.raises(CoefficientOverflowError):
        FlatPolynomial({(1,): 2**63})


@given(generated, generated, generated)
def test_semiring_axioms(f, g, h):
    assert oplus(f, g) == oplus(g, f)
    assert otimes(f, g) == otimes(g, f)
    assert oplus(oplus(f, g), h) == oplus(f, oplus(g, h))
    assert otimes(otimes(f, g), h) == otimes(f, otimes(g, h))
    assert oplus(f, ZERO) == f and otimes(f, ONE) == f
    assert otimes(f, ZERO) == ZERO
    assert otimes(f, oplus(g, h)) == oplus(otimes(f, g), otimes(f, h))
    assert otimes(oplus(g, h), f) == oplus(otimes(g, f), otimes(h, f))


@given(generated, generated)
def test_idempotence_and_absorption(f, g):
    assert otimes(f, f) == f
    assert oplus(f, f) == f
    assert oplus(f, otimes(f, g)) == f


@given(general, general)
def test_flat_facts(p, q):
    assert flat(flat(p)) == flat(p)
    assert flat(p + q) == flat(p) + flat(q)
    assert flat(GeneralPolynomial.from_flat(flat(p)) * q) == flat(p * q)
    assert otimes(flat(p), flat(q)) == flat(p * q)


def test_distributivity_needs_generated_set():
    # 2·e1 is not idempotent, and distributivity breaks outside the generated set
    f = FlatPolynomial.constant(2) * p1
    assert otimes(f, oplus(p2, p3)) != oplus(otimes(f, p2), otimes(f, p3))


@given(derivation_lists, st.randoms(use_true_random=False))
def test_symbolic_matches_oracle(derivs, rnd):
    probs = {v: rnd.uniform(0.0, 1.0) for v in range(1, 9)}
    sym = build_symbolic(derivs)
    assert evaluate(sym, probs) == pytest.approx(prob_possible_worlds(to_lineage(derivs), probs), abs=1e-9)
    n = len(frozenset().union(*derivs))
    assert monomial_count(sym) <= min(2 ** len(derivs), 2 ** n)


@given(derivation_lists)
def test_fold_order_invariant(derivs):
    ref = build_symbolic(derivs)
    rng = random.Random(len(derivs))
    for _ in range(5):
        shuffled = derivs[:]
        rng.shuffle(shuffled)
        assert build_symbolic(shuffled) == ref
    for k in range(len(derivs)):
        assert oplus_incremental(build_symbolic(derivs[:k + 1]), derivs[k + 1:]) == ref


def test_canonical_term_order():
    f = build_symbolic([{2, 3}, {1}, {1, 2}])
    rendered = [sorted(m) for m, _ in f.items()]
    keyed = sorted(rendered, key=lambda m: (len(m), m))
    assert rendered == keyed
    assert list(itertools.chain.from_iterable(rendered))
