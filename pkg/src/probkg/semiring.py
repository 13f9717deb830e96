"""Flat integer polynomials and the (oplus, otimes) semiring over them.

A flat monomial is a product of distinct variables, so it is stored as a
``frozenset`` of variable ids (edge ids). A :class:`FlatPolynomial` maps
monomials to nonzero integer coefficients; the empty monomial is the
constant term.

``otimes`` multiplies and flattens in one step (monomial product is set
union). ``oplus`` is ``f + g - otimes(f, g)``. Built up from single
derivations, these give the symbolic probability of a DNF lineage: evaluate
the polynomial at the edge probabilities and you get the exact answer
probability.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from typing import Iterable, Mapping

from .errors import CoefficientOverflowError, MissingProbabilityError

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)

Monomial = frozenset

_EMPTY = frozenset()


def _check(c):
    if c > INT64_MAX or c < INT64_MIN:
        raise CoefficientOverflowError(f"coefficient {c} exceeds 64-bit range")
    return c


def monomial_key(m: frozenset):
    """Graded lexicographic order on monomials."""
    return (len(m), sorted(m))


class FlatPolynomial:
    """Immutable sparse flat polynomial with checked 64-bit coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Iterable[int], int] | None = None):
        merged: dict[frozenset, int] = {}
        if terms:
            for mono, c in terms.items():
                mono = frozenset(mono)
                merged[mono] = merged.get(mono, 0) + c
        self._terms = {m: _check(c) for m, c in merged.items() if c}
        self._hash = None

    @classmethod
    def _wrap(cls, terms: dict) -> "FlatPolynomial":
        # terms already canonical: frozenset keys, nonzero checked coefficients
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def constant(cls, k: int) -> "FlatPolynomial":
        return cls._wrap({_EMPTY: _check(k)} if k else {})

    @classmethod
    def var(cls, i: int) -> "FlatPolynomial":
        return cls._wrap({frozenset((i,)): 1})

    @classmethod
    def parse(cls, text: str) -> "FlatPolynomial":
        """Parse the textual rendering, e.g. ``e1e3+e2e3-e1e2e3`` or ``2·e1 - 1``."""
        text = text.replace(" ", "").replace("−", "-")
        if text in ("", "0"):
            return ZERO
        terms: dict[frozenset, int] = defaultdict(int)
        for sign, body in re.findall(r"([+-]?)([^+-]+)", text):
            m = re.fullmatch(r"(?:(\d+)[·*]?)?((?:e\d+)*)", body)
            if m is None or not (m.group(1) or m.group(2)):
                raise ValueError(f"cannot parse term {body!r}")
            coef = int(m.group(1)) if m.group(1) else 1
            mono = frozenset(int(v) for v in re.findall(r"e(\d+)", m.group(2)))
            terms[mono] += -coef if sign == "-" else coef
        return cls(terms)

    # -- container protocol ------------------------------------------------

    @property
    def terms(self) -> dict[frozenset, int]:
        return dict(self._terms)

    def items(self):
        """Terms in canonical order, constant term last."""
        return sorted(self._terms.items(), key=lambda kv: (not kv[0], monomial_key(kv[0])))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = FlatPolynomial.constant(other)
        if not isinstance(other, FlatPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def coefficient(self, mono: Iterable[int]) -> int:
        return self._terms.get(frozenset(mono), 0)

    def variables(self) -> frozenset:
        out = set()
        for m in self._terms:
            out.update(m)
        return frozenset(out)

    # -- ordinary ring operations (flatness is preserved by + and -) -------

    def __add__(self, other: "FlatPolynomial") -> "FlatPolynomial":
        terms = dict(self._terms)
        _merge_into(terms, other._terms, 1)
        return FlatPolynomial._wrap(terms)

    def __sub__(self, other: "FlatPolynomial") -> "FlatPolynomial":
        terms = dict(self._terms)
        _merge_into(terms, other._terms, -1)
        return FlatPolynomial._wrap(terms)

    def __neg__(self):
        return FlatPolynomial._wrap({m: _check(-c) for m, c in self._terms.items()})

    # -- semiring operations ----------------------------------------------

    def __mul__(self, other):
        return otimes(self, other)

    def evaluate(self, probs: Mapping[int, float]) -> float:
        return evaluate(self, probs)

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"FlatPolynomial({render(self)!r})"


def _merge_into(terms: dict, other: Mapping, sign: int):
    for m, c in other.items():
        v = terms.get(m, 0) + sign * c
        if v:
            terms[m] = _check(v)
        else:
            terms.pop(m, None)


ZERO = FlatPolynomial()
ONE = FlatPolynomial.constant(1)


def otimes(f: FlatPolynomial, g: FlatPolynomial) -> FlatPolynomial:
    """Flattened product: monomials multiply by set union."""
    if len(f) < len(g):
        f, g = g, f
    terms: dict[frozenset, int] = {}
    for mg, cg in g._terms.items():
        for mf, cf in f._terms.items():
            m = mf | mg
            v = terms.get(m, 0) + cf * cg
            if v:
                terms[m] = v
            else:
                del terms[m]
    for c in terms.values():
        _check(c)
    return FlatPolynomial._wrap(terms)


def oplus(f: FlatPolynomial, g: FlatPolynomial) -> FlatPolynomial:
    """``f + g - otimes(f, g)``, merging the smaller operand into a copy of the larger."""
    if len(f) < len(g):
        f, g = g, f
    terms = dict(f._terms)
    _merge_into(terms, g._terms, 1)
    _merge_into(terms, otimes(f, g)._terms, -1)
    return FlatPolynomial._wrap(terms)


def _absorb_monomial(terms: dict, mono: frozenset):
    """In place: ``terms <- terms oplus mono`` for a coefficient-1 monomial."""
    product: dict[frozenset, int] = {}
    for m, c in terms.items():
        u = m | mono
        product[u] = product.get(u, 0) + c
    v = terms.get(mono, 0) + 1
    if v:
        terms[mono] = v
    else:
        del terms[mono]
    for u, c in product.items():
        if not c:
            continue
        v = terms.get(u, 0) - c
        if v:
            terms[u] = _check(v)
        else:
            del terms[u]


def from_conjunct(edge_ids: Iterable[int]) -> FlatPolynomial:
    """Polynomial of one derivation: a single monomial, repeated ids counted once."""
    mono = frozenset(edge_ids)
    if not mono:
        raise ValueError("a conjunct needs at least one edge")
    return FlatPolynomial._wrap({mono: 1})


def build_symbolic(derivations: Iterable[Iterable[int]]) -> FlatPolynomial:
    """Left fold of ``oplus`` over the derivations' conjunct polynomials."""
    terms: dict[frozenset, int] = {}
    seen = False
    for d in derivations:
        mono = frozenset(d)
        if not mono:
            raise ValueError("a conjunct needs at least one edge")
        _absorb_monomial(terms, mono)
        seen = True
    if not seen:
        raise ValueError("build_symbolic needs at least one derivation")
    return FlatPolynomial._wrap(terms)


def oplus_incremental(current: FlatPolynomial, new_derivations: Iterable[Iterable[int]]) -> FlatPolynomial:
    """Absorb derivations one at a time into an existing symbolic expression."""
    terms = dict(current._terms)
    for d in new_derivations:
        mono = frozenset(d)
        if not mono:
            raise ValueError("a conjunct needs at least one edge")
        _absorb_monomial(terms, mono)
    return FlatPolynomial._wrap(terms)


def evaluate(f: FlatPolynomial, probs: Mapping[int, float]) -> float:
    total = 0.0
    try:
        for m, c in f._terms.items():
            total += c * math.prod([probs[v] for v in m])
    except KeyError as exc:
        raise MissingProbabilityError(f"no probability for variable e{exc.args[0]}") from None
    return total


def monomial_count(f: FlatPolynomial) -> int:
    return len(f)


def render(f: FlatPolynomial) -> str:
    if not f:
        return "0"
    parts = []
    for m, c in f.items():
        body = "".join(f"e{v}" for v in sorted(m))
        mag = abs(c)
        if not body:
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}·{body}"
        sign = "-" if c < 0 else "+"
        parts.append(text if not parts and sign == "+" else sign + text)
    return "".join(parts)


class GeneralPolynomial:
    """Integer polynomial with arbitrary exponents; only used to exercise ``flat``.

    Monomials are tuples of ``(var, exponent)`` pairs sorted by var.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, int] | None = None):
        merged: dict[tuple, int] = defaultdict(int)
        for mono, c in (terms or {}).items():
            powers: dict[int, int] = defaultdict(int)
            for v, k in (mono.items() if isinstance(mono, Mapping) else mono):
                if k < 0:
                    raise ValueError("negative exponent")
                if k:
                    powers[v] += k
            merged[tuple(sorted(powers.items()))] += c
        self.terms = {m: c for m, c in merged.items() if c}

    def __add__(self, other):
        return GeneralPolynomial(_sum_terms(self.terms, other.terms))

    def __mul__(self, other):
        out: dict[tuple, int] = defaultdict(int)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                powers = dict(m1)
                for v, k in m2:
                    powers[v] = powers.get(v, 0) + k
                out[tuple(sorted(powers.items()))] += c1 * c2
        return GeneralPolynomial(out)

    def __eq__(self, other):
        if not isinstance(other, GeneralPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        return f"GeneralPolynomial({self.terms!r})"

    @classmethod
    def from_flat(cls, f: FlatPolynomial) -> "GeneralPolynomial":
        return cls({tuple((v, 1) for v in sorted(m)): c for m, c in f._terms.items()})


def _sum_terms(a, b):
    out = dict(a)
    for m, c in b.items():
        out[m] = out.get(m, 0) + c
    return out


def flat(p: GeneralPolynomial | FlatPolynomial) -> FlatPolynomial:
    """Reduce every exponent above one to one and merge like monomials."""
    if isinstance(p, FlatPolynomial):
        return p
    terms: dict[frozenset, int] = {}
    for mono, c in p.terms.items():
        m = frozenset(v for v, _ in mono)
        terms[m] = terms.get(m, 0) + c
    return FlatPolynomial(terms)
