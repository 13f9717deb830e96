"""Positive DNF lineage of an answer and its image in the flat-polynomial semiring."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .semiring import FlatPolynomial, build_symbolic


@dataclass(frozen=True)
class DnfLineage:
    """Disjunction of conjuncts; each conjunct is a set of edge variables."""

    conjuncts: frozenset

    def __post_init__(self):
        if not self.conjuncts:
            raise ValueError("lineage needs at least one conjunct")
        if any(not c for c in self.conjuncts):
            raise ValueError("empty conjunct in lineage")

    @classmethod
    def of(cls, conjuncts: Iterable[Iterable[int]]) -> "DnfLineage":
        return cls(frozenset(frozenset(c) for c in conjuncts))

    def variables(self) -> frozenset:
        return frozenset().union(*self.conjuncts)

    def sorted_conjuncts(self) -> list[frozenset]:
        return sorted(self.conjuncts, key=lambda c: (len(c), sorted(c)))

    def __len__(self):
        return len(self.conjuncts)

    def __str__(self):
        return "|".join("(" + "&".join(f"e{v}" for v in sorted(c)) + ")"
                        for c in self.sorted_conjuncts())


def to_lineage(derivations: Iterable[Iterable[int]]) -> DnfLineage:
    return DnfLineage.of(derivations)


def h_map(lineage: DnfLineage) -> FlatPolynomial:
    """Structural image of the lineage: conjunction to otimes, disjunction to oplus."""
    return build_symbolic(lineage.sorted_conjuncts())
