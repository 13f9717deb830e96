"""Incremental maintenance of registered answers as the graph changes.

The store keeps two inverted indexes over the registered answers:

* ``edge_to_syme``: edge id -> keys of answers whose symbolic expression
  mentions that edge variable;
* ``sym_eval``: answer key -> current probability.

Edge insertions absorb the new derivations into the existing expression,
probability updates apply a per-monomial offset, and deletions rebuild the
expression from the surviving derivations. When a threshold is in force, an
insertion whose upper bound cannot reach it is deferred until flushed.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterable, NamedTuple, Optional

from .adaptive import Engine, choose_engine, compute_probability, dispatch_signature
from .config import DEFAULT_CONFIG, EngineConfig
from .errors import CoefficientOverflowError, ProbKGError
from .graph import ProbEdge, ProbGraph
from .query import Answer, BgpQuery, find_new_derivations, match_query
from .semiring import build_symbolic, evaluate, oplus_incremental

AnswerKey = tuple  # (query id, binding)

EXACT, BOUND, REMOVED = "exact", "bound", "removed"


def upper_bound(p1: float, p2: float) -> float:
    """Independence bound on the probability of a disjunction of two monotone events."""
    return p1 + p2 - p1 * p2


THRESHOLD_MODES = ("strict", "inclusive")


def passes(value: float, threshold: Optional[float], mode: str = "strict") -> bool:
    """``value > threshold`` in strict mode, ``>=`` in inclusive mode."""
    if mode not in THRESHOLD_MODES:
        raise ValueError(f"unknown threshold mode {mode!r}")
    if threshold is None:
        return True
    return value > threshold if mode == "strict" else value >= threshold


def monomial_offsets(monomials, edge_id: int, old_p: float, new_p: float, probs) -> list[float]:
    """Signed valuation of each ``(monomial, coefficient)`` containing ``edge_id``.

    The edge's variable takes ``old_p - new_p`` and every other variable its
    probability, so ``new = old - sum(...)``.
    """
    delta = old_p - new_p
    return [c * delta * math.prod([probs[v] for v in mono if v != edge_id])
            for mono, c in monomials if edge_id in mono]


def format_binding(binding) -> str:
    return "(" + ",".join(binding) + ")"


class MutationRecord(NamedTuple):
    key: AnswerKey
    old_prob: Optional[float]
    value: Optional[float]
    status: str

    @property
    def binding(self):
        return self.key[1]

    def log_line(self) -> str:
        old = "" if self.old_prob is None else repr(self.old_prob)
        new = "" if self.value is None else repr(self.value)
        return f"{format_binding(self.binding)}\t{old}\t{new}\t{self.status}"


class AnswerStore:
    """Registered query answers plus the indexes that keep them current.

    All mutation hooks expect the graph to have been mutated already.
    Mutations are single-writer.
    """

    def __init__(self, graph: ProbGraph, config: EngineConfig = DEFAULT_CONFIG,
                 engine: Engine | str | None = None, threshold_mode: str = "strict"):
        if threshold_mode not in THRESHOLD_MODES:
            raise ValueError(f"unknown threshold mode {threshold_mode!r}")
        self.graph = graph
        self.config = config
        self.engine = Engine(engine) if engine is not None else None
        self.threshold_mode = threshold_mode
        self.queries: dict[Hashable, BgpQuery] = {}
        self.answers: dict[AnswerKey, Answer] = {}
        self.edge_to_syme: dict[int, set] = defaultdict(set)
        self.sym_eval: dict[AnswerKey, float] = {}
        self.pending: dict[AnswerKey, list] = {}
        self.bounds: dict[AnswerKey, float] = {}
        # derivation membership; differs from edge_to_syme when a conjunct is absorbed
        self.edge_to_answers: dict[int, set] = defaultdict(set)
        self._monomials: dict[AnswerKey, dict[int, list]] = {}

    # -- registration ------------------------------------------------------

    def register(self, query_id, query: BgpQuery, answers: Iterable[Answer] = ()):
        if query_id in self.queries and self.queries[query_id] != query:
            raise ProbKGError(f"query id {query_id!r} already registered with another query")
        self.queries[query_id] = query
        for a in answers:
            key = (query_id, a.binding)
            if key in self.answers:
                raise ProbKGError(f"duplicate answer key {key!r}")
            if a.prob is None:
                raise ProbKGError(f"answer {a.binding} has no computed probability")
            self.answers[key] = a
            self._index(key)

    def run_query(self, query_id, query: BgpQuery) -> list[Answer]:
        """Match, compute probabilities and register in one step."""
        answers = match_query(self.graph, query)
        probs = self.graph.probs
        for a in answers:
            compute_probability(a, query, probs, self.config, self.engine)
        self.register(query_id, query, answers)
        return answers

    def get(self, query_id, binding) -> Answer:
        """Current answer; a deferred update is absorbed before returning."""
        key = (query_id, tuple(binding))
        if key in self.pending:
            self._flush_key(key)
        return self.answers[key]

    def answers_for(self, query_id) -> list[Answer]:
        keys = sorted(k for k in self.answers if k[0] == query_id)
        return [self.get(*k) for k in keys]

    # -- index bookkeeping -------------------------------------------------

    def _index(self, key):
        a = self.answers[key]
        if a.symE is not None:
            for v in a.symE.variables():
                self.edge_to_syme[v].add(key)
        for e in a.edges():
            self.edge_to_answers[e].add(key)
        self.sym_eval[key] = a.prob

    def _unindex(self, key):
        a = self.answers[key]
        if a.symE is not None:
            for v in a.symE.variables():
                _discard(self.edge_to_syme, v, key)
        for e in a.edges():
            _discard(self.edge_to_answers, e, key)
        self.sym_eval.pop(key, None)
        self._monomials.pop(key, None)

    def _recompute(self, key):
        """Full recomputation through the adaptive dispatcher."""
        a = self.answers[key]
        self._unindex(key)
        self.pending.pop(key, None)
        self.bounds.pop(key, None)
        compute_probability(a, self.queries[key[0]], self.graph.probs, self.config, self.engine)
        self._index(key)
        return a.prob

    def _wants_semiring(self, key) -> bool:
        a = self.answers[key]
        if self.engine is not None:
            return self.engine is Engine.SEMIRING
        sig = dispatch_signature(a, self.queries[key[0]], self.config)
        return choose_engine(sig, self.config) is Engine.SEMIRING

    def _absorb(self, key, derivations, probs=None):
        """Fold derivations into the stored expression and re-evaluate."""
        a = self.answers[key]
        try:
            new_sym = oplus_incremental(a.symE, derivations)
        except CoefficientOverflowError:
            return self._recompute(key)
        for v in a.symE.variables():
            _discard(self.edge_to_syme, v, key)
        a.symE = new_sym
        for v in new_sym.variables():
            self.edge_to_syme[v].add(key)
        self._monomials.pop(key, None)
        a.prob = evaluate(new_sym, probs if probs is not None else self.graph.probs)
        self.sym_eval[key] = a.prob
        return a.prob

    # -- mutation hooks ----------------------------------------------------

    def on_edge_added(self, e: ProbEdge, threshold: Optional[float] = None) -> list[MutationRecord]:
        """Absorb derivations created by a newly inserted edge.

        ``threshold`` overrides each registered query's own threshold. With a
        threshold, an affected answer whose upper bound fails it is deferred.
        """
        report = []
        probs = self.graph.probs
        for qid, q in self.queries.items():
            limit = q.threshold if threshold is None else threshold
            for binding, derivs in find_new_derivations(self.graph, q, e).items():
                key = (qid, binding)
                a = self.answers.get(key)
                if a is None:
                    a = Answer(binding, list(derivs))
                    compute_probability(a, q, probs, self.config, self.engine)
                    self.answers[key] = a
                    self._index(key)
                    report.append(MutationRecord(key, None, a.prob, EXACT))
                    continue

                old = self.sym_eval[key]
                a.derivations.extend(derivs)
                for d in derivs:
                    for edge in d:
                        self.edge_to_answers[edge].add(key)

                if a.symE is None or not self._wants_semiring(key):
                    report.append(MutationRecord(key, old, self._recompute(key), EXACT))
                    continue

                waiting = self.pending.get(key, []) + list(derivs)
                if limit is not None:
                    bound = upper_bound(old, evaluate(build_symbolic(waiting), probs))
                    if not passes(bound, limit, self.threshold_mode):
                        self.pending[key] = waiting
                        self.bounds[key] = bound
                        report.append(MutationRecord(key, old, bound, BOUND))
                        continue
                self.pending.pop(key, None)
                self.bounds.pop(key, None)
                report.append(MutationRecord(key, old, self._absorb(key, waiting, probs), EXACT))
        return report

    def _flush_key(self, key, probs=None):
        derivs = self.pending.pop(key)
        self.bounds.pop(key, None)
        return self._absorb(key, derivs, probs)

    def flush_pending(self) -> list[MutationRecord]:
        report = []
        for key in sorted(self.pending):
            old = self.sym_eval[key]
            report.append(MutationRecord(key, old, self._flush_key(key), EXACT))
        return report

    def _monomial_index(self, key) -> dict[int, list]:
        idx = self._monomials.get(key)
        if idx is None:
            idx = defaultdict(list)
            for mono, c in self.answers[key].symE.terms.items():
                for v in mono:
                    idx[v].append((mono, c))
            self._monomials[key] = idx
        return idx

    def on_prob_updated(self, edge_id: int, old_p: float, new_p: float) -> list[MutationRecord]:
        """Shift affected probabilities by the offset of the edge's monomials."""
        report = []
        probs = self.graph.probs
        probs[edge_id] = new_p
        touched = set(self.edge_to_answers.get(edge_id, ()))
        flushed = set()
        for key in sorted(touched & self.pending.keys()):
            old = self.sym_eval[key]
            report.append(MutationRecord(key, old, self._flush_key(key, probs), EXACT))
            flushed.add(key)
        for key in sorted(self.edge_to_syme.get(edge_id, set()) - flushed):
            offset = math.fsum(monomial_offsets(self._monomial_index(key)[edge_id],
                                                edge_id, old_p, new_p, probs))
            old = self.sym_eval[key]
            a = self.answers[key]
            a.prob = self.sym_eval[key] = old - offset
            report.append(MutationRecord(key, old, a.prob, EXACT))
        for key in sorted(touched):
            if self.answers[key].symE is None:
                old = self.sym_eval[key]
                report.append(MutationRecord(key, old, self._recompute(key), EXACT))
        return report

    def on_edge_deleted(self, edge_id: int) -> list[MutationRecord]:
        """Drop derivations through the deleted edge and rebuild the survivors."""
        report = []
        for key in sorted(self.edge_to_answers.get(edge_id, ())):
            a = self.answers[key]
            old = self.sym_eval[key]
            self._unindex(key)
            self.pending.pop(key, None)
            self.bounds.pop(key, None)
            survivors = [d for d in a.derivations if edge_id not in d]
            if not survivors:
                del self.answers[key]
                report.append(MutationRecord(key, old, None, REMOVED))
                continue
            a.derivations = survivors
            compute_probability(a, self.queries[key[0]], self.graph.probs, self.config, self.engine)
            self._index(key)
            report.append(MutationRecord(key, old, a.prob, EXACT))
        return report

    # -- graph-level helpers -----------------------------------------------

    def add_edge(self, e: ProbEdge, threshold: Optional[float] = None) -> list[MutationRecord]:
        self.graph.add_edge(e)
        return self.on_edge_added(e, threshold)

    def delete_edge(self, edge_id: int) -> list[MutationRecord]:
        self.graph.delete_edge(edge_id)
        return self.on_edge_deleted(edge_id)

    def update_prob(self, edge_id: int, new_p: float) -> list[MutationRecord]:
        old_p = self.graph.update_prob(edge_id, new_p)
        return self.on_prob_updated(edge_id, old_p, new_p)

    # -- verification ------------------------------------------------------

    def rebuilt(self) -> "AnswerStore":
        """A fresh store computed from scratch over the current graph."""
        fresh = AnswerStore(self.graph, self.config, self.engine, self.threshold_mode)
        for qid, q in self.queries.items():
            fresh.run_query(qid, q)
        return fresh

    def snapshot(self) -> dict:
        """Comparable state: per answer (derivation set, symE, engine, prob)."""
        return {
            key: StoredAnswer(frozenset(a.derivations), a.symE, a.engine, self.sym_eval[key])
            for key, a in self.answers.items()
        }

    def check_consistency(self, atol: float = 1e-9):
        """Raise AssertionError if the indexes disagree with the stored answers."""
        probs = self.graph.probs
        expected_sym = defaultdict(set)
        expected_der = defaultdict(set)
        for key, a in self.answers.items():
            assert a.derivations, key
            assert len(set(a.derivations)) == len(a.derivations), key
            for e in a.edges():
                expected_der[e].add(key)
            if a.symE is not None:
                for v in a.symE.variables():
                    expected_sym[v].add(key)
                if key not in self.pending:
                    assert abs(evaluate(a.symE, probs) - self.sym_eval[key]) <= atol, key
            assert a.prob == self.sym_eval[key], key
        assert {k: v for k, v in self.edge_to_syme.items() if v} == dict(expected_sym)
        assert {k: v for k, v in self.edge_to_answers.items() if v} == dict(expected_der)
        assert self.sym_eval.keys() == self.answers.keys()


@dataclass(frozen=True)
class StoredAnswer:
    derivations: frozenset
    symE: object
    engine: Optional[str]
    prob: float

    def matches(self, other: "StoredAnswer", atol: float = 1e-9) -> bool:
        return (self.derivations == other.derivations and self.symE == other.symE
                and self.engine == other.engine and abs(self.prob - other.prob) <= atol)


def _discard(index, edge, key):
    bucket = index.get(edge)
    if bucket is not None:
        bucket.discard(key)
        if not bucket:
            del index[edge]
