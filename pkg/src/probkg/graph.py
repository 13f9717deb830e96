"""In-memory probabilistic knowledge graph.

Edges are facts ``(subject, predicate, object)`` carrying an id and an
independent existence probability. Vertices are plain strings.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import GraphError


@dataclass(frozen=True)
class ProbEdge:
    id: int
    subject: str
    predicate: str
    object: str
    prob: float

    def __post_init__(self):
        _check_prob(self.prob)

    def as_triple(self):
        return (self.subject, self.predicate, self.object)


def _check_prob(p, line=None):
    if not isinstance(p, (int, float)) or math.isnan(p) or not 0.0 <= p <= 1.0:
        raise GraphError(f"probability {p!r} outside [0, 1]", line)


class ProbGraph:
    """Edge store with predicate, out-edge and in-edge indexes.

    Mutations keep all three indexes in step with ``edges``. A single writer
    is assumed; concurrent readers are fine between mutations.
    """

    def __init__(self, edges: Iterable[ProbEdge] = (), vertices: Iterable[str] = ()):
        self.edges: dict[int, ProbEdge] = {}
        self.by_predicate: dict[str, set[int]] = defaultdict(set)
        self.out_edges: dict[str, set[int]] = defaultdict(set)
        self.in_edges: dict[str, set[int]] = defaultdict(set)
        self.declared_vertices: set[str] = set(vertices)
        for e in edges:
            self.add_edge(e)

    # -- queries -----------------------------------------------------------

    @property
    def vertices(self) -> set[str]:
        vs = set(self.declared_vertices)
        vs.update(v for v, ids in self.out_edges.items() if ids)
        vs.update(v for v, ids in self.in_edges.items() if ids)
        return vs

    def __len__(self):
        return len(self.edges)

    def __contains__(self, edge_id):
        return edge_id in self.edges

    def __iter__(self) -> Iterator[ProbEdge]:
        return iter(self.edges.values())

    def __getitem__(self, edge_id) -> ProbEdge:
        try:
            return self.edges[edge_id]
        except KeyError:
            raise GraphError(f"unknown edge id {edge_id}") from None

    def __eq__(self, other):
        if not isinstance(other, ProbGraph):
            return NotImplemented
        return self.edges == other.edges and self.vertices == other.vertices

    def prob(self, edge_id) -> float:
        return self[edge_id].prob

    @property
    def probs(self) -> dict[int, float]:
        return {i: e.prob for i, e in self.edges.items()}

    def next_id(self) -> int:
        return max(self.edges, default=0) + 1

    def declare_vertex(self, name: str):
        self.declared_vertices.add(name)

    # -- mutations ---------------------------------------------------------

    def add_edge(self, e: ProbEdge):
        if e.id in self.edges:
            raise GraphError(f"duplicate edge id {e.id}")
        _check_prob(e.prob)
        self.edges[e.id] = e
        self.by_predicate[e.predicate].add(e.id)
        self.out_edges[e.subject].add(e.id)
        self.in_edges[e.object].add(e.id)

    def new_edge(self, subject, predicate, object, prob) -> ProbEdge:
        """Insert an edge with an automatically assigned id (max + 1)."""
        e = ProbEdge(self.next_id(), subject, predicate, object, prob)
        self.add_edge(e)
        return e

    def delete_edge(self, edge_id) -> ProbEdge:
        e = self[edge_id]
        del self.edges[edge_id]
        for index, key in ((self.by_predicate, e.predicate),
                           (self.out_edges, e.subject),
                           (self.in_edges, e.object)):
            bucket = index[key]
            bucket.discard(edge_id)
            if not bucket:
                del index[key]
        return e

    def update_prob(self, edge_id, new_prob: float) -> float:
        """Replace an edge probability and return the old value.

        Zero is rejected: an edge that can never exist should be deleted.
        """
        e = self[edge_id]
        if new_prob == 0:
            raise GraphError(f"probability 0 for edge {edge_id}; use delete_edge instead")
        _check_prob(new_prob)
        self.edges[edge_id] = ProbEdge(e.id, e.subject, e.predicate, e.object, new_prob)
        return e.prob

    def copy(self) -> "ProbGraph":
        return ProbGraph(self.edges.values(), self.declared_vertices)

    # -- semantics ---------------------------------------------------------

    def world_probability(self, present: Iterable[int]) -> float:
        """Probability of the possible world containing exactly ``present``."""
        present = set(present)
        unknown = present - self.edges.keys()
        if unknown:
            raise GraphError(f"unknown edge ids {sorted(unknown)}")
        result = 1.0
        for i, e in self.edges.items():
            result *= e.prob if i in present else 1.0 - e.prob
        return result


def parse_graph(lines: Iterable[str]) -> ProbGraph:
    g = ProbGraph()
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise GraphError(f"expected 5 tab-separated fields, got {len(fields)}", lineno)
        raw_id, s, p, o, raw_prob = (f.strip() for f in fields)
        try:
            edge_id = int(raw_id)
        except ValueError:
            raise GraphError(f"edge id {raw_id!r} is not an integer", lineno) from None
        try:
            prob = float(raw_prob)
        except ValueError:
            raise GraphError(f"probability {raw_prob!r} is not a number", lineno) from None
        _check_prob(prob, lineno)
        if edge_id in g:
            raise GraphError(f"duplicate edge id {edge_id}", lineno)
        if not (s and p and o):
            raise GraphError("empty subject, predicate or object", lineno)
        g.add_edge(ProbEdge(edge_id, s, p, o, prob))
    return g


def load_graph(path) -> ProbGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh)


def format_prob(p: float) -> str:
    return repr(float(p))


def dump_graph(g: ProbGraph, path):
    lines = [f"{e.id}\t{e.subject}\t{e.predicate}\t{e.object}\t{format_prob(e.prob)}\n"
             for e in sorted(g, key=lambda e: e.id)]
    Path(path).write_text("".join(lines), encoding="utf-8")
