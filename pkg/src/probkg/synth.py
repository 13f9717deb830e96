"""Random graphs, queries and DNF lineages for tests and benchmarks."""

from __future__ import annotations

import random
from math import comb

from .graph import ProbEdge, ProbGraph
from .query import BgpQuery, TriplePattern


def random_probability(rng: random.Random) -> float:
    # keep away from 0 so probability updates stay legal
    return round(rng.uniform(0.05, 1.0), 6)


def random_graph(rng: random.Random, n_vertices: int = 6, n_labels: int = 3,
                 n_edges: int = 20) -> ProbGraph:
    vertices = [f"v{i}" for i in range(n_vertices)]
    labels = [f"L{i}" for i in range(n_labels)]
    g = ProbGraph()
    for i in range(1, n_edges + 1):
        g.add_edge(ProbEdge(i, rng.choice(vertices), rng.choice(labels),
                            rng.choice(vertices), random_probability(rng)))
    return g


def random_query(rng: random.Random, g: ProbGraph, size: int) -> BgpQuery:
    """Connected pattern of ``size`` triples; mostly chains, sometimes a constant."""
    labels = sorted(g.by_predicate) or ["L0"]
    vertices = sorted(g.vertices) or ["v0"]
    nodes = ["?a"]
    patterns = []
    for i in range(size):
        src = rng.choice(nodes)
        if rng.random() < 0.7 or len(nodes) == 1:
            dst = f"?n{i}"
            nodes.append(dst)
        else:
            dst = rng.choice(nodes)
        pred = f"?p{i}" if rng.random() < 0.5 else rng.choice(labels)
        if rng.random() < 0.5:
            src, dst = dst, src
        patterns.append(TriplePattern(src, pred, dst))
    if rng.random() < 0.15:
        # bind one variable vertex to a constant
        target = rng.choice(nodes[1:] or nodes)
        const = rng.choice(vertices)
        patterns = [TriplePattern(*(const if t == target else t for t in p.terms)) for p in patterns]
    variables = sorted({v for p in patterns for v in p.variables() if not v.startswith("?p")})
    if not variables:
        variables = sorted({v for p in patterns for v in p.variables()})
    if not variables:
        patterns[0] = TriplePattern("?a", patterns[0].predicate, patterns[0].object)
        variables = ["?a"]
    k = rng.randint(1, min(2, len(variables)))
    return BgpQuery(tuple(patterns), tuple(rng.sample(variables, k)))


def _composition(rng, total, parts, cap):
    """``parts`` integers in [1, cap] summing to ``total``."""
    sizes = [1] * parts
    spare = total - parts
    room = [i for i in range(parts) if sizes[i] < cap]
    while spare:
        i = rng.choice(room)
        sizes[i] += 1
        spare -= 1
        if sizes[i] == cap:
            room.remove(i)
    return sizes


def feasible(d: int, n: int, s: int) -> bool:
    if d < 1 or n < 1 or s < 1 or n > d * s:
        return False
    return sum(comb(n, k) for k in range(1, min(s, n) + 1)) >= d


def random_dnf(rng: random.Random, d: int, n: int, s: int, full: float = 0.75,
               max_tries: int = 200) -> list[frozenset]:
    """Exactly ``d`` distinct conjuncts of size <= ``s`` covering variables 1..n.

    Conjuncts mostly have the full size ``min(s, n)``, like derivations of a
    query with ``s`` patterns.
    """
    if not feasible(d, n, s):
        raise ValueError(f"no DNF with signature ({d}, {n}, {s})")
    width = min(s, n)
    for _ in range(max_tries):
        order = list(range(1, n + 1))
        rng.shuffle(order)
        if n >= d:
            sizes = _composition(rng, n, d, width)
            chunks, at = [], 0
            for k in sizes:
                chunks.append(order[at:at + k])
                at += k
        else:
            chunks = [[order[i]] if i < n else [] for i in range(d)]
        out: set[frozenset] = set()
        ok = True
        for chunk in chunks:
            for _attempt in range(50):
                lo = max(1, len(chunk))
                target = width if rng.random() < full else rng.randint(lo, width)
                conj = set(chunk)
                pool = [v for v in order if v not in conj]
                conj.update(rng.sample(pool, max(0, target - len(conj))))
                conj = frozenset(conj)
                if conj not in out:
                    out.add(conj)
                    break
            else:
                ok = False
                break
        if ok and len(out) == d:
            return sorted(out, key=sorted)
    raise RuntimeError(f"could not sample a DNF with signature ({d}, {n}, {s})")


def random_probs(rng: random.Random, variables) -> dict[int, float]:
    return {v: rng.uniform(0.05, 0.95) for v in variables}


def random_mutation(rng: random.Random, g: ProbGraph, n_vertices: int = 6, n_labels: int = 3,
                    max_edges: int = 40):
    """One of ``("ADD", edge)``, ``("DEL", id)`` or ``("PROB", (id, p))`` legal for ``g``."""
    ids = sorted(g.edges)
    roll = rng.random()
    if not ids or (roll < 0.4 and len(ids) < max_edges):
        e = ProbEdge(g.next_id(), f"v{rng.randrange(n_vertices)}", f"L{rng.randrange(n_labels)}",
                     f"v{rng.randrange(n_vertices)}", random_probability(rng))
        return "ADD", e
    if roll < 0.7:
        return "DEL", rng.choice(ids)
    return "PROB", (rng.choice(ids), random_probability(rng))
