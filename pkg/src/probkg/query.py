"""Conjunctive basic-graph-pattern queries: parsing and matching.

Matching is edge-level homomorphism: every triple pattern is mapped to one
graph edge, variables may share a vertex, and two patterns may map to the
same edge. Each full mapping yields a derivation, the set of edges used.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .errors import QuerySyntaxError
from .graph import ProbEdge, ProbGraph
from .semiring import FlatPolynomial

Derivation = frozenset  # of edge ids
Binding = tuple

_VAR_RE = re.compile(r"\?[A-Za-z_][A-Za-z0-9_]*\Z")


def is_var(term: str) -> bool:
    return term.startswith("?")


@dataclass(frozen=True)
class TriplePattern:
    subject: str
    predicate: str
    object: str

    @property
    def terms(self):
        return (self.subject, self.predicate, self.object)

    def variables(self):
        return [t for t in self.terms if is_var(t)]

    def __str__(self):
        return " ".join(self.terms)


@dataclass(frozen=True)
class BgpQuery:
    patterns: tuple[TriplePattern, ...]
    projection: tuple[str, ...]
    threshold: Optional[float] = None

    def __post_init__(self):
        if not self.patterns:
            raise QuerySyntaxError("query needs at least one triple pattern")
        bound = {v for p in self.patterns for v in p.variables()}
        for v in self.projection:
            if v not in bound:
                raise QuerySyntaxError(f"projection variable {v} does not occur in any pattern")

    @property
    def size(self) -> int:
        return len(self.patterns)

    def __str__(self):
        body = " ".join(f"{p} ." for p in self.patterns)
        text = f"SELECT {' '.join(self.projection)} WHERE {{ {body} }}"
        if self.threshold is not None:
            text += f" THRESHOLD {self.threshold}"
        return text


@dataclass
class Answer:
    binding: Binding
    derivations: list = field(default_factory=list)
    symE: Optional[FlatPolynomial] = None
    prob: Optional[float] = None
    engine: Optional[str] = None

    def edges(self) -> frozenset:
        return frozenset().union(*self.derivations)


class AnswerSignature(NamedTuple):
    d: int
    n: int
    s: int


# -- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"[{}]|[^\s{}]+")


def _tokens(text):
    for m in _TOKEN_RE.finditer(text):
        yield m.group(), m.start()


def parse_query(text: str) -> BgpQuery:
    """Parse ``SELECT ?a ?b WHERE { s p o . ... } [THRESHOLD x]``."""
    toks = list(_tokens(text))
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, len(text))

    tok, at = peek()
    if tok is None or tok.upper() != "SELECT":
        raise QuerySyntaxError("expected SELECT", at)
    pos += 1

    projection = []
    while True:
        tok, at = peek()
        if tok is None:
            raise QuerySyntaxError("unexpected end of query after SELECT", at)
        if tok.upper() == "WHERE":
            pos += 1
            break
        if not is_var(tok):
            raise QuerySyntaxError(f"projection term {tok!r} is not a variable", at)
        if not _VAR_RE.match(tok):
            raise QuerySyntaxError(f"malformed variable {tok!r}", at)
        projection.append(tok)
        pos += 1
    if not projection:
        raise QuerySyntaxError("no variable to project", at)

    tok, at = peek()
    if tok != "{":
        raise QuerySyntaxError("expected '{'", at)
    pos += 1

    patterns = []
    current: list[str] = []
    closed = False
    while pos < len(toks):
        tok, at = toks[pos]
        pos += 1
        if tok == "}":
            closed = True
            break
        ends_pattern = tok.endswith(".")
        if ends_pattern:
            tok = tok[:-1]
        if tok:
            if tok == "{" or (is_var(tok) and not _VAR_RE.match(tok)):
                raise QuerySyntaxError(f"malformed term {tok!r}", at)
            current.append(tok)
            if len(current) > 3:
                raise QuerySyntaxError("triple pattern has more than three terms", at)
        if ends_pattern:
            if len(current) != 3:
                raise QuerySyntaxError(f"triple pattern needs three terms, got {len(current)}", at)
            patterns.append(TriplePattern(*current))
            current = []
    if not closed:
        raise QuerySyntaxError("missing '}'", len(text))
    if current:
        if len(current) != 3:
            raise QuerySyntaxError(f"triple pattern needs three terms, got {len(current)}", at)
        patterns.append(TriplePattern(*current))

    threshold = None
    tok, at = peek()
    if tok is not None:
        if tok.upper() != "THRESHOLD":
            raise QuerySyntaxError(f"unexpected token {tok!r}", at)
        pos += 1
        tok, at = peek()
        try:
            threshold = float(tok)
        except (TypeError, ValueError):
            raise QuerySyntaxError("THRESHOLD needs a number", at) from None
        if not 0.0 <= threshold <= 1.0:
            raise QuerySyntaxError("threshold outside [0, 1]", at)
        pos += 1
        tok, at = peek()
        if tok is not None:
            raise QuerySyntaxError(f"unexpected token {tok!r}", at)

    return BgpQuery(tuple(patterns), tuple(projection), threshold)


def load_query(path) -> BgpQuery:
    with open(path, encoding="utf-8") as fh:
        return parse_query(fh.read())


# -- matching --------------------------------------------------------------

def _candidates(g: ProbGraph, pat: TriplePattern, env: dict):
    """Smallest index bucket that can hold matches of ``pat`` under ``env``."""
    s, p, o = (env.get(t, t) if is_var(t) else t for t in pat.terms)
    options = []
    if not is_var(s):
        options.append(g.out_edges.get(s, ()))
    if not is_var(o):
        options.append(g.in_edges.get(o, ()))
    if not is_var(p):
        options.append(g.by_predicate.get(p, ()))
    if not options:
        return g.edges.keys()
    return min(options, key=len)


def _unify(pat: TriplePattern, e: ProbEdge, env: dict):
    """Bindings that extend ``env`` so ``pat`` maps onto ``e``; None on clash."""
    added = {}
    for term, value in zip(pat.terms, e.as_triple()):
        if is_var(term):
            bound = env.get(term, added.get(term))
            if bound is None:
                added[term] = value
            elif bound != value:
                return None
        elif term != value:
            return None
    return added


def _search(g, patterns, remaining, env, used, emit):
    if not remaining:
        emit(env, used)
        return
    # greedy: fewest candidates first, textual order breaks ties
    best = None
    best_cands = None
    for i in remaining:
        cands = _candidates(g, patterns[i], env)
        if best is None or len(cands) < len(best_cands):
            best, best_cands = i, cands
            if not cands:
                return
    rest = [i for i in remaining if i != best]
    pat = patterns[best]
    for eid in sorted(best_cands):
        added = _unify(pat, g.edges[eid], env)
        if added is None:
            continue
        env.update(added)
        used.append(eid)
        _search(g, patterns, rest, env, used, emit)
        used.pop()
        for k in added:
            del env[k]


def _collect(q: BgpQuery):
    groups: dict[tuple, dict[frozenset, None]] = defaultdict(dict)

    def emit(env, used):
        binding = tuple(env[v] for v in q.projection)
        groups[binding][frozenset(used)] = None

    return groups, emit


def match_query(g: ProbGraph, q: BgpQuery) -> list[Answer]:
    """All answers with their deduplicated derivation lists, sorted by binding."""
    groups, emit = _collect(q)
    _search(g, q.patterns, list(range(q.size)), {}, [], emit)
    return [Answer(b, list(ds)) for b, ds in sorted(groups.items())]


def find_new_derivations(g: ProbGraph, q: BgpQuery, e: ProbEdge) -> dict[tuple, list]:
    """Derivations that use edge ``e``, grouped by projected binding."""
    groups, emit = _collect(q)
    for i, pat in enumerate(q.patterns):
        added = _unify(pat, e, {})
        if added is None:
            continue
        rest = [j for j in range(q.size) if j != i]
        _search(g, q.patterns, rest, dict(added), [e.id], emit)
    return {b: list(ds) for b, ds in sorted(groups.items())}


def answer_signature(a: Answer, q: BgpQuery) -> AnswerSignature:
    return AnswerSignature(len(a.derivations), len(a.edges()), q.size)


def match_query_bruteforce(g: ProbGraph, q: BgpQuery) -> dict[tuple, set]:
    """Reference matcher: enumerate every variable assignment over V x L.

    Exponential in the number of variables; meant for small test graphs.
    """
    from itertools import product

    variables = sorted({v for p in q.patterns for v in p.variables()})
    domain = sorted(g.vertices | set(g.by_predicate))
    by_triple: dict[tuple, list[int]] = defaultdict(list)
    for e in g:
        by_triple[e.as_triple()].append(e.id)
    out: dict[tuple, set] = defaultdict(set)
    for values in product(domain, repeat=len(variables)):
        env = dict(zip(variables, values))
        choices = []
        for p in q.patterns:
            triple = tuple(env[t] if is_var(t) else t for t in p.terms)
            ids = by_triple.get(triple)
            if not ids:
                break
            choices.append(ids)
        else:
            binding = tuple(env[v] for v in q.projection)
            for pick in product(*choices):
                out[binding].add(frozenset(pick))
    return dict(out)


def derivation_is_valid(g: ProbGraph, q: BgpQuery, binding: Binding, derivation: Iterable[int]) -> bool:
    """Whether the edges can be assigned to patterns so that all patterns hold."""
    edges = [g.edges[i] for i in derivation]
    ids = {e.id for e in edges}
    found = []

    def emit(env, used):
        if set(used) == ids and tuple(env[v] for v in q.projection) == tuple(binding):
            found.append(True)

    sub = ProbGraph(edges)
    _search(sub, q.patterns, list(range(q.size)), {}, [], emit)
    return bool(found)
