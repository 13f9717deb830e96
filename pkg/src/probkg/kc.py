"""Knowledge compilation of DNF lineage into a decision-DNNF circuit.

Compilation is a Shannon expansion with formula caching. Before branching,
the residual DNF is split into variable-disjoint components. A disjunction
of independent parts ``F1 | F2`` is encoded by compiling ``F1`` with ``F2``'s
circuit in place of its false leaf, which keeps every node a plain decision
or decomposable conjunction. Variables shared by all conjuncts are factored
out into a conjunction node when nothing waits on the false branch.

Weighted model counting is then one bottom-up pass over the DAG.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import MissingProbabilityError, NodeBudgetExceeded
from .lineage import DnfLineage

DEFAULT_NODE_BUDGET = 10**7

TRUE, FALSE, DECISION, AND = "true", "false", "decision", "and"


class Node:
    __slots__ = ("id", "kind", "var", "hi", "lo", "children")

    def __init__(self, id, kind, var=None, hi=None, lo=None, children=()):
        self.id = id
        self.kind = kind
        self.var = var
        self.hi = hi
        self.lo = lo
        self.children = children

    def __repr__(self):
        if self.kind == DECISION:
            return f"Node({self.id}: D e{self.var} {self.hi.id} {self.lo.id})"
        if self.kind == AND:
            return f"Node({self.id}: A {[c.id for c in self.children]})"
        return f"Node({self.id}: {self.kind})"


@dataclass
class Circuit:
    root: Node
    nodes: list = field(repr=False)  # topological: children precede parents

    def __len__(self):
        return len(self.nodes)

    def variables(self) -> frozenset:
        return frozenset(n.var for n in self.nodes if n.kind == DECISION)

    def dump(self) -> str:
        """NNF-style text: ``L 1``/``L 0`` leaves, ``D var hi lo``, ``A k c1..ck``."""
        lines = []
        for n in self.nodes:
            if n.kind == TRUE:
                lines.append("L 1")
            elif n.kind == FALSE:
                lines.append("L 0")
            elif n.kind == DECISION:
                lines.append(f"D {n.var} {n.hi.id} {n.lo.id}")
            else:
                lines.append(f"A {len(n.children)} " + " ".join(str(c.id) for c in n.children))
        return "\n".join(lines) + "\n"


def _bits(m):
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def _minimize(masks) -> tuple:
    """Drop conjuncts subsumed by a smaller one; canonical sorted tuple."""
    kept = []
    for m in sorted(set(masks), key=lambda m: (m.bit_count(), m)):
        if not any(k & m == k for k in kept):
            kept.append(m)
    return tuple(sorted(kept))


def _components(masks):
    groups = []  # (var mask, [conjunct masks])
    for m in masks:
        joined_vars, joined = m, [m]
        rest = []
        for gv, gm in groups:
            if gv & m:
                joined_vars |= gv
                joined.extend(gm)
            else:
                rest.append((gv, gm))
        rest.append((joined_vars, joined))
        groups = rest
    return [tuple(sorted(gm)) for _, gm in groups]


class _Compiler:
    def __init__(self, variables, budget):
        self.variables = variables
        self.budget = budget
        self.nodes = []
        self.cache = {}
        self.literals = {}
        self.true = self._node(TRUE)
        self.false = self._node(FALSE)

    def _node(self, kind, **kw):
        if len(self.nodes) >= self.budget:
            raise NodeBudgetExceeded(f"circuit exceeds {self.budget} nodes")
        n = Node(len(self.nodes), kind, **kw)
        self.nodes.append(n)
        return n

    def decision(self, bit, hi, lo):
        if hi is lo:
            return hi
        return self._node(DECISION, var=self.variables[bit], hi=hi, lo=lo)

    def literal(self, bit):
        n = self.literals.get(bit)
        if n is None:
            n = self.literals[bit] = self.decision(bit, self.true, self.false)
        return n

    def compile(self, masks: tuple, cont: Node) -> Node:
        if not masks:
            return cont
        if masks[0] == 0:
            return self.true
        key = (masks, cont.id)
        hit = self.cache.get(key)
        if hit is not None:
            return hit

        comps = _components(masks)
        if len(comps) > 1:
            node = cont
            for comp in sorted(comps, reverse=True):
                node = self.compile(comp, node)
        else:
            common = masks[0]
            for m in masks[1:]:
                common &= m
            if common and cont is self.false:
                children = [self.literal(b) for b in _bits(common)]
                rest = _minimize(m & ~common for m in masks)
                if rest[0] != 0:
                    children.append(self.compile(rest, self.false))
                node = children[0] if len(children) == 1 else self._node(AND, children=tuple(children))
            else:
                bit = self._branch_bit(masks)
                b = 1 << bit
                pos = [m & ~b if m & b else m for m in masks]
                hi = self.true if 0 in pos else self.compile(_minimize(pos), cont)
                lo = self.compile(_minimize(m for m in masks if not m & b), cont)
                node = self.decision(bit, hi, lo)
        self.cache[key] = node
        return node

    @staticmethod
    def _branch_bit(masks):
        # most frequent variable; lowest index (= smallest edge id) on ties
        counts = {}
        for m in masks:
            for b in _bits(m):
                counts[b] = counts.get(b, 0) + 1
        return max(counts, key=lambda b: (counts[b], -b))


def compile(lineage: DnfLineage, node_budget: int = DEFAULT_NODE_BUDGET) -> Circuit:
    """Compile a DNF lineage to an equivalent decision-DNNF circuit."""
    variables = sorted(lineage.variables())
    bit = {v: i for i, v in enumerate(variables)}
    masks = _minimize(sum(1 << bit[v] for v in c) for c in lineage.conjuncts)
    c = _Compiler(variables, node_budget)
    root = c.compile(masks, c.false)
    return Circuit(root, c.nodes)


def wmc(circuit: Circuit, probs: Mapping[int, float]) -> float:
    values = [0.0] * len(circuit.nodes)
    try:
        for n in circuit.nodes:
            if n.kind == DECISION:
                p = probs[n.var]
                values[n.id] = p * values[n.hi.id] + (1.0 - p) * values[n.lo.id]
            elif n.kind == AND:
                v = 1.0
                for ch in n.children:
                    v *= values[ch.id]
                values[n.id] = v
            elif n.kind == TRUE:
                values[n.id] = 1.0
    except KeyError as exc:
        raise MissingProbabilityError(f"no probability for variable e{exc.args[0]}") from None
    return values[circuit.root.id]


def kc_probability(lineage: DnfLineage, probs: Mapping[int, float],
                   node_budget: int = DEFAULT_NODE_BUDGET) -> float:
    return wmc(compile(lineage, node_budget), probs)
