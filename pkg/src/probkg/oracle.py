"""Brute-force possible-world probability of a DNF lineage.

Every truth assignment over the lineage's own variables is enumerated, so
the cost is ``2**n``. This is the ground truth the other engines are
checked against.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .errors import MissingProbabilityError, OracleCapExceeded
from .lineage import DnfLineage

DEFAULT_VAR_CAP = 24
_CHUNK_BITS = 20


def prob_possible_worlds(lineage: DnfLineage, probs: Mapping[int, float],
                         var_cap: int = DEFAULT_VAR_CAP) -> float:
    variables = sorted(lineage.variables())
    n = len(variables)
    if n > var_cap:
        raise OracleCapExceeded(f"{n} variables exceeds the oracle cap of {var_cap}")
    try:
        p = [float(probs[v]) for v in variables]
    except KeyError as exc:
        raise MissingProbabilityError(f"no probability for variable e{exc.args[0]}") from None
    bit = {v: i for i, v in enumerate(variables)}
    masks = np.array(sorted({sum(1 << bit[v] for v in c) for c in lineage.conjuncts}),
                     dtype=np.int64)

    total = 0.0
    chunk = 1 << min(n, _CHUNK_BITS)
    for start in range(0, 1 << n, chunk):
        worlds = np.arange(start, start + chunk, dtype=np.int64)
        sat = np.zeros(chunk, dtype=bool)
        for m in masks:
            sat |= (worlds & m) == m
        if not sat.any():
            continue
        worlds = worlds[sat]
        weight = np.ones(len(worlds))
        for i, pi in enumerate(p):
            weight *= np.where((worlds >> i) & 1, pi, 1.0 - pi)
        total += float(weight.sum())
    return total
