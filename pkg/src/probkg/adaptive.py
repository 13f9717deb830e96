"""Per-answer engine selection between the symbolic semiring and compilation."""

from __future__ import annotations

import enum
import logging
from typing import Mapping

from .config import DEFAULT_CONFIG, EngineConfig
from .errors import CoefficientOverflowError
from .kc import kc_probability
from .lineage import to_lineage
from .oracle import prob_possible_worlds
from .query import Answer, AnswerSignature, BgpQuery, answer_signature
from .semiring import build_symbolic, evaluate

log = logging.getLogger(__name__)

__all__ = ["Engine", "AnswerSignature", "choose_engine", "compute_probability", "dispatch_signature"]


class Engine(str, enum.Enum):
    SEMIRING = "semiring"
    KC = "kc"
    ORACLE = "oracle"

    def __str__(self):
        return self.value


def choose_engine(sig: AnswerSignature, config: EngineConfig = DEFAULT_CONFIG) -> Engine:
    """Semiring when any of d, n or n - s is small; compilation otherwise."""
    d, n, s = sig
    if d < config.d_max or n < config.n_max or n - s < config.n_minus_s_max:
        return Engine.SEMIRING
    return Engine.KC


def dispatch_signature(a: Answer, q: BgpQuery, config: EngineConfig = DEFAULT_CONFIG) -> AnswerSignature:
    sig = answer_signature(a, q)
    if config.use_min_derivation_size:
        sig = sig._replace(s=min(len(d) for d in a.derivations))
    return sig


def compute_probability(a: Answer, q: BgpQuery, probs: Mapping[int, float],
                        config: EngineConfig = DEFAULT_CONFIG,
                        engine: Engine | str | None = None) -> tuple[float, Engine]:
    """Probability of ``a`` and the engine that produced it.

    With ``engine`` unset the answer signature decides. The semiring path
    stores ``symE`` on the answer so it can be maintained incrementally;
    other engines clear it.
    """
    if not a.derivations:
        raise ValueError(f"answer {a.binding} has no derivations")
    if engine is None:
        engine = choose_engine(dispatch_signature(a, q, config), config)
    engine = Engine(engine)

    if engine is Engine.SEMIRING:
        try:
            a.symE = build_symbolic(a.derivations)
        except CoefficientOverflowError:
            log.warning("coefficient overflow for %s; falling back to compilation", a.binding)
            engine = Engine.KC
        else:
            a.prob = evaluate(a.symE, probs)
    if engine is Engine.KC:
        a.symE = None
        a.prob = kc_probability(to_lineage(a.derivations), probs, config.node_budget)
    elif engine is Engine.ORACLE:
        a.symE = None
        a.prob = prob_possible_worlds(to_lineage(a.derivations), probs, config.var_cap)
    a.engine = engine.value
    return a.prob, engine
