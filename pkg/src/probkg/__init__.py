"""Probabilistic knowledge-graph queries with maintainable symbolic lineage."""

from .adaptive import Engine, choose_engine, compute_probability
from .config import DEFAULT_CONFIG, EngineConfig
from .errors import (
    CoefficientOverflowError,
    GraphError,
    MissingProbabilityError,
    NodeBudgetExceeded,
    OracleCapExceeded,
    ProbKGError,
    QuerySyntaxError,
)
from .graph import ProbEdge, ProbGraph, load_graph, parse_graph
from .kc import compile, kc_probability, wmc
from .lineage import DnfLineage, h_map, to_lineage
from .maintenance import AnswerStore, upper_bound
from .oracle import prob_possible_worlds
from .query import Answer, BgpQuery, TriplePattern, answer_signature, match_query, parse_query
from .semiring import ONE, ZERO, FlatPolynomial, build_symbolic, evaluate, oplus, otimes

__version__ = "0.1.0"

__all__ = [
    "Answer", "AnswerStore", "BgpQuery", "CoefficientOverflowError", "DEFAULT_CONFIG",
    "DnfLineage", "Engine", "EngineConfig", "FlatPolynomial", "GraphError",
    "MissingProbabilityError", "NodeBudgetExceeded", "ONE", "OracleCapExceeded",
    "ProbEdge", "ProbGraph", "ProbKGError", "QuerySyntaxError", "TriplePattern", "ZERO",
    "answer_signature", "build_symbolic", "choose_engine", "compile", "compute_probability",
    "evaluate", "h_map", "kc_probability", "load_graph", "match_query", "oplus", "otimes",
    "parse_graph", "parse_query", "prob_possible_worlds", "to_lineage", "upper_bound", "wmc",
]
