"""Engine configuration, loadable from a flat JSON object with dotted keys."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from .kc import DEFAULT_NODE_BUDGET
from .oracle import DEFAULT_VAR_CAP

_KEYS = {
    "adaptive.d_max": "d_max",
    "adaptive.n_max": "n_max",
    "adaptive.n_minus_s_max": "n_minus_s_max",
    "adaptive.use_min_derivation_size": "use_min_derivation_size",
    "oracle.var_cap": "var_cap",
    "kc.node_budget": "node_budget",
}


@dataclass(frozen=True)
class EngineConfig:
    d_max: int = 10
    n_max: int = 8
    n_minus_s_max: int = 3
    # experimental: dispatch on the smallest derivation size instead of query size
    use_min_derivation_size: bool = False
    var_cap: int = DEFAULT_VAR_CAP
    node_budget: int = DEFAULT_NODE_BUDGET

    @classmethod
    def from_mapping(cls, data: dict) -> "EngineConfig":
        kwargs = {}
        names = {f.name for f in fields(cls)}
        for key, value in data.items():
            name = _KEYS.get(key, key)
            if name not in names:
                raise KeyError(f"unknown config key {key!r}")
            kwargs[name] = value
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "EngineConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_mapping({k: v for k, v in data.items() if k in _KEYS or "." not in k})


DEFAULT_CONFIG = EngineConfig()
