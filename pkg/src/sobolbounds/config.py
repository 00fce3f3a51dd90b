"""Run configuration: a single JSON tree.

Keys (all optional unless noted)::

    inputs       (required) list of {"family": ..., <params>, "truncate": [a, b], "name": ...}
                 params per family: uniform lower/upper; normal loc/scale;
                 triangular lower/mode/upper; gumbel, laplace, cauchy loc/scale;
                 beta alpha/beta/lower/upper; gamma shape/scale.
                 Infinite truncation ends may be written "inf" / "-inf" / null.
    model        (required) {"name": ..., "params": {...}} or {"csv": "path"}
    estimators   subset of pdo, pdo-der, fisher, monomial, dgsm-upper, pick-freeze, oracle
    mode         "mc" (default) or "quadrature"
    n            Monte Carlo sample size (default 10000)
    seeds        list of integer seeds (default [0])
    variables    0-based inputs to analyse (default: all)
    bootstrap    {"B": 300, "level": 0.9}; B = 0 disables intervals
    spectral     {"K": 2, "M": 2000, "eigen_index": 1, "weight": null}
    quadrature   {"order": 16}
    monomial     {"degree": 1}
    pick_freeze  {"n": <n>}
    output       {"dir": "out", "format": "json"}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .distributions import Distribution1D
from .errors import ConfigInvalid, ModelUnknown
from .sample import EvaluationSample
from .spectral import Weight
from .testfunctions import ModelFunction, make_model

ESTIMATORS = ("pdo", "pdo-der", "fisher", "monomial", "dgsm-upper", "pick-freeze", "oracle")
DERIVATIVE_ESTIMATORS = ("pdo-der", "dgsm-upper")
MODEL_ESTIMATORS = ("pick-freeze", "oracle")


def _end(v) -> float:
    if v is None:
        return math.inf
    if isinstance(v, str):
        return float(v.replace("infinity", "inf"))
    return float(v)


def parse_input(spec: dict) -> tuple[str | None, Distribution1D]:
    spec = dict(spec)
    name = spec.pop("name", None)
    trunc = spec.pop("truncate", None)
    if trunc is not None:
        if len(trunc) != 2:
            raise ConfigInvalid(f"truncate must be [a, b], got {trunc}")
        a = -math.inf if trunc[0] is None else _end(trunc[0])
        spec["truncate"] = [a, _end(trunc[1])]
    try:
        return name, Distribution1D.from_dict(spec)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigInvalid(f"bad input declaration {spec}: {exc}") from exc


@dataclass
class RunConfig:
    inputs: list[Distribution1D]
    names: list[str]
    model: ModelFunction | None = None
    model_spec: dict = field(default_factory=dict)
    csv_sample: EvaluationSample | None = None
    estimators: list[str] = field(default_factory=lambda: ["pdo", "pdo-der"])
    mode: str = "mc"
    n: int = 10_000
    seeds: list[int] = field(default_factory=lambda: [0])
    variables: list[int] | None = None
    B: int = 300
    level: float = 0.9
    K: int = 2
    M: int = 2000
    eigen_index: int = 1
    weight: Weight = field(default_factory=Weight)
    quad_order: int = 16
    monomial_degree: int = 1
    pick_freeze_n: int | None = None
    out_dir: str = "out"
    fmt: str = "json"

    @property
    def d(self) -> int:
        return len(self.inputs)

    @property
    def has_gradients(self) -> bool:
        if self.csv_sample is not None:
            return self.csv_sample.gradients is not None
        return self.model is not None and self.model.has_gradient

    def validate(self) -> "RunConfig":
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise ConfigInvalid(f"unknown estimators {unknown}; choose from {ESTIMATORS}")
        if self.mode not in ("mc", "quadrature"):
            raise ConfigInvalid(f"mode must be 'mc' or 'quadrature', got {self.mode!r}")
        dim = self.model.dimension if self.model is not None else self.csv_sample.d
        if dim != self.d:
            raise ConfigInvalid(f"model has {dim} inputs but {self.d} distributions are declared")
        if self.csv_sample is not None and self.mode == "quadrature":
            raise ConfigInvalid("quadrature mode needs a model, not a CSV sample")
        needs = [e for e in self.estimators if e in DERIVATIVE_ESTIMATORS]
        if needs and not self.has_gradients:
            raise ConfigInvalid(f"estimators {needs} need gradients, which the model/CSV does not provide")
        if self.n < 2:
            raise ConfigInvalid("n must be >= 2")
        if self.B and self.B < 100:
            raise ConfigInvalid("bootstrap B must be 0 (disabled) or >= 100")
        if not 0 < self.level < 1:
            raise ConfigInvalid("bootstrap level must lie in (0, 1)")
        if self.eigen_index > self.K:
            raise ConfigInvalid("spectral eigen_index must be <= K")
        if self.variables is not None and any(not 0 <= v < self.d for v in self.variables):
            raise ConfigInvalid(f"variables must lie in 0..{self.d - 1}")
        return self

    def to_dict(self) -> dict:
        """Echo of the resolved configuration (goes into the report)."""
        return {
            "inputs": [dict(d.to_dict(), name=n) for d, n in zip(self.inputs, self.names)],
            "model": self.model_spec,
            "estimators": list(self.estimators),
            "mode": self.mode,
            "n": self.n,
            "seeds": list(self.seeds),
            "variables": self.variables,
            "bootstrap": {"B": self.B, "level": self.level},
            "spectral": {"K": self.K, "M": self.M, "eigen_index": self.eigen_index,
                         "weight": self.weight.to_dict()},
            "quadrature": {"order": self.quad_order},
            "monomial": {"degree": self.monomial_degree},
            "pick_freeze": {"n": self.pick_freeze_n or self.n},
        }


def load_config(source, base_dir=None) -> RunConfig:
    """Build a validated :class:`RunConfig` from a path or an already-parsed dict."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            tree = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
        base_dir = base_dir or path.parent
    else:
        tree = dict(source)
    base_dir = Path(base_dir or ".")

    if "inputs" not in tree or "model" not in tree:
        raise ConfigInvalid("config needs 'inputs' and 'model'")
    names, dists = [], []
    for k, spec in enumerate(tree["inputs"]):
        name, dist = parse_input(spec)
        names.append(name or f"x{k + 1}")
        dists.append(dist)

    model_spec = dict(tree["model"])
    model = csv_sample = None
    if "csv" in model_spec:
        csv_path = Path(model_spec["csv"])
        if not csv_path.is_absolute():
            csv_path = base_dir / csv_path
        try:
            csv_sample = EvaluationSample.from_csv(csv_path)
        except (OSError, ValueError) as exc:
            raise ConfigInvalid(f"cannot read CSV sample {csv_path}: {exc}") from exc
    elif "name" in model_spec:
        try:
            model = make_model(model_spec["name"], model_spec.get("params"))
        except ModelUnknown:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad model parameters {model_spec}: {exc}") from exc
    else:
        raise ConfigInvalid("model needs either 'name' or 'csv'")

    boot = tree.get("bootstrap", {})
    spec = tree.get("spectral", {})
    out = tree.get("output", {})
    cfg = RunConfig(
        inputs=dists,
        names=names,
        model=model,
        model_spec=model_spec,
        csv_sample=csv_sample,
        estimators=list(tree.get("estimators", ["pdo", "pdo-der"])),
        mode=tree.get("mode", "mc"),
        n=int(tree.get("n", 10_000)),
        seeds=[int(s) for s in tree.get("seeds", [0])],
        variables=tree.get("variables"),
        B=int(boot.get("B", 300)),
        level=float(boot.get("level", 0.9)),
        K=int(spec.get("K", 2)),
        M=int(spec.get("M", 2000)),
        eigen_index=int(spec.get("eigen_index", 1)),
        weight=Weight.parse(spec.get("weight")),
        quad_order=int(tree.get("quadrature", {}).get("order", 16)),
        monomial_degree=int(tree.get("monomial", {}).get("degree", 1)),
        pick_freeze_n=tree.get("pick_freeze", {}).get("n"),
        out_dir=out.get("dir", "out"),
        fmt=out.get("format", "json"),
    )
    return cfg.validate()
