"""Benchmark models with exact gradients and closed-form ANOVA reference values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidPhysicalParams, ModelUnknown, NoAnalyticForm


@dataclass(frozen=True, eq=False)
class ModelFunction:
    """A scalar model of ``dimension`` inputs, vectorized over design rows.

    ``kinks[j]`` lists coordinates where the model is not smooth in ``x_j``
    (quadrature splits there).
    """

    name: str
    dimension: int
    func: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    params: Mapping = field(default_factory=dict)
    kinks: tuple = ()

    def __post_init__(self):
        if not self.kinks:
            object.__setattr__(self, "kinks", ((),) * self.dimension)

    def _rows(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rows = np.atleast_2d(x)
        if rows.shape[1] != self.dimension:
            raise ValueError(f"{self.name} expects {self.dimension} inputs, got {rows.shape[1]}")
        return rows

    def evaluate(self, x):
        out = self.func(self._rows(x))
        return out if np.ndim(x) > 1 else float(out[0])

    __call__ = evaluate

    @property
    def has_gradient(self) -> bool:
        return self.grad is not None

    def gradient(self, x):
        if self.grad is None:
            raise NotImplementedError(f"{self.name} has no analytic gradient")
        out = self.grad(self._rows(x))
        return out if np.ndim(x) > 1 else out[0]

    def face_evaluate(self, i: int, value: float, x):
        """Model outputs with coordinate ``i`` pinned to ``value``."""
        rows = self._rows(x).copy()
        rows[:, i] = value
        out = self.func(rows)
        return out if np.ndim(x) > 1 else float(out[0])


def linear_interaction(a: float = 1.0) -> ModelFunction:
    """``x1 + a x1 x2``."""

    def f(x):
        return x[:, 0] + a * x[:, 0] * x[:, 1]

    def g(x):
        return np.column_stack([1.0 + a * x[:, 1], a * x[:, 0]])

    return ModelFunction("linear_interaction", 2, f, g, {"a": a})


def g_sobol(a: Sequence[float]) -> ModelFunction:
    """Product of ``1 + (4|x_i| - 1) / (1 + a_i)``, centered factors on [-1/2, 1/2]."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= -1):
        raise ValueError("g-Sobol parameters must satisfy a_i > -1")
    d = a.size

    def factors(x):
        return 1.0 + (4.0 * np.abs(x) - 1.0) / (1.0 + a)

    def f(x):
        return np.prod(factors(x), axis=1)

    def g(x):
        fac = factors(x)
        dfac = 4.0 * np.sign(x) / (1.0 + a)
        out = np.empty_like(x)
        for j in range(d):
            others = np.prod(np.delete(fac, j, axis=1), axis=1)
            out[:, j] = dfac[:, j] * others
        return out

    return ModelFunction("g_sobol", d, f, g, {"a": a.tolist()}, kinks=((0.0,),) * d)


FLOOD_INPUTS = ("Q", "Ks", "Zv", "Zm", "Hd", "Cb", "L", "B")


def _flood_parts(x):
    q, ks, zv, zm, hd, cb, length, width = x.T
    if np.any(ks <= 0) or np.any(width <= 0) or np.any(length <= 0) or np.any(zm <= zv):
        raise InvalidPhysicalParams("flood model needs Ks > 0, B > 0, L > 0 and Zm > Zv")
    slope = (zm - zv) / length
    height = (q / (width * ks * np.sqrt(slope))) ** 0.6
    s = height + zv - hd - cb
    return height, s


def flood_overflow(x) -> np.ndarray:
    """Maximal annual overflow ``S`` (metres)."""
    return _flood_parts(np.atleast_2d(np.asarray(x, dtype=float)))[1]


def _flood_eval(x):
    _, s = _flood_parts(x)
    hd = x[:, 4]
    with np.errstate(divide="ignore", over="ignore"):
        dyke = 0.2 + 0.8 * (1.0 - np.exp(-1000.0 / s**4))
    cost = np.where(s > 0, 1.0, np.where(s == 0, 1.0, dyke))
    return cost + np.where(hd > 8, hd, 8.0) / 20.0


def _flood_grad(x):
    height, s = _flood_parts(x)
    q, ks, zv, zm, hd, cb, length, width = x.T
    dh = zm - zv
    ds = np.column_stack([
        0.6 * height / q,
        -0.6 * height / ks,
        0.3 * height / dh + 1.0,
        -0.3 * height / dh,
        -np.ones_like(q),
        -np.ones_like(q),
        0.3 * height / length,
        -0.6 * height / width,
    ])
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        dcost = -0.8 * np.exp(-1000.0 / s**4) * 4000.0 / s**5
    dcost = np.where(s < 0, dcost, 0.0)
    dcost = np.nan_to_num(dcost, nan=0.0, posinf=0.0, neginf=0.0)
    out = dcost[:, None] * ds
    out[:, 4] += np.where(hd > 8, 1.0 / 20.0, 0.0)
    return out


def flood_model() -> ModelFunction:
    """Dyke cost of the simplified river flood model, inputs ``(Q, Ks, Zv, Zm, Hd, Cb, L, B)``."""
    kinks = ((), (), (), (), (8.0,), (), (), ())
    return ModelFunction("flood", 8, _flood_eval, _flood_grad, {"inputs": list(FLOOD_INPUTS)}, kinks)


def polynomial(terms: Mapping[tuple, float], dimension: int | None = None) -> ModelFunction:
    """Sum of monomials ``coef * prod x_j**e_j`` keyed by exponent tuples."""
    items = [(tuple(int(e) for e in k), float(c)) for k, c in terms.items()]
    d = dimension or len(items[0][0])
    exps = np.array([k for k, _ in items], dtype=float).reshape(-1, d)
    coefs = np.array([c for _, c in items])

    def f(x):
        return np.prod(x[:, None, :] ** exps[None], axis=2) @ coefs

    def g(x):
        out = np.empty_like(x)
        for j in range(d):
            e = exps.copy()
            scale = e[:, j].copy()
            e[:, j] = np.maximum(e[:, j] - 1.0, 0.0)
            out[:, j] = np.prod(x[:, None, :] ** e[None], axis=2) @ (coefs * scale)
        return out

    params = {"terms": [[list(k), c] for k, c in items]}
    return ModelFunction("polynomial", d, f, g, params)


def make_model(name: str, params: Mapping | None = None) -> ModelFunction:
    params = dict(params or {})
    if name == "linear_interaction":
        return linear_interaction(**params)
    if name == "g_sobol":
        return g_sobol(params["a"])
    if name == "flood":
        return flood_model()
    if name == "polynomial":
        terms = {tuple(k): c for k, c in params["terms"]}
        return polynomial(terms, params.get("dimension"))
    raise ModelUnknown(f"unknown model {name!r}")


def analytic_indices(name: str, params: Mapping, i: int) -> dict:
    """Closed-form ``D_i``, ``D_i^tot`` and the reference first-eigenvalue lower bounds.

    Uniform inputs on [-1/2, 1/2] are assumed.  For g-Sobol the bounds use the
    second eigenfunction (the first one is odd while the factors are even),
    and ``lb_total`` is ``LB_i + LB_i * sum_j LB_j``.
    """
    if name == "linear_interaction":
        a = float(params.get("a", 1.0))
        if i == 0:
            return {
                "D_i": 1.0 / 12.0,
                "D_i_tot": 1.0 / 12.0 + a**2 / 144.0,
                "lb_main": 8.0 / math.pi**4,
                "lb_total": 8.0 / math.pi**4 + 64.0 * a**2 / math.pi**8,
            }
        # x2 only enters through the interaction a x1 x2
        inter = a**2 / 144.0
        lb = 2.0 / math.pi**2 * 2.0 * (4.0 * a / math.pi**3) ** 2
        return {"D_i": 0.0, "D_i_tot": inter, "lb_main": 0.0, "lb_total": lb}
    if name == "g_sobol":
        a = np.asarray(params["a"], dtype=float)
        with np.errstate(divide="ignore"):
            D = (1.0 / 3.0) / (1.0 + a) ** 2
            LB = (32.0 / math.pi**4) / (1.0 + a) ** 2
        others = np.delete(np.arange(a.size), i)
        return {
            "D_i": float(D[i]),
            "D_i_tot": float(D[i] * np.prod(1.0 + D[others])),
            "D_i_second_order": float(D[i] * np.sum(D[others])),
            "lb_main": float(LB[i]),
            "lb_total": float(LB[i] + LB[i] * np.sum(LB[others])),
            "lb_interactions": {int(j): float(LB[i] * LB[j]) for j in others},
        }
    raise NoAnalyticForm(f"no closed-form indices for model {name!r}")
