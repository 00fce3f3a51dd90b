"""Continuous one-dimensional input laws.

A :class:`Distribution1D` carries everything the bounds need from an input
law: the density ``p``, the potential derivative ``V' = -(ln p)'``, the
translation score ``Z`` and its variance (the Fisher information), plus
inverse-CDF sampling.  Pointwise functions are delegated to ``scipy.stats``;
truncation, score and Fisher information are implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, stats

from .errors import EmptyMass, OutsideSupport, UnsupportedForBounds

PARAM_NAMES: dict[str, tuple[str, ...]] = {
    "uniform": ("lower", "upper"),
    "normal": ("loc", "scale"),
    "triangular": ("lower", "mode", "upper"),
    "gumbel": ("loc", "scale"),
    "laplace": ("loc", "scale"),
    "cauchy": ("loc", "scale"),
    "beta": ("alpha", "beta", "lower", "upper"),
    "gamma": ("shape", "scale"),
}
PARAM_DEFAULTS: dict[str, dict[str, float]] = {
    "beta": {"lower": 0.0, "upper": 1.0},
}
FAMILIES = tuple(PARAM_NAMES)

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class Distribution1D:
    """Immutable description of a (possibly truncated) continuous law on the real line.

    ``params`` holds the family parameters in the order of ``PARAM_NAMES[family]``;
    use :meth:`make` to build one from keyword arguments.
    """

    family: str
    params: tuple[float, ...]
    truncation: tuple[float, float] | None = None

    def __post_init__(self):
        if self.family not in PARAM_NAMES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        names = PARAM_NAMES[self.family]
        if len(self.params) != len(names):
            raise ValueError(f"{self.family} expects parameters {names}, got {self.params}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.truncation is not None:
            a, b = (float(t) for t in self.truncation)
            object.__setattr__(self, "truncation", (a, b))
        self._validate()

    @classmethod
    def make(cls, family: str, truncate=None, **params: float) -> "Distribution1D":
        family = family.lower()
        if family not in PARAM_NAMES:
            raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
        values = dict(PARAM_DEFAULTS.get(family, {}))
        values.update(params)
        missing = [n for n in PARAM_NAMES[family] if n not in values]
        extra = [n for n in values if n not in PARAM_NAMES[family]]
        if missing or extra:
            raise ValueError(
                f"{family}: missing parameters {missing}, unexpected parameters {extra}"
            )
        d = cls(family, tuple(values[n] for n in PARAM_NAMES[family]))
        if truncate is not None:
            d = d.truncate(*truncate)
        return d

    def _validate(self):
        p = self.param
        f = self.family
        if f in ("uniform", "triangular", "beta") and not p("lower") < p("upper"):
            raise ValueError(f"{f}: lower must be < upper")
        if f == "triangular" and not p("lower") <= p("mode") <= p("upper"):
            raise ValueError("triangular: mode must lie in [lower, upper]")
        if f in ("normal", "gumbel", "laplace", "cauchy", "gamma") and p("scale") <= 0:
            raise ValueError(f"{f}: scale must be positive")
        if f == "beta" and (p("alpha") <= 0 or p("beta") <= 0):
            raise ValueError("beta: shape parameters must be positive")
        if f == "gamma" and p("shape") <= 0:
            raise ValueError("gamma: shape must be positive")
        if self.truncation is not None:
            a, b = self.truncation
            if not a < b:
                raise ValueError(f"truncation interval must satisfy a < b, got {self.truncation}")
            lo, hi = self.base_support
            if not (lo <= a and b <= hi):
                raise ValueError(f"truncation {self.truncation} not inside support {self.base_support}")
            if self._base_mass(a, b) <= 0.0:
                raise EmptyMass(f"{self.family} has no mass on {self.truncation}")

    # -- parameters -------------------------------------------------------

    def param(self, name: str) -> float:
        return self.params[PARAM_NAMES[self.family].index(name)]

    @property
    def params_dict(self) -> dict[str, float]:
        return dict(zip(PARAM_NAMES[self.family], self.params))

    def to_dict(self) -> dict:
        out = {"family": self.family, **self.params_dict}
        if self.truncation is not None:
            out["truncate"] = list(self.truncation)
        return out

    @classmethod
    def from_dict(cls, spec: Mapping) -> "Distribution1D":
        spec = dict(spec)
        family = spec.pop("family")
        truncate = spec.pop("truncate", None)
        return cls.make(family, truncate=truncate, **spec)

    def __repr__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params_dict.items())
        trunc = f", truncate={self.truncation}" if self.truncation else ""
        return f"Distribution1D({self.family}, {args}{trunc})"

    # -- base law ---------------------------------------------------------

    @cached_property
    def _base(self):
        p = self.param
        f = self.family
        if f == "uniform":
            return stats.uniform(loc=p("lower"), scale=p("upper") - p("lower"))
        if f == "normal":
            return stats.norm(loc=p("loc"), scale=p("scale"))
        if f == "triangular":
            width = p("upper") - p("lower")
            return stats.triang(c=(p("mode") - p("lower")) / width, loc=p("lower"), scale=width)
        if f == "gumbel":
            return stats.gumbel_r(loc=p("loc"), scale=p("scale"))
        if f == "laplace":
            return stats.laplace(loc=p("loc"), scale=p("scale"))
        if f == "cauchy":
            return stats.cauchy(loc=p("loc"), scale=p("scale"))
        if f == "beta":
            return stats.beta(p("alpha"), p("beta"), loc=p("lower"), scale=p("upper") - p("lower"))
        return stats.gamma(p("shape"), scale=p("scale"))

    @property
    def base_support(self) -> tuple[float, float]:
        p = self.param
        if self.family in ("uniform", "triangular", "beta"):
            return (p("lower"), p("upper"))
        if self.family == "gamma":
            return (0.0, math.inf)
        return (-math.inf, math.inf)

    def _base_mass(self, a: float, b: float) -> float:
        base = self._base
        if base.cdf(a) > 0.5:
            return float(base.sf(a) - base.sf(b))
        return float(base.cdf(b) - base.cdf(a))

    @cached_property
    def _trunc_mass(self) -> float:
        if self.truncation is None:
            return 1.0
        return self._base_mass(*self.truncation)

    # -- support ----------------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        return self.truncation if self.truncation is not None else self.base_support

    @property
    def is_bounded(self) -> bool:
        a, b = self.support
        return math.isfinite(a) and math.isfinite(b)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Interior points where the density is not smooth."""
        a, b = self.support
        if self.family == "triangular":
            c = self.param("mode")
        elif self.family == "laplace":
            c = self.param("loc")
        else:
            return ()
        return (c,) if a < c < b else ()

    def _inside(self, x: np.ndarray) -> np.ndarray:
        a, b = self.support
        return (x >= a) & (x <= b)

    # -- pointwise quantities --------------------------------------------

    def pdf(self, x):
        """Density; zero outside the support."""
        x = np.asarray(x, dtype=float)
        out = np.where(self._inside(x), self._base.pdf(x) / self._trunc_mass, 0.0)
        return out if out.ndim else float(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.truncation is None:
            out = self._base.cdf(x)
        else:
            a, b = self.truncation
            xc = np.clip(x, a, b)
            if self._base.cdf(a) > 0.5:
                out = (self._base.sf(a) - self._base.sf(xc)) / self._trunc_mass
            else:
                out = (self._base.cdf(xc) - self._base.cdf(a)) / self._trunc_mass
            out = np.clip(out, 0.0, 1.0)
        return out if np.ndim(out) else float(out)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        if self.truncation is None:
            out = self._base.ppf(u)
        else:
            a, b = self.truncation
            if self._base.cdf(a) > 0.5:
                out = self._base.isf(self._base.sf(a) - u * self._trunc_mass)
            else:
                out = self._base.ppf(self._base.cdf(a) + u * self._trunc_mass)
            out = np.clip(out, a, b)
        return out if np.ndim(out) else float(out)

    def log_density_deriv(self, x):
        """``(ln p)'(x)`` on the open support (left limit at kinks)."""
        x = np.asarray(x, dtype=float)
        a, b = self.support
        if np.any((x <= a) | (x >= b)):
            raise OutsideSupport(f"{self!r}: points outside the open support {self.support}")
        p = self.param
        f = self.family
        if f == "uniform":
            out = np.zeros_like(x)
        elif f == "normal":
            out = -(x - p("loc")) / p("scale") ** 2
        elif f == "triangular":
            lo, c, hi = p("lower"), p("mode"), p("upper")
            left = x <= c if c > lo else np.zeros(x.shape, dtype=bool)
            with np.errstate(divide="ignore"):
                out = np.where(left, 1.0 / (x - lo), -1.0 / (hi - x))
        elif f == "gumbel":
            u = (x - p("loc")) / p("scale")
            out = (np.exp(-u) - 1.0) / p("scale")
        elif f == "laplace":
            out = -np.sign(x - p("loc")) / p("scale")
        elif f == "cauchy":
            r = x - p("loc")
            out = -2.0 * r / (r**2 + p("scale") ** 2)
        elif f == "beta":
            out = (p("alpha") - 1.0) / (x - p("lower")) - (p("beta") - 1.0) / (p("upper") - x)
        else:
            out = (p("shape") - 1.0) / x - 1.0 / p("scale")
        return out if out.ndim else float(out)

    def potential_deriv(self, x):
        """``V'(x)`` for the density written as ``exp(-V)``."""
        out = -np.asarray(self.log_density_deriv(x))
        return out if out.ndim else float(out)

    # -- score / Fisher information -------------------------------------

    def _check_score_assumptions(self):
        f = self.family
        if f == "uniform":
            raise UnsupportedForBounds("uniform density has identically zero derivative")
        if f == "triangular":
            raise UnsupportedForBounds("triangular density: p'/p is not square-integrable")
        if f == "beta":
            for name in ("alpha", "beta"):
                s = self.param(name)
                if s != 1.0 and s <= 2.0:
                    raise UnsupportedForBounds(
                        f"beta({name}={s:g}): p'/p is not square-integrable (needs 1 or > 2)"
                    )
            if self.param("alpha") == 1.0 and self.param("beta") == 1.0:
                raise UnsupportedForBounds("beta(1, 1) is uniform")
        if f == "gamma":
            k = self.param("shape")
            if k <= 2.0:
                raise UnsupportedForBounds(f"gamma(shape={k:g}): score not square-integrable")

    @cached_property
    def score_shift(self) -> float:
        """Constant ``p(b) - p(a)`` subtracted from ``(ln p)'`` so that the score is centered."""
        a, b = self.support
        pb = self.pdf(b) if math.isfinite(b) else 0.0
        pa = self.pdf(a) if math.isfinite(a) else 0.0
        return float(pb - pa)

    def score(self, x):
        """Translation score ``Z(x)``, centered under the law."""
        self._check_score_assumptions()
        out = np.asarray(self.log_density_deriv(x)) - self.score_shift
        return out if out.ndim else float(out)

    @cached_property
    def _fisher(self) -> float:
        self._check_score_assumptions()
        f, p = self.family, self.param
        if self.truncation is None:
            if f in ("normal", "laplace", "gumbel"):
                return 1.0 / p("scale") ** 2
            if f == "cauchy":
                return 1.0 / (2.0 * p("scale") ** 2)
            if f == "gamma":
                return 1.0 / (p("scale") ** 2 * (p("shape") - 2.0))
        info = self.variance_of(self.score)
        if not (info > 0 and math.isfinite(info)):
            raise UnsupportedForBounds(f"{self!r}: Fisher information is {info}")
        return info

    def fisher_information(self) -> float:
        return self._fisher

    # -- integration ------------------------------------------------------

    def expect(self, func: Callable, tol: float = QUAD_TOL) -> float:
        """``E[func(X)]`` by adaptive quadrature.

        Bounded supports integrate ``func * pdf`` directly, splitting at the
        breakpoints; unbounded ones go through ``u -> ppf(u)`` on (0, 1).
        """
        a, b = self.support
        if self.is_bounded:
            knots = [a, *self.breakpoints, b]
            total = 0.0
            for lo, hi in zip(knots[:-1], knots[1:]):
                val, _ = integrate.quad(
                    lambda t: func(t) * self.pdf(t), lo, hi, epsabs=tol, epsrel=tol, limit=200
                )
                total += val
            return total
        knots = [0.0, *(self.cdf(c) for c in self.breakpoints), 0.5, 1.0]
        knots = sorted(set(knots))
        total = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            val, _ = integrate.quad(
                lambda u: func(self.ppf(u)), lo, hi, epsabs=tol, epsrel=tol, limit=200
            )
            total += val
        return total

    def mean(self) -> float:
        return self.expect(lambda t: t)

    def variance_of(self, func: Callable) -> float:
        m = self.expect(func)
        return self.expect(lambda t: (func(t) - m) ** 2)

    def variance(self) -> float:
        return self.variance_of(lambda t: t)

    # -- transformations --------------------------------------------------

    def truncate(self, a: float, b: float) -> "Distribution1D":
        """Renormalized restriction of the base law to ``(a, b)``."""
        lo, hi = self.support
        a, b = max(float(a), lo), min(float(b), hi)
        if not a < b:
            raise EmptyMass(f"empty truncation interval ({a}, {b})")
        base = Distribution1D(self.family, self.params)
        if base._base_mass(a, b) <= 0.0:
            raise EmptyMass(f"{self.family} has no mass on ({a}, {b})")
        return Distribution1D(self.family, self.params, (a, b))

    def quantile_truncated(self, eps: float = 1e-8) -> "Distribution1D":
        """Truncate infinite tails at the ``eps`` and ``1 - eps`` quantiles."""
        if self.is_bounded:
            return self
        a, b = self.support
        if not math.isfinite(a):
            a = float(self.ppf(eps))
        if not math.isfinite(b):
            b = float(self.ppf(1.0 - eps))
        return self.truncate(a, b)

    def sample(self, n: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
        """``n`` i.i.d. draws by inverse-CDF; reproducible for a given seed."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(seed)
        return np.asarray(self.ppf(rng.random(n)), dtype=float)


# convenience constructors


def uniform(lower: float = 0.0, upper: float = 1.0) -> Distribution1D:
    return Distribution1D.make("uniform", lower=lower, upper=upper)


def normal(loc: float = 0.0, scale: float = 1.0) -> Distribution1D:
    return Distribution1D.make("normal", loc=loc, scale=scale)


def triangular(lower: float, mode: float, upper: float) -> Distribution1D:
    return Distribution1D.make("triangular", lower=lower, mode=mode, upper=upper)


def gumbel(loc: float = 0.0, scale: float = 1.0) -> Distribution1D:
    return Distribution1D.make("gumbel", loc=loc, scale=scale)


def laplace(loc: float = 0.0, scale: float = 1.0) -> Distribution1D:
    return Distribution1D.make("laplace", loc=loc, scale=scale)


def cauchy(loc: float = 0.0, scale: float = 1.0) -> Distribution1D:
    return Distribution1D.make("cauchy", loc=loc, scale=scale)


def beta(alpha: float, beta: float, lower: float = 0.0, upper: float = 1.0) -> Distribution1D:
    return Distribution1D.make("beta", alpha=alpha, beta=beta, lower=lower, upper=upper)


def gamma(shape: float, scale: float = 1.0) -> Distribution1D:
    return Distribution1D.make("gamma", shape=shape, scale=scale)
