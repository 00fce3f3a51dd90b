"""Eigen-decomposition of the one-dimensional Poincaré operator.

For an input density ``p = exp(-V)`` on a bounded interval and an optional
positive weight ``w``, the operator ``L h = w h'' + (w' - w V') h'`` with
Neumann conditions has a discrete spectrum ``0 = lam_0 < lam_1 < ...`` and
``L^2(p)``-orthonormal eigenfunctions.  :func:`solve_spectrum` discretizes
the weak form

    int h' e' w p = lam * int h e p

with continuous piecewise-linear elements.  The mass matrix is lumped, so
the generalized pencil reduces to a symmetric tridiagonal matrix through the
diagonal Cholesky factor.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from numpy.polynomial import hermite_e
from scipy.interpolate import CubicSpline

from .distributions import Distribution1D
from .errors import (
    DegenerateSpectrum,
    NoClosedForm,
    OutOfRange,
    SingularMass,
    UnboundedSupport,
)
from .tridiagonal import lowest_eigenpairs, ql_eigenvalues

SOURCES = ("NumericalGrid", "ClosedFormFourier", "ClosedFormHermite")
_GAUSS2 = 0.5 / math.sqrt(3.0)
TAIL_QUANTILE = 1e-8


@dataclass(frozen=True)
class Weight:
    """Positive weight of a weighted Poincaré inequality.

    ``kind`` is one of ``identity``, ``x``, ``1-x2`` or ``tabulated``; the
    tabulated form interpolates linearly between ``(nodes, values)``.
    """

    kind: str = "identity"
    nodes: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("identity", "x", "1-x2", "tabulated"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "tabulated":
            if len(self.nodes) < 2 or len(self.nodes) != len(self.values):
                raise ValueError("tabulated weight needs matching nodes and values (>= 2)")
            if any(v <= 0 for v in self.values):
                raise ValueError("tabulated weight must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return np.ones_like(x)
        if self.kind == "x":
            return x
        if self.kind == "1-x2":
            return 1.0 - x**2
        return np.interp(x, self.nodes, self.values)

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity"

    def to_dict(self):
        if self.kind == "tabulated":
            return {"kind": self.kind, "nodes": list(self.nodes), "values": list(self.values)}
        return {"kind": self.kind}

    @classmethod
    def parse(cls, spec) -> "Weight":
        if spec is None:
            return cls()
        if isinstance(spec, Weight):
            return spec
        if isinstance(spec, str):
            return cls(spec)
        spec = dict(spec)
        return cls(spec["kind"], tuple(spec.get("nodes", ())), tuple(spec.get("values", ())))


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Lowest ``K + 1`` eigenpairs of the Poincaré operator of one input law.

    ``eigenfunctions`` and ``derivatives`` are ``(K + 1, M + 1)`` tables on
    ``grid``.  Closed-form bases evaluate their formulas directly; numerical
    ones interpolate the table with a cubic spline.
    """

    distribution: Distribution1D
    eigenvalues: np.ndarray
    grid: np.ndarray
    eigenfunctions: np.ndarray
    derivatives: np.ndarray
    source: str = "NumericalGrid"
    weight: Weight = field(default_factory=Weight)

    @property
    def K(self) -> int:
        return len(self.eigenvalues) - 1

    @property
    def support(self) -> tuple[float, float]:
        return self.distribution.support

    @cached_property
    def _splines(self):
        if self.weight.is_identity:
            bc = ((1, 0.0), (1, 0.0))
        else:
            bc = "not-a-knot"
        return [None] + [
            CubicSpline(self.grid, self.eigenfunctions[k], bc_type=bc) for k in range(1, self.K + 1)
        ]

    def __call__(self, k: int, x, derivative: bool = False):
        return eval_basis(self, k, x, derivative)

    def with_signs(self, signs) -> "SpectralBasis":
        """Copy with eigenfunction ``k`` multiplied by ``signs[k]`` (each +-1)."""
        s = np.asarray(signs, dtype=float).reshape(-1, 1)
        if s.shape[0] != self.K + 1 or not np.all(np.abs(s) == 1.0):
            raise ValueError("signs must be K + 1 values in {-1, +1}")
        if self.source != "NumericalGrid":
            raise ValueError("sign flips apply to tabulated (numerical) bases")
        return SpectralBasis(
            self.distribution,
            self.eigenvalues,
            self.grid,
            self.eigenfunctions * s,
            self.derivatives * s,
            self.source,
            self.weight,
        )

    def to_dict(self) -> dict:
        d = self.distribution.to_dict()
        return {
            "family": d.pop("family"),
            "params": d,
            "weight": self.weight.to_dict(),
            "source": self.source,
            "grid": self.grid.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenfunctions": self.eigenfunctions.tolist(),
            "derivatives": self.derivatives.tolist(),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "SpectralBasis":
        dist = Distribution1D.from_dict({"family": record["family"], **record["params"]})
        return cls(
            dist,
            np.asarray(record["eigenvalues"], dtype=float),
            np.asarray(record["grid"], dtype=float),
            np.asarray(record["eigenfunctions"], dtype=float),
            np.asarray(record["derivatives"], dtype=float),
            record.get("source", "NumericalGrid"),
            Weight.parse(record.get("weight")),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "SpectralBasis":
        return cls.from_dict(json.loads(Path(path).read_text()))


def eval_basis(b: SpectralBasis, k: int, x, derivative: bool = False):
    """Value (or derivative) of eigenfunction ``k`` at ``x``."""
    if not 0 <= k <= b.K:
        raise OutOfRange(f"eigenfunction index {k} outside 0..{b.K}")
    x = np.asarray(x, dtype=float)
    a, c = b.support
    if np.any((x < a) | (x > c)):
        raise OutOfRange(f"points outside the support {b.support}")
    if k == 0:
        out = np.zeros_like(x) if derivative else np.ones_like(x)
    elif b.source == "ClosedFormFourier":
        lo, hi = b.support
        freq = math.pi * k / (hi - lo)
        if derivative:
            out = -math.sqrt(2.0) * freq * np.sin(freq * (x - lo))
        else:
            out = math.sqrt(2.0) * np.cos(freq * (x - lo))
    elif b.source == "ClosedFormHermite":
        loc, scale = b.distribution.param("loc"), b.distribution.param("scale")
        z = (x - loc) / scale
        if derivative:
            coef = np.zeros(k)
            coef[-1] = 1.0
            out = math.sqrt(k) * hermite_e.hermeval(z, coef) / math.sqrt(math.factorial(k - 1)) / scale
        else:
            coef = np.zeros(k + 1)
            coef[-1] = 1.0
            out = hermite_e.hermeval(z, coef) / math.sqrt(math.factorial(k))
    else:
        # auto-truncated tails: hold the end value outside the solved grid
        xc = np.clip(x, b.grid[0], b.grid[-1])
        spline = b._splines[k]
        out = spline(xc, 1) if derivative else spline(xc)
        if derivative:
            out = np.where((x < b.grid[0]) | (x > b.grid[-1]), 0.0, out)
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def poincare_constant(b: SpectralBasis) -> float:
    """Inverse spectral gap ``1 / lam_1``."""
    if b.K < 1 or not b.eigenvalues[1] > 0:
        raise DegenerateSpectrum("the basis has no positive first eigenvalue")
    return 1.0 / float(b.eigenvalues[1])


def make_grid(a: float, b: float, M: int, kind: str = "uniform") -> np.ndarray:
    if kind == "uniform":
        return np.linspace(a, b, M + 1)
    if kind == "chebyshev":
        t = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.pi * np.arange(M + 1) / M)
        t[0], t[-1] = a, b
        return t
    raise ValueError(f"unknown grid kind {kind!r}")


def assemble(dist: Distribution1D, grid: np.ndarray, weight: Weight):
    """Stiffness (diagonal, off-diagonal) and lumped mass of the P1 discretization.

    Cell integrals use two-point Gauss rules; the mass is normalized to total 1.
    """
    h = np.diff(grid)
    if np.any(h <= 0):
        raise ValueError("grid must be strictly increasing")
    mid = 0.5 * (grid[:-1] + grid[1:])
    g1, g2 = mid - _GAUSS2 * h, mid + _GAUSS2 * h
    p1, p2 = dist.pdf(g1), dist.pdf(g2)
    wp = weight(g1) * p1 + weight(g2) * p2
    if np.any(wp < 0):
        raise ValueError("weight must be non-negative on the support")
    s = wp / (2.0 * h)
    n = grid.size
    kd = np.zeros(n)
    kd[:-1] += s
    kd[1:] += s
    ko = -s
    # basis values at the Gauss points: left hat = (1 + 1/sqrt3)/2 at g1
    hi_w, lo_w = 0.5 + _GAUSS2, 0.5 - _GAUSS2
    left = 0.5 * h * (hi_w * p1 + lo_w * p2)
    right = 0.5 * h * (lo_w * p1 + hi_w * p2)
    mass = np.zeros(n)
    mass[:-1] += left
    mass[1:] += right
    total = mass.sum()
    if not total > 0 or np.any(mass <= total * 1e-300) or np.any(p1 + p2 <= 0):
        raise SingularMass(f"density numerically zero on part of the grid for {dist!r}")
    return kd, ko, mass / total


def solve_spectrum(
    d: Distribution1D,
    K: int,
    M: int = 2000,
    weight=None,
    grid: str = "auto",
    auto_truncate: bool = True,
    solver: str = "lapack",
) -> SpectralBasis:
    """Lowest ``K + 1`` eigenpairs of the (weighted) Poincaré operator of ``d``.

    Unbounded laws are truncated at the ``1e-8`` / ``1 - 1e-8`` quantiles when
    ``auto_truncate`` is set (the result is then the spectrum of the truncated
    problem); otherwise :class:`UnboundedSupport` is raised.  ``grid="auto"``
    is equispaced; ``"chebyshev"`` clusters nodes near the ends.  ``solver="ql"`` finds eigenvalues with the in-house QL sweep
    and vectors by inverse iteration; it is meant for small ``M``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if M < 10 * K:
        raise ValueError(f"grid size M={M} must be >= 10*K={10 * K}")
    weight = Weight.parse(weight)
    if not d.is_bounded:
        if not auto_truncate:
            raise UnboundedSupport(f"{d!r} has unbounded support; truncate it first")
        d = d.quantile_truncated(TAIL_QUANTILE)
    if grid == "auto":
        grid = "uniform"
    a, b = d.support
    t = make_grid(a, b, M, grid)
    kd, ko, mass = assemble(d, t, weight)

    r = 1.0 / np.sqrt(mass)
    diag = kd * r * r
    off = ko * r[:-1] * r[1:]
    if solver == "lapack":
        vals, vecs = lowest_eigenpairs(diag, off, K + 1)
    elif solver == "ql":
        vals = ql_eigenvalues(diag, off)[: K + 1]
        vecs = np.column_stack([_inverse_iteration(diag, off, lam) for lam in vals])
    else:
        raise ValueError(f"unknown solver {solver!r}")

    funcs = (vecs * r[:, None]).T
    funcs[0] = 1.0
    vals = np.array(vals, dtype=float)
    vals[0] = 0.0
    for k in range(1, K + 1):
        nz = np.flatnonzero(np.abs(funcs[k]) > 1e-12 * np.abs(funcs[k]).max())
        if funcs[k][nz[0]] < 0:
            funcs[k] = -funcs[k]
    if np.any(np.diff(vals) <= 0):
        raise DegenerateSpectrum(f"eigenvalues not simple: {vals}")

    basis = SpectralBasis(d, vals, t, funcs, np.zeros_like(funcs), "NumericalGrid", weight)
    derivs = np.zeros_like(funcs)
    for k in range(1, K + 1):
        derivs[k] = basis._splines[k](t, 1)
    object.__setattr__(basis, "derivatives", derivs)
    return basis


def _inverse_iteration(diag, off, lam, iters: int = 3) -> np.ndarray:
    from scipy.linalg import solve_banded

    n = diag.size
    shift = lam - 1e-10 * max(1.0, abs(lam))
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag - shift
    ab[2, :-1] = off
    v = np.ones(n) / math.sqrt(n)
    v[::2] += 1e-3
    for _ in range(iters):
        v = solve_banded((1, 1), ab, v)
        v /= np.linalg.norm(v)
    return v


def closed_form_spectrum(d: Distribution1D, K: int, M: int = 200) -> SpectralBasis:
    """Analytic basis: cosines for a uniform law, normalized Hermite polynomials for a normal one."""
    if d.truncation is not None or d.family not in ("uniform", "normal"):
        raise NoClosedForm(f"no closed-form eigenbasis for {d!r}")
    if d.family == "uniform":
        lo, hi = d.support
        vals = (np.pi * np.arange(K + 1) / (hi - lo)) ** 2
        grid = np.linspace(lo, hi, M + 1)
        source = "ClosedFormFourier"
    else:
        loc, scale = d.param("loc"), d.param("scale")
        vals = np.arange(K + 1) / scale**2
        grid = np.linspace(loc - 8 * scale, loc + 8 * scale, M + 1)
        source = "ClosedFormHermite"
    basis = SpectralBasis(d, vals.astype(float), grid, np.zeros((K + 1, M + 1)),
                          np.zeros((K + 1, M + 1)), source)
    funcs = np.array([eval_basis(basis, k, grid) for k in range(K + 1)])
    derivs = np.array([eval_basis(basis, k, grid, derivative=True) for k in range(K + 1)])
    object.__setattr__(basis, "eigenfunctions", funcs)
    object.__setattr__(basis, "derivatives", derivs)
    return basis


def basis_for(d: Distribution1D, K: int, M: int = 2000, weight=None, prefer_closed_form: bool = True,
              cache_dir=None) -> SpectralBasis:
    """Closed form when available (and unweighted), otherwise a numerical solve.

    With ``cache_dir`` numerical bases are stored as JSON keyed by a hash of
    (law, truncation, K, M, weight).
    """
    weight = Weight.parse(weight)
    if prefer_closed_form and weight.is_identity:
        try:
            return closed_form_spectrum(d, K)
        except NoClosedForm:
            pass
    if cache_dir is None:
        return solve_spectrum(d, K, M, weight)
    key = json.dumps({"dist": d.to_dict(), "K": K, "M": M, "weight": weight.to_dict()}, sort_keys=True)
    path = Path(cache_dir) / f"spectrum-{hashlib.sha256(key.encode()).hexdigest()[:16]}.json"
    if path.exists():
        return SpectralBasis.load(path)
    basis = solve_spectrum(d, K, M, weight)
    path.parent.mkdir(parents=True, exist_ok=True)
    basis.save(path)
    return basis
