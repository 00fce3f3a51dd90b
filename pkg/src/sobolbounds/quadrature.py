"""One-dimensional Gauss rules for input laws and their tensor products."""

from __future__ import annotations

import itertools
import math

import numpy as np
from numpy.polynomial import hermite_e, legendre

from .distributions import Distribution1D
from .errors import DimensionTooLarge

MAX_TENSOR_DIM = 4
MAX_TENSOR_POINTS = 4_000_000


def gauss_rule(dist: Distribution1D, order: int = 16, breakpoints=()) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and probability weights (summing to 1) integrating against ``dist``.

    An untruncated normal gets Gauss-Hermite (exact for polynomials of degree
    < 2 * order).  Bounded supports get composite Gauss-Legendre on the pieces
    cut by the law's own kinks and ``breakpoints``, weighted by the density.
    Other unbounded laws use Gauss-Legendre in probability space.
    """
    if dist.family == "normal" and dist.truncation is None:
        z, w = hermite_e.hermegauss(order)
        return dist.param("loc") + dist.param("scale") * z, w / w.sum()
    a, b = dist.support
    cuts = sorted({*dist.breakpoints, *(c for c in breakpoints if a < c < b)})
    gz, gw = legendre.leggauss(order)
    if dist.is_bounded:
        knots = [a, *cuts, b]
        xs, ws = [], []
        for lo, hi in zip(knots[:-1], knots[1:]):
            half = 0.5 * (hi - lo)
            x = 0.5 * (lo + hi) + half * gz
            xs.append(x)
            ws.append(half * gw * dist.pdf(x))
        x, w = np.concatenate(xs), np.concatenate(ws)
        return x, w / w.sum()
    knots = [0.0, *(float(dist.cdf(c)) for c in cuts), 1.0]
    xs, ws = [], []
    for lo, hi in zip(knots[:-1], knots[1:]):
        half = 0.5 * (hi - lo)
        u = 0.5 * (lo + hi) + half * gz
        xs.append(np.asarray(dist.ppf(u)))
        ws.append(half * gw)
    x, w = np.concatenate(xs), np.concatenate(ws)
    return x, w / w.sum()


def tensor_rule(dists, order: int = 16, breakpoints=None):
    """Tensor-product design ``(N, d)`` and weights ``(N,)`` plus the 1-D rules."""
    d = len(dists)
    if d > MAX_TENSOR_DIM:
        raise DimensionTooLarge(f"tensor quadrature limited to d <= {MAX_TENSOR_DIM}, got {d}")
    breakpoints = breakpoints or [()] * d
    rules = [gauss_rule(dist, order, bp) for dist, bp in zip(dists, breakpoints)]
    total = math.prod(len(r[0]) for r in rules)
    if total > MAX_TENSOR_POINTS:
        raise DimensionTooLarge(f"tensor grid of {total} points exceeds {MAX_TENSOR_POINTS}; lower the order")
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    design = np.column_stack([g.ravel() for g in grids])
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    weights = np.prod([g.ravel() for g in wgrids], axis=0)
    return design, weights, rules


def subsets(d: int):
    """All subsets of ``range(d)`` as sorted tuples, by increasing size."""
    for size in range(d + 1):
        yield from itertools.combinations(range(d), size)
