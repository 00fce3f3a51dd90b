"""Exact ANOVA (Sobol'-Hoeffding) variances by tensor Gauss quadrature.

Every conditional expectation ``E[h | X_J]`` is a weighted contraction of the
tensor of model values over the axes outside ``J``; the ANOVA terms follow by
inclusion-exclusion and their variances by one more contraction.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DimensionTooLarge
from .quadrature import MAX_TENSOR_DIM, subsets, tensor_rule


def anova_decomposition(model, dists, quad_order: int = 16) -> dict[tuple, float]:
    """``{I: D_I}`` for every non-empty subset ``I`` (0-based tuples), plus ``(): D``."""
    d = len(dists)
    if d > MAX_TENSOR_DIM:
        raise DimensionTooLarge(f"quadrature ANOVA limited to d <= {MAX_TENSOR_DIM}, got {d}")
    design, _, rules = tensor_rule(dists, quad_order, model.kinks)
    shape = tuple(len(r[0]) for r in rules)
    values = np.asarray(model.evaluate(design)).reshape(shape)
    ws = [r[1] for r in rules]

    cond = {}
    for J in subsets(d):
        t = values
        # contracting from the last axis keeps axis ``ax`` at position ``ax``
        for ax in reversed(range(d)):
            if ax not in J:
                t = np.tensordot(t, ws[ax], axes=([ax], [0]))
        cond[J] = t

    terms = {}
    for I in subsets(d):
        if not I:
            continue
        hI = np.zeros([shape[a] for a in I])
        for k in range(len(I) + 1):
            for J in itertools.combinations(I, k):
                sign = (-1) ** (len(I) - len(J))
                hI = hI + sign * _expand(cond[J], J, I, shape)
        wI = _outer([ws[a] for a in I])
        terms[I] = float(np.sum(wI * hI**2))
    mean = float(cond[()])
    wall = _outer(ws)
    terms[()] = float(np.sum(wall * (values - mean) ** 2))
    return terms


def _expand(t: np.ndarray, J, I, shape) -> np.ndarray:
    """Broadcast a function of ``X_J`` onto the axes of ``I`` (``J`` subset of ``I``)."""
    target = [shape[a] if a in J else 1 for a in I]
    return np.broadcast_to(np.reshape(t, target), [shape[a] for a in I])


def _outer(ws) -> np.ndarray:
    out = np.ones(())
    for w in ws:
        out = np.multiply.outer(out, w)
    return out


def total_variance(terms: dict, I) -> float:
    """``D_I^tot``: sum of ``D_J`` over every ``J`` containing ``I``."""
    I = set(I)
    return float(sum(v for J, v in terms.items() if J and I <= set(J)))


def anova_oracle(model, dists, I, quad_order: int = 16, total: bool = True) -> float:
    """Exact ``D_I^tot`` (or ``D_I`` with ``total=False``) by quadrature; ``I`` is 0-based."""
    I = tuple(sorted({I} if isinstance(I, int) else set(I)))
    terms = anova_decomposition(model, dists, quad_order)
    return total_variance(terms, I) if total else terms[I]
