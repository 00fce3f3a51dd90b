"""Symmetric tridiagonal eigen-solvers.

``lowest_eigenpairs`` is what the spectral solver uses (LAPACK bisection plus
inverse iteration through scipy).  ``ql_eigenvalues`` is a plain implicit-shift
QL sweep kept as an independent check of the LAPACK path; it is O(n^2) in pure
Python, so keep ``n`` in the hundreds.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg


def lowest_eigenpairs(diag: np.ndarray, off: np.ndarray, count: int):
    """The ``count`` smallest eigenvalues (ascending) and unit eigenvectors as columns."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    if count > diag.size:
        raise ValueError(f"requested {count} eigenpairs of a {diag.size}x{diag.size} matrix")
    vals, vecs = linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, count - 1), lapack_driver="stemr"
    )
    return vals, vecs


def ql_eigenvalues(diag, off, max_iter: int = 60) -> np.ndarray:
    """All eigenvalues of the symmetric tridiagonal matrix, sorted ascending.

    Implicit QL with Wilkinson shifts and Givens rotations.
    """
    d = [float(v) for v in diag]
    n = len(d)
    e = [float(v) for v in off] + [0.0]
    if len(e) != n:
        raise ValueError("off-diagonal must have length len(diag) - 1")
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 1e-15 * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise RuntimeError("QL iteration did not converge")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(np.array(d))
