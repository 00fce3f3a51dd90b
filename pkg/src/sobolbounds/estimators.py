"""Lower and upper bounds of Sobol' indices from an evaluation sample.

Every bound here is a truncated Parseval sum: squared inner products of the
model with orthonormal functions that all involve the variable of interest.
Inner products are weighted means over an :class:`EvaluationSample`, so the
same code gives Monte Carlo estimates and (with a quadrature design) exact
values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .distributions import Distribution1D
from .errors import InactiveIndex, MissingGradients, MixedPattern, NotUniform01, UnsupportedForBounds
from .sample import EvaluationSample
from .spectral import SpectralBasis, eval_basis, poincare_constant

MultiIndex = tuple

KINDS = ("PDO", "PDOder", "Fisher", "Monomial", "DGSMUpper", "PickFreezeTotal", "OracleExact", "GC")
TARGETS = ("D_i", "D_i_tot", "S_i", "S_i_tot")


@dataclass(frozen=True)
class BoundEstimate:
    """A bound (or reference value) of a partial variance for one input.

    ``terms`` holds the per-multi-index squared-coefficient contributions of
    additive bounds; ``value`` is their sum.  ``variance`` is the output
    variance used by :meth:`normalized`.
    """

    value: float
    kind: str
    target: str
    variable: int | None = None
    terms: Mapping = field(default_factory=dict)
    ci: tuple | None = None
    n_used: int = 0
    seed: int | None = None
    variance: float | None = None

    @property
    def main_effect(self) -> float:
        """Part of the sum carried by functions of the variable alone (a bound of ``D_i``)."""
        total = 0.0
        for idx, v in self.terms.items():
            if isinstance(idx, tuple) and sum(1 for e in idx if e) == 1:
                total += v
        return total

    def normalized(self, variance: float | None = None) -> "BoundEstimate":
        """The same bound divided by the output variance (``D`` -> ``S``)."""
        D = self.variance if variance is None else variance
        if D is None or not D > 0:
            raise ValueError("a positive output variance is needed to normalize")
        ci = None
        if self.ci is not None:
            ci = (self.ci[0] / D, self.ci[1] / D, self.ci[2])
        return replace(
            self,
            value=self.value / D,
            target={"D_i": "S_i", "D_i_tot": "S_i_tot"}.get(self.target, self.target),
            terms={k: v / D for k, v in self.terms.items()},
            ci=ci,
            variance=D,
        )

    def with_ci(self, lo: float, hi: float, level: float) -> "BoundEstimate":
        return replace(self, ci=(float(lo), float(hi), float(level)))

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "target": self.target,
            "variable": self.variable,
            "value": self.value,
            "terms": {_key(k): v for k, v in self.terms.items()},
            "ci": None if self.ci is None else {"lo": self.ci[0], "hi": self.ci[1], "level": self.ci[2]},
            "n_used": self.n_used,
            "seed": self.seed,
        }
        if self.variance is not None:
            out["variance"] = self.variance
        return out


def _key(idx) -> str:
    return ",".join(str(int(e)) for e in idx) if isinstance(idx, tuple) else str(idx)


def _estimate(value, kind, target, variable, terms, s: EvaluationSample) -> BoundEstimate:
    return BoundEstimate(
        value=float(value),
        kind=kind,
        target=target,
        variable=variable,
        terms=dict(terms),
        n_used=s.n,
        seed=s.seed,
        variance=s.variance() if s.n > 1 else None,
    )


def active(idx: MultiIndex) -> frozenset:
    return frozenset(j for j, e in enumerate(idx) if e)


def first_eigen_set(d: int, i: int, eigen_index: int = 1) -> list[MultiIndex]:
    """The single-variable index at variable ``i`` and its pairings with every other input.

    ``eigen_index`` selects which eigenfunction (the same in every input) is used.
    """
    k = eigen_index
    out = []
    main = [0] * d
    main[i] = k
    out.append(tuple(main))
    for j in range(d):
        if j == i:
            continue
        idx = [0] * d
        idx[i] = k
        idx[j] = k
        out.append(tuple(idx))
    return out


def tensor_set(d: int, i: int, order: int) -> list[MultiIndex]:
    """Every multi-index with ``1 <= l_i`` and all entries ``<= order``."""
    out = []
    for idx in itertools.product(range(order + 1), repeat=d):
        if idx[i] >= 1:
            out.append(idx)
    return out


def _require_gradients(s: EvaluationSample):
    if s.gradients is None:
        raise MissingGradients("this estimator needs model gradients in the sample")


class _BasisCache:
    """Memoizes ``e_{j,k}(x_j)`` columns over one sample."""

    def __init__(self, s: EvaluationSample, bases: Sequence[SpectralBasis | None]):
        self.s = s
        self.bases = bases
        self._vals = {}

    def value(self, j: int, k: int) -> np.ndarray | float:
        if k == 0:
            return 1.0
        key = (j, k, False)
        if key not in self._vals:
            self._vals[key] = eval_basis(self._basis(j), k, self.s.design[:, j])
        return self._vals[key]

    def deriv(self, j: int, k: int) -> np.ndarray:
        key = (j, k, True)
        if key not in self._vals:
            b = self._basis(j)
            val = eval_basis(b, k, self.s.design[:, j], derivative=True)
            if not b.weight.is_identity:
                val = val * b.weight(self.s.design[:, j])
            self._vals[key] = val
        return self._vals[key]

    def _basis(self, j: int) -> SpectralBasis:
        b = self.bases[j] if j < len(self.bases) else None
        if b is None:
            raise ValueError(f"no spectral basis supplied for input {j}")
        return b


def gc_coefficients(
    s: EvaluationSample,
    bases: Sequence[SpectralBasis | None],
    indices: Iterable[MultiIndex],
    use_derivatives: bool = False,
    i: int | None = None,
) -> dict:
    """Generalized-chaos coefficients ``<h, e_l>`` for each multi-index.

    With ``use_derivatives`` the coefficient is computed from the partial
    derivative in ``x_i`` as ``<dh/dx_i, e'_{i,l_i} prod_{j != i} e_{j,l_j}> / lam_{i,l_i}``
    (weighted by ``w`` for weighted bases).
    """
    indices = [tuple(int(e) for e in idx) for idx in indices]
    if use_derivatives:
        _require_gradients(s)
        if i is None:
            raise ValueError("use_derivatives needs the differentiation variable i")
    cache = _BasisCache(s, bases)
    out = {}
    for idx in indices:
        if len(idx) != s.d:
            raise ValueError(f"multi-index {idx} has wrong length for d={s.d}")
        if use_derivatives:
            if idx[i] < 1:
                raise InactiveIndex(f"multi-index {idx} does not involve input {i}")
            prod = s.gradients[:, i] * cache.deriv(i, idx[i])
            for j, k in enumerate(idx):
                if j != i and k:
                    prod = prod * cache.value(j, k)
            lam = float(cache._basis(i).eigenvalues[idx[i]])
            out[idx] = s.mean(prod) / lam
        else:
            prod = s.outputs
            for j, k in enumerate(idx):
                if k:
                    prod = prod * cache.value(j, k)
            out[idx] = s.mean(prod)
    return out


def gc_lower_bound(
    coeffs: Mapping[MultiIndex, float],
    D: float | None = None,
    kind: str = "GC",
    n_used: int = 0,
    seed: int | None = None,
) -> BoundEstimate:
    """Sum of squared coefficients.

    If all multi-indices share the same active set ``I`` the sum bounds ``D_I``;
    if they only share some variable ``i`` it bounds ``D_i^tot``.  With ``D`` the
    returned estimate can be normalized to a Sobol' index bound.
    """
    if not coeffs:
        return BoundEstimate(0.0, kind, "D_i_tot", None, {}, n_used=n_used, seed=seed, variance=D)
    sets = [active(idx) for idx in coeffs]
    if any(not a for a in sets):
        raise InactiveIndex("the constant function is not part of any ANOVA term")
    common = frozenset.intersection(*sets)
    if not common:
        raise MixedPattern("multi-indices do not share an active variable")
    if all(a == sets[0] for a in sets) and len(sets[0]) == 1:
        target = "D_i"
    else:
        target = "D_i_tot"
    variable = min(common) if len(common) == 1 else None
    terms = {idx: float(c) ** 2 for idx, c in coeffs.items()}
    return BoundEstimate(
        float(sum(terms.values())), kind, target, variable, terms, n_used=n_used, seed=seed, variance=D
    )


def pdo_lower_bound(
    s: EvaluationSample, bases: Sequence[SpectralBasis], i: int, eigen_index: int = 1
) -> BoundEstimate:
    """Derivative-free bound of ``D_i^tot`` from one eigenfunction per input.

    Uses ``<h, e_{i,k}>^2 + sum_{j != i} <h, e_{i,k} e_{j,k}>^2`` with ``k = eigen_index``.
    """
    idx = first_eigen_set(s.d, i, eigen_index)
    coeffs = gc_coefficients(s, bases, idx)
    est = gc_lower_bound(coeffs, kind="PDO", n_used=s.n, seed=s.seed)
    return replace(est, variable=i, target="D_i_tot", variance=s.variance() if s.n > 1 else None)


def pdo_der_lower_bound(
    s: EvaluationSample, bases: Sequence[SpectralBasis], i: int, eigen_index: int = 1
) -> BoundEstimate:
    """Derivative-based twin of :func:`pdo_lower_bound` (same value under exact integration)."""
    _require_gradients(s)
    idx = first_eigen_set(s.d, i, eigen_index)
    coeffs = gc_coefficients(s, bases, idx, use_derivatives=True, i=i)
    est = gc_lower_bound(coeffs, kind="PDOder", n_used=s.n, seed=s.seed)
    return replace(est, variable=i, target="D_i_tot", variance=s.variance() if s.n > 1 else None)


def _face_term(s: EvaluationSample, dist: Distribution1D, i: int):
    """``(h(b, x_-i) - h) p(b) - (h(a, x_-i) - h) p(a)``, or None if a needed face is missing."""
    total = 0.0
    for end, sign in zip(dist.support, (-1.0, 1.0)):
        if not np.isfinite(end):
            continue
        p_end = float(dist.pdf(end))
        if p_end == 0.0:
            continue
        face = s.faces.get((i, float(end)))
        if face is None:
            return None
        total = total + sign * (face - s.outputs) * p_end
    return total


def fisher_lower_bound(
    s: EvaluationSample, dists: Sequence[Distribution1D], i: int, form: str = "auto"
) -> BoundEstimate:
    """Weight-free bound ``c_i^2 / I_i + sum_j c_ij^2 / (I_i I_j)`` built on translation scores.

    ``form="derivative"`` integrates by parts in ``x_i`` (needs gradients, and
    face outputs when the density of ``x_i`` is non-zero at a finite endpoint);
    ``form="function"`` uses ``c = <h, Z_i>`` and ``c_ij = <h, Z_i Z_j>``.
    ``auto`` picks the derivative form whenever it is available.
    """
    info, scores = {}, {}
    for j, dist in enumerate(dists):
        try:
            info[j] = dist.fisher_information()
        except UnsupportedForBounds:
            if j == i:
                raise
            # pair terms with such inputs are dropped; the sum stays a lower bound
            continue
        scores[j] = dist.score(np.clip(s.design[:, j], *_open(dist)))

    deriv_part = None
    if form in ("auto", "derivative") and s.gradients is not None:
        face = _face_term(s, dists[i], i)
        if face is not None:
            deriv_part = face - s.gradients[:, i]
    if form == "derivative" and deriv_part is None:
        raise MissingGradients("derivative form needs gradients (and boundary face outputs)")

    base = deriv_part if deriv_part is not None else s.outputs * scores[i]
    terms = {}
    main = [0] * s.d
    main[i] = 1
    c_i = s.mean(base)
    terms[tuple(main)] = c_i**2 / info[i]
    for j in range(s.d):
        if j == i or j not in info:
            continue
        idx = list(main)
        idx[j] = 1
        c_ij = s.mean(base * scores[j])
        terms[tuple(idx)] = c_ij**2 / (info[i] * info[j])
    return _estimate(sum(terms.values()), "Fisher", "D_i_tot", i, terms, s)


def _open(dist: Distribution1D):
    a, b = dist.support
    return np.nextafter(a, b), np.nextafter(b, a)


def monomial_lower_bound(
    s: EvaluationSample, dists: Sequence[Distribution1D], i: int, m: int = 1, sharp: bool = True
) -> BoundEstimate:
    """Bound of ``D_i`` from the normalized monomial ``(x_i^m - 1/(m+1)) / s_m`` on U[0, 1].

    The derivative form ``(2m+1)/m^2 (E[h(1, x_-i) - h(x)] - E[dh/dx_i x_i^(m+1)])^2``
    is used when gradients and the ``x_i = 1`` face are in the sample, the
    direct projection otherwise.  ``sharp=False`` applies the older constant
    ``(2m+1)/(m+1)^2`` instead, for comparison.
    """
    dist = dists[i]
    if dist.family != "uniform" or dist.support != (0.0, 1.0):
        raise NotUniform01(f"monomial bound needs a U[0, 1] input, got {dist!r}")
    if m < 1:
        raise ValueError("monomial degree must be >= 1")
    const = (2 * m + 1) / m**2 if sharp else (2 * m + 1) / (m + 1) ** 2
    face = s.faces.get((i, 1.0))
    x = s.design[:, i]
    if s.gradients is not None and face is not None:
        inner = s.mean(face - s.outputs - s.gradients[:, i] * x ** (m + 1))
    else:
        # <h, x^m - 1/(m+1)> = (E[h(1,.)] - E[h] - w) / (m+1)
        inner = (m + 1) * s.mean(s.outputs * (x**m - 1.0 / (m + 1)))
    idx = [0] * s.d
    idx[i] = m
    value = const * inner**2
    return _estimate(value, "Monomial", "D_i", i, {tuple(idx): value}, s)


def dgsm(s: EvaluationSample, i: int, weight=None) -> float:
    """Mean squared partial derivative ``E[(dh/dx_i)^2 w(x_i)]``."""
    _require_gradients(s)
    g2 = s.gradients[:, i] ** 2
    if weight is not None:
        g2 = g2 * weight(s.design[:, i])
    return s.mean(g2)


def dgsm_upper_bound(nu: float, C_P: float, variable: int | None = None, s: EvaluationSample | None = None) -> BoundEstimate:
    """Poincaré upper bound ``C_P * nu_i`` of ``D_i^tot``."""
    value = C_P * nu
    return BoundEstimate(
        float(value),
        "DGSMUpper",
        "D_i_tot",
        variable,
        {},
        n_used=0 if s is None else s.n,
        seed=None if s is None else s.seed,
        variance=None if s is None or s.n < 2 else s.variance(),
    )


def dgsm_upper(s: EvaluationSample, basis: SpectralBasis, i: int) -> BoundEstimate:
    """``C_P(mu_i) * nu_i`` with ``nu_i`` weighted like the basis."""
    w = None if basis.weight.is_identity else basis.weight
    return dgsm_upper_bound(dgsm(s, i, w), poincare_constant(basis), i, s)


def pick_freeze_total(model, dists, i: int, n: int, seed: int) -> BoundEstimate:
    """Jansen estimate ``(1/2n) sum (h(x) - h(x^(i)))^2`` of ``D_i^tot``.

    ``x^(i)`` is ``x`` with coordinate ``i`` redrawn independently.
    """
    if n < 2:
        raise ValueError("pick-freeze needs n >= 2")
    children = np.random.SeedSequence(seed).spawn(len(dists) + 1)
    x = np.column_stack(
        [dist.sample(n, np.random.default_rng(c)) for dist, c in zip(dists, children[:-1])]
    )
    xi = x.copy()
    xi[:, i] = dists[i].sample(n, np.random.default_rng(children[-1]))
    y = model.evaluate(x)
    yi = model.evaluate(xi)
    value = 0.5 * np.mean((y - yi) ** 2)
    return BoundEstimate(
        float(value),
        "PickFreezeTotal",
        "D_i_tot",
        i,
        {},
        n_used=n,
        seed=seed,
        variance=float(np.var(y, ddof=1)),
    )


def _replicate_seeds(seed: int, B: int):
    return np.random.SeedSequence(seed).spawn(B)


def bootstrap_replicates(
    statistic: Callable[[EvaluationSample], float], s: EvaluationSample, B: int = 300, seed: int = 0
) -> np.ndarray:
    """Statistic over ``B`` row resamples (with replacement) of ``s``.

    Replicate ``b`` draws its rows from its own child seed, so the result does
    not depend on evaluation order.
    """
    if B < 100:
        raise ValueError("use at least 100 bootstrap replicates")
    out = np.empty(B)
    for b, child in enumerate(_replicate_seeds(seed, B)):
        rows = np.random.default_rng(child).integers(0, s.n, s.n)
        out[b] = statistic(s.take(rows))
    return out


def bootstrap_ci(
    statistic: Callable[[EvaluationSample], float],
    s: EvaluationSample,
    B: int = 300,
    level: float = 0.9,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval at ``level``."""
    reps = bootstrap_replicates(statistic, s, B, seed)
    alpha = 0.5 * (1.0 - level)
    lo, hi = np.quantile(reps, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def attach_ci(est: BoundEstimate, lo: float, hi: float, level: float) -> BoundEstimate:
    """Attach an interval, widened if needed so that it contains the point estimate."""
    return est.with_ci(min(lo, est.value), max(hi, est.value), level)
