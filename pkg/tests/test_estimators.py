from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from sobolbounds.distributions import gumbel, normal, triangular, uniform
from sobolbounds.errors import InactiveIndex, MissingGradients, MixedPattern, NotUniform01, UnsupportedForBounds
from sobolbounds.estimators import (
    BoundEstimate,
    attach_ci,
    bootstrap_ci,
    bootstrap_replicates,
    dgsm,
    dgsm_upper,
    first_eigen_set,
    fisher_lower_bound,
    gc_coefficients,
    gc_lower_bound,
    monomial_lower_bound,
    pdo_der_lower_bound,
    pdo_lower_bound,
    pick_freeze_total,
    tensor_set,
)
from sobolbounds.oracle import anova_decomposition, total_variance
from sobolbounds.sample import EvaluationSample, boundary_faces, center, draw_sample, quadrature_sample
from sobolbounds.spectral import basis_for
from sobolbounds.testfunctions import linear_interaction, polynomial

U = uniform(-0.5, 0.5)


def _recenter(s):
    return center(replace(s, centered=False))


def test_index_sets():
    assert first_eigen_set(3, 1, 2) == [(0, 2, 0), (2, 2, 0), (0, 2, 2)]
    assert len(tensor_set(2, 0, 2)) == 6
    assert all(idx[0] >= 1 for idx in tensor_set(3, 0, 1))


def test_pdo_and_pdo_der_agree_under_quadrature():
    model = linear_interaction(2.0)
    dists = [U, U]
    bases = [basis_for(d, 2) for d in dists]
    s = center(quadrature_sample(model, dists))
    a = pdo_lower_bound(s, bases, 0)
    b = pdo_der_lower_bound(s, bases, 0)
    assert a.value == pytest.approx(b.value, abs=1e-13)
    assert a.main_effect == pytest.approx(8 / math.pi**4, abs=1e-12)
    assert b.target == "D_i_tot" and b.kind == "PDOder"


def test_pdo_der_on_numerical_basis_matches_closed_form():
    model = linear_interaction(1.0)
    dists = [triangular(-1, 0, 1), U]
    s = center(quadrature_sample(model, dists))
    num = [basis_for(d, 2, 2000) for d in dists]
    cf = [basis_for(dists[0], 2, 2000), basis_for(U, 2, prefer_closed_form=False)]
    assert pdo_der_lower_bound(s, num, 0).value == pytest.approx(pdo_der_lower_bound(s, cf, 0).value, rel=1e-5)


def test_monte_carlo_converges_to_quadrature_value():
    model = linear_interaction(1.0)
    dists = [U, U]
    bases = [basis_for(d, 2) for d in dists]
    s = center(draw_sample(model, dists, 200_000, 4))
    exact = 8 / math.pi**4 + 64 / math.pi**8
    assert pdo_der_lower_bound(s, bases, 0).value == pytest.approx(exact, rel=0.02)
    assert pdo_lower_bound(s, bases, 0).value == pytest.approx(exact, rel=0.03)


def test_gc_lower_bound_targets_and_errors():
    coeffs = {(1, 0): 0.5, (2, 0): 0.1}
    est = gc_lower_bound(coeffs, D=1.0)
    assert est.target == "D_i" and est.variable == 0
    assert est.value == pytest.approx(0.26)
    assert est.normalized().target == "S_i"
    with pytest.raises(MixedPattern):
        gc_lower_bound({(1, 0): 0.1, (0, 1): 0.2})
    with pytest.raises(InactiveIndex):
        gc_lower_bound({(0, 0): 1.0})


def test_derivative_estimators_need_gradients():
    s = EvaluationSample(np.zeros((5, 2)), np.arange(5.0))
    bases = [basis_for(U, 2)] * 2
    with pytest.raises(MissingGradients):
        pdo_der_lower_bound(s, bases, 0)
    with pytest.raises(MissingGradients):
        dgsm(s, 0)
    with pytest.raises(MissingGradients):
        gc_coefficients(s, bases, [(1, 0)], use_derivatives=True, i=0)


def test_fisher_equality_for_bilinear_normal_model():
    model = polynomial({(1, 0): 1.0, (1, 1): 1.0}, 2)
    dists = [normal(), normal()]
    s = center(quadrature_sample(model, dists))
    est = fisher_lower_bound(s, dists, 0)
    assert est.value == pytest.approx(2.0, abs=1e-10)
    assert fisher_lower_bound(s, dists, 0, form="function").value == pytest.approx(2.0, abs=1e-10)


def test_fisher_forms_agree_with_boundary_terms():
    # truncation leaves a non-zero density at the ends, so the derivative form needs faces
    dists = [normal(0.2, 1.0).truncate(-1.0, 1.5), gumbel(0, 1).truncate(-1, 3)]
    model = polynomial({(2, 0): 1.0, (1, 1): 0.5, (3, 0): 0.2}, 2)
    s = center(quadrature_sample(model, dists, order=24, faces=boundary_faces(dists)))
    deriv = fisher_lower_bound(s, dists, 0, form="derivative")
    func = fisher_lower_bound(s, dists, 0, form="function")
    assert deriv.value == pytest.approx(func.value, rel=1e-9)
    assert deriv.value <= total_variance(anova_decomposition(model, dists, 24), (0,)) + 1e-12
    bare = center(quadrature_sample(model, dists, order=24))
    with pytest.raises(MissingGradients):
        fisher_lower_bound(bare, dists, 0, form="derivative")


def test_fisher_rejects_uniform_target_but_skips_uniform_partners():
    model = polynomial({(1, 0): 1.0, (1, 1): 1.0}, 2)
    s = center(quadrature_sample(model, [normal(), U]))
    with pytest.raises(UnsupportedForBounds):
        fisher_lower_bound(s, [normal(), U], 1)
    est = fisher_lower_bound(s, [normal(), U], 0)
    assert list(est.terms) == [(1, 0)]
    assert est.value == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_monomial_forms_agree(m):
    dists = [uniform(0, 1), uniform(0, 1)]
    model = polynomial({(2, 0): 1.0, (1, 1): 1.0, (4, 0): -0.5}, 2)
    with_face = center(quadrature_sample(model, dists, faces=[(0, 1.0)]))
    plain = center(quadrature_sample(model, dists, gradients=False))
    a = monomial_lower_bound(with_face, dists, 0, m).value
    b = monomial_lower_bound(plain, dists, 0, m).value
    assert a == pytest.approx(b, rel=1e-10)
    assert a <= anova_decomposition(model, dists)[(0,)] + 1e-12


def test_monomial_requires_unit_uniform():
    s = center(quadrature_sample(linear_interaction(1.0), [U, U]))
    with pytest.raises(NotUniform01):
        monomial_lower_bound(s, [U, U], 0)


def test_dgsm_upper_is_tight_on_first_eigenfunction():
    b = basis_for(U, 2)
    model = polynomial({(1, 0): 1.0}, 2)
    # h = e_1(x1) built through a custom sample
    q = quadrature_sample(model, [U, U])
    y = b(1, q.design[:, 0])
    g = np.column_stack([b(1, q.design[:, 0], True), np.zeros(q.n)])
    s = center(EvaluationSample(q.design, y, g, weights=q.weights))
    up = dgsm_upper(s, b, 0)
    assert up.value == pytest.approx(1.0, rel=1e-12)
    assert up.kind == "DGSMUpper"


def test_pick_freeze_is_consistent():
    model = linear_interaction(1.0)
    est = pick_freeze_total(model, [U, U], 0, 200_000, 1)
    assert est.value == pytest.approx(1 / 12 + 1 / 144, rel=0.02)
    assert est.target == "D_i_tot"
    again = pick_freeze_total(model, [U, U], 0, 200_000, 1)
    assert again.value == est.value


def test_bootstrap_is_deterministic():
    s = center(draw_sample(linear_interaction(1.0), [U, U], 500, 2))
    stat = lambda r: float(np.mean(r.outputs**2))  # noqa: E731
    a = bootstrap_replicates(stat, s, 150, 9)
    b = bootstrap_replicates(stat, s, 150, 9)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        bootstrap_replicates(stat, s, 50, 9)


def test_bootstrap_width_matches_clt():
    x = np.random.default_rng(8).standard_normal(4000)
    s = EvaluationSample(x[:, None], x)
    lo, hi = bootstrap_ci(lambda r: float(np.mean(r.outputs)), s, 1000, 0.9, 3)
    clt = 2 * 1.6449 * x.std(ddof=1) / math.sqrt(x.size)
    assert hi - lo == pytest.approx(clt, rel=0.15)


def test_bootstrap_interval_on_bound_statistic():
    model = linear_interaction(1.0)
    bases = [basis_for(U, 2)] * 2
    s = center(draw_sample(model, [U, U], 5000, 6))
    lo, hi = bootstrap_ci(lambda r: pdo_der_lower_bound(_recenter(r), bases, 0).value, s, 200, 0.9, 1)
    est = attach_ci(pdo_der_lower_bound(s, bases, 0), lo, hi, 0.9)
    assert est.ci[0] <= est.value <= est.ci[1]
    exact = 8 / math.pi**4 + 64 / math.pi**8
    assert abs(est.value - exact) < 2 * (hi - lo)


def test_attach_ci_widens_to_contain_estimate():
    est = BoundEstimate(1.0, "PDO", "D_i_tot", 0)
    assert attach_ci(est, 1.1, 1.3, 0.9).ci == (1.0, 1.3, 0.9)
    d = est.to_dict()
    assert d["ci"] is None and d["value"] == 1.0
