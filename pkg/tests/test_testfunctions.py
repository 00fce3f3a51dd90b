from __future__ import annotations

import math

import numpy as np
import pytest

from sobolbounds.distributions import uniform
from sobolbounds.errors import InvalidPhysicalParams, ModelUnknown, NoAnalyticForm
from sobolbounds.oracle import anova_decomposition, total_variance
from sobolbounds.testfunctions import (
    analytic_indices,
    flood_model,
    flood_overflow,
    g_sobol,
    linear_interaction,
    make_model,
    polynomial,
)

NOMINAL = np.array([1013.0, 30.0, 50.0, 55.0, 8.0, 55.5, 5000.0, 300.0])


def _fd_gradient(model, x, rel=1e-6):
    g = np.empty_like(x)
    for j in range(x.size):
        h = rel * max(1.0, abs(x[j]))
        up, dn = x.copy(), x.copy()
        up[j] += h
        dn[j] -= h
        g[j] = (model(up) - model(dn)) / (2 * h)
    return g


def test_flood_overflow_by_hand():
    q, ks, zv, zm, hd, cb, length, width = NOMINAL
    height = (q / (width * ks * math.sqrt((zm - zv) / length))) ** 0.6
    assert flood_overflow(NOMINAL)[0] == pytest.approx(height + zv - hd - cb, rel=1e-14)
    s = height + zv - hd - cb
    cost = 0.2 + 0.8 * (1 - math.exp(-1000 / s**4)) + 8 / 20
    assert flood_model()(NOMINAL) == pytest.approx(cost, rel=1e-14)


def test_flood_is_continuous_where_overflow_vanishes():
    m = flood_model()
    x = NOMINAL.copy()
    s0 = flood_overflow(x)[0]
    x[5] += s0  # raise the bank so that S = 0
    below, above = x.copy(), x.copy()
    below[5] += 1e-3
    above[5] -= 1e-3
    assert abs(m(below) - m(above)) < 1e-6


@pytest.mark.parametrize(
    "model, x",
    [
        (flood_model(), NOMINAL * np.array([1.5, 1, 1, 1, 1.05, 0.995, 1, 1])),
        # Hd = 8 is a kink of max(Hd, 8), so probe on either side
        (flood_model(), NOMINAL + np.array([0, 0, 0, 0, 0.3, 0, 0, 0])),
        (flood_model(), NOMINAL - np.array([0, 0, 0, 0, 0.3, 0, 0, 0])),
        (g_sobol([0.0, 1.0, 4.5]), np.array([0.3, -0.2, 0.11])),
        (linear_interaction(2.0), np.array([0.3, -0.4])),
        (polynomial({(2, 1): 1.5, (0, 3): -1.0, (1, 0): 2.0}, 2), np.array([0.7, -1.2])),
    ],
)
def test_gradients_match_finite_differences(model, x):
    np.testing.assert_allclose(model.gradient(x), _fd_gradient(model, x), rtol=1e-5, atol=1e-8)


def test_flood_rejects_unphysical_inputs():
    x = NOMINAL.copy()
    x[1] = -1.0
    with pytest.raises(InvalidPhysicalParams):
        flood_model()(x)


def test_g_sobol_indices_match_oracle():
    a = [0.0, 1.0, 4.5]
    model = g_sobol(a)
    terms = anova_decomposition(model, [uniform(-0.5, 0.5)] * 3, 24)
    for i in range(3):
        ref = analytic_indices("g_sobol", {"a": a}, i)
        assert terms[(i,)] == pytest.approx(ref["D_i"], rel=1e-10)
        assert total_variance(terms, (i,)) == pytest.approx(ref["D_i_tot"], rel=1e-10)


@pytest.mark.parametrize("i", [0, 1])
def test_linear_interaction_indices_match_oracle(i):
    terms = anova_decomposition(linear_interaction(1.5), [uniform(-0.5, 0.5)] * 2)
    ref = analytic_indices("linear_interaction", {"a": 1.5}, i)
    assert terms[(i,)] == pytest.approx(ref["D_i"], abs=1e-14)
    assert total_variance(terms, (i,)) == pytest.approx(ref["D_i_tot"], rel=1e-12)


def test_make_model_and_errors():
    assert make_model("g_sobol", {"a": [1, 2]}).dimension == 2
    assert make_model("polynomial", {"terms": [[[1, 2], 3.0]]})(np.array([2.0, 1.0])) == 6.0
    with pytest.raises(ModelUnknown):
        make_model("ishigami")
    with pytest.raises(NoAnalyticForm):
        analytic_indices("flood", {}, 0)


def test_face_evaluate_pins_one_coordinate():
    m = linear_interaction(1.0)
    x = np.array([[0.1, 0.2], [0.3, -0.4]])
    np.testing.assert_allclose(m.face_evaluate(0, 0.5, x), 0.5 + 0.5 * x[:, 1])
