import math

import numpy as np
import pytest
from scipy.linalg import expm

from ckspectral.errors import PoleError
from ckspectral.groupoid import BisectionIndex
from ckspectral.heat import (HeatKernelParams, constant_projection, full_shift_data,
                             heat_coefficients, heat_kernel_value, heat_matrix_general,
                             heat_trace_D, heat_trace_sweep, kernel_diagonal_finite,
                             kernel_heat_matrix, kernel_threshold, riesz_composition_coefficient,
                             riesz_matrix, riesz_projection_coefficient)
from ckspectral.laplacian import closed_form_spectrum, laplacian_matrix
from ckspectral.markov import metric_params
from ckspectral.operators import TruncationWindow


@pytest.mark.parametrize("n,beta,depth", [(2, (1,), 6), (2, (2, 1), 6), (3, (1,), 5)])
@pytest.mark.parametrize("t", [0.5, 1.5, 2.0, 3.0])
def test_kernel_matches_expm(n, beta, depth, t):
    pf = full_shift_data(n)
    gamma = BisectionIndex((2,) if len(beta) == 2 else (), beta)
    if abs(t - kernel_threshold(n)) < 1e-9:
        pytest.skip("pole")
    lap = laplacian_matrix(pf, beta, depth).matrix
    spectral = expm(-t * (lap + gamma.length * np.eye(len(lap))))
    kern = kernel_heat_matrix(n, gamma, t, depth)
    assert np.max(np.abs(kern - spectral)) < 1e-10


def test_heat_matrix_general_against_expm(golden):
    lap = laplacian_matrix(golden, (1,), 6).matrix
    for t in (0.3, 2.0):
        assert np.allclose(heat_matrix_general(golden, (1,), t, 6), expm(-t * lap), atol=1e-12)


def test_semigroup_and_trace(rand3):
    h1 = heat_matrix_general(rand3, (1,), 0.4, 5)
    h2 = heat_matrix_general(rand3, (1,), 0.9, 5)
    h12 = heat_matrix_general(rand3, (1,), 1.3, 5)
    assert np.max(np.abs(h1 @ h2 - h12)) < 1e-10
    spec = closed_form_spectrum(rand3, (1,), 5)
    assert np.trace(h1) == pytest.approx(np.sum(np.exp(-0.4 * spec)), rel=1e-12)


def test_pole_and_diagonal_finiteness():
    t0 = 2 * math.log(2)
    assert kernel_threshold(2) == pytest.approx(t0)
    with pytest.raises(PoleError):
        heat_coefficients(2, 1, t0)
    assert not kernel_diagonal_finite(2, t0 - 1e-9)
    assert kernel_diagonal_finite(2, t0 + 1e-9)
    with pytest.raises(ValueError):
        heat_coefficients(2, 1, 0.0)


def test_kernel_value_structure():
    g = BisectionIndex((), (1,))
    other = BisectionIndex((2,), (1,))
    assert heat_kernel_value(2, g, 2.0, 3, other) == 0.0
    p = HeatKernelParams.evaluate(2, 1, 2.0)
    assert heat_kernel_value(2, g, 2.0, 3) == pytest.approx(math.exp(-2.0) * (p.h + p.big_h * p.rho ** 3))
    assert p.rho < 1 and p.threshold == kernel_threshold(2)
    with pytest.raises(ValueError):
        heat_kernel_value(2, BisectionIndex((), (1, 2)), 2.0, 1)


def test_kernel_entries_are_cell_averages():
    # off-diagonal entry = mu(P) * K at the pair's common prefix
    n, t, depth = 2, 2.0, 5
    g = BisectionIndex((), (1,))
    mat = kernel_heat_matrix(n, g, t, depth)
    assert mat[0, 1] == pytest.approx(2.0 ** -depth * heat_kernel_value(n, g, t, depth - 1))
    assert mat[0, -1] == pytest.approx(2.0 ** -depth * heat_kernel_value(n, g, t, 1))


@pytest.mark.parametrize("n,depth", [(2, 6), (3, 5)])
@pytest.mark.parametrize("t", [0.7, 1.9, 3.0])
def test_heat_equals_projection_plus_riesz(n, depth, t):
    pf = full_shift_data(n)
    params = metric_params(pf, 2.0)
    beta = (1,)
    h, big_h = heat_coefficients(n, len(beta), t)
    p = constant_projection(pf, beta, depth)
    r = riesz_matrix(pf, params, beta, params.delta_prime * t, depth)
    rhs = h * n ** -len(beta) * p + big_h * r
    assert np.max(np.abs(heat_matrix_general(pf, beta, t, depth) - rhs)) < 1e-9
    coef = riesz_projection_coefficient(n, len(beta), params.delta_prime * t, params.delta_prime)
    assert np.max(np.abs(r @ p - coef * p)) < 1e-9


@pytest.mark.parametrize("n,depth", [(2, 6), (3, 5)])
def test_riesz_composition_semigroup_form(n, depth):
    pf = full_shift_data(n)
    params = metric_params(pf, 2.0)
    dp = params.delta_prime
    beta = (2,)
    p = constant_projection(pf, beta, depth)
    for s1, s2 in [(0.5, 0.8), (1.2, 0.3)]:
        r1 = riesz_matrix(pf, params, beta, s1, depth)
        r2 = riesz_matrix(pf, params, beta, s2, depth)
        r12 = riesz_matrix(pf, params, beta, s1 + s2, depth)
        h1 = heat_coefficients(n, 1, s1 / dp)[1]
        h2 = heat_coefficients(n, 1, s2 / dp)[1]
        h12 = heat_coefficients(n, 1, (s1 + s2) / dp)[1]
        defect = h1 * h2 * r1 @ r2 - h12 * r12
        c = riesz_composition_coefficient(n, 1, s1, s2, dp)
        assert np.max(np.abs(defect - c * p)) < 1e-9
        assert np.linalg.matrix_rank(defect, tol=1e-9) == 1
        ref = riesz_composition_coefficient(n, 1, s1, s2, dp, form="reference")
        assert abs(ref - c) > 1e-3
    with pytest.raises(ValueError):
        riesz_composition_coefficient(n, 1, 0.4, 0.5, dp, form="other")


def test_riesz_diagonal_closed_form(full2):
    params = metric_params(full2, 2.0)
    s, depth = 0.6, 4
    r = riesz_matrix(full2, params, (1,), s, depth)
    expected = sum(0.5 * 2.0 ** (-s * c) for c in range(depth, 3000))
    assert np.allclose(np.diag(r), expected, rtol=1e-13)
    with pytest.raises(ValueError):
        riesz_matrix(full2, params, (1,), 0.0, depth)


def test_heat_trace(full2):
    window = TruncationWindow(full2, 2, 2)
    value = heat_trace_D(window, 1.0)
    assert value == pytest.approx(np.sum(np.exp(-np.abs(window.dirac_diagonal))))
    rows = heat_trace_sweep(full2, 1.0, [1, 2, 3])
    assert rows[0]["relative_increment"] is None
    assert all(rows[k]["value"] > rows[k - 1]["value"] for k in (1, 2))
    with pytest.raises(ValueError):
        heat_trace_D(window, 0.0)
