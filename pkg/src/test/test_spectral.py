# src/test/test_spectral.py

import numpy as np
import pytest

from src.common.errors import ArgumentOrderError, InvalidDimensionError, RangeError
from src.modules.spectral.spectral_service import (
    build_operator, kernel_bresponse, kernel_cross, kernel_mean, kernel_var, time_change_response,
)


def stencil(n, alpha):
    return alpha * (-2.0 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1))


@pytest.mark.parametrize("n", [1, 2, 3, 8, 17])
def test_eigensystem_rebuilds_the_stencil(n):
    op = build_operator(n, 0.7)
    assert np.allclose(op.matrix(), stencil(n, 0.7), atol=1e-12)
    assert np.allclose(op.basis.T @ op.basis, np.eye(n), atol=1e-12)


def test_eigenvalues_match_dense_solver():
    op = build_operator(8, 1.0)
    expected = np.sort(np.linalg.eigvalsh(stencil(8, 1.0)))[::-1]
    assert np.max(np.abs(op.eigenvalues - expected)) < 1e-12
    assert np.all(np.diff(op.eigenvalues) < 0)
    assert np.all(op.eigenvalues < 0)


def test_single_element_eigenvalue():
    op = build_operator(1, 0.5)
    assert op.eigenvalues[0] == pytest.approx(-1.0, abs=1e-15)
    assert op.basis[0, 0] == pytest.approx(1.0)


def test_zero_alpha_is_brownian():
    op = build_operator(6, 0.0)
    assert np.all(op.eigenvalues == 0.0)
    assert np.allclose(op.matrix(), 0.0)


@pytest.mark.parametrize("n, alpha", [(0, 1.0), (-3, 1.0), (2.5, 1.0), (4, -0.1)])
def test_invalid_operator_arguments(n, alpha):
    with pytest.raises(InvalidDimensionError):
        build_operator(n, alpha)


def test_kernels_at_time_zero():
    lam = np.array([-3.0, -0.5, 0.0])
    assert np.all(kernel_mean(lam, 0.0) == 1.0)
    assert np.all(kernel_bresponse(lam, 0.0) == 0.0)
    assert np.all(kernel_var(lam, 0.0, 0.4) == 0.0)


def test_kernels_match_direct_formulas():
    lam = np.array([-3.0, -1.0, -0.2])
    t, eps = 0.7, 0.3
    assert np.allclose(kernel_bresponse(lam, t), np.expm1(lam * t) / lam, rtol=1e-14)
    assert np.allclose(kernel_var(lam, t, eps), eps * np.expm1(2 * lam * t) / (2 * lam), rtol=1e-14)


def test_kernels_are_continuous_at_zero_eigenvalue():
    t, eps = 0.6, 0.2
    assert kernel_var(0.0, t, eps) == pytest.approx(eps * t, rel=1e-15)
    assert kernel_bresponse(0.0, t) == pytest.approx(t, rel=1e-15)
    tiny = -1e-12
    assert kernel_var(tiny, t, eps) == pytest.approx(eps * t, rel=1e-10)
    assert kernel_bresponse(tiny, t) == pytest.approx(t, rel=1e-10)


def test_cross_kernel_reduces_to_variance_on_the_diagonal():
    lam = np.array([-2.0, -0.1])
    assert np.allclose(kernel_cross(lam, 0.4, 0.4, 0.5), kernel_var(lam, 0.4, 0.5))
    expected = np.exp(lam * 0.5) * kernel_var(lam, 0.4, 0.5)
    assert np.allclose(kernel_cross(lam, 0.4, 0.9, 0.5), expected)


def test_cross_kernel_rejects_reversed_times():
    with pytest.raises(ArgumentOrderError):
        kernel_cross(np.array([-1.0]), 0.8, 0.2, 0.1)


def test_negative_time_rejected():
    with pytest.raises(RangeError):
        kernel_var(np.array([-1.0]), -0.1, 0.1)


def test_smallest_eigenvalue_keeps_full_relative_precision():
    n = 1000
    x = np.pi / (n + 1)
    expected = -(x ** 2 - x ** 4 / 12.0 + x ** 6 / 360.0)
    assert build_operator(n, 1.0).eigenvalues[0] == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("lam", [-1e-8, 1e-8])
def test_kernels_are_continuous_across_the_series_switch(lam):
    t, eps = 0.05, 0.2
    assert kernel_bresponse(lam, t) == pytest.approx(kernel_bresponse(0.0, t), rel=1e-9)
    assert kernel_var(lam, t, eps) == pytest.approx(kernel_var(0.0, t, eps), rel=1e-9)
    assert kernel_bresponse(lam, 0.6) == pytest.approx(np.expm1(lam * 0.6) / lam, rel=1e-12)
    assert kernel_var(lam, 0.6, eps) == pytest.approx(eps * np.expm1(2 * lam * 0.6) / (2 * lam), rel=1e-12)


def test_variance_kernel_is_bounded_by_its_stationary_value():
    lam = np.array([-4.0, -1.0, -0.05])[:, None]
    t = np.linspace(0.0, 20.0, 200)[None, :]
    eps = 0.3
    values = kernel_var(lam, t, eps)
    assert np.all(values <= eps / (2 * np.abs(lam)) * (1 + 1e-12))


def test_time_change_response_accepts_negative_time_change():
    lam = np.array([-2.0, -0.5, 0.0])
    assert np.allclose(time_change_response(lam[:2], -0.5), np.expm1(-0.5 * lam[:2]) / lam[:2], rtol=1e-14)
    assert time_change_response(0.0, -0.5) == -0.5
    assert np.array_equal(time_change_response(lam, 0.7), kernel_bresponse(lam, 0.7))
    with pytest.raises(RangeError):
        kernel_bresponse(lam, -0.5)
