import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyarea.checks import kernel_sweep
from levyarea.errors import DomainError, PreconditionError
from levyarea.kernels import (ModelParams, basis_fk, basis_fk_matrix, fbm_covariance, k_integrated_pm,
                              k_integrated_real, k_pm, k_real, kprime_pm, kprime_real, kstar_pm,
                              series_truncation)


def test_params_validation():
    for a in (0.0, 0.25, -0.1):
        with pytest.raises(PreconditionError):
            ModelParams(a, 0.1)
    with pytest.raises(PreconditionError):
        ModelParams(0.2, -1.0)
    p = ModelParams(0.2, 0.1)
    assert p.c == pytest.approx(1 / (4 * math.cos(math.pi * 0.2)))


def test_k_at_origin():
    p = ModelParams(0.2, 0.1)
    ref = 0.1 ** 0.4 / (4 * math.cos(math.pi * 0.2))
    assert abs(k_pm(p, -1, 0.0, 0.0) - ref) < 1e-15


def test_k_real_small_eta_limit():
    s, t = 0.3, 0.8
    p = ModelParams(0.2, 1e-9)
    # off the diagonal the closed form tends to the fBm covariance
    assert k_real(p, s, t) == pytest.approx(fbm_covariance(0.2, s, t), abs=1e-8)


def test_k_real_unit_point_offset():
    # on the diagonal the last power term leaves eta^(2a) / (2 cos pi a)
    p = ModelParams(0.2, 1e-6)
    val = k_real(p, 1.0, 1.0)
    assert val == pytest.approx(1 - 1e-6 ** 0.4 / (2 * math.cos(math.pi * 0.2)), abs=1e-6)
    assert abs(val - 1) < 3e-3


def test_kstar_polar_form():
    p = ModelParams(0.2, 0.5)
    x, y = 0.3, 0.0
    base = mp.mpc(0.5, -(x - y))
    ref = complex(-mp.mpf(1) / (4 * mp.cos(mp.pi * 0.2)) * mp.power(base, 0.4))
    assert abs(kstar_pm(p, -1, x, y) - ref) < 1e-14


def test_kprime_against_mpmath():
    p = ModelParams(0.15, 0.02)
    x, y = 0.41, 0.37
    coef = mp.mpf(0.15) * (1 - 0.3) / (2 * mp.cos(mp.pi * 0.15))
    ref = complex(coef * mp.power(mp.mpc(0.02, -(x - y)), 0.3 - 2))
    assert abs(kprime_pm(p, -1, x, y) - ref) < 1e-12 * abs(ref)
    assert kprime_real(p, x, y) == pytest.approx(2 * ref.real, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.24), st.floats(0.001, 1.0), st.floats(0, 2), st.floats(0, 2))
def test_kernel_symmetries(alpha, eta, x, y):
    p = ModelParams(alpha, eta)
    for fn in (kprime_pm, k_pm, kstar_pm, k_integrated_pm):
        assert abs(fn(p, 1, x, y) - np.conj(fn(p, -1, x, y))) < 1e-12
    assert k_real(p, x, y) == pytest.approx(k_real(p, y, x), rel=1e-12, abs=1e-14)


def test_integrated_kernel_is_closed_form_minus_constant():
    p = ModelParams(0.2, 0.05)
    x, y = 0.7, 0.2
    offset = p.eta ** 0.4 / (4 * math.cos(math.pi * 0.2))
    assert abs(k_integrated_pm(p, -1, x, y) - (k_pm(p, -1, x, y) - offset)) < 1e-15
    assert k_integrated_real(p, x, y) == pytest.approx(2 * (k_pm(p, -1, x, y) - offset).real)


def test_kernel_sweep_properties():
    res = kernel_sweep(ModelParams(0.2, 0.3), 30, seed=11)
    assert res["hermitian_max_abs"] < 1e-14
    assert res["real_symmetry_max_abs"] < 1e-14
    assert res["psd"]
    assert res["integrated_identity_max_rel"] < 1e-9
    assert res["series_max_abs"] < 1e-10


def test_fbm_covariance_examples():
    assert fbm_covariance(0.2, 1.0, 1.0) == 1.0
    assert fbm_covariance(0.2, 0.6, 0.0) == 0.0
    assert fbm_covariance(0.25, 1.0, 2.0) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)


def test_basis_zero_of_cayley_map():
    assert basis_fk(0.2, 1, 1j) == 0


def test_basis_domain():
    with pytest.raises(DomainError):
        basis_fk(0.2, 1, 0.3 + 0j)


def test_basis_partial_sums_converge():
    alpha, eta = 0.2, 0.4
    p = ModelParams(alpha, eta)
    x, y = 0.2, 0.7
    z = np.array([x + 0.5j * eta])
    w = np.array([y + 0.5j * eta])
    exact = kprime_pm(p, -1, x, y)
    errs = []
    for n in (5, 20, 80):
        s = np.sum(basis_fk_matrix(alpha, n, z) * np.conj(basis_fk_matrix(alpha, n, w)))
        errs.append(abs(s - exact))
    assert errs[0] > errs[1] > errs[2]
    n = series_truncation(alpha, np.concatenate([z, w]), 1e-12)
    s = np.sum(basis_fk_matrix(alpha, n, z) * np.conj(basis_fk_matrix(alpha, n, w)))
    assert abs(s - exact) < 1e-10
