import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyarea.errors import BranchCutError, DegenerateParameterError, PoleError
from levyarea.special_functions import (gamma_real, hyp2f1, hyp2f1_integral_oracle,
                                        principal_power, rgamma)

mp.mp.dps = 30


def test_principal_power_identity_base():
    assert principal_power(1 + 0j, 0.37) == 1


def test_principal_power_integer_exponent():
    assert abs(principal_power(1j, 2) - (-1)) < 1e-15


def test_principal_power_polar_form():
    ref = complex(mp.sqrt(2) * mp.expjpi(mp.mpf(1) / 4))
    assert abs(principal_power(2j, 0.5) - ref) < 1e-15


def test_principal_power_array_matches_scalar():
    z = np.array([1 + 1j, -2 + 0.5j, 0.3 - 4j])
    arr = principal_power(z, -0.6)
    for zi, ai in zip(z, arr):
        assert abs(principal_power(complex(zi), -0.6) - ai) < 1e-15


def test_principal_power_branch_cut():
    with pytest.raises(BranchCutError):
        principal_power(-1.0 + 0j, 0.5)


def test_principal_power_zero():
    assert principal_power(0j, 0.3) == 0
    with pytest.raises(BranchCutError):
        principal_power(0j, -0.3)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-2, 2))
def test_principal_power_against_mpmath(x, y, beta):
    z = complex(x, y)
    if abs(z) < 1e-3 or (y == 0 and x < 0):
        return
    ref = complex(mp.power(mp.mpc(x, y), beta))
    assert abs(principal_power(z, beta) - ref) <= 1e-13 * abs(ref)


def test_gamma_examples():
    assert gamma_real(1.0) == pytest.approx(1.0, rel=1e-15)
    assert gamma_real(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    ref = float(mp.pi / (mp.sin(-0.4 * mp.pi) * mp.gamma(1.4)))
    assert gamma_real(-0.4) == pytest.approx(ref, rel=1e-13)


@given(st.floats(-20, 40))
def test_gamma_against_mpmath(x):
    if abs(x - round(x)) < 1e-6 and x <= 0:
        return
    ref = float(mp.gamma(x))
    assert gamma_real(x) == pytest.approx(ref, rel=1e-12)


def test_gamma_poles():
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(PoleError):
            gamma_real(x)
        assert rgamma(x) == 0.0


def test_hyp2f1_examples():
    assert hyp2f1(0.7, -0.3, 1.9, 0) == 1
    for z in (0.3, -2 + 1j, 5j):
        assert hyp2f1(0, 1.3, 2.2, z) == 1
        ref = principal_power(1 - complex(z), -1.3)
        assert abs(hyp2f1(0.8, 1.3, 0.8, z) - ref) < 1e-12 * abs(ref)
    assert hyp2f1(1, 1, 2, 0.5) == pytest.approx(2 * math.log(2), rel=1e-14)


def test_hyp2f1_cut():
    with pytest.raises(BranchCutError):
        hyp2f1(0.5, 0.5, 1.5, 2.0)


def test_hyp2f1_degenerate_c():
    with pytest.raises(DegenerateParameterError):
        hyp2f1(0.5, 0.5, -1.0, 0.3)


def test_hyp2f1_terminating_with_nonpositive_c():
    # (a)_k / (c)_k stays finite for k <= -a when -a <= -c
    val = hyp2f1(-1.0, 0.7, -2.0, 0.4)
    assert val == pytest.approx(1 + 0.7 * 0.4 / 2)


@settings(max_examples=150, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-1.5, 3), st.floats(0.0, 4.0), st.floats(-math.pi, math.pi))
def test_hyp2f1_against_mpmath(a, b, c, r, th):
    z = r * cmath.exp(1j * th)
    if abs(c - round(c)) < 1e-3 and c < 0.5:
        return
    if abs(1 - z) < 0.05 or (abs(z.imag) < 1e-3 and z.real > 1):
        return
    try:
        val = hyp2f1(a, b, c, z)
    except DegenerateParameterError:
        return
    ref = complex(mp.hyp2f1(a, b, c, z))
    scale = max(abs(ref), 1e-8)
    assert abs(val - ref) <= 1e-9 * scale


@pytest.mark.parametrize("method", ["series", "one_minus_z", "one_over_z", "one_over_one_minus_z"])
def test_hyp2f1_forced_method_consistency(method):
    z = 0.45 + 0.3j if method in ("series", "one_minus_z") else -1.6 + 0.4j
    ref = complex(mp.hyp2f1(0.3, -0.45, 1.7, z))
    assert abs(hyp2f1(0.3, -0.45, 1.7, z, method=method) - ref) < 1e-12 * abs(ref)


def test_hyp2f1_lens_region():
    z = cmath.exp(1j * math.pi / 3)
    ref = complex(mp.hyp2f1(0.25, 0.6, 1.35, z))
    assert abs(hyp2f1(0.25, 0.6, 1.35, z) - ref) < 1e-12 * abs(ref)


def test_integral_oracle_examples():
    assert abs(hyp2f1_integral_oracle(0, 0.8, 2.1, 0.4) - 1) < 1e-13
    assert abs(hyp2f1_integral_oracle(0.6, 1.3, 2.3, 0) - 1) < 1e-13


def test_integral_oracle_against_mpmath():
    z = -3 + 2j
    ref = complex(mp.hyp2f1(-0.7, 0.4, 1.9, z))
    assert abs(hyp2f1_integral_oracle(-0.7, 0.4, 1.9, z) - ref) < 1e-11 * abs(ref)
