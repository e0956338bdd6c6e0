"""Randomized verification sweeps shared by the CLI and the test-suite.

Each sweep draws a reproducible corpus from ``numpy.random.default_rng(seed)``
and compares a closed form with an independent evaluation.
"""

import math

import numpy as np

from .closed_form import IntegralArgs, PowerPair, f_n_appendix, i_minus, i_plus
from .errors import DegenerateParameterError
from .kernels import (ModelParams, basis_fk_matrix, k_integrated_pm, k_pm, kprime_pm,
                      kprime_real, k_real, kstar_pm, series_truncation)
from .quadrature import integrate_1d, integrate_tensor
from .special_functions import hyp2f1, hyp2f1_integral_oracle, principal_power

__all__ = [
    "hyp2f1_oracle_sweep",
    "hyp2f1_connection_sweep",
    "ipm_sweep",
    "fn_sweep",
    "kernel_sweep",
]


def _rel(x, ref):
    return abs(x - ref) / max(abs(ref), 1e-300)


def hyp2f1_oracle_sweep(n_cases: int = 500, seed: int = 1, radius: float = 3.0) -> dict:
    """``hyp2f1`` against its Euler integral on random ``c > b > 0`` cases."""
    rng = np.random.default_rng(seed)
    errs = []
    worst = None
    while len(errs) < n_cases:
        a = rng.uniform(-2.0, 2.0)
        b = rng.uniform(0.05, 2.5)
        c = b + rng.uniform(0.05, 3.0)
        z = complex(*rng.uniform(-radius, radius, 2))
        if abs(1 - z) < 0.05 or (z.real > 1 and abs(z.imag) < 0.02):
            continue
        val = hyp2f1(a, b, c, z)
        ref = hyp2f1_integral_oracle(a, b, c, z)
        e = _rel(val, ref)
        errs.append(e)
        if worst is None or e > worst[0]:
            worst = (e, [a, b, c, z.real, z.imag])
    return {"n": len(errs), "max_rel_error": max(errs), "worst_case": worst[1]}


def hyp2f1_connection_sweep(n_cases: int = 200, seed: int = 2, tol: float = 1e-3) -> dict:
    """Pairwise agreement of the series, ``1 - z`` and ``1/z`` formulas for ``0.3 <= |z| <= 0.7``.

    Parameter draws within ``tol`` of a degenerate combination are skipped.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    n = 0
    while n < n_cases:
        a, b = rng.uniform(-2.0, 2.0, 2)
        c = rng.uniform(-1.5, 3.0)
        r = rng.uniform(0.3, 0.7)
        th = rng.uniform(-math.pi, math.pi)
        z = r * complex(math.cos(th), math.sin(th))
        if z.imag == 0 and z.real >= 1:
            continue
        try:
            vals = [hyp2f1(a, b, c, z, method=m, degeneracy_tol=tol)
                    for m in ("series", "one_minus_z", "one_over_z")]
        except DegenerateParameterError:
            continue
        if abs(c - round(c)) < tol and round(c) <= 0:
            continue
        scale = max(abs(v) for v in vals)
        for i in range(3):
            for j in range(i + 1, 3):
                worst = max(worst, abs(vals[i] - vals[j]) / scale)
        n += 1
    return {"n": n, "max_rel_error": worst}


def _ipm_config(rng):
    t = rng.uniform(0.5, 2.0)
    while True:
        b1 = rng.uniform(-1.95, 0.9)
        b2 = rng.uniform(-0.9, 1.2)
        if abs(b1 + b2 + 1) > 0.05 and abs(b1 - round(b1)) > 0.02:
            break
    br = rng.uniform(0.05, 0.95) * t
    bi = 0.0 if rng.uniform() < 0.2 else -rng.uniform(0.0, 0.3) * t
    ar = rng.uniform(0.05, 0.95) * t
    return t, b1, b2, ar, complex(br, bi)


def _quad_ipm(f, t, ar, b, b2):
    if b.imag == 0:
        # integrable power singularity at u = b: split there
        v1, _ = integrate_1d(f, 0.0, b.real, 1e-13, endpoint_exponents=(None, b2),
                             points=[ar], rel=True)
        v2, _ = integrate_1d(f, b.real, t, 1e-13, endpoint_exponents=(b2, None),
                             points=[ar], rel=True)
        return v1 + v2
    v, _ = integrate_1d(f, 0.0, t, 1e-13, points=[ar, b.real], rel=True)
    return v


def ipm_sweep(kind: str, n_cases: int = 100, seed: int = 3) -> dict:
    """``i_minus`` or ``i_plus`` against adaptive quadrature of the defining integral."""
    rng = np.random.default_rng(seed + (0 if kind == "minus" else 1000))
    worst = 0.0
    worst_case = None
    for _ in range(n_cases):
        t, b1, b2, ar, b = _ipm_config(rng)
        if kind == "minus":
            a = complex(ar, b.imag - rng.uniform(0.005, 0.3) * t)
            sa = -1j
            fn = i_minus
        else:
            a = complex(ar, rng.uniform(0.005, 0.3) * t)
            sa = 1j
            fn = i_plus
        pp = PowerPair(b1, b2)
        val = fn(pp, IntegralArgs(t, a, b))

        def f(u):
            return principal_power(sa * (u - a), b1) * principal_power(-1j * (u - b), b2)

        ref = _quad_ipm(f, t, ar, b, b2)
        e = _rel(val, ref)
        if e > worst:
            worst = e
            worst_case = [b1, b2, t, a.real, a.imag, b.real, b.imag]
    return {"n": n_cases, "max_rel_error": worst, "worst_case": worst_case}


def fn_sweep(n_cases: int = 50, seed: int = 4) -> dict:
    """``f_n_appendix`` for ``n`` in ``{0, 1, 2}`` against quadrature."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_case = None
    for k in range(n_cases):
        n = k % 3
        alpha = rng.uniform(0.02, 0.24)
        beta = rng.uniform(-0.9, 1.5)
        t = rng.uniform(0.5, 2.0)
        if rng.uniform() < 0.25:
            # reached from the upper half-plane across (t, inf)
            z = complex(rng.uniform(1.05, 2.5) * t, -rng.uniform(0.01, 1.0) * t)
        else:
            z = complex(rng.uniform(-1.0, 2.0) * t, rng.uniform(0.01, 1.0) * t)
        val = f_n_appendix(alpha, beta, n, t, z)
        nf = math.factorial(n)

        def f(u):
            return (t - u) ** n / nf * u ** beta * principal_power(-1j * (z - u), 2 * alpha - 2)

        pts = [z.real] if 0 < z.real < t else []
        ref, _ = integrate_1d(f, 0.0, t, 1e-13, endpoint_exponents=(beta, None), points=pts, rel=True)
        e = _rel(val, ref)
        if e > worst:
            worst = e
            worst_case = [alpha, beta, n, t, z.real, z.imag]
    return {"n": n_cases, "max_rel_error": worst, "worst_case": worst_case}


def kernel_sweep(p: ModelParams, n_points: int = 50, seed: int = 5, t_max: float = 1.0) -> dict:
    """Symmetries, positive semidefiniteness and integral identities of the kernels."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, t_max, n_points)
    y = rng.uniform(0.0, t_max, n_points)
    out = {}
    herm = 0.0
    for fn in (kprime_pm, k_pm, kstar_pm):
        herm = max(herm, float(np.max(np.abs(fn(p, 1, x, y) - np.conj(fn(p, -1, x, y))))))
    out["hermitian_max_abs"] = herm
    out["real_symmetry_max_abs"] = float(max(np.max(np.abs(k_real(p, x, y) - k_real(p, y, x))),
                                             np.max(np.abs(kprime_real(p, x, y) - kprime_real(p, y, x)))))
    grid = np.linspace(0.0, t_max, min(256, n_points * 4))
    cov = kprime_real(p, grid[:, None], grid[None, :])
    jitter = 1e-10 * float(np.max(np.diag(cov)))
    try:
        np.linalg.cholesky(cov + jitter * np.eye(grid.size))
        out["psd"] = True
    except np.linalg.LinAlgError:
        out["psd"] = False
    # double integral of K' against the integrated kernel
    worst = 0.0
    for xi, yi in zip(x[:8], y[:8]):
        npan = max(4, int(math.ceil(max(xi, yi) / p.eta)))

        def f(u, v):
            return kprime_pm(p, -1, u, v)

        val = integrate_tensor(f, ((0.0, xi), (0.0, yi)), npan, order=10)
        ref = k_integrated_pm(p, -1, xi, yi)
        worst = max(worst, _rel(complex(val), complex(ref)))
    out["integrated_identity_max_rel"] = worst
    out["closed_form_offset"] = float(p.c * p.eta ** (2 * p.alpha))
    # truncated series against K'(-)
    if p.eta >= 0.2:
        z = x[:10] + 0.5j * p.eta
        w = y[:10] + 0.5j * p.eta
        n_terms = series_truncation(p.alpha, np.concatenate([z, w]), 1e-12)
        fz = basis_fk_matrix(p.alpha, n_terms, z)
        fw = basis_fk_matrix(p.alpha, n_terms, w)
        approx = np.sum(fz * np.conj(fw), axis=0)
        exact = kprime_pm(p, -1, x[:10], y[:10])
        out["series_max_abs"] = float(np.max(np.abs(approx - exact)))
        out["series_terms"] = int(n_terms)
    return out
