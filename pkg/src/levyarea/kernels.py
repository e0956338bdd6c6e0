"""Covariance kernels of the analytic approximation of fBm.

For a model ``(alpha, eta)`` and ``c = 1 / (4 cos(pi alpha))``::

    K'(+-)(x, y) = 2 alpha (1 - 2 alpha) c (+-i(x - y) + eta)^(2 alpha - 2)
    K(+-)(x, y)  = c ((+-ix + eta)^(2a) + (-+iy + eta)^(2a) - (+-i(x - y) + eta)^(2a))
    K*(+-)(x, y) = -c (+-i(x - y) + eta)^(2a)

and the real kernels are twice the real part of either sign. ``K'`` is the
covariance of the derivative process, ``K`` the covariance of the process
itself. ``K`` does not vanish at the origin: the exact double integral of
``K'`` over ``[0, x] x [0, y]`` is ``K - c eta^(2 alpha)``, which is what
:func:`k_integrated_pm` returns. Moments of the area only see increments
and therefore use the integrated kernel.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, ConvergenceError, PreconditionError
from .special_functions import principal_power, MAX_TERMS

__all__ = [
    "ModelParams",
    "kprime_pm",
    "kprime_real",
    "k_pm",
    "k_real",
    "k_integrated_pm",
    "k_integrated_real",
    "kstar_pm",
    "kstar_real",
    "basis_fk",
    "basis_fk_matrix",
    "series_truncation",
    "fbm_covariance",
]


@dataclass(frozen=True)
class ModelParams:
    """Hurst-type exponent ``alpha`` in (0, 1/4) and regularization ``eta >= 0``."""

    alpha: float
    eta: float

    def __post_init__(self):
        a, e = float(self.alpha), float(self.eta)
        if not (math.isfinite(a) and 0.0 < a < 0.25):
            raise PreconditionError(f"alpha must lie in (0, 1/4), got {self.alpha}")
        if not (math.isfinite(e) and e >= 0.0):
            raise PreconditionError(f"eta must be finite and >= 0, got {self.eta}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "eta", e)

    @property
    def c(self) -> float:
        """``1 / (4 cos(pi alpha))``."""
        return 0.25 / math.cos(math.pi * self.alpha)

    @property
    def kprime_coef(self) -> float:
        """``alpha (1 - 2 alpha) / (2 cos(pi alpha))``."""
        a = self.alpha
        return a * (1 - 2 * a) / (2 * math.cos(math.pi * a))

    def require_positive_eta(self):
        if self.eta <= 0:
            raise PreconditionError("this kernel needs eta > 0")


def _sign(sign) -> int:
    if sign not in (1, -1):
        raise PreconditionError(f"sign must be +1 or -1, got {sign}")
    return int(sign)


def _re_power(d, eta, beta):
    """``Re (i d + eta)^beta``, even in ``d``."""
    d = np.asarray(d, dtype=float)
    return np.hypot(eta, d) ** beta * np.cos(beta * np.arctan2(np.abs(d), eta))


def kprime_pm(p: ModelParams, sign: int, x, y):
    """Complex kernel ``K'(+-)(eta; x, y)``; needs ``eta > 0``."""
    p.require_positive_eta()
    s = _sign(sign)
    base = s * 1j * (np.asarray(x, float) - np.asarray(y, float)) + p.eta
    return p.kprime_coef * principal_power(base, 2 * p.alpha - 2)


def kprime_real(p: ModelParams, x, y):
    """``2 Re K'(eta; x, y)``, the covariance of the derivative process."""
    p.require_positive_eta()
    d = np.asarray(x, float) - np.asarray(y, float)
    return 2 * p.kprime_coef * _re_power(d, p.eta, 2 * p.alpha - 2)


def k_pm(p: ModelParams, sign: int, x, y):
    """Complex kernel ``K(+-)(eta; x, y)`` in closed form."""
    s = _sign(sign)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    b = 2 * p.alpha
    val = (principal_power(s * 1j * x + p.eta, b)
           + principal_power(-s * 1j * y + p.eta, b)
           - principal_power(s * 1j * (x - y) + p.eta, b))
    return p.c * val


def k_real(p: ModelParams, x, y):
    """``2 Re K(eta; x, y)``: covariance of the regularized process."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    b = 2 * p.alpha
    g = _re_power(x, p.eta, b) + _re_power(y, p.eta, b) - _re_power(x - y, p.eta, b)
    return 2 * p.c * g


def k_integrated_pm(p: ModelParams, sign: int, x, y):
    """Double integral of ``K'(+-)`` over ``[0, x] x [0, y]``."""
    return k_pm(p, sign, x, y) - p.c * p.eta ** (2 * p.alpha)


def k_integrated_real(p: ModelParams, x, y):
    """Covariance of the increments ``B(x) - B(0)`` and ``B(y) - B(0)``."""
    return k_real(p, x, y) - 2 * p.c * p.eta ** (2 * p.alpha)


def kstar_pm(p: ModelParams, sign: int, x, y):
    """Complex kernel ``K*(+-)(eta; x, y)``."""
    s = _sign(sign)
    base = s * 1j * (np.asarray(x, float) - np.asarray(y, float)) + p.eta
    return -p.c * principal_power(base, 2 * p.alpha)


def kstar_real(p: ModelParams, x, y):
    d = np.asarray(x, float) - np.asarray(y, float)
    return -2 * p.c * _re_power(d, p.eta, 2 * p.alpha)


def fbm_covariance(alpha: float, s, t):
    """Fractional Brownian covariance ``(|s|^2a + |t|^2a - |t - s|^2a) / 2``."""
    s = np.asarray(s, float)
    t = np.asarray(t, float)
    b = 2 * alpha
    return 0.5 * (np.abs(s) ** b + np.abs(t) ** b - np.abs(t - s) ** b)


# ---------------------------------------------------------------------------
# series basis
# ---------------------------------------------------------------------------

def _fk_prefactor(alpha: float) -> float:
    return 2 ** (alpha - 1) * math.sqrt(alpha * (1 - 2 * alpha) / (2 * math.cos(math.pi * alpha)))


def basis_fk(alpha: float, k: int, z) -> complex:
    """Basis function ``f_k(z)`` of the analytic series on the upper half-plane.

    ``sum_k f_k(z) conj(f_k(w)) = K'(-)(eta; x, y)`` for ``z = x + i eta/2``
    and ``w = y + i eta/2``.

    Raises
    ------
    DomainError
        If ``Im z <= 0``.
    """
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("f_k is defined on the open upper half-plane")
    if k < 0:
        raise PreconditionError("k must be >= 0")
    g = 1.0
    s = 2 - 2 * alpha
    for j in range(k):
        g *= (s + j) / (j + 1)
    base = principal_power((z + 1j) / 2j, 2 * alpha - 2)
    q = (z - 1j) / (z + 1j)
    return _fk_prefactor(alpha) * math.sqrt(g) * base * q ** k


def basis_fk_matrix(alpha: float, n_terms: int, z) -> np.ndarray:
    """All ``f_k(z_j)`` for ``k < n_terms``, shape ``(n_terms, len(z))``."""
    z = np.atleast_1d(np.asarray(z, complex))
    if np.any(z.imag <= 0):
        raise DomainError("f_k is defined on the open upper half-plane")
    s = 2 - 2 * alpha
    k = np.arange(n_terms)
    ratio = np.empty(n_terms)
    ratio[0] = 1.0
    ratio[1:] = (s + k[:-1]) / (k[:-1] + 1)
    sqrt_g = np.sqrt(np.cumprod(ratio))
    base = principal_power((z + 1j) / 2j, 2 * alpha - 2)
    q = (z - 1j) / (z + 1j)
    # q**k by cumulative products keeps the phase accurate for large k
    qk = np.empty((n_terms, z.size), complex)
    qk[0] = 1.0
    for j in range(1, n_terms):
        qk[j] = qk[j - 1] * q
    return _fk_prefactor(alpha) * sqrt_g[:, None] * base[None, :] * qk


def series_truncation(alpha: float, z, tol: float, max_terms: int = MAX_TERMS) -> int:
    """Number of terms so that the tail of ``sum f_k(z) conj f_k(w)`` is below ``tol``.

    Uses ``|f_k(z)| <= C sqrt(g_k) rho^k`` with ``rho = max |(z - i)/(z + i)|``
    and ``g_k = (2 - 2 alpha)_k / k! <= (k + 1)^(1 - 2 alpha)``.

    Raises
    ------
    ConvergenceError
        If more than ``max_terms`` terms are needed.
    """
    z = np.atleast_1d(np.asarray(z, complex))
    rho = float(np.max(np.abs((z - 1j) / (z + 1j))))
    cmax = float(np.max(np.abs(principal_power((z + 1j) / 2j, 2 * alpha - 2))))
    c2 = (_fk_prefactor(alpha) * cmax) ** 2
    r2 = rho * rho
    s = 1 - 2 * alpha
    for n in range(1, max_terms + 1):
        # tail sum_{k >= n} (k+1)^s r2^k, bounded geometrically
        lead = (n + 1) ** s * r2 ** n
        growth = r2 * ((n + 2) / (n + 1)) ** s
        if growth < 1 and c2 * lead / (1 - growth) < tol:
            return n
    raise ConvergenceError(
        f"series needs more than {max_terms} terms (rho = {rho:.6f})"
    )
