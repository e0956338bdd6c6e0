"""Closed forms of the master integrals in terms of 2F1.

For real exponents ``b1``, ``b2`` (``b2 > -1``) and ``p = b1 + b2 + 1``::

    I_-(a, b) = int_0^t (-i(u - a))^b1 (-i(u - b))^b2 du
    I_+(a, b) = int_0^t ( i(u - a))^b1 (-i(u - b))^b2 du

Both reduce to the block ``Phi(s) = (-i(s - b))^p 2F1(-b1, -p; -b1 - b2;
(a - b)/(s - b))`` evaluated at ``s = 0`` and ``s = t``. ``I_+`` carries an
extra term ``(i(b - a))^p`` that is not analytic in ``a`` around ``b``.
"""

from dataclasses import dataclass
import cmath
import math

from .errors import DomainError, PoleError, PreconditionError
from .special_functions import gamma_real, hyp2f1, principal_power, rgamma

__all__ = [
    "PowerPair",
    "IntegralArgs",
    "phi_block",
    "i_minus",
    "i_plus",
    "i_plus_singular_coefficient",
    "c_n_coeff",
    "f_n_appendix",
    "PHI_LOW",
    "PHI_HIGH",
]

PHI_LOW = 0.9
PHI_HIGH = 1.1
_BAND = 0.1  # width of the dual-evaluation bands next to the thresholds


@dataclass(frozen=True)
class PowerPair:
    beta1: float
    beta2: float

    def __post_init__(self):
        if not self.beta2 > -1:
            raise PreconditionError(f"beta2 must exceed -1, got {self.beta2}")
        object.__setattr__(self, "beta1", float(self.beta1))
        object.__setattr__(self, "beta2", float(self.beta2))

    @property
    def p(self) -> float:
        return self.beta1 + self.beta2 + 1


@dataclass(frozen=True)
class IntegralArgs:
    """Interval length ``t`` and the two complex offsets ``a``, ``b``."""

    t: float
    a: complex
    b: complex

    def __post_init__(self):
        t, a, b = float(self.t), complex(self.a), complex(self.b)
        if not t > 0:
            raise PreconditionError("t must be positive")
        if not (0 < a.real < t and 0 < b.real < t):
            raise DomainError("need 0 < Re a < t and 0 < Re b < t")
        if b.imag > 0:
            raise DomainError("need Im b <= 0")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def _check_p(pp: PowerPair):
    if abs(pp.p) < 1e-8:
        raise PreconditionError("beta1 + beta2 + 1 vanishes")


def _phi_general(b1, b2, s, a, b):
    p = b1 + b2 + 1
    w = (a - b) / (s - b)
    return principal_power(-1j * (s - b), p) * hyp2f1(-b1, -p, -b1 - b2, w)


def _phi_zero_inner(b1, b2, a, b):
    # |a/b| small
    p = b1 + b2 + 1
    r = a / b
    g = gamma_real(-b1 - b2) * gamma_real(1 + b1) * rgamma(-b2)
    val = g * principal_power(1 - r, p) + p / (b1 + 1) * principal_power(r, 1 + b1) * hyp2f1(-b2, 1, b1 + 2, r)
    return principal_power(1j * b, p) * val


def _phi_zero_outer(b1, b2, a, b):
    # |a/b| large
    p = b1 + b2 + 1
    r = b / a
    g = gamma_real(-b1 - b2) * gamma_real(1 + b2) * rgamma(-b1)
    val = (g * principal_power(r, -p) * principal_power(1 - r, p)
           + p / (b2 + 1) * principal_power(r, -b1) * hyp2f1(-b1, 1, b2 + 2, r))
    return principal_power(1j * b, p) * val


def _phi_t_inner(b1, b2, t, a, b):
    # |(t - a)/(t - b)| small
    p = b1 + b2 + 1
    r = (t - a) / (t - b)
    g = gamma_real(-b1 - b2) * gamma_real(1 + b1) * rgamma(-b2)
    val = (g * principal_power((a - b) / (t - b), p)
           + p / (b1 + 1) * principal_power(r, 1 + b1) * hyp2f1(-b2, 1, b1 + 2, r))
    return principal_power(-1j * (t - b), p) * val


def _phi_t_outer(b1, b2, t, a, b):
    # |(t - a)/(t - b)| large
    p = b1 + b2 + 1
    r = (t - b) / (t - a)
    g = gamma_real(-b1 - b2) * gamma_real(1 + b2) * rgamma(-b1)
    val = (g * principal_power(r, -p) * principal_power((b - a) / (t - a), p)
           + p / (b2 + 1) * principal_power(r, -b1) * hyp2f1(-b1, 1, b2 + 2, r))
    return principal_power(-1j * (t - b), p) * val


def _integer_power(x: float) -> bool:
    return x >= -1e-12 and abs(x - round(x)) < 1e-12


def phi_block(pp: PowerPair, s: float, args: IntegralArgs, form: str = "auto",
              check: bool = False) -> complex:
    """The building block ``Phi(beta1, beta2; s)(a, b)`` for ``s`` in ``{0, t}``.

    Parameters
    ----------
    pp : PowerPair
    s : float
        ``0`` or ``args.t``.
    args : IntegralArgs
    form : {"auto", "general", "inner", "outer"}
        ``"general"`` is the defining 2F1 expression. ``"inner"`` and
        ``"outer"`` are its re-expansions for ``r < 0.9`` and ``r > 1.1``,
        where ``r = |a/b|`` at ``s = 0`` and ``|(t - a)/(t - b)|`` at
        ``s = t``. ``"auto"`` selects by ``r``.
    check : bool
        Within 0.1 of a threshold, also evaluate the general form and
        assert agreement to ``1e-8``.

    Raises
    ------
    DomainError
        If the 2F1 argument falls on its cut.
    """
    b1, b2 = pp.beta1, pp.beta2
    t, a, b = args.t, args.a, args.b
    if s == 0:
        r = abs(a / b)
        inner = lambda: _phi_zero_inner(b1, b2, a, b)  # noqa: E731
        outer = lambda: _phi_zero_outer(b1, b2, a, b)  # noqa: E731
    elif s == t:
        r = abs((t - a) / (t - b))
        inner = lambda: _phi_t_inner(b1, b2, t, a, b)  # noqa: E731
        outer = lambda: _phi_t_outer(b1, b2, t, a, b)  # noqa: E731
    else:
        raise PreconditionError("s must be 0 or t")
    w = (a - b) / (s - b)
    if w.imag == 0 and w.real >= 1:
        raise DomainError("2F1 argument on its cut")

    if form == "general":
        return _phi_general(b1, b2, s, a, b)
    if form == "inner":
        return inner()
    if form == "outer":
        return outer()
    if form != "auto":
        raise PreconditionError(f"unknown form {form!r}")
    if _integer_power(b1 + b2) or not (r < PHI_LOW or r > PHI_HIGH):
        # Gamma(-b1 - b2) has a pole; the 2F1 terminates when b1 is an integer too
        return _phi_general(b1, b2, s, a, b)
    try:
        val = inner() if r < PHI_LOW else outer()
    except PoleError:
        return _phi_general(b1, b2, s, a, b)
    if check and (PHI_LOW - _BAND < r < PHI_LOW or PHI_HIGH < r < PHI_HIGH + _BAND):
        ref = _phi_general(b1, b2, s, a, b)
        assert abs(val - ref) <= 1e-8 * max(abs(ref), 1e-300), (val, ref)
    return val


def i_minus(pp: PowerPair, args: IntegralArgs, form: str = "auto") -> complex:
    """``int_0^t (-i(u - a))^b1 (-i(u - b))^b2 du`` for ``Im a < Im b``.

    Examples
    --------
    >>> abs(i_minus(PowerPair(0.0, 0.0), IntegralArgs(1.0, 0.3 - 0.2j, 0.6 - 0.1j)) - 1) < 1e-14
    True
    """
    _check_p(pp)
    if not args.a.imag < args.b.imag:
        raise DomainError("I_- needs Im a < Im b")
    phi_t = phi_block(pp, args.t, args, form)
    phi_0 = phi_block(pp, 0.0, args, form)
    return 1j / pp.p * (phi_t - phi_0)


def i_plus_singular_coefficient(pp: PowerPair) -> float:
    """``Gamma(b2 + 1) Gamma(-p) / Gamma(-b1) * 2 sin(pi b2)``.

    Raises
    ------
    PoleError
        If ``Gamma(-p)`` has a pole.
    """
    s2 = math.sin(math.pi * pp.beta2)
    if pp.beta2.is_integer():
        return 0.0
    return gamma_real(pp.beta2 + 1) * gamma_real(-pp.p) * rgamma(-pp.beta1) * 2 * s2


def i_plus(pp: PowerPair, args: IntegralArgs, form: str = "auto") -> complex:
    """``int_0^t (i(u - a))^b1 (-i(u - b))^b2 du`` for ``Im a > 0``.

    The last term, ``-coef * (i(b - a))^p``, is the part that cannot be
    continued analytically around ``a = b``.
    """
    _check_p(pp)
    if not args.a.imag > 0:
        raise DomainError("I_+ needs Im a > 0")
    b1 = pp.beta1
    if float(-b1).is_integer() and -b1 <= 0:
        raise PoleError("Gamma(-beta1) is infinite; the formula degenerates")
    phi_t = phi_block(pp, args.t, args, form)
    phi_0 = phi_block(pp, 0.0, args, form)
    analytic = 1j / pp.p * (cmath.exp(1j * math.pi * b1) * phi_t
                            - cmath.exp(-1j * math.pi * b1) * phi_0)
    coef = i_plus_singular_coefficient(pp)
    if coef == 0:
        return analytic
    return analytic - coef * principal_power(1j * (args.b - args.a), pp.p)


def c_n_coeff(n: int, alpha: float) -> float:
    """Coefficient ``C_n`` of the non-analytic term of the iterated kernel.

    ``C_n = (1/2pi) (pi/2 / (cos(pi a) Gamma(-2a)))^(2n) sin(pi a)
    Gamma(2a + 1) Gamma(-2a - 4an)``.
    """
    if n < 0:
        raise PreconditionError("n must be >= 0")
    a = alpha
    pref = (math.pi / 2 / (math.cos(math.pi * a) * gamma_real(-2 * a))) ** (2 * n)
    return (pref * math.sin(math.pi * a) * gamma_real(2 * a + 1)
            * gamma_real(-2 * a - 4 * a * n) / (2 * math.pi))


# ---------------------------------------------------------------------------
# iterated integrals F_n
# ---------------------------------------------------------------------------

def _fn_exterior(alpha, beta, n, t, z):
    w = 1 - t / z
    nf = math.factorial(n)
    g1 = gamma_real(1 + beta) * gamma_real(n - 1 + 2 * alpha) * rgamma(n + 2 * alpha + beta) / nf
    g2 = gamma_real(-n + 1 - 2 * alpha) * rgamma(2 - 2 * alpha)
    first = (g1 * 1j * cmath.exp(-1j * math.pi * alpha) * principal_power(z, 2 * alpha - 1)
             * hyp2f1(2 - 2 * alpha, 1 + beta, -n + 2 - 2 * alpha, w))
    second = (g2 * principal_power(-1j * (z - t), 2 * alpha - 1) * w ** n
              * hyp2f1(n + 2 * alpha + beta, n + 1, n + 2 * alpha, w))
    return 1j / z * t ** (beta + n + 1) * (first + second)


def _fn_disk(alpha, beta, n, t, z):
    nf = math.factorial(n)
    g1 = gamma_real(2 * alpha + beta - 1) * rgamma(2 * alpha + beta + n)
    g2 = gamma_real(1 + beta) * gamma_real(1 - 2 * alpha - beta) * rgamma(2 - 2 * alpha) / nf
    first = (cmath.exp(1j * math.pi * alpha) * g1 * t ** (2 * alpha - 2)
             * hyp2f1(2 - 2 * alpha, 1 - 2 * alpha - beta - n, 2 - 2 * alpha - beta, z / t))
    second = (g2 * cmath.exp(-1j * math.pi * (alpha + beta + 1)) * t ** (-1 - beta)
              * principal_power(z, 2 * alpha + beta - 1) * hyp2f1(1 + beta, -n, 2 * alpha + beta, z / t))
    return -t ** (beta + n + 1) * (first + second)


def _fn_half_plane(alpha, beta, n, t, z):
    return (t ** (beta + n + 1) * principal_power(-1j * z, 2 * alpha - 2)
            * gamma_real(1 + beta) * rgamma(n + 2 + beta)
            * hyp2f1(2 - 2 * alpha, 1 + beta, n + 2 + beta, t / z))


def f_n_appendix(alpha: float, beta: float, n: int, t: float, z, form: str = "auto") -> complex:
    """``F_n = int_0^t (t - u)^n / n! u^beta (-i(z - u))^(2 alpha - 2) du``.

    Continued analytically to the plane cut along the negative real axis
    and along ``{t - iy, y >= 0}``.

    Parameters
    ----------
    alpha, beta : float
        ``beta > -1`` and ``2 alpha`` not an integer.
    n : int
        Number of extra integrations, ``n >= 0``.
    t : float
        Upper limit, ``t > 0``.
    z : complex
        Off the two cuts.
    form : {"auto", "exterior", "disk", "half_plane"}
        ``"disk"`` is the expansion in ``z/t`` valid for ``|z| < t``,
        ``"exterior"`` the expansion in ``1 - t/z``, valid on the whole cut
        plane. ``"half_plane"`` is the Euler integral form in ``t/z``,
        valid for ``Im z > 0`` only. ``"auto"`` uses the disk form for
        ``|z/t| < 0.9`` unless ``2 alpha + beta`` is close to an integer.
    """
    z = complex(z)
    if not beta > -1:
        raise PreconditionError("beta must exceed -1")
    if float(2 * alpha).is_integer():
        raise PreconditionError("2 alpha must not be an integer")
    if n < 0 or t <= 0:
        raise PreconditionError("need n >= 0 and t > 0")
    if z.imag == 0 and z.real <= 0:
        raise DomainError("z on the negative real axis")
    if z.real == t and z.imag <= 0:
        raise DomainError("z on the cut below t")
    if form == "auto":
        gap = 2 * alpha + beta
        near_int = abs(gap - round(gap)) < 1e-6
        form = "disk" if abs(z) < 0.9 * t and not near_int else "exterior"
    if form == "exterior":
        return _fn_exterior(alpha, beta, n, t, z)
    if form == "disk":
        if abs(z) >= t:
            raise DomainError("disk form needs |z| < t")
        return _fn_disk(alpha, beta, n, t, z)
    if form == "half_plane":
        if z.imag <= 0:
            raise DomainError("half-plane form needs Im z > 0")
        return _fn_half_plane(alpha, beta, n, t, z)
    raise PreconditionError(f"unknown form {form!r}")
