"""Predicted constants, scaling fits and statistical checks for the area."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize, stats

from .errors import FitError, PreconditionError, RangeError
from .special_functions import gamma_real
from .simulate import AreaSamples, PathEnsemble

__all__ = [
    "c_irr",
    "second_moment_singular_coefficient",
    "predicted_moment",
    "ScalingFit",
    "fit_scaling",
    "TestReport",
    "ks_gaussian_test",
    "independence_test",
    "factorization_check",
    "exp_moment_check",
    "markov_tail_check",
    "increment_column",
    "KS_CONSTANT",
    "C0_DEFAULT",
]

KS_CONSTANT = 1.63
C0_DEFAULT = 2.0


def c_irr(N: int, alpha: float) -> float:
    """Singular coefficient ``C_irr,N`` of the connected moments.

    ``(pi/2 / (cos(pi a) Gamma(-2a)))^(2(N-1)) sin(pi a) Gamma(2a + 1)
    / Gamma(2 - 2a) * Gamma(1 - 4aN) * (2N)^(4aN - 1)``.

    See Also
    --------
    second_moment_singular_coefficient : the coefficient of ``eta^(4a-1)``
        in ``E[A^2]`` computed directly from the kernels.
    """
    if N < 1:
        raise PreconditionError("N must be >= 1")
    a = alpha
    pref = (math.pi / 2 / (math.cos(math.pi * a) * gamma_real(-2 * a))) ** (2 * (N - 1))
    return (pref * math.sin(math.pi * a) * gamma_real(2 * a + 1) / gamma_real(2 - 2 * a)
            * gamma_real(1 - 4 * a * N) * (2 * N) ** (4 * a * N - 1))


def second_moment_singular_coefficient(alpha: float) -> float:
    """Coefficient ``S`` in ``E[A_{0,t}^2] = S t eta^(4a-1) + O(1)``.

    Obtained by integrating the kernels exactly as defined (with
    ``K'`` carrying its prefactor ``a (1 - 2a) / (2 cos pi a)``)::

        S = a^2 (1 - 2a) sqrt(pi) Gamma(1/2 - 2a) / (2 cos^2(pi a) Gamma(2 - 2a))

    which equals ``c_irr(1, a) * a (1 - 2a) / cos(pi a)``.
    """
    a = alpha
    return (a * a * (1 - 2 * a) * math.sqrt(math.pi) * gamma_real(0.5 - 2 * a)
            / (2 * math.cos(math.pi * a) ** 2 * gamma_real(2 - 2 * a)))


def predicted_moment(N: int, alpha: float, t: float, eta: float, coefficient: float | None = None) -> float:
    """Leading order of ``E[A^(2N)]``: ``(2N - 1)!! (C t)^N eta^((4a - 1) N)``.

    ``C`` defaults to ``c_irr(1, alpha)``.
    """
    c = c_irr(1, alpha) if coefficient is None else coefficient
    dfact = math.prod(range(2 * N - 1, 0, -2))
    return dfact * (c * t) ** N * eta ** ((4 * alpha - 1) * N)


@dataclass
class ScalingFit:
    """Log-log fit of the singular part ``value - regular``.

    ``slope`` and ``intercept`` describe ``ln(singular) = intercept + slope
    ln(eta)``; ``residual`` is the largest absolute log residual.
    ``coefficient`` is the amplitude of ``eta^exponent`` from the linear
    stage with the exponent held fixed.
    """

    etas: list
    values: list
    slope: float
    intercept: float
    residual: float
    regular_estimate: float = math.nan
    coefficient: float = math.nan
    exponent: float = math.nan
    corrections: dict = field(default_factory=dict)
    singular: list = field(default_factory=list)
    fitted: list = field(default_factory=list)

    @property
    def amplitude(self) -> float:
        """``exp(intercept)``, the free-exponent amplitude."""
        return math.exp(self.intercept)


def fit_scaling(pairs, regular_estimate: float | None = None, exponent: float | None = None,
                correction_exponents=()) -> ScalingFit:
    """Separate ``value(eta) = R + S eta^p + sum_j Q_j eta^(e_j)`` and fit its slope.

    Parameters
    ----------
    pairs : sequence of (eta, value)
        At least three values spanning a factor of four in ``eta``.
    regular_estimate : float, optional
        Known regular part ``R``. If omitted it is estimated: with
        ``exponent`` given, by linear least squares on the basis
        ``1, eta^p, eta^(e_j)``; otherwise by a three-parameter nonlinear
        fit of ``R + S eta^p``.
    exponent : float, optional
        Exponent ``p`` of the singular term used during separation.
    correction_exponents : sequence of float
        Exponents of regular corrections removed together with ``R``.

    Returns
    -------
    ScalingFit
        ``slope`` and ``intercept`` come from the least-squares line on
        ``(ln eta, ln(value - R - sum Q_j eta^e_j))``.

    Raises
    ------
    FitError
        If the separated singular part is not positive.
    """
    data = sorted((float(e), float(v)) for e, v in pairs)
    etas = np.array([d[0] for d in data])
    vals = np.array([d[1] for d in data])
    if etas.size < 3:
        raise PreconditionError("need at least three points")
    if etas.max() / etas.min() < 4 * (1 - 1e-12):
        raise PreconditionError("etas must span a factor of at least 4")
    corr = tuple(float(c) for c in correction_exponents)
    coef = math.nan
    q = {}
    if regular_estimate is None:
        if exponent is None:
            if corr:
                raise PreconditionError("correction exponents need a fixed exponent")

            def model(e, r, s, pw):
                return r + s * e ** pw

            guess = (vals[-1], vals[0] - vals[-1], -0.5)
            try:
                (reg, coef, exponent), _ = optimize.curve_fit(model, etas, vals, p0=guess, maxfev=20000)
            except RuntimeError as exc:
                raise FitError(f"nonlinear fit failed: {exc}") from None
        else:
            basis = np.column_stack([np.ones_like(etas), etas ** exponent] + [etas ** c for c in corr])
            if basis.shape[1] > etas.size:
                raise PreconditionError("more fit terms than data points")
            sol, *_ = np.linalg.lstsq(basis, vals, rcond=None)
            reg, coef = float(sol[0]), float(sol[1])
            q = {c: float(x) for c, x in zip(corr, sol[2:])}
    else:
        reg = float(regular_estimate)
        if corr:
            if exponent is None:
                raise PreconditionError("correction exponents need a fixed exponent")
            basis = np.column_stack([etas ** exponent] + [etas ** c for c in corr])
            sol, *_ = np.linalg.lstsq(basis, vals - reg, rcond=None)
            coef = float(sol[0])
            q = {c: float(x) for c, x in zip(corr, sol[1:])}
    regular = reg + sum(qv * etas ** c for c, qv in q.items())
    singular = vals - regular
    if np.any(singular <= 0):
        raise FitError("singular part is not positive after subtracting the regular part")
    x = np.log(etas)
    y = np.log(singular)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = intercept + slope * x
    residual = float(np.max(np.abs(y - fitted)))
    return ScalingFit(
        etas=etas.tolist(), values=vals.tolist(), slope=float(slope), intercept=float(intercept),
        residual=residual, regular_estimate=float(reg), coefficient=float(coef),
        exponent=float(exponent) if exponent is not None else math.nan, corrections=q,
        singular=singular.tolist(), fitted=(regular + np.exp(fitted)).tolist())


@dataclass(frozen=True)
class TestReport:
    """Outcome of a one-sided check: ``passed`` iff ``statistic <= threshold``."""

    statistic: float
    threshold: float
    passed: bool
    n: int
    details: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def as_dict(self) -> dict:
        return {"statistic": self.statistic, "threshold": self.threshold,
                "pass": self.passed, "n": self.n, **self.details}


def _report(stat, thr, n, **details) -> TestReport:
    stat = float(stat)
    thr = float(thr)
    return TestReport(stat, thr, bool(stat <= thr), int(n), details)


def ks_gaussian_test(samples, variance: float) -> TestReport:
    """Kolmogorov-Smirnov distance to ``N(0, variance)``; threshold ``1.63/sqrt(n)``."""
    x = np.asarray(samples, float)
    n = x.size
    if n < 500:
        raise PreconditionError("the KS check needs at least 500 samples")
    if not variance > 0:
        raise PreconditionError("variance must be positive")
    d = stats.kstest(x, "norm", args=(0.0, math.sqrt(variance))).statistic
    return _report(d, KS_CONSTANT / math.sqrt(n), n, variance=float(variance),
                   sample_variance=float(np.var(x)))


def increment_column(e: PathEnsemble, component: int, s: float, t: float) -> np.ndarray:
    """``B^(component)(t) - B^(component)(s)`` for every path (components 1, 2)."""
    b = {1: e.B1, 2: e.B2}.get(component)
    if b is None:
        raise PreconditionError("component must be 1 or 2")
    return b[:, e.grid.index(t)] - b[:, e.grid.index(s)]


def independence_test(e: PathEnsemble, area: AreaSamples, increments) -> TestReport:
    """Largest absolute correlation between rescaled areas and path increments.

    ``increments`` lists ``(component, s, t)`` triples. Threshold
    ``3 / sqrt(n)``.
    """
    a = np.asarray(area.rescaled, float)
    n = a.size
    if n < 500:
        raise PreconditionError("the independence check needs at least 500 samples")
    corrs = []
    for comp, s, t in increments:
        col = increment_column(e, comp, s, t)
        r = float(np.corrcoef(a, col)[0, 1])
        if abs(r) > 1 - 1e-12:
            raise PreconditionError("a column is perfectly correlated with the area")
        corrs.append(r)
    worst = max(abs(r) for r in corrs)
    return _report(worst, 3 / math.sqrt(n), n, correlations=corrs)


def factorization_check(area, increment) -> dict:
    """Compare ``E[A^2 X^2]`` with ``E[A^2] E[X^2]``.

    Returns the two sides and the standard error of the difference, taken
    from the sample of ``A^2 X^2 - A^2 E[X^2] - E[A^2] X^2``.
    """
    a2 = np.asarray(area, float) ** 2
    x2 = np.asarray(increment, float) ** 2
    n = a2.size
    mixed = float(np.mean(a2 * x2))
    ea, ex = float(a2.mean()), float(x2.mean())
    influence = a2 * x2 - a2 * ex - ea * x2
    se = float(np.std(influence, ddof=1) / math.sqrt(n))
    return {"mixed": mixed, "product": ea * ex, "se": se,
            "z": (mixed - ea * ex) / se if se > 0 else math.inf}


def _check_alpha_range(alpha):
    if not 1 / 8 < alpha < 1 / 4:
        raise RangeError(f"the exponential moment bound needs alpha in (1/8, 1/4), got {alpha}")


def exp_moment_check(samples, lambdas, t_minus_s: float, alpha: float, eta: float,
                     c0: float = C0_DEFAULT, coefficient: float | None = None) -> TestReport:
    """Empirical ``E[exp(lambda A)]`` against ``c0 exp(C |t-s| lambda^2 / 2)``.

    ``C`` defaults to ``c_irr(1, alpha)``. The statistic is the worst ratio
    of empirical moment to bound; the check passes when it is at most 1.
    ``details["largest_lambda_holding"]`` is the largest ``|lambda|`` up to
    which every tested value satisfies the bound. ``eta`` is recorded for
    reference.
    """
    _check_alpha_range(alpha)
    x = np.asarray(samples, float)
    c = c_irr(1, alpha) if coefficient is None else coefficient
    ratios = {}
    empirical = {}
    for lam in lambdas:
        m = float(np.mean(np.exp(lam * x)))
        bound = c0 * math.exp(0.5 * c * abs(t_minus_s) * lam * lam)
        empirical[float(lam)] = m
        ratios[float(lam)] = m / bound
    worst = max(ratios.values())
    # largest lambda below which every tested lambda satisfies the bound
    holds = None
    for lam in sorted(ratios, key=abs):
        if ratios[lam] > 1:
            break
        holds = lam
    return _report(worst, 1.0, x.size, ratios=ratios, moments=empirical, c0=c0,
                   coefficient=c, eta=float(eta), largest_lambda_holding=holds)


def markov_tail_check(samples, t_minus_s: float, alpha: float, levels=(2.0, 3.0),
                      c0: float = C0_DEFAULT, coefficient: float | None = None) -> TestReport:
    """Tail probabilities against the Markov bound from the exponential moment.

    For ``A = k sqrt(C |t-s|)`` the optimized bound is
    ``P(A_tilde >= A) <= c0 exp(-k^2 / 2)``; each tail is checked separately.
    The statistic is the worst ratio of empirical tail to bound.
    """
    _check_alpha_range(alpha)
    x = np.asarray(samples, float)
    c = c_irr(1, alpha) if coefficient is None else coefficient
    sd = math.sqrt(c * abs(t_minus_s))
    ratios = {}
    for k in levels:
        bound = c0 * math.exp(-0.5 * k * k)
        tail = max(float(np.mean(x >= k * sd)), float(np.mean(x <= -k * sd)))
        ratios[float(k)] = tail / bound
    return _report(max(ratios.values()), 1.0, x.size, ratios=ratios, c0=c0, coefficient=c)
