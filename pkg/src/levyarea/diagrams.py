"""Wick calculus for bilinear Gaussian functionals.

The moments of ``A = sum_i X_i Y_i`` with independent centered Gaussian
vectors ``X ~ N(0, K)`` and ``Y ~ N(0, K')`` expand over pairs of perfect
matchings of the ``2N`` factors. Each pair of matchings decomposes the
factors into closed alternating cycles, and a cycle with ``2n`` vertices
contributes ``trace((K K')^n)``. The continuous area is the same object
with matrices replaced by integral operators.
"""

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
import itertools
import math

import numpy as np

from .errors import BudgetError, MissingCumulantError, PreconditionError

__all__ = [
    "Pairing",
    "Diagram",
    "enumerate_pairings",
    "diagram_cycles",
    "count_connected_diagrams",
    "cumulants_from_connected",
    "moments_from_cumulants",
    "cumulants_from_moments",
    "moments_by_series",
    "isserlis_oracle",
    "isserlis_tensor",
    "wick_moment",
    "bilinear_moment_isserlis",
    "empirical_cumulants",
]

MAX_PAIRING_ORDER = 12
MAX_ISSERLIS_ORDER = 10


@dataclass(frozen=True)
class Pairing:
    """Perfect matching of ``{0, ..., n - 1}`` stored as sorted pairs."""

    pairs: tuple

    def __post_init__(self):
        flat = [i for pr in self.pairs for i in pr]
        if sorted(flat) != list(range(len(flat))):
            raise PreconditionError("a pairing must use every index exactly once")
        object.__setattr__(self, "pairs", tuple(sorted(tuple(sorted(p)) for p in self.pairs)))

    @property
    def size(self) -> int:
        return 2 * len(self.pairs)

    def partner(self) -> list:
        out = [0] * self.size
        for i, j in self.pairs:
            out[i] = j
            out[j] = i
        return out


@dataclass(frozen=True)
class Diagram:
    """A ``K'`` matching and a ``K`` matching on the same vertex set."""

    kprime_pairing: Pairing
    k_pairing: Pairing

    def __post_init__(self):
        if self.kprime_pairing.size != self.k_pairing.size:
            raise PreconditionError("both pairings must cover the same vertices")


@lru_cache(maxsize=None)
def _pairings(n2: int) -> tuple:
    if n2 == 0:
        return ((),)
    out = []
    for j in range(1, n2):
        rest = [k for k in range(1, n2) if k != j]
        for sub in _pairings(n2 - 2):
            out.append(((0, j),) + tuple((rest[a], rest[b]) for a, b in sub))
    return tuple(out)


def enumerate_pairings(n2: int) -> list:
    """All ``(n2 - 1)!!`` perfect matchings of ``n2`` indices.

    The order is lexicographic in the sorted list of pairs.

    Raises
    ------
    BudgetError
        For ``n2 > 12``.
    """
    if n2 < 0 or n2 % 2:
        raise PreconditionError("need a non-negative even number of indices")
    if n2 > MAX_PAIRING_ORDER:
        raise BudgetError(f"at most {MAX_PAIRING_ORDER} indices are enumerated")
    return [Pairing(p) for p in _pairings(n2)]


def diagram_cycles(d: Diagram) -> list:
    """Alternating cycles of a diagram, each a list of vertices.

    A cycle starts at its smallest vertex and follows the ``K'`` edge
    first. Cycle lengths are even and sum to the number of vertices.
    """
    kp = d.kprime_pairing.partner()
    k = d.k_pairing.partner()
    seen = [False] * len(kp)
    cycles = []
    for start in range(len(kp)):
        if seen[start]:
            continue
        cyc = []
        v = start
        use_kprime = True
        while True:
            seen[v] = True
            cyc.append(v)
            v = kp[v] if use_kprime else k[v]
            use_kprime = not use_kprime
            if v == start and use_kprime:
                break
        cycles.append(cyc)
    return cycles


def count_connected_diagrams(N: int) -> int:
    """Number of ordered pairs of matchings forming a single cycle on ``2N`` vertices.

    Equals ``(2N - 1)!``.
    """
    pairings = enumerate_pairings(2 * N)
    count = 0
    for p, q in itertools.product(pairings, repeat=2):
        if len(diagram_cycles(Diagram(p, q))) == 1:
            count += 1
    return count


def cumulants_from_connected(phi: dict) -> dict:
    """``kappa_2n = (2n - 1)! * phi_2n`` for connected moments ``phi``."""
    return {order: math.factorial(order - 1) * val for order, val in phi.items()}


def _even_partitions(total: int, max_part: int | None = None):
    """Partitions of ``total`` into even parts, largest first."""
    if total == 0:
        yield ()
        return
    if max_part is None:
        max_part = total
    for part in range(min(total, max_part) // 2 * 2, 0, -2):
        for rest in _even_partitions(total - part, part):
            yield (part,) + rest


def moments_from_cumulants(kappa: dict, order: int) -> float:
    """Moment of given even order from even cumulants (odd ones vanish).

    Sums ``order! / prod((2j)!^N_j N_j!) * prod(kappa_2j^N_j)`` over the
    ways of splitting ``order`` into even blocks.

    Raises
    ------
    MissingCumulantError
        If a needed cumulant is absent.
    """
    if order < 0 or order % 2:
        raise PreconditionError("order must be even and non-negative")
    needed = range(2, order + 1, 2)
    missing = [k for k in needed if k not in kappa]
    if missing:
        raise MissingCumulantError(f"cumulants of order {missing} are missing")
    total = 0.0
    for parts in _even_partitions(order):
        mult = Counter(parts)
        coef = math.factorial(order)
        term = 1.0
        for size, cnt in mult.items():
            coef //= math.factorial(size) ** cnt * math.factorial(cnt)
            term *= kappa[size] ** cnt
        total += coef * term
    return total


def cumulants_from_moments(moments: dict, order: int) -> dict:
    """Invert :func:`moments_from_cumulants` for a symmetric law.

    ``moments`` maps even orders to raw moments (zero mean assumed).
    """
    kappa = {}
    for n in range(2, order + 1, 2):
        if n not in moments:
            raise MissingCumulantError(f"moment of order {n} is missing")
        kappa[n] = 0.0
        kappa[n] = moments[n] - moments_from_cumulants(kappa, n)
    return kappa


def moments_by_series(kappa: dict, order: int) -> dict:
    """Moments up to ``order`` by exponentiating the cumulant power series.

    Uses ``g = exp(f)``, ``g' = f' g`` on the Taylor coefficients of
    ``f(x) = sum kappa_n x^n / n!``. Independent of the partition sum.
    """
    f = np.zeros(order + 1)
    for n, v in kappa.items():
        if n <= order:
            f[n] = v / math.factorial(n)
    g = np.zeros(order + 1)
    g[0] = 1.0
    for n in range(1, order + 1):
        g[n] = sum(k * f[k] * g[n - k] for k in range(1, n + 1)) / n
    return {n: g[n] * math.factorial(n) for n in range(2, order + 1, 2)}


def isserlis_oracle(cov, monomial) -> float:
    """``E[prod_k X_{i_k}]`` for ``X ~ N(0, cov)`` by summing over matchings.

    Parameters
    ----------
    cov : array_like
        Symmetric covariance matrix.
    monomial : sequence of int
        Variable indices, repetitions allowed, length at most 10.
    """
    cov = np.asarray(cov, float)
    idx = list(monomial)
    if len(idx) > MAX_ISSERLIS_ORDER:
        raise BudgetError(f"monomials of degree > {MAX_ISSERLIS_ORDER} are not expanded")
    if len(idx) % 2:
        return 0.0
    total = 0.0
    for p in _pairings(len(idx)):
        prod = 1.0
        for i, j in p:
            prod *= cov[idx[i], idx[j]]
        total += prod
    return total


def isserlis_tensor(cov, order: int) -> np.ndarray:
    """All moments ``E[X_{i_1} ... X_{i_order}]`` as a dense tensor."""
    cov = np.asarray(cov, float)
    m = cov.shape[0]
    if order > MAX_ISSERLIS_ORDER:
        raise BudgetError(f"order > {MAX_ISSERLIS_ORDER}")
    out = np.zeros((m,) * order)
    letters = "abcdefghijklmnop"
    for p in _pairings(order):
        subs = ",".join(letters[i] + letters[j] for i, j in p)
        out += np.einsum(subs + "->" + letters[:order], *([cov] * len(p)))
    return out


def wick_moment(k, kprime, N: int) -> float:
    """``E[A^(2N)]`` for ``A = sum_i X_i Y_i`` via the diagram expansion.

    Each ordered pair of matchings contributes the product over its cycles
    of ``trace((K K')^(len / 2))``.
    """
    k = np.asarray(k, float)
    kprime = np.asarray(kprime, float)
    m = k @ kprime
    traces = {}
    power = np.eye(m.shape[0])
    for n in range(1, N + 1):
        power = power @ m
        traces[2 * n] = float(np.trace(power))
    pairings = enumerate_pairings(2 * N)
    total = 0.0
    for p, q in itertools.product(pairings, repeat=2):
        prod = 1.0
        for cyc in diagram_cycles(Diagram(q, p)):
            prod *= traces[len(cyc)]
        total += prod
    return total


def bilinear_moment_isserlis(k, kprime, N: int) -> float:
    """``E[A^(2N)]`` for ``A = sum_i X_i Y_i`` by brute-force Isserlis.

    Expands ``A^(2N)`` over all index tuples and applies Isserlis to each
    of the two independent vectors separately.
    """
    tx = isserlis_tensor(k, 2 * N)
    ty = isserlis_tensor(kprime, 2 * N)
    return float(np.sum(tx * ty))


def empirical_cumulants(samples, order: int = 4) -> dict:
    """Even cumulants from centered sample moments."""
    x = np.asarray(samples, float)
    x = x - x.mean()
    moments = {n: float(np.mean(x ** n)) for n in range(2, order + 1, 2)}
    return cumulants_from_moments(moments, order)
