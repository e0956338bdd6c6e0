"""Sampling of the regularized two-dimensional process and its Levy area.

Each component is a centered Gaussian process with covariance
``k_real(eta; x, y)``; the two components are independent. Two samplers
are provided: exact factorization of the covariance matrix on the grid
(``"cholesky"``) and the truncated analytic series (``"series"``).

Randomness comes from numpy's counter-based Philox generator keyed by
``(seed, path index)``. Within a path the stream is consumed in a fixed
layout (component, then index), so every path is reproducible on its own
and ensembles do not depend on how the work is split across threads.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import struct

import numpy as np
import scipy.linalg

from .errors import CholeskyError, GridError, PreconditionError
from .kernels import ModelParams, basis_fk_matrix, k_real, series_truncation
from .quadrature import gauss_legendre

__all__ = [
    "TimeGrid",
    "PathEnsemble",
    "AreaSample",
    "AreaSamples",
    "sample_paths",
    "levy_area",
    "overlap_covariance",
    "covariance_factor",
    "DEFAULT_SEED",
    "RNG_NAME",
    "B_CONVENTION",
]

DEFAULT_SEED = 20240601
RNG_NAME = f"numpy.random.Philox (4x64, key=(seed, path)), numpy {np.__version__}"
B_CONVENTION = (
    "B(eta)_t = 2 Re Gamma_(t + i eta/2); Cov(B'(eta)_x, B'(eta)_y) = "
    "2 Re K'(eta; x, y), Cov(B(eta)_x, B(eta)_y) = 2 Re K(eta; x, y)"
)
CHUNK = 256
MAX_JITTER = 1e-8
_MAGIC = b"LVYAREA1"
_HEADER = struct.Struct("<8sIddQQQdB7x")
_METHODS = ("cholesky", "series")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing time points with nominal spacing ``step``."""

    points: np.ndarray
    step: float

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2 or np.any(np.diff(pts) <= 0):
            raise GridError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "step", float(self.step))

    @classmethod
    def uniform(cls, T: float, step: float) -> "TimeGrid":
        n = int(round(T / step))
        if n < 1 or abs(n * step - T) > 1e-9 * T:
            raise GridError(f"T = {T} is not a multiple of step = {step}")
        return cls(step * np.arange(n + 1), step)

    def index(self, time: float) -> int:
        """Position of ``time`` on the grid, or ``GridError``."""
        i = int(np.searchsorted(self.points, time - 1e-9 * self.step))
        if i < self.points.size and abs(self.points[i] - time) <= 1e-9 * max(self.step, abs(time)):
            return i
        raise GridError(f"time {time} is not a grid point")


@dataclass(frozen=True)
class PathEnsemble:
    params: ModelParams
    grid: TimeGrid
    seed: int
    n_paths: int
    B1: np.ndarray = field(repr=False)
    B2: np.ndarray = field(repr=False)
    method: str = "cholesky"

    def save(self, path) -> None:
        """Write the ensemble to the binary cache format.

        Layout (little-endian): the header ``struct`` ``<8sIddQQQdB7x``
        holding magic ``LVYAREA1``, format version, alpha, eta, seed,
        n_paths, number of grid points, step and method code; then the
        grid points, then ``B1`` and ``B2`` row-major, all float64.
        """
        head = _HEADER.pack(_MAGIC, 1, self.params.alpha, self.params.eta, self.seed,
                            self.n_paths, self.grid.points.size, self.grid.step,
                            _METHODS.index(self.method))
        with open(path, "wb") as fh:
            fh.write(head)
            for arr in (self.grid.points, self.B1, self.B2):
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "PathEnsemble":
        with open(path, "rb") as fh:
            raw = fh.read()
        magic, version, alpha, eta, seed, n_paths, n_grid, step, code = _HEADER.unpack_from(raw)
        if magic != _MAGIC or version != 1:
            raise PreconditionError(f"{path} is not an ensemble cache")
        off = _HEADER.size
        data = np.frombuffer(raw, dtype="<f8", offset=off)
        pts = data[:n_grid]
        size = n_paths * n_grid
        b1 = data[n_grid:n_grid + size].reshape(n_paths, n_grid).astype(float)
        b2 = data[n_grid + size:n_grid + 2 * size].reshape(n_paths, n_grid).astype(float)
        return cls(ModelParams(alpha, eta), TimeGrid(pts.copy(), step), seed, n_paths,
                   b1, b2, _METHODS[code])


@dataclass(frozen=True)
class AreaSample:
    s: float
    t: float
    value: float
    rescaled: float


@dataclass(frozen=True)
class AreaSamples:
    """Areas over ``[s, t]`` for every path of an ensemble.

    ``rescaled = eta^((1 - 4 alpha)/2) * value``.
    """

    s: float
    t: float
    value: np.ndarray
    rescaled: np.ndarray

    def __len__(self):
        return self.value.size

    def __getitem__(self, i) -> AreaSample:
        return AreaSample(self.s, self.t, float(self.value[i]), float(self.rescaled[i]))


def _path_normals(seed: int, path: int, shape) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=[seed, path]))
    return gen.standard_normal(shape)


def covariance_factor(p: ModelParams, points) -> np.ndarray:
    """Lower Cholesky factor of ``k_real`` on ``points``.

    Diagonal jitter ``j * max(diag)`` is added with ``j`` escalating from 0
    through ``1e-14, 1e-13, ...`` up to ``1e-8``.

    Raises
    ------
    CholeskyError
        If even the largest jitter fails.
    """
    x = np.asarray(points, float)
    cov = k_real(p, x[:, None], x[None, :])
    scale = float(np.max(np.diag(cov)))
    jitters = [0.0] + [10.0 ** e for e in range(-14, -7)]
    for j in jitters:
        try:
            return scipy.linalg.cholesky(cov + j * scale * np.eye(x.size), lower=True,
                                         check_finite=False)
        except np.linalg.LinAlgError:
            continue
    raise CholeskyError(f"covariance not factorizable with jitter up to {MAX_JITTER:g}")


def _series_operator(p: ModelParams, points: np.ndarray, tol: float):
    """Linear map from series coefficients to path increments."""
    rule = gauss_legendre(8)
    lo, hi = points[:-1], points[1:]
    h = 0.5 * (hi - lo)
    u = (lo[:, None] + h[:, None] * (rule.nodes[None, :] + 1.0))
    w = h[:, None] * rule.weights[None, :]
    z = u.ravel() + 0.5j * p.eta
    n_terms = series_truncation(p.alpha, np.array([points[0], points[-1]]) + 0.5j * p.eta, tol)
    fk = basis_fk_matrix(p.alpha, n_terms, z).reshape(n_terms, lo.size, 8)
    cells = np.einsum("kcj,cj->kc", fk, w)  # integral of f_k over each cell
    return cells, n_terms


def sample_paths(p: ModelParams, grid: TimeGrid, n_paths: int, seed: int = DEFAULT_SEED,
                 method: str = "cholesky", workers: int = 1, series_tol: float = 1e-10) -> PathEnsemble:
    """Sample ``n_paths`` independent copies of ``(B1(eta), B2(eta))`` on a grid.

    Parameters
    ----------
    p : ModelParams
        ``eta > 0``.
    grid : TimeGrid
        Spacing at most ``eta / 10``.
    n_paths : int
    seed : int
        Non-negative 64-bit key.
    method : {"cholesky", "series"}
        ``"cholesky"`` factors the grid covariance. ``"series"`` draws
        complex coefficients ``xi_k`` and sets ``B' = 2 Re sum f_k xi_k``
        integrated over grid cells, plus an independent Gaussian value at
        the first grid point so that the law matches ``k_real``; it is
        only practical for moderate ``eta`` (``rho`` well below 1).
    workers : int
        Threads used for path generation; results do not depend on it.
    series_tol : float
        Tail bound of the truncated series.

    Returns
    -------
    PathEnsemble
    """
    p.require_positive_eta()
    if method not in _METHODS:
        raise PreconditionError(f"unknown method {method!r}")
    if grid.step > p.eta / 10 * (1 + 1e-9) or np.max(np.diff(grid.points)) > grid.step * (1 + 1e-9):
        raise GridError(f"grid step must be <= eta/10 = {p.eta / 10}")
    if n_paths < 0:
        raise PreconditionError("n_paths must be >= 0")
    if not 0 <= seed < 2 ** 64:
        raise PreconditionError("seed must be a non-negative 64-bit integer")
    m = grid.points.size
    b1 = np.empty((n_paths, m))
    b2 = np.empty((n_paths, m))
    if n_paths == 0:
        return PathEnsemble(p, grid, seed, 0, b1, b2, method)

    if method == "cholesky":
        lt = covariance_factor(p, grid.points).T.copy()

        def fill(start):
            stop = min(start + CHUNK, n_paths)
            z = np.stack([_path_normals(seed, i, (2, m)) for i in range(start, stop)])
            b1[start:stop] = z[:, 0, :] @ lt
            b2[start:stop] = z[:, 1, :] @ lt
    else:
        cells, n_terms = _series_operator(p, grid.points, series_tol)
        sd0 = math.sqrt(float(k_real(p, grid.points[0], grid.points[0])))
        # rows: 2 Re(sum_k xi_k F_k) with xi = (g1 + i g2)/sqrt 2
        re_op = math.sqrt(2.0) * cells.real
        im_op = -math.sqrt(2.0) * cells.imag

        def fill(start):
            stop = min(start + CHUNK, n_paths)
            g = np.stack([_path_normals(seed, i, (2, 2 * n_terms + 1)) for i in range(start, stop)])
            for comp, out in ((0, b1), (1, b2)):
                gc = g[:, comp, :]
                incr = gc[:, :n_terms] @ re_op + gc[:, n_terms:2 * n_terms] @ im_op
                out[start:stop, 0] = sd0 * gc[:, -1]
                out[start:stop, 1:] = sd0 * gc[:, -1:] + np.cumsum(incr, axis=1)

    starts = range(0, n_paths, CHUNK)
    if workers <= 1:
        for s in starts:
            fill(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    return PathEnsemble(p, grid, int(seed), int(n_paths), b1, b2, method)


def levy_area(e: PathEnsemble, s: float, t: float) -> AreaSamples:
    """Iterated integral ``int_s^t (B2(u) - B2(s)) dB1(u)`` for every path.

    The integrand is taken at cell midpoints (trapezoidal in ``B2``),
    which makes the discrete area satisfy the exact Chen relation
    ``A(s,t) = A(s,u) + A(u,t) + (B2(u) - B2(s)) (B1(t) - B1(u))``.
    """
    i = e.grid.index(s)
    j = e.grid.index(t)
    if j < i:
        raise GridError("need s <= t")
    if j == i:
        zero = np.zeros(e.n_paths)
        return AreaSamples(s, t, zero, zero.copy())
    d1 = np.diff(e.B1[:, i:j + 1], axis=1)
    mid = 0.5 * (e.B2[:, i:j] + e.B2[:, i + 1:j + 1]) - e.B2[:, i:i + 1]
    value = np.sum(mid * d1, axis=1)
    a = e.params.alpha
    rescaled = e.params.eta ** (0.5 * (1 - 4 * a)) * value
    return AreaSamples(float(s), float(t), value, rescaled)


def overlap_covariance(e: PathEnsemble, s1: float, t1: float, s2: float, t2: float,
                       rescaled: bool = True) -> float:
    """Sample covariance of the areas over ``[s1, t1]`` and ``[s2, t2]``."""
    x = levy_area(e, s1, t1)
    y = levy_area(e, s2, t2)
    u, v = (x.rescaled, y.rescaled) if rescaled else (x.value, y.value)
    if u.size < 2:
        raise PreconditionError("need at least two paths")
    return float(np.cov(u, v)[0, 1])
