"""Lasso solution paths by cyclic coordinate descent.

The objective at a fixed regularization strength ``lam`` is::

    (1 / (2n)) * ||y - X b||_2^2 + lam * ||b||_1

Paths are fitted over a descending, log-equispaced grid starting at
``lambda_max`` with warm starts.  Each feature's *entry value* is the largest
visited grid value at which its coefficient is nonzero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .errors import (
    DimensionMismatch,
    InvalidGridSpec,
    NonFiniteInput,
    NotConvergedWarning,
    ZeroVarianceColumn,
)

DEFAULT_N_LAMBDA = 100
DEFAULT_RATIO = 1e-3
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class DesignMatrix:
    """Feature matrix with the statistics needed to undo standardization.

    ``values`` is stored column-major since the solver walks columns.
    After :func:`standardize`, each column has mean 0 and
    ``||col||_2 / sqrt(n) == 1``; ``column_means`` and ``column_scales`` hold
    the raw statistics so that ``raw = values * scales + means``.
    """

    values: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    standardized: bool = True
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.asfortranarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise DimensionMismatch(f"design must be 2-D, got shape {v.shape}")
        n, p = v.shape
        if n < 2 or p < 1:
            raise DimensionMismatch(f"design needs n >= 2 and p >= 1, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteInput("design contains non-finite entries")
        if self.names is not None and len(self.names) != p:
            raise DimensionMismatch(f"{len(self.names)} names for {p} columns")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def column_norms(self) -> np.ndarray:
        """Euclidean norms of the centered raw columns."""
        return self.column_scales * np.sqrt(self.n)

    def transform(self, X_raw) -> np.ndarray:
        """Apply the stored centering and scaling to new raw rows."""
        X_raw = np.asarray(X_raw, dtype=np.float64)
        if X_raw.ndim != 2 or X_raw.shape[1] != self.p:
            raise DimensionMismatch(f"expected {self.p} columns, got shape {X_raw.shape}")
        return (X_raw - self.column_means) / self.column_scales

    def subset(self, columns: Sequence[int]) -> "DesignMatrix":
        cols = np.asarray(columns, dtype=np.int64)
        names = None if self.names is None else tuple(self.names[j] for j in cols)
        return DesignMatrix(
            self.values[:, cols],
            self.column_means[cols],
            self.column_scales[cols],
            self.standardized,
            names,
        )

    @classmethod
    def from_standardized(cls, values, names=None) -> "DesignMatrix":
        """Wrap an already-standardized matrix (identity inverse transform)."""
        values = np.asarray(values, dtype=np.float64)
        p = values.shape[1] if values.ndim == 2 else 0
        return cls(values, np.zeros(p), np.ones(p), True, names)


@dataclass(frozen=True)
class Response:
    values: np.ndarray
    mean: float = 0.0

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise DimensionMismatch(f"response must be 1-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteInput("response contains non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def standardize(X, y, names: Sequence[str] | None = None) -> tuple[DesignMatrix, Response]:
    """Center and scale ``X`` column-wise and center ``y``.

    Columns are divided by their population standard deviation, so that
    ``||X_j||_2 / sqrt(n) == 1`` afterwards.

    Raises
    ------
    ZeroVarianceColumn
        If some column of ``X`` is constant.
    DimensionMismatch
        If ``len(y)`` differs from the number of rows of ``X``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"y has shape {y.shape}, X has {X.shape[0]} rows")
    if X.shape[0] < 2:
        raise DimensionMismatch("need at least two samples")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("inputs contain non-finite entries")

    means = X.mean(axis=0)
    centered = X - means
    scales = np.sqrt(np.mean(centered**2, axis=0))
    # relative test: a constant column leaves only rounding noise after centering
    tiny = scales <= 1e-12 * np.maximum(1.0, np.abs(means))
    if np.any(tiny):
        j = int(np.flatnonzero(tiny)[0])
        raise ZeroVarianceColumn(j, None if names is None else names[j])
    y_mean = float(y.mean())
    design = DesignMatrix(
        centered / scales, means, scales, True, None if names is None else tuple(names)
    )
    return design, Response(y - y_mean, y_mean)


def _arrays(X, y=None):
    Xv = X.values if isinstance(X, DesignMatrix) else np.asarray(X, dtype=np.float64)
    if y is None:
        return Xv
    yv = y.values if isinstance(y, Response) else np.asarray(y, dtype=np.float64)
    if yv.shape[0] != Xv.shape[0]:
        raise DimensionMismatch(f"y has {yv.shape[0]} entries, X has {Xv.shape[0]} rows")
    return Xv, yv


# fastmath lets the dot-product reduction vectorize.  Inlining happens at the
# numba IR level, so the flag must sit on the callers; both callers share this
# loop so lambda_max and the coordinate update see the same gradients.
@njit(cache=True, inline="always")
def _col_grad(X, r, j):
    n = X.shape[0]
    g = 0.0
    for i in range(n):
        g += X[i, j] * r[i]
    return g / n


@njit(cache=True, fastmath=True)
def _max_abs_grad(X, r):
    best = 0.0
    for j in range(X.shape[1]):
        g = abs(_col_grad(X, r, j))
        if g > best:
            best = g
    return best


@njit(cache=True, fastmath=True)
def _update(X, r, beta, col_sq, j, lam):
    n = X.shape[0]
    g = _col_grad(X, r, j)
    old = beta[j]
    z = g + col_sq[j] * old
    if z > lam:
        new = (z - lam) / col_sq[j]
    elif z < -lam:
        new = (z + lam) / col_sq[j]
    else:
        new = 0.0
    diff = new - old
    if diff != 0.0:
        beta[j] = new
        for i in range(n):
            r[i] -= diff * X[i, j]
    return abs(diff)


@njit(cache=True, fastmath=True)
def _fill_gram_column(X, j, cache, s):
    n, p = X.shape
    for k in range(p):
        acc = 0.0
        for i in range(n):
            acc += X[i, k] * X[i, j]
        cache[k, s] = acc / n


@njit(cache=True, fastmath=True)
def _active_sweeps(X, r, beta, col_sq, lam, tol, budget, active, m, cache, slot):
    """Sweeps over ``active[:m]`` driven by cached Gram columns.

    The compact gradient is kept in sync by O(m) updates; the residual is
    rebuilt once at the end.  Returns the sweeps spent.
    """
    G = np.empty((m, m))
    for a in range(m):
        sa = slot[active[a]]
        for b in range(m):
            G[a, b] = cache[active[b], sa]
    g = np.empty(m)
    start = np.empty(m)
    for a in range(m):
        g[a] = _col_grad(X, r, active[a])
        start[a] = beta[active[a]]
    sweeps = 0
    while sweeps < budget:
        delta = 0.0
        for a in range(m):
            j = active[a]
            old = beta[j]
            z = g[a] + col_sq[j] * old
            if z > lam:
                new = (z - lam) / col_sq[j]
            elif z < -lam:
                new = (z + lam) / col_sq[j]
            else:
                new = 0.0
            diff = new - old
            if diff != 0.0:
                beta[j] = new
                for b in range(m):
                    g[b] -= diff * G[a, b]
                if abs(diff) > delta:
                    delta = abs(diff)
        sweeps += 1
        if delta <= tol:
            break
    n = X.shape[0]
    for a in range(m):
        j = active[a]
        diff = beta[j] - start[a]
        if diff != 0.0:
            for i in range(n):
                r[i] -= diff * X[i, j]
    return sweeps


@njit(cache=True)
def _cd_solve(X, r, beta, col_sq, lam, tol, max_iter, cache, slot, n_slots):
    """Cyclic coordinate descent at one ``lam``; mutates ``r`` and ``beta``.

    Alternates full sweeps with sweeps restricted to the current nonzero set;
    converged only once a *full* sweep moves no coefficient by more than tol.
    Gram columns of active features are cached in ``cache`` (slots assigned
    through ``slot``/``n_slots``) and reused across calls along a path.
    """
    p = X.shape[1]
    cap = cache.shape[1]
    active = np.empty(p, np.int64)
    sweeps = 0
    while sweeps < max_iter:
        delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            d = _update(X, r, beta, col_sq, j, lam)
            if d > delta:
                delta = d
        sweeps += 1
        if delta <= tol:
            return sweeps, True
        m = 0
        cached = True
        for j in range(p):
            if beta[j] != 0.0:
                active[m] = j
                m += 1
                if slot[j] < 0:
                    if n_slots[0] < cap:
                        slot[j] = n_slots[0]
                        n_slots[0] += 1
                        _fill_gram_column(X, j, cache, slot[j])
                    else:
                        cached = False
        if cached:
            sweeps += _active_sweeps(
                X, r, beta, col_sq, lam, tol, max_iter - sweeps, active, m, cache, slot
            )
            continue
        while sweeps < max_iter:
            delta = 0.0
            for a in range(m):
                d = _update(X, r, beta, col_sq, active[a], lam)
                if d > delta:
                    delta = d
            sweeps += 1
            if delta <= tol:
                break
    return sweeps, False


def lambda_max(X, y) -> float:
    """Smallest ``lam`` at which the all-zero vector is optimal: ``max_j |X_j' y| / n``."""
    Xv, yv = _arrays(X, y)
    return float(_max_abs_grad(np.asfortranarray(Xv), np.ascontiguousarray(yv)))


@dataclass(frozen=True)
class LambdaGrid:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).copy()
        if v.ndim != 1 or v.size < 2:
            raise InvalidGridSpec("grid needs at least two values")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise InvalidGridSpec("grid values must be finite and positive")
        if np.any(np.diff(v) >= 0):
            raise InvalidGridSpec("grid must be strictly decreasing")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def count(self) -> int:
        return self.values.size

    @property
    def ratio(self) -> float:
        return float(self.values[-1] / self.values[0])

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self):
        return iter(self.values)


def make_grid(lmax: float, d: int = DEFAULT_N_LAMBDA, ratio: float = DEFAULT_RATIO) -> LambdaGrid:
    """``d`` log-equispaced values from ``lmax`` down to ``ratio * lmax``."""
    if not (np.isfinite(lmax) and lmax > 0):
        raise InvalidGridSpec(f"lmax must be positive, got {lmax}")
    if int(d) != d or d < 2:
        raise InvalidGridSpec(f"grid size must be an integer >= 2, got {d}")
    if not 0 < ratio < 1:
        raise InvalidGridSpec(f"ratio must lie in (0, 1), got {ratio}")
    values = np.geomspace(lmax, ratio * lmax, int(d))
    values[0] = lmax
    values[-1] = ratio * lmax
    return LambdaGrid(values)


def path_grid(X, y, d: int = DEFAULT_N_LAMBDA, ratio: float = DEFAULT_RATIO) -> LambdaGrid:
    """Grid starting at ``lambda_max(X, y)``.

    When ``y`` is orthogonal to every column, ``lambda_max`` is 0 and the
    solution is zero for every positive ``lam``; a unit-scaled grid is
    returned so that a path can still be fitted.
    """
    lmax = lambda_max(X, y)
    if lmax <= 0.0:
        lmax = 1.0
    return make_grid(lmax, d, ratio)


@dataclass(frozen=True)
class GridSpec:
    """Grid size and ratio plus solver settings, shared by every path fit."""

    d: int = DEFAULT_N_LAMBDA
    ratio: float = DEFAULT_RATIO
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise InvalidGridSpec(f"grid size must be an integer >= 2, got {self.d}")
        if not 0 < self.ratio < 1:
            raise InvalidGridSpec(f"ratio must lie in (0, 1), got {self.ratio}")
        if not self.tol > 0 or self.max_iter < 1:
            raise InvalidGridSpec("tol must be positive and max_iter at least 1")


@dataclass(frozen=True)
class LassoPath:
    """Coefficients along a grid, plus per-feature entry values.

    Rows of ``coefs`` beyond ``n_visited`` are NaN: the path was stopped
    early and those grid points were never solved.
    """

    grid: LambdaGrid
    coefs: np.ndarray
    entry_values: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    n_visited: int = field(default=-1)

    def __post_init__(self):
        if self.n_visited < 0:
            object.__setattr__(self, "n_visited", self.grid.count)

    @property
    def lambdas(self) -> np.ndarray:
        return self.grid.values[: self.n_visited]

    @property
    def visited_coefs(self) -> np.ndarray:
        return self.coefs[: self.n_visited]

    @property
    def visited(self) -> np.ndarray:
        mask = np.zeros(self.grid.count, dtype=bool)
        mask[: self.n_visited] = True
        return mask

    @property
    def stopped_early(self) -> bool:
        return self.n_visited < self.grid.count

    def support(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_visited:
            raise IndexError(f"grid point {index} was not visited")
        return np.flatnonzero(self.coefs[index])


def _entry_values(lambdas: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    nz = coefs != 0
    ever = nz.any(axis=0)
    first = np.argmax(nz, axis=0)
    return np.where(ever, lambdas[first], 0.0)


StopRule = Callable[[np.ndarray], bool]


def fit_path(
    X,
    y,
    grid: LambdaGrid | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    stop_rule: StopRule | None = None,
) -> LassoPath:
    """Fit the Lasso along ``grid`` with warm starts.

    Parameters
    ----------
    X, y
        A :class:`DesignMatrix` / :class:`Response` pair, or plain arrays.
        Columns need not be standardized; the coordinate update accounts for
        each column's squared norm.
    grid
        Descending grid; defaults to :func:`path_grid` on ``(X, y)``.
    tol
        Convergence threshold on the largest coefficient change in a sweep.
    max_iter
        Sweep budget per grid point.  Exhausting it is recorded in
        ``converged`` and warned about, never raised.
    stop_rule
        Called with the coefficient vector after each grid point; returning
        True ends the path there.
    """
    Xv, yv = _arrays(X, y)
    Xf = np.asfortranarray(Xv)
    if grid is None:
        grid = path_grid(Xf, yv)
    n, p = Xf.shape
    col_sq = np.einsum("ij,ij->j", Xf, Xf) / n
    r = np.array(yv, dtype=np.float64, copy=True)
    beta = np.zeros(p)

    d = grid.count
    coefs = np.full((d, p), np.nan)
    converged = np.zeros(d, dtype=bool)
    iterations = np.zeros(d, dtype=np.int64)
    n_visited = d
    # Gram cache: one column per feature that has ever been active
    cache = np.empty((p, min(p, n + 64)), order="F")
    slot = np.full(p, -1, dtype=np.int64)
    n_slots = np.zeros(1, dtype=np.int64)
    at_zero = True
    for t, lam in enumerate(grid.values):
        if at_zero and lam >= _max_abs_grad(Xf, r):
            # zero is optimal; skip the solve so the row is exactly zero
            coefs[t] = 0.0
            converged[t] = True
            continue
        at_zero = False
        sweeps, ok = _cd_solve(
            Xf, r, beta, col_sq, float(lam), float(tol), int(max_iter), cache, slot, n_slots
        )
        coefs[t] = beta
        converged[t] = ok
        iterations[t] = sweeps
        if stop_rule is not None and stop_rule(beta):
            n_visited = t + 1
            break

    if not converged[:n_visited].all():
        bad = grid.values[:n_visited][~converged[:n_visited]]
        warnings.warn(
            f"coordinate descent did not converge at {bad.size} grid point(s), "
            f"largest lambda {bad[0]:.4g}",
            NotConvergedWarning,
            stacklevel=2,
        )
    z = _entry_values(grid.values[:n_visited], coefs[:n_visited])
    coefs.flags.writeable = False
    return LassoPath(grid, coefs, z, converged, iterations, n_visited)


def entry_values(path: LassoPath) -> np.ndarray:
    """Per-feature entry values ``Z`` (0 for features never active)."""
    return path.entry_values.copy()


def soft_threshold(z, lam):
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


def objective(X, y, lam: float, beta) -> float:
    Xv, yv = _arrays(X, y)
    resid = yv - Xv @ np.asarray(beta, dtype=np.float64)
    return float(resid @ resid / (2 * Xv.shape[0]) + lam * np.abs(beta).sum())


def kkt_violation(X, y, lam: float, beta) -> float:
    """Largest violation of the Lasso stationarity conditions at ``beta``.

    Zero exactly when ``beta`` minimizes the objective at ``lam``.
    """
    Xv, yv = _arrays(X, y)
    beta = np.asarray(beta, dtype=np.float64)
    grad = Xv.T @ (yv - Xv @ beta) / Xv.shape[0]
    nz = beta != 0
    viol = np.where(
        nz,
        np.abs(grad - lam * np.sign(beta)),
        np.maximum(0.0, np.abs(grad) - lam),
    )
    return float(viol.max(initial=0.0))
