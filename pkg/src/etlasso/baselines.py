"""Classical tuning criteria evaluated along a single Lasso path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidFoldCount
from .lasso_path import GridSpec, LambdaGrid, LassoPath, _arrays, fit_path, path_grid

RSS_FLOOR = 1e-12


@dataclass(frozen=True)
class CriterionTrace:
    grid: LambdaGrid
    scores: np.ndarray
    chosen_index: int
    selected: tuple[int, ...]
    coefs: np.ndarray

    @property
    def chosen_lambda(self) -> float:
        return float(self.grid.values[self.chosen_index])


def _argmin_first(scores: np.ndarray) -> int:
    # np.argmin returns the first minimizer: the largest lambda wins ties
    return int(np.argmin(np.where(np.isfinite(scores), scores, np.inf)))


def _trace(path: LassoPath, scores: np.ndarray) -> CriterionTrace:
    i = _argmin_first(scores)
    coefs = path.coefs[i].copy()
    return CriterionTrace(path.grid, scores, i, tuple(int(j) for j in np.flatnonzero(coefs)), coefs)


def bic_scores(rss: np.ndarray, df: np.ndarray, n: int) -> np.ndarray:
    """``n log(RSS/n) + log(n) df`` with RSS floored to keep the log finite."""
    return n * np.log(np.maximum(rss, RSS_FLOOR) / n) + np.log(n) * df


def bic_select(X, y, grid_spec: GridSpec = GridSpec(), path: LassoPath | None = None) -> CriterionTrace:
    """Pick the grid point minimizing BIC, with df = number of nonzeros.

    ``path`` may be supplied to reuse a full path already fitted on
    ``(X, y)``; otherwise one is fitted.
    """
    Xv, yv = _arrays(X, y)
    if path is None:
        grid = path_grid(Xv, yv, grid_spec.d, grid_spec.ratio)
        path = fit_path(Xv, yv, grid, grid_spec.tol, grid_spec.max_iter)
    coefs = path.visited_coefs
    resid = yv[None, :] - coefs @ Xv.T
    rss = np.einsum("ij,ij->i", resid, resid)
    df = np.count_nonzero(coefs, axis=1)
    scores = np.full(path.grid.count, np.nan)
    scores[: path.n_visited] = bic_scores(rss, df, Xv.shape[0])
    return _trace(path, scores)


def fold_assignment(n: int, folds: int, seed: int | None) -> list[np.ndarray]:
    if int(folds) != folds or folds < 2 or folds > n:
        raise InvalidFoldCount(f"need 2 <= folds <= n={n}, got {folds}")
    order = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(order, int(folds))]


def fold_errors(Xv: np.ndarray, yv: np.ndarray, test: np.ndarray, grid: LambdaGrid, grid_spec: GridSpec) -> np.ndarray:
    """Held-out mean squared error per grid value for one fold.

    The training block is re-centered on its own means so the Lasso fits an
    implicit intercept; held-out rows are shifted by the same means.
    """
    train = np.setdiff1d(np.arange(Xv.shape[0]), test)
    x_mean = Xv[train].mean(axis=0)
    y_mean = yv[train].mean()
    path = fit_path(Xv[train] - x_mean, yv[train] - y_mean, grid, grid_spec.tol, grid_spec.max_iter)
    pred = (Xv[test] - x_mean) @ path.coefs.T + y_mean
    return np.mean((yv[test][:, None] - pred) ** 2, axis=0)


def cv_select(
    X,
    y,
    grid_spec: GridSpec = GridSpec(),
    folds: int = 5,
    seed: int | None = 0,
    path: LassoPath | None = None,
) -> CriterionTrace:
    """K-fold cross-validation on a grid shared by every fold.

    The score at each grid value is the mean over folds of the held-out
    mean squared error; the minimizer (not the one-standard-error rule)
    is chosen and its support read off the full-data path.
    """
    Xv, yv = _arrays(X, y)
    split = fold_assignment(Xv.shape[0], folds, seed)
    if path is None:
        grid = path_grid(Xv, yv, grid_spec.d, grid_spec.ratio)
        path = fit_path(Xv, yv, grid, grid_spec.tol, grid_spec.max_iter)
    errors = np.array([fold_errors(Xv, yv, test, path.grid, grid_spec) for test in split])
    return _trace(path, errors.mean(axis=0))
