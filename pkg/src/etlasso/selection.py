"""Two-stage Lasso tuning with permuted pseudo-features.

Each stage appends row-permuted copies of the candidate columns to the
design.  The copies keep the Gram matrix of the originals but carry no
association with the response, so the first grid value at which any copy
enters the Lasso path is a data-driven cutoff: only originals that entered
strictly before it are kept.  The path is abandoned as soon as the cutoff is
found.  The first stage screens all ``p`` features; the second repeats the
procedure on the survivors with a fresh permutation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import EmptyDesign, InvalidPermutation, RankDeficient
from .lasso_path import (
    DesignMatrix,
    GridSpec,
    Response,
    _arrays,
    fit_path,
    path_grid,
)

Stage2Pseudo = Literal["selected", "full"]
CoefMode = Literal["ols", "lasso"]


@dataclass(frozen=True)
class PermutationPlan:
    """The two row permutations used by one selection, kept for replay."""

    seed: int | None
    pi1: np.ndarray
    pi2: np.ndarray

    @classmethod
    def draw(cls, n: int, seed: int | None = None) -> "PermutationPlan":
        rng = np.random.default_rng(seed)
        pi1 = rng.permutation(n)
        pi2 = rng.permutation(n)
        # n == 1 has a single permutation; equality cannot be avoided there
        while n > 1 and np.array_equal(pi1, pi2):
            pi2 = rng.permutation(n)
        return cls(seed, pi1, pi2)


def _check_permutation(pi, n: int) -> np.ndarray:
    pi = np.asarray(pi)
    if pi.shape != (n,) or not np.issubdtype(pi.dtype, np.integer):
        raise InvalidPermutation(f"expected {n} integer indices, got shape {pi.shape}")
    if not np.array_equal(np.sort(pi), np.arange(n)):
        raise InvalidPermutation("not a bijection on row indices")
    return pi


def permute_rows(X, pi) -> np.ndarray:
    """Rows reordered so that output row ``i`` is input row ``pi[i]``."""
    Xv = _arrays(X)
    pi = _check_permutation(pi, Xv.shape[0])
    return np.asfortranarray(Xv[pi])


@dataclass(frozen=True)
class AugmentedDesign:
    values: np.ndarray
    original_indices: np.ndarray
    n_pseudo: int

    @property
    def n_original(self) -> int:
        return self.original_indices.size

    @property
    def pseudo_flag(self) -> np.ndarray:
        flag = np.zeros(self.values.shape[1], dtype=bool)
        flag[self.n_original :] = True
        return flag


def augment(X, columns: Sequence[int], pi, pseudo_columns: Sequence[int] | None = None) -> AugmentedDesign:
    """``[X[:, columns], X[pi][:, pseudo_columns]]``; pseudo block defaults to ``columns``."""
    Xv = _arrays(X)
    cols = np.asarray(columns, dtype=np.int64)
    pcols = cols if pseudo_columns is None else np.asarray(pseudo_columns, dtype=np.int64)
    pseudo = permute_rows(Xv[:, pcols], pi)
    values = np.asfortranarray(np.hstack([Xv[:, cols], pseudo]))
    return AugmentedDesign(values, cols, pcols.size)


def above_cutoff(z: np.ndarray, cutoff: float) -> np.ndarray:
    """Positions whose entry value is strictly greater than ``cutoff``; ties lose."""
    return np.flatnonzero(np.asarray(z) > cutoff)


@dataclass(frozen=True)
class StageOutcome:
    """One pass of pseudo-feature thresholding.

    ``selected`` holds original feature indices.  ``cutoff`` is the grid
    value at which the first pseudo column became active, or the grid floor
    if none did (``pseudo_entered`` False); in that case every original that
    is active at the floor is kept.
    """

    columns: np.ndarray
    selected: np.ndarray
    cutoff: float
    pseudo_entered: bool
    z_original: np.ndarray
    z_pseudo: np.ndarray
    coefs_at_cutoff: np.ndarray
    n_visited: int


def stage_select(
    X,
    y,
    pi,
    grid_spec: GridSpec = GridSpec(),
    columns: Sequence[int] | None = None,
    pseudo_columns: Sequence[int] | None = None,
) -> StageOutcome:
    """Select the columns of ``X`` whose entry value beats every pseudo column.

    ``columns`` restricts the originals (default: all); ``pseudo_columns``
    picks which columns get permuted copies (default: the same ones).
    """
    Xv, yv = _arrays(X, y)
    cols = np.arange(Xv.shape[1]) if columns is None else np.asarray(columns, dtype=np.int64)
    if cols.size == 0 or Xv.shape[1] == 0:
        raise EmptyDesign("stage selection needs at least one candidate column")
    aug = augment(Xv, cols, pi, pseudo_columns)
    m = aug.n_original

    def pseudo_active(beta):
        return bool(np.any(beta[m:] != 0.0))

    grid = path_grid(aug.values, yv, grid_spec.d, grid_spec.ratio)
    path = fit_path(
        aug.values, yv, grid, grid_spec.tol, grid_spec.max_iter, stop_rule=pseudo_active
    )
    last = path.n_visited - 1
    entered = pseudo_active(path.coefs[last])
    cutoff = float(grid.values[last])
    z = path.entry_values
    # without a pseudo entry the floor is not a competitor: keep every active original
    keep = above_cutoff(z[:m], cutoff) if entered else np.flatnonzero(z[:m] > 0)
    return StageOutcome(
        columns=cols,
        selected=cols[keep],
        cutoff=cutoff,
        pseudo_entered=entered,
        z_original=z[:m].copy(),
        z_pseudo=z[m:].copy(),
        coefs_at_cutoff=path.coefs[last, :m].copy(),
        n_visited=path.n_visited,
    )


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[int, ...]
    stage1: StageOutcome
    stage2: StageOutcome | None
    refit_coefs: np.ndarray
    intercept: float
    wall_time: float
    plan: PermutationPlan
    coef_mode: CoefMode = "ols"

    @property
    def stage1_selected(self) -> tuple[int, ...]:
        return tuple(int(j) for j in self.stage1.selected)

    @property
    def cutoff_stage1(self) -> float:
        return self.stage1.cutoff

    @property
    def cutoff_stage2(self) -> float | None:
        return None if self.stage2 is None else self.stage2.cutoff

    @property
    def z_original(self) -> np.ndarray:
        return self.stage1.z_original

    @property
    def z_pseudo(self) -> np.ndarray:
        return self.stage1.z_pseudo


def _to_original_scale(X: DesignMatrix, y: Response, s: np.ndarray, b: np.ndarray):
    coefs = b / X.column_scales[s]
    intercept = y.mean - float(coefs @ X.column_means[s])
    return coefs, intercept


def refit_ols(X: DesignMatrix, y: Response, s: Sequence[int]) -> tuple[np.ndarray, float]:
    """Least squares of ``y`` on the columns ``s``, reported on the raw scale.

    Raises
    ------
    RankDeficient
        If ``X[:, s]`` does not have full column rank (including ``|s| >= n``).
    """
    s = np.asarray(s, dtype=np.int64)
    if s.size == 0:
        return np.zeros(0), float(y.mean)
    Xs = X.values[:, s]
    if s.size >= X.n:
        raise RankDeficient(s)
    b, _, rank, _ = np.linalg.lstsq(Xs, y.values, rcond=None)
    if rank < s.size:
        raise RankDeficient(s)
    return _to_original_scale(X, y, s, b)


def et_lasso_select(
    X: DesignMatrix,
    y: Response,
    seed: int | None = 0,
    grid_spec: GridSpec = GridSpec(),
    stage2_pseudo: Stage2Pseudo = "selected",
    coef_mode: CoefMode = "ols",
    plan: PermutationPlan | None = None,
) -> SelectionResult:
    """Run both selection stages and estimate coefficients on the survivors.

    Parameters
    ----------
    seed
        Seeds the permutation draw; ignored when ``plan`` is given.
    stage2_pseudo
        ``"selected"`` permutes only the stage-one survivors in the second
        stage; ``"full"`` appends a permuted copy of every column instead.
    coef_mode
        ``"ols"`` refits least squares on the final set; ``"lasso"`` reports
        the stage-two Lasso coefficients at its cutoff.
    """
    t0 = time.perf_counter()
    if plan is None:
        plan = PermutationPlan.draw(X.n, seed)
    stage1 = stage_select(X, y, plan.pi1, grid_spec)
    stage2 = None
    selected = np.zeros(0, dtype=np.int64)
    if stage1.selected.size:
        pseudo_cols = None if stage2_pseudo == "selected" else np.arange(X.p)
        stage2 = stage_select(X, y, plan.pi2, grid_spec, stage1.selected, pseudo_cols)
        selected = stage2.selected

    if coef_mode == "ols":
        coefs, intercept = refit_ols(X, y, selected)
    elif coef_mode == "lasso":
        if stage2 is None:
            coefs, intercept = np.zeros(0), float(y.mean)
        else:
            b = stage2.coefs_at_cutoff[np.isin(stage2.columns, selected)]
            coefs, intercept = _to_original_scale(X, y, selected, b)
    else:
        raise ValueError(f"unknown coef_mode {coef_mode!r}")
    return SelectionResult(
        selected=tuple(int(j) for j in np.sort(selected)),
        stage1=stage1,
        stage2=stage2,
        refit_coefs=coefs,
        intercept=intercept,
        wall_time=time.perf_counter() - t0,
        plan=plan,
        coef_mode=coef_mode,
    )


def mutual_incoherence(X, s: Sequence[int]) -> float:
    """``max_i sum_j |(X_sc' X_s (X_s' X_s)^-1)_ij|`` for support ``s``.

    Values below 1 mean the incoherence condition holds with margin
    ``1 - value``.
    """
    Xv = _arrays(X)
    s = np.asarray(s, dtype=np.int64)
    p = Xv.shape[1]
    if s.size == 0 or s.size >= p:
        raise ValueError("support must be a nonempty proper subset of the columns")
    sc = np.setdiff1d(np.arange(p), s)
    Xs = Xv[:, s]
    gram = Xs.T @ Xs
    if np.linalg.matrix_rank(gram) < s.size:
        raise RankDeficient(s)
    # M' = gram^-1 Xs' Xsc since gram is symmetric
    Mt = np.linalg.solve(gram, Xs.T @ Xv[:, sc])
    return float(np.abs(Mt).sum(axis=0).max())
