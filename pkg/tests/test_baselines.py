import numpy as np
import pytest
from sklearn.linear_model import Lasso

from etlasso.baselines import bic_scores, bic_select, cv_select, fold_assignment
from etlasso.errors import InvalidFoldCount
from etlasso.lasso_path import GridSpec, fit_path, path_grid, standardize


def instance(n, p, beta, seed, noise=1.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    b = np.zeros(p)
    b[: len(beta)] = beta
    return standardize(X, X @ b + noise * rng.standard_normal(n))


# --- BIC ---------------------------------------------------------------------


def test_bic_zero_response_selects_nothing():
    X, _ = instance(40, 8, [], 0)
    X, y = standardize(X.values, np.zeros(40))
    trace = bic_select(X, y)
    assert trace.selected == ()
    assert trace.chosen_index == 0


def test_bic_single_strong_feature():
    X, y = instance(200, 15, [3.0], 1)
    assert bic_select(X, y).selected == (0,)


def test_bic_scores_recompute_from_rss_and_df():
    X, y = instance(80, 12, [1.0, -1.0], 2)
    trace = bic_select(X, y, GridSpec(d=30))
    n = 80
    path = fit_path(X, y, trace.grid)
    resid = y.values[None, :] - path.coefs @ X.values.T
    rss = (resid**2).sum(axis=1)
    df = (path.coefs != 0).sum(axis=1)
    np.testing.assert_allclose(trace.scores, n * np.log(rss / n) + np.log(n) * df, rtol=1e-12)
    assert trace.chosen_index == int(np.argmin(trace.scores))
    assert trace.selected == tuple(np.flatnonzero(path.coefs[trace.chosen_index]))
    assert trace.chosen_lambda == trace.grid.values[trace.chosen_index]


def test_bic_floor_keeps_scores_finite():
    scores = bic_scores(np.array([0.0, 1.0]), np.array([3, 1]), 10)
    assert np.all(np.isfinite(scores))
    assert scores[0] == pytest.approx(10 * np.log(1e-13) + np.log(10) * 3)


def test_ties_go_to_the_largest_lambda():
    from etlasso.baselines import _argmin_first

    assert _argmin_first(np.array([3.0, 1.0, 1.0, 2.0])) == 1
    assert _argmin_first(np.array([np.nan, 2.0, 2.0])) == 1


# --- cross-validation ---------------------------------------------------------


def test_cv_leave_one_out_matches_brute_force():
    X, y = instance(10, 2, [1.0, -0.5], 3, noise=0.5)
    spec = GridSpec(d=12, ratio=0.01, tol=1e-13, max_iter=100_000)
    trace = cv_select(X, y, spec, folds=10, seed=0)
    Xv, yv = X.values, y.values
    errors = np.zeros(trace.grid.count)
    for i in range(10):
        train = np.arange(10) != i
        for t, lam in enumerate(trace.grid.values):
            model = Lasso(alpha=lam, fit_intercept=True, tol=1e-14, max_iter=1_000_000)
            model.fit(Xv[train], yv[train])
            errors[t] += (model.predict(Xv[i : i + 1])[0] - yv[i]) ** 2 / 10
    np.testing.assert_allclose(trace.scores, errors, atol=1e-8)
    assert trace.chosen_index == int(np.argmin(errors))


def test_cv_zero_response_selects_nothing():
    X, _ = instance(50, 6, [], 4)
    X, y = standardize(X.values, np.zeros(50))
    assert cv_select(X, y).selected == ()


def test_cv_is_seed_reproducible():
    X, y = instance(60, 20, [1.0, 1.0], 5)
    a = cv_select(X, y, GridSpec(d=25), seed=3)
    b = cv_select(X, y, GridSpec(d=25), seed=3)
    np.testing.assert_array_equal(a.scores, b.scores)
    assert a.selected == b.selected
    path = fit_path(X, y, a.grid)
    assert a.selected == tuple(np.flatnonzero(path.coefs[a.chosen_index]))


def test_cv_reuses_a_supplied_path():
    X, y = instance(60, 10, [2.0], 6)
    spec = GridSpec(d=20)
    path = fit_path(X, y, path_grid(X.values, y.values, spec.d, spec.ratio))
    np.testing.assert_array_equal(
        cv_select(X, y, spec, path=path).scores, cv_select(X, y, spec).scores
    )


@pytest.mark.parametrize("folds", [1, 0, 61, 2.5])
def test_invalid_fold_counts(folds):
    X, y = instance(60, 4, [1.0], 7)
    with pytest.raises(InvalidFoldCount):
        cv_select(X, y, folds=folds)


def test_fold_assignment_partitions_rows():
    split = fold_assignment(23, 5, seed=1)
    assert sorted(np.concatenate(split).tolist()) == list(range(23))
    assert {len(f) for f in split} <= {4, 5}
