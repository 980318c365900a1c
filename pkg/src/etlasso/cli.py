"""Command-line interface: ``etlasso simulate | select | path``.

Settings resolve as flags > ``--config`` JSON file > built-in defaults, and
the resolved values are echoed into every report.

Exit status: 0 on success, 2 for invalid configuration, 3 for unreadable or
malformed data, 4 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import bic_select, cv_select
from .benchmark import METHODS, SCHEMA_VERSION, BenchmarkSettings, run_benchmark
from .datagen import CovarianceSpec, SimConfig
from .errors import (
    CholeskyFailure,
    ConfigError,
    DimensionMismatch,
    ETLassoError,
    InvalidFoldCount,
    InvalidGridSpec,
    InvalidRho,
    NonFiniteInput,
    ParseError,
    RankDeficient,
    ZeroVarianceColumn,
)
from .io import DatasetFile, read_dataset, write_path_csv
from .lasso_path import GridSpec, fit_path, path_grid, standardize
from .metrics import mse
from .selection import et_lasso_select

logger = logging.getLogger("etlasso")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4

JOBS_ENV = "ETLASSO_JOBS"

GRID_DEFAULTS = {
    "d": GridSpec.d,
    "ratio": GridSpec.ratio,
    "tol": GridSpec.tol,
    "max_iter": GridSpec.max_iter,
}

SIMULATE_DEFAULTS = {
    "n": 500,
    "p": 1000,
    "k": 10,
    "cov": "independent",
    "beta": 2.0,
    "noise_sd": 1.0,
    "seed": 0,
    "reps": 100,
    "methods": ",".join(METHODS),
    "folds": 5,
    "stage2_pseudo": "selected",
    "random_support": False,
    "out": None,
    "record_times": False,
    "json": False,
    **GRID_DEFAULTS,
}

DATA_DEFAULTS = {
    "response": None,
    "features": None,
    "delimiter": ",",
    "no_header": False,
    "out": None,
    **GRID_DEFAULTS,
}

SELECT_DEFAULTS = {
    **DATA_DEFAULTS,
    "train_fraction": 1.0,
    "split_seed": 0,
    "seed": 0,
    "methods": "etlasso",
    "folds": 5,
    "stage2_pseudo": "selected",
    "coef_mode": "ols",
    "record_times": True,
}

PATH_DEFAULTS = dict(DATA_DEFAULTS)


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw is None:
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        raise ConfigError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None
    if jobs < 1:
        raise ConfigError(f"{JOBS_ENV} must be positive")
    return jobs


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("path grid")
    g.add_argument("--d", type=int, help="number of grid values (default 100)")
    g.add_argument("--ratio", type=float, help="smallest / largest lambda (default 1e-3)")
    g.add_argument("--tol", type=float, help="coordinate descent tolerance (default 1e-7)")
    g.add_argument("--max-iter", dest="max_iter", type=int, help="sweeps per grid value")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("dataset", type=Path, help="CSV file with a header row")
    p.add_argument("--response", help="name of the response column")
    p.add_argument("--features", help="comma-separated feature columns (default: all others)")
    p.add_argument("--delimiter", help="field delimiter (default ',')")
    p.add_argument("--no-header", dest="no_header", action="store_true",
                   help="first line is data; columns are named x1, x2, ...")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etlasso", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)

    sim = add("simulate", "Monte Carlo comparison of tuning methods")
    sim.add_argument("--config", type=Path, help="JSON file of default settings")
    sim.add_argument("--n", type=int)
    sim.add_argument("--p", type=int)
    sim.add_argument("--k", type=int, help="number of active features")
    sim.add_argument("--cov", help="independent, ar1[:rho] or cs[:rho]")
    sim.add_argument("--beta", type=float, help="magnitude of active coefficients")
    sim.add_argument("--noise-sd", dest="noise_sd", type=float)
    sim.add_argument("--random-support", dest="random_support", action="store_true",
                     help="place active features uniformly at random instead of first k")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--reps", type=int, help="number of replications")
    sim.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    sim.add_argument("--folds", type=int)
    sim.add_argument("--stage2-pseudo", dest="stage2_pseudo", choices=["selected", "full"])
    sim.add_argument("--jobs", type=int, help=f"worker processes (default ${JOBS_ENV} or 1)")
    sim.add_argument("--out", type=Path, help="write the JSON report here")
    sim.add_argument("--record-times", dest="record_times", action="store_true",
                     help="store wall-clock times in the JSON report (makes it non-reproducible)")
    sim.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    _add_grid_flags(sim)

    sel = add("select", "ET-Lasso selection and OLS refit on a CSV dataset")
    sel.add_argument("--config", type=Path, help="JSON file of default settings")
    _add_data_flags(sel)
    sel.add_argument("--train-fraction", dest="train_fraction", type=float,
                     help="share of rows used for fitting; the rest is a test block")
    sel.add_argument("--split-seed", dest="split_seed", type=int)
    sel.add_argument("--seed", type=int, help="permutation seed")
    sel.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    sel.add_argument("--folds", type=int)
    sel.add_argument("--stage2-pseudo", dest="stage2_pseudo", choices=["selected", "full"])
    sel.add_argument("--coef-mode", dest="coef_mode", choices=["ols", "lasso"])
    sel.add_argument("--no-times", dest="record_times", action="store_false",
                     help="omit wall-clock times so reports are reproducible")
    _add_grid_flags(sel)

    pth = add("path", "export the Lasso path and entry values as CSV")
    pth.add_argument("--config", type=Path, help="JSON file of default settings")
    _add_data_flags(pth)
    _add_grid_flags(pth)
    return parser


def resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge defaults, the optional config file and explicit flags."""
    cfg = dict(defaults)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "verbose", "config")}
    path = getattr(args, "config", None)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = sorted(set(loaded) - set(defaults) - {"dataset", "jobs"})
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg.update(loaded)
    cfg.update(flags)
    return cfg


def _grid(cfg: dict) -> GridSpec:
    return GridSpec(int(cfg["d"]), float(cfg["ratio"]), float(cfg["tol"]), int(cfg["max_iter"]))


def _methods(text) -> tuple[str, ...]:
    items = text if isinstance(text, list) else str(text).split(",")
    methods = tuple(m.strip().lower() for m in items if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ConfigError(f"methods must be drawn from {METHODS}, got {text!r}")
    return methods


def _jsonable(cfg: dict) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(cfg.items())}


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_simulate(cfg: dict) -> int:
    jobs = int(cfg.get("jobs") or _default_jobs())
    if jobs < 1:
        raise ConfigError("jobs must be positive")
    sim = SimConfig(
        n=int(cfg["n"]),
        p=int(cfg["p"]),
        k=int(cfg["k"]),
        cov=CovarianceSpec.parse(str(cfg["cov"]), int(cfg["p"])),
        beta_magnitude=float(cfg["beta"]),
        noise_sd=float(cfg["noise_sd"]),
        seed=int(cfg["seed"]),
        random_support=bool(cfg["random_support"]),
    )
    settings = BenchmarkSettings(
        sim,
        replications=int(cfg["reps"]),
        methods=_methods(cfg["methods"]),
        grid=_grid(cfg),
        folds=int(cfg["folds"]),
        stage2_pseudo=cfg["stage2_pseudo"],
    )
    logger.info("running %d replications with %d job(s)", settings.replications, jobs)
    report = run_benchmark(settings, jobs)
    text = report.to_json(include_time=bool(cfg["record_times"]))
    if cfg["out"] is not None:
        Path(cfg["out"]).write_text(text, encoding="utf-8")
    if cfg["json"]:
        sys.stdout.write(text)
    else:
        print(f"{sim.cov.label()}  n={sim.n} p={sim.p} k={sim.k}  replications={report.replications}")
        print(report.table())
        if report.separation_rate is not None:
            print(f"separation (min active Z > max inactive Z): {report.separation_rate:.2f}")
    return EXIT_OK


def _load(cfg: dict):
    if cfg["response"] is None:
        raise ConfigError("--response is required")
    features = cfg["features"]
    if isinstance(features, str):
        features = tuple(f.strip() for f in features.split(",") if f.strip())
    spec = DatasetFile(
        Path(cfg["dataset"]),
        str(cfg["response"]),
        None if features is None else tuple(features),
        str(cfg["delimiter"]),
        not cfg["no_header"],
    )
    return read_dataset(spec)


def _split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < fraction <= 1:
        raise ConfigError(f"train fraction must lie in (0, 1], got {fraction}")
    if fraction == 1:
        return np.arange(n), np.zeros(0, dtype=np.int64)
    n_train = int(round(fraction * n))
    if not 2 <= n_train <= n - 1:
        raise ConfigError(f"train fraction {fraction} leaves {n_train} of {n} rows for training")
    order = np.random.default_rng(seed).permutation(n)
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def _lasso_coefs(X, y, beta):
    s = np.flatnonzero(beta)
    coefs = beta[s] / X.column_scales[s]
    return s, coefs, y.mean - float(coefs @ X.column_means[s])


def cmd_select(cfg: dict) -> int:
    methods = _methods(cfg["methods"])
    grid = _grid(cfg)
    data = _load(cfg)
    train, test = _split(data.y.size, float(cfg["train_fraction"]), int(cfg["split_seed"]))
    X, y = standardize(data.X[train], data.y[train], data.feature_names)
    names = data.feature_names

    def scored(s, coefs, intercept):
        entry = {
            "selected": [names[j] for j in s],
            "coefficients": {names[j]: float(c) for j, c in zip(s, coefs)},
            "intercept": float(intercept),
        }
        for label, rows in (("train_mse", train), ("test_mse", test)):
            if rows.size:
                pred = intercept + data.X[rows][:, s] @ coefs
                entry[label] = mse(pred, data.y[rows])
        return entry

    results = {}
    for method in methods:
        t0 = time.perf_counter()
        if method == "etlasso":
            res = et_lasso_select(
                X, y, int(cfg["seed"]), grid, cfg["stage2_pseudo"], cfg["coef_mode"]
            )
            entry = scored(np.array(res.selected, dtype=np.int64), res.refit_coefs, res.intercept)
            entry["stage1_selected"] = [names[j] for j in res.stage1_selected]
            entry["cutoff_stage1"] = res.cutoff_stage1
            entry["cutoff_stage2"] = res.cutoff_stage2
        else:
            if method == "bic":
                trace = bic_select(X, y, grid)
            else:
                trace = cv_select(X, y, grid, int(cfg["folds"]), int(cfg["seed"]))
            entry = scored(*_lasso_coefs(X, y, trace.coefs))
            entry["lambda"] = trace.chosen_lambda
        if cfg["record_times"]:
            entry["wall_time_s"] = time.perf_counter() - t0
        results[method] = entry

    report = {
        "schema_version": SCHEMA_VERSION,
        "config": _jsonable(cfg),
        "n_train": int(train.size),
        "n_test": int(test.size),
        "features": list(names),
        "response": data.response_name,
        "methods": results,
    }
    _emit(json.dumps(report, indent=2) + "\n", cfg["out"])
    return EXIT_OK


def cmd_path(cfg: dict) -> int:
    grid_spec = _grid(cfg)
    data = _load(cfg)
    X, y = standardize(data.X, data.y, data.feature_names)
    path = fit_path(X, y, path_grid(X, y, grid_spec.d, grid_spec.ratio), grid_spec.tol, grid_spec.max_iter)
    if cfg["out"] is None:
        write_path_csv(path, sys.stdout)
    else:
        with open(cfg["out"], "w", newline="", encoding="utf-8") as fh:
            write_path_csv(path, fh)
    return EXIT_OK


COMMANDS = {
    "simulate": (cmd_simulate, SIMULATE_DEFAULTS),
    "select": (cmd_select, SELECT_DEFAULTS),
    "path": (cmd_path, PATH_DEFAULTS),
}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, InvalidGridSpec, InvalidRho, InvalidFoldCount)):
        return EXIT_CONFIG
    if isinstance(exc, (ParseError, ZeroVarianceColumn, NonFiniteInput, DimensionMismatch)):
        return EXIT_PARSE
    if isinstance(exc, (RankDeficient, CholeskyFailure, ArithmeticError, ETLassoError)):
        return EXIT_NUMERIC
    raise exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    func, defaults = COMMANDS[args.command]
    try:
        return func(resolve(args, defaults))
    except (ETLassoError, ArithmeticError) as exc:
        print(f"etlasso {args.command}: error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
