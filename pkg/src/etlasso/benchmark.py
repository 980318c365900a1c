"""Monte Carlo comparison of tuning methods on simulated data."""

from __future__ import annotations

import json
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .baselines import bic_select, cv_select
from .datagen import SimConfig, sample_instance
from .errors import ConfigError, NotConvergedWarning
from .lasso_path import GridSpec, fit_path, path_grid, standardize
from .metrics import MethodRow, SelectionScore, aggregate, score_selection
from .selection import Stage2Pseudo, et_lasso_select

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
METHODS = ("etlasso", "bic", "cv")
DISPLAY_NAMES = {"etlasso": "ET-Lasso", "bic": "BIC", "cv": "CV"}


@dataclass(frozen=True)
class BenchmarkSettings:
    sim: SimConfig
    replications: int = 100
    methods: tuple[str, ...] = METHODS
    grid: GridSpec = field(default_factory=GridSpec)
    folds: int = 5
    stage2_pseudo: Stage2Pseudo = "selected"

    def __post_init__(self):
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise ConfigError(f"methods must be drawn from {METHODS}, got {self.methods}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError(f"duplicate methods in {self.methods}")
        if self.replications < 1:
            raise ConfigError("need at least one replication")
        if "cv" in self.methods and not 2 <= self.folds <= self.sim.n:
            raise ConfigError(f"folds must lie in [2, n], got {self.folds}")

    def describe(self) -> dict:
        sim = asdict(self.sim)
        sim["cov"] = {"kind": self.sim.cov.kind.value, "rho": self.sim.cov.rho}
        return {
            "sim": sim,
            "replications": self.replications,
            "methods": list(self.methods),
            "grid": asdict(self.grid),
            "folds": self.folds,
            "stage2_pseudo": self.stage2_pseudo,
        }


@dataclass(frozen=True)
class ReplicationOutcome:
    replication: int
    truth: tuple[int, ...]
    selections: dict[str, tuple[int, ...]]
    times: dict[str, float]
    separated: bool | None
    converged: bool

    def score(self, method: str) -> SelectionScore:
        return score_selection(self.selections[method], self.truth)


def derived_seed(seed: int, replication: int, stream: int) -> int:
    """Independent integer seed for one consumer inside one replication."""
    return int(np.random.SeedSequence([seed, replication, stream]).generate_state(1)[0])


def separation_holds(z: np.ndarray, truth: np.ndarray) -> bool | None:
    """Whether every true feature entered strictly before every null one."""
    mask = np.zeros(z.size, dtype=bool)
    mask[truth] = True
    if mask.all() or not mask.any():
        return None
    return bool(z[mask].min() > z[~mask].max())


def run_replication(settings: BenchmarkSettings, replication: int) -> ReplicationOutcome:
    inst = sample_instance(settings.sim, replication)
    X, y = standardize(inst.X, inst.y)
    gs = settings.grid
    selections: dict[str, tuple[int, ...]] = {}
    times: dict[str, float] = {}
    separated = None

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NotConvergedWarning)
        if "etlasso" in settings.methods:
            res = et_lasso_select(
                X, y, derived_seed(settings.sim.seed, replication, 1), gs, settings.stage2_pseudo
            )
            selections["etlasso"] = res.selected
            times["etlasso"] = res.wall_time

        if "bic" in settings.methods or "cv" in settings.methods:
            # BIC and CV read off the same full-data path; each is charged for it
            t0 = time.perf_counter()
            path = fit_path(X, y, path_grid(X, y, gs.d, gs.ratio), gs.tol, gs.max_iter)
            path_time = time.perf_counter() - t0
            separated = separation_holds(path.entry_values, inst.true_support)
            if "bic" in settings.methods:
                t0 = time.perf_counter()
                trace = bic_select(X, y, gs, path=path)
                times["bic"] = path_time + time.perf_counter() - t0
                selections["bic"] = trace.selected
            if "cv" in settings.methods:
                t0 = time.perf_counter()
                cv_seed = derived_seed(settings.sim.seed, replication, 2)
                trace = cv_select(X, y, gs, settings.folds, cv_seed, path=path)
                times["cv"] = path_time + time.perf_counter() - t0
                selections["cv"] = trace.selected

    converged = not any(issubclass(w.category, NotConvergedWarning) for w in caught)
    if not converged:
        logger.warning("replication %d: solver did not converge at some grid points", replication)
    return ReplicationOutcome(
        replication,
        tuple(int(j) for j in inst.true_support),
        selections,
        times,
        separated,
        converged,
    )


def _run_one(args):
    settings, r = args
    return run_replication(settings, r)


@dataclass(frozen=True)
class BenchmarkReport:
    settings: BenchmarkSettings
    rows: tuple[MethodRow, ...]
    outcomes: tuple[ReplicationOutcome, ...]

    @property
    def replications(self) -> int:
        return len(self.outcomes)

    def row(self, method: str) -> MethodRow:
        for row in self.rows:
            if row.method == method:
                return row
        raise KeyError(method)

    @property
    def separation_rate(self) -> float | None:
        flags = [o.separated for o in self.outcomes if o.separated is not None]
        return sum(flags) / len(flags) if flags else None

    def to_dict(self, include_time: bool = False) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.settings.describe(),
            "replications": self.replications,
            "rows": [row.as_dict(include_time) for row in self.rows],
            "separation_rate": self.separation_rate,
            "nonconverged_replications": sum(not o.converged for o in self.outcomes),
        }

    def to_json(self, include_time: bool = False) -> str:
        return json.dumps(self.to_dict(include_time), indent=2) + "\n"

    def table(self) -> str:
        """Fixed-width summary with one line per method."""

        def cell(summary, digits=2):
            if summary.mean is None:
                return "#"
            return f"{summary.mean:.{digits}f} ({summary.sd:.{digits + 1}f})"

        header = f"{'method':<10}{'P':>16}{'R':>16}{'F1':>16}{'Time (s)':>18}{'#undef':>8}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{DISPLAY_NAMES.get(row.method, row.method):<10}"
                f"{cell(row.precision):>16}{cell(row.recall):>16}{cell(row.f1):>16}"
                f"{cell(row.time, 3):>18}{row.undefined_count:>8}"
            )
        return "\n".join(lines)


def summarize(settings: BenchmarkSettings, outcomes: Sequence[ReplicationOutcome]) -> BenchmarkReport:
    rows = tuple(
        aggregate(m, [o.score(m) for o in outcomes], [o.times[m] for o in outcomes])
        for m in settings.methods
    )
    return BenchmarkReport(settings, rows, tuple(outcomes))


def run_benchmark(settings: BenchmarkSettings, jobs: int = 1) -> BenchmarkReport:
    """Run every replication, in parallel processes when ``jobs > 1``.

    Each replication draws from its own seed stream, so results do not
    depend on ``jobs`` or on scheduling order.
    """
    reps = range(settings.replications)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_one, [(settings, r) for r in reps]))
    else:
        outcomes = [run_replication(settings, r) for r in reps]
    return summarize(settings, outcomes)
