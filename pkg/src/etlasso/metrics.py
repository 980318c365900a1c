"""Selection scores and their aggregation over replications.

Undefined values (precision of an empty selection, recall against an empty
truth) are ``None`` rather than 0 and are left out of averages; aggregates
count how many replications were affected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class SelectionScore:
    precision: float | None
    recall: float | None
    f1: float | None
    n_selected: int
    n_true: int
    n_correct: int

    @property
    def n_false(self) -> int:
        return self.n_selected - self.n_correct


def score_selection(selected: Iterable[int], truth: Iterable[int]) -> SelectionScore:
    sel = {int(j) for j in selected}
    tru = {int(j) for j in truth}
    hit = len(sel & tru)
    precision = hit / len(sel) if sel else None
    recall = hit / len(tru) if tru else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return SelectionScore(precision, recall, f1, len(sel), len(tru), hit)


def mse(predicted, actual) -> float:
    a = np.asarray(predicted, dtype=np.float64)
    b = np.asarray(actual, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape}")
    return float(np.mean((a - b) ** 2))


@dataclass(frozen=True)
class Summary:
    """Mean and sample sd over the defined values; sd is 0 when count < 2."""

    mean: float | None
    sd: float | None
    count: int
    undefined: int

    @classmethod
    def of(cls, values: Sequence[float | None]) -> "Summary":
        defined = [float(v) for v in values if v is not None]
        undefined = len(values) - len(defined)
        if not defined:
            return cls(None, None, 0, undefined)
        # math.fsum keeps the mean independent of the order of values
        mean = math.fsum(defined) / len(defined)
        if len(defined) < 2:
            return cls(mean, 0.0, 1, undefined)
        var = math.fsum((v - mean) ** 2 for v in defined) / (len(defined) - 1)
        return cls(mean, math.sqrt(var), len(defined), undefined)


@dataclass(frozen=True)
class MethodRow:
    method: str
    precision: Summary
    recall: Summary
    f1: Summary
    time: Summary
    n_selected: Summary
    false_positive_rate: float
    replications: int

    @property
    def undefined_count(self) -> int:
        """Replications with an undefined precision or F1 score."""
        return max(self.precision.undefined, self.f1.undefined)

    def as_dict(self, include_time: bool = True) -> dict:
        t = self.time if include_time else Summary(None, None, 0, 0)
        return {
            "method": self.method,
            "precision_mean": self.precision.mean,
            "precision_sd": self.precision.sd,
            "recall_mean": self.recall.mean,
            "recall_sd": self.recall.sd,
            "f1_mean": self.f1.mean,
            "f1_sd": self.f1.sd,
            "time_mean_s": t.mean,
            "time_sd_s": t.sd,
            "undefined_count": self.undefined_count,
            "n_selected_mean": self.n_selected.mean,
            "false_positive_rate": self.false_positive_rate,
        }


def aggregate(method: str, scores: Sequence[SelectionScore], times: Sequence[float]) -> MethodRow:
    if not scores:
        raise ValueError("aggregate needs at least one score")
    if len(times) != len(scores):
        raise DimensionMismatch(f"{len(scores)} scores but {len(times)} times")
    return MethodRow(
        method=method,
        precision=Summary.of([s.precision for s in scores]),
        recall=Summary.of([s.recall for s in scores]),
        f1=Summary.of([s.f1 for s in scores]),
        time=Summary.of(list(times)),
        n_selected=Summary.of([float(s.n_selected) for s in scores]),
        false_positive_rate=sum(s.n_false > 0 for s in scores) / len(scores),
        replications=len(scores),
    )
