"""Summary statistics and least-squares fits for sweep output."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float


def linear_fit(x, y) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit a line")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2)


def loglog_slope(lams, errors) -> LinearFit:
    """Fit log(error) = slope * log(lambda) + c."""
    return linear_fit(np.log(lams), np.log(errors))


def root_exponential_fit(lams, errors) -> LinearFit:
    """Fit log(error) = slope * sqrt(lambda) + c."""
    return linear_fit(np.sqrt(lams), np.log(errors))


def group_quantile(records: Iterable, key: Callable, value: Callable, q: float = 0.5) -> dict:
    """Quantile of ``value(rec)`` grouped by ``key(rec)``, keys sorted."""
    groups = defaultdict(list)
    for rec in records:
        groups[key(rec)].append(value(rec))
    return {k: float(np.quantile(groups[k], q)) for k in sorted(groups)}


def group_rate(records: Iterable, key: Callable, event: Callable) -> dict:
    groups = defaultdict(list)
    for rec in records:
        groups[key(rec)].append(bool(event(rec)))
    return {k: float(np.mean(groups[k])) for k in sorted(groups)}


def error_summary(records: Iterable, key: Callable, value: Callable) -> dict:
    """Median and 90th percentile per group, the statistics sweeps report."""
    med = group_quantile(records, key, value, 0.5)
    p90 = group_quantile(records, key, value, 0.9)
    return {k: {"median": med[k], "p90": p90[k]} for k in med}
