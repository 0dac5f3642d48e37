"""Trailing-window spending aggregates per group (card, customer, ...).

For transaction i and window t_p, the aggregate set is every transaction j of
the same group with time_j < time_i and (time_i - time_j) / 3600 < t_p. The
current transaction and anything at the same instant are excluded, so no
aggregate can see its own amount.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset, MissingColumnError

DEFAULT_WINDOWS_HOURS = (1, 3, 6, 12, 18, 24, 72, 168)
FUNCTIONS = ("avg", "sum", "count")
_ALIASES = {"average": "avg", "mean": "avg", "avg": "avg", "sum": "sum", "count": "count"}


@dataclass(frozen=True)
class AggregationSpec:
    group_by: str
    windows_hours: tuple = DEFAULT_WINDOWS_HOURS
    functions: tuple = FUNCTIONS
    amount: str = "Amount"

    def __post_init__(self):
        windows = tuple(float(w) for w in self.windows_hours)
        if not windows or any(not w > 0 for w in windows):
            raise ValueError("windows must be positive")
        funcs = tuple(dict.fromkeys(_ALIASES.get(f.strip().lower(), f) for f in self.functions))
        if not funcs:
            raise ValueError("at least one aggregation function is required")
        unknown = [f for f in funcs if f not in FUNCTIONS]
        if unknown:
            raise ValueError(f"unknown aggregation function(s): {unknown}")
        object.__setattr__(self, "windows_hours", tuple(sorted(windows)))
        object.__setattr__(self, "functions", funcs)

    def column_names(self) -> list[str]:
        return [f"{self.amount}_{g}_{w:g}h" for w in self.windows_hours for g in self.functions]


def _exact_prefix_sums(values: np.ndarray):
    """Prefix sums as exact Python integers in units of 2**-shift.

    Differences of these are exact, and int / 2**shift rounds correctly, so every
    window sum equals the correctly rounded sum of its members (as math.fsum).
    """
    mant_exp = [float(v).as_integer_ratio() for v in values]
    shift = max((d.bit_length() - 1 for _, d in mant_exp), default=0)
    scaled = np.array([num << (shift - (d.bit_length() - 1)) for num, d in mant_exp], dtype=object)
    prefix = np.empty(len(values) + 1, dtype=object)
    prefix[0] = 0
    prefix[1:] = np.cumsum(scaled) if len(values) else []
    return prefix, 1 << shift


def _window_start(times: np.ndarray, hi: np.ndarray, window_hours: float) -> np.ndarray:
    """Vectorised bisection: first j in [0, hi_i) with (t_i - t_j) / 3600 < window.

    The membership predicate is monotone in j for sorted times, and evaluating it
    verbatim keeps boundary cases identical to a pairwise scan.
    """
    lo = np.zeros(len(times), dtype=np.int64)
    hi = hi.copy()
    while True:
        open_ = lo < hi
        if not open_.any():
            return lo
        mid = (lo + hi) // 2
        inside = (times - times[np.minimum(mid, len(times) - 1)]) / 3600.0 < window_hours
        move_hi = open_ & inside
        move_lo = open_ & ~inside
        hi[move_hi] = mid[move_hi]
        lo[move_lo] = mid[move_lo] + 1


def aggregate_arrays(group: np.ndarray, times: np.ndarray, amounts: np.ndarray,
                     spec: AggregationSpec) -> np.ndarray:
    """New feature columns, shape (n, len(spec.column_names())), rows in input order."""
    n = len(times)
    out = np.zeros((n, len(spec.windows_hours) * len(spec.functions)))
    _, group_id = np.unique(group, return_inverse=True)
    order = np.lexsort((times, group_id))
    boundaries = np.flatnonzero(np.diff(group_id[order])) + 1
    for rows in np.split(order, boundaries):
        if len(rows) == 0:
            continue
        t = times[rows]
        prefix, scale = _exact_prefix_sums(amounts[rows])
        end = np.searchsorted(t, t, side="left")  # strictly earlier
        col = 0
        for w in spec.windows_hours:
            start = _window_start(t, end, w)
            count = end - start
            total = np.array([int(s) / scale for s in (prefix[end] - prefix[start])], dtype=np.float64)
            for g in spec.functions:
                if g == "count":
                    out[rows, col] = count
                elif g == "sum":
                    out[rows, col] = total
                else:
                    out[rows, col] = np.divide(total, count, out=np.zeros(len(rows)), where=count > 0)
                col += 1
    return out


def aggregate(ds: LabeledDataset, amounts: str, spec: AggregationSpec) -> LabeledDataset:
    """Append one feature per (window, function) to ``ds``; empty windows give 0."""
    if ds.timestamps is None:
        raise ValueError("aggregation needs timestamps")
    for name in (spec.group_by, amounts):
        if name not in ds.feature_names:
            raise MissingColumnError(f"no feature column named {name!r}")
    if spec.amount != amounts:
        spec = AggregationSpec(spec.group_by, spec.windows_hours, spec.functions, amounts)
    new = aggregate_arrays(ds.column(spec.group_by), ds.timestamps, ds.column(amounts), spec)
    return LabeledDataset(np.hstack([ds.features, new]), ds.labels, ds.timestamps,
                          ds.feature_names + spec.column_names())
