"""Utility metrics normalised by the true count, and the clustering coefficient."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


def _check_truth(truth: float) -> None:
    if truth == 0:
        raise ValueError(
            "normalised error is undefined for a true count of 0; "
            "use raw_squared_error instead"
        )


def metric_mse(estimates, truth: float) -> float:
    """Mean over repeats of ``(estimate - truth)^2 / truth``."""
    _check_truth(truth)
    e = np.asarray(estimates, dtype=np.float64)
    return float(np.mean((e - truth) ** 2 / truth))


def metric_mre(estimates, truth: float) -> float:
    """Mean over repeats of ``|estimate - truth| / truth``."""
    _check_truth(truth)
    e = np.asarray(estimates, dtype=np.float64)
    return float(np.mean(np.abs(e - truth) / truth))


def raw_squared_error(estimates, truth: float) -> float:
    e = np.asarray(estimates, dtype=np.float64)
    return float(np.mean((e - truth) ** 2))


class Clustering(NamedTuple):
    value: float
    clamped: bool


def clustering_coefficient(triangle_est: float, twostar_est: float) -> Clustering:
    """Global clustering ``3 T / S2``, clamped to ``[0, 1]``."""
    if not twostar_est > 0:
        raise ValueError("2-star count must be positive")
    raw = 3.0 * triangle_est / twostar_est
    value = min(max(raw, 0.0), 1.0)
    return Clustering(value, value != raw)
