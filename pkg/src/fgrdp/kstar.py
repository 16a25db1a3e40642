"""Fine-grained local k-star counting with per-level Laplace noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .privacy import BudgetLedger, PrivacyPolicy, clipped_degrees, laplace_noise
from .rng import stream

_EXACT_FLOAT = 2**53


@dataclass(frozen=True)
class KStarRunConfig:
    k: int
    d_tilde: int
    policy: PrivacyPolicy
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k-stars need k >= 2")
        if self.d_tilde < 1:
            raise ValueError("d_tilde must be at least 1")


@dataclass
class KStarEstimate:
    estimate: float
    per_node_reports: np.ndarray
    ledger: BudgetLedger
    sensitivity: int
    n_counts: np.ndarray


def kstar_sensitivity(d_tilde: int, k: int) -> int:
    """Global sensitivity ``C(d_tilde, k-1)`` of a clipped local k-star count."""
    if d_tilde < 0 or k < 2:
        raise ValueError("need d_tilde >= 0 and k >= 2")
    return math.comb(d_tilde, k - 1)


def local_kstar_counts(g: Graph, k: int, d_tilde: int) -> np.ndarray:
    """``C(d_i', k)`` on clipped degrees, as float64 (exact below 2**53)."""
    table = [math.comb(x, k) for x in range(d_tilde + 1)]
    if table[-1] >= _EXACT_FLOAT:
        raise OverflowError(f"C({d_tilde}, {k}) is too large to represent exactly")
    return np.asarray(table, dtype=np.float64)[clipped_degrees(g, d_tilde)]


def run_kstar(g: Graph, cfg: KStarRunConfig) -> KStarEstimate:
    """One run of the protocol: every node reports a noisy clipped k-star count.

    Node ``i`` adds ``Lap(C(d_tilde, k-1) / (eps_{l(v_i)} / 2))``. The halved
    budget is charged once per endpoint, so each edge spends
    ``eps_{l(v_i)}/2 + eps_{l(v_j)}/2``.
    """
    policy = cfg.policy
    if not policy.matches(g):
        raise ValueError("policy was built for a different graph")
    delta = kstar_sensitivity(cfg.d_tilde, cfg.k)
    local = local_kstar_counts(g, cfg.k, cfg.d_tilde)
    eps_node = policy.node_budget
    scales = float(delta) / (eps_node / 2.0)
    reports = local + laplace_noise(scales, stream(cfg.seed, "kstar-report"))

    ledger = BudgetLedger(policy.edges)
    ledger.record("kstar-report-u", eps_node[policy.edges[:, 0]] / 2.0)
    ledger.record("kstar-report-v", eps_node[policy.edges[:, 1]] / 2.0)
    return KStarEstimate(
        estimate=float(np.sum(reports)),
        per_node_reports=reports,
        ledger=ledger,
        sensitivity=delta,
        n_counts=policy.level_counts(),
    )


def variance_prediction(n_counts, budgets, d_tilde: int, k: int) -> float:
    """Exact variance ``4 C(d_tilde, k-1)^2 sum_l n_l / eps_l^2`` (needs d_tilde >= d_max)."""
    n_counts = np.asarray(n_counts, dtype=np.float64)
    budgets = np.asarray(budgets, dtype=np.float64)
    if n_counts.shape != budgets.shape:
        raise ValueError("need one node count per budget")
    delta = float(kstar_sensitivity(d_tilde, k))
    return 4.0 * delta**2 * float(np.sum(n_counts / budgets**2))


def noise_variance(n_counts, budgets, d_tilde: int, k: int) -> float:
    """Actual variance of the estimate when ``d_tilde >= d_max``.

    A Laplace draw of scale ``b`` has variance ``2 b^2``, so this is exactly
    twice :func:`variance_prediction`, which counts each draw as ``b^2``.
    """
    return 2.0 * variance_prediction(n_counts, budgets, d_tilde, k)
