"""Uniform-budget references: the fine-grained protocols with a single level.

Comparisons run the baseline at the strictest budget any edge asks for, which
is what a protocol without per-edge levels has to use.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Graph
from .kstar import KStarEstimate, KStarRunConfig, run_kstar
from .privacy import PrivacyPolicy, uniform_policy
from .triangle import TriangleEstimate, TriangleRunConfig, run_triangle


@dataclass(frozen=True)
class BaselineConfig:
    epsilon: float
    d_tilde: int
    seed: int = 0
    alpha: float = 0.5
    k: int = 2

    @classmethod
    def strictest(cls, policy: PrivacyPolicy, **kw) -> "BaselineConfig":
        return cls(epsilon=min(policy.budgets), **kw)


def run_kstar_uniform(g: Graph, cfg: BaselineConfig) -> KStarEstimate:
    return run_kstar(g, KStarRunConfig(cfg.k, cfg.d_tilde, uniform_policy(g, cfg.epsilon), cfg.seed))


def run_triangle_uniform(g: Graph, cfg: BaselineConfig) -> TriangleEstimate:
    return run_triangle(
        g, TriangleRunConfig(cfg.d_tilde, uniform_policy(g, cfg.epsilon), cfg.seed, cfg.alpha)
    )
