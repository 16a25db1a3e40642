"""Two-round fine-grained local triangle counting.

Round 1: after nodes are reordered strictest-level-first, node ``i`` uploads
randomized response of its lower-triangle row ``a_{i,0..i-1}`` at budget
``alpha * eps_{l(v_i)}``. The analyst assembles the rows and broadcasts them.

Round 2: node ``i`` looks at pairs ``j < k`` of its clipped neighbors above
it, buckets each pair by the level of ``k`` (the uploader of bit ``(k, j)``),
debiases the matched counts per bucket and adds Laplace noise at budget
``(1 - alpha) * eps_{l(v_i)}``.
"""

from __future__ import annotations

import hashlib
import struct
import weakref
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .graph import Graph
from .privacy import (
    BudgetLedger,
    PrivacyPolicy,
    is_level_ordered,
    laplace_noise,
    reorder_by_level,
    rr_retention,
)
from .rng import open_uniforms, stream

MIN_BIAS_GAP = 1e-9
_MAGIC = b"FGOM"

# reordering depends only on the (immutable) policy; Monte Carlo loops reuse it
_reorder_cache: "weakref.WeakKeyDictionary[PrivacyPolicy, object]" = weakref.WeakKeyDictionary()


def _reordered(g: Graph, policy: PrivacyPolicy):
    hit = _reorder_cache.get(policy)
    if hit is None:
        hit = _reorder_cache[policy] = reorder_by_level(g, policy)
    return hit


@dataclass(frozen=True)
class TriangleRunConfig:
    d_tilde: int
    policy: PrivacyPolicy
    seed: int = 0
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.d_tilde < 1:
            raise ValueError("d_tilde must be at least 1")


@dataclass(frozen=True, eq=False)
class ObfuscatedMatrix:
    """Randomized lower triangle: row ``i`` holds ``i`` bits.

    ``row_p[i]`` is the retention probability node ``i`` used.
    """

    n: int
    bits: np.ndarray
    row_p: np.ndarray

    def __post_init__(self):
        if self.bits.shape != (self.n * (self.n - 1) // 2,):
            raise ValueError("bit array does not match n")
        if self.row_p.shape != (self.n,):
            raise ValueError("need one retention probability per row")

    def row(self, i: int) -> np.ndarray:
        base = i * (i - 1) // 2
        return self.bits[base:base + i]

    def bit(self, i: int, j: int) -> int:
        hi, lo = max(i, j), min(i, j)
        if hi == lo:
            raise ValueError("no diagonal bits")
        return int(self.bits[hi * (hi - 1) // 2 + lo])

    def digest(self) -> str:
        return hashlib.sha256(np.packbits(self.bits).tobytes()).hexdigest()[:16]

    def dump(self, path, seed: int = 0) -> None:
        """Bit-packed file: 16-byte header (magic, uint32 n, uint64 seed), then bits."""
        header = _MAGIC + struct.pack("<IQ", self.n, seed & 0xFFFFFFFFFFFFFFFF)
        Path(path).write_bytes(header + np.packbits(self.bits).tobytes())

    @staticmethod
    def load(path) -> tuple[np.ndarray, int, int]:
        """Read a dump back as ``(bits, n, seed)``; retention probabilities are not stored."""
        raw = Path(path).read_bytes()
        if raw[:4] != _MAGIC:
            raise ValueError("not an obfuscated-matrix dump")
        n, seed = struct.unpack("<IQ", raw[4:16])
        count = n * (n - 1) // 2
        bits = np.unpackbits(np.frombuffer(raw[16:], dtype=np.uint8), count=count)
        return bits, n, seed


@dataclass
class LocalTriangleStats:
    node: int
    levels: np.ndarray  # third-edge levels l >= l(v_i)
    s: np.ndarray
    t: np.ndarray
    w_tilde: np.ndarray

    @property
    def total(self) -> float:
        return float(self.w_tilde.sum())


@dataclass
class TriangleEstimate:
    estimate: float
    per_node_reports: np.ndarray  # indexed by original node id
    ledger: BudgetLedger
    n_counts: np.ndarray
    matrix_digest: str
    permutation: np.ndarray
    matrix: ObfuscatedMatrix | None = None


def rr_retention_split(alpha: float, epsilon):
    """Retention probability of round-1 randomized response at ``alpha * eps``."""
    prod = alpha * np.asarray(epsilon, dtype=np.float64)
    if np.any(~(prod > 0)):
        raise ValueError("alpha * epsilon must be positive")
    return rr_retention(prod)


def level_retentions(policy: PrivacyPolicy, alpha: float) -> np.ndarray:
    p = np.asarray(rr_retention_split(alpha, np.asarray(policy.budgets)), dtype=np.float64).reshape(-1)
    if np.any(2.0 * p - 1.0 < MIN_BIAS_GAP):
        raise ValueError("alpha * epsilon too small: 2p - 1 underflows the debiasing step")
    return p


def round1_upload(g: Graph, policy: PrivacyPolicy, alpha: float, rng: np.random.Generator,
                  perm: np.ndarray | None = None) -> ObfuscatedMatrix:
    """Every node perturbs each bit of its lower-triangle row at ``alpha * eps_{l(v_i)}``.

    ``g``/``policy`` must already be level-ordered. ``perm`` (new -> original
    label) only decides which uniform each pair consumes.
    """
    if not policy.matches(g):
        raise ValueError("policy was built for a different graph")
    if not is_level_ordered(policy):
        raise ValueError("graph must be reordered by privacy level before round 1")
    n = g.node_count
    row_p = level_retentions(policy, alpha)[policy.node_level - 1]
    uniforms = open_uniforms(rng, n * (n - 1) // 2)
    bits = kernels.rr_lower_triangle(g.indptr, g.indices, row_p, uniforms, perm)
    return ObfuscatedMatrix(n, bits, row_p)


def debias(t, s, p):
    """Unbiased matched-triangle estimate ``(t - (1 - p) s) / (2p - 1)``."""
    return (np.asarray(t, dtype=np.float64) - (1.0 - p) * np.asarray(s, dtype=np.float64)) / (2.0 * p - 1.0)


def round2_tables(g: Graph, matrix: ObfuscatedMatrix, policy: PrivacyPolicy,
                  d_tilde: int, alpha: float):
    """``(s, t, w_tilde)`` for all nodes at once, each of shape ``(n, L)``."""
    if matrix.n != g.node_count:
        raise ValueError("matrix size does not match the graph")
    p = level_retentions(policy, alpha)
    s, t = kernels.round2_counts(g.indptr, g.indices, d_tilde, policy.node_level - 1,
                                 policy.level_count, matrix.bits)
    return s, t, debias(t, s, p[None, :])


def round2_local_estimate(g: Graph, i: int, matrix: ObfuscatedMatrix, policy: PrivacyPolicy,
                          d_tilde: int, alpha: float) -> LocalTriangleStats:
    """Node ``i``'s per-level counts, computed from its own clipped row only."""
    if matrix.n != g.node_count:
        raise ValueError("matrix size does not match the graph")
    p = level_retentions(policy, alpha)
    L = policy.level_count
    s = np.zeros(L, dtype=np.int64)
    t = np.zeros(L, dtype=np.int64)
    up = [x for x in g.neighbors(i)[:d_tilde] if x > i]
    for a, j in enumerate(up):
        for k in up[a + 1:]:
            z = policy.node_level[k] - 1
            s[z] += 1
            t[z] += matrix.bit(k, j)
    own = policy.node_level[i] - 1
    return LocalTriangleStats(
        node=i,
        levels=np.arange(own + 1, L + 1),
        s=s[own:],
        t=t[own:],
        w_tilde=debias(t[own:], s[own:], p[own:]),
    )


def run_triangle(g: Graph, cfg: TriangleRunConfig, keep_matrix: bool = False) -> TriangleEstimate:
    """One full two-round run; reports are returned in original node order."""
    policy = cfg.policy
    if not policy.matches(g):
        raise ValueError("policy was built for a different graph")
    alpha = cfg.alpha
    p = level_retentions(policy, alpha)
    g2, perm, counts, pol2 = _reordered(g, policy)

    matrix = round1_upload(g2, pol2, alpha, stream(cfg.seed, "triangle-round1"), perm)
    _, _, w = round2_tables(g2, matrix, pol2, cfg.d_tilde, alpha)
    w_node = w.sum(axis=1)

    lv = pol2.node_level - 1
    eps = np.asarray(pol2.budgets)[lv]
    scales = (cfg.d_tilde / (2.0 * p[lv] - 1.0)) / ((1.0 - alpha) * eps)
    reports = np.empty(g.node_count)
    # Laplace draw for original node u sits at position u of the stream
    noise = laplace_noise(scales[np.argsort(perm)], stream(cfg.seed, "triangle-round2"))
    reports[perm] = w_node
    reports += noise

    new_of_old = np.empty_like(perm)
    new_of_old[perm] = np.arange(perm.shape[0])
    e = policy.edges
    pos = new_of_old[e]
    upper = np.where(pos[:, 0] > pos[:, 1], e[:, 0], e[:, 1])
    lower = np.where(pos[:, 0] > pos[:, 1], e[:, 1], e[:, 0])
    eps_node = policy.node_budget
    ledger = BudgetLedger(e)
    ledger.record("triangle-round1-rr", alpha * eps_node[upper])
    ledger.record("triangle-round2-laplace", (1.0 - alpha) * eps_node[lower])

    return TriangleEstimate(
        estimate=float(np.sum(reports)),
        per_node_reports=reports,
        ledger=ledger,
        n_counts=counts,
        matrix_digest=matrix.digest(),
        permutation=perm,
        matrix=matrix if keep_matrix else None,
    )


def variance_bound(n_counts, budgets, alpha: float, d_tilde: int) -> float:
    """Order-of-magnitude variance bound ``sum_l n_l f(eps_l)``.

    ``f(x) = e^{ax}/(e^{ax}-1)^2 * (d^3 + e^{ax}/((1-a)x)^2 * d^2)``. The
    constant hidden in the bound is not tracked, so this is not an exact
    variance.
    """
    n_counts = np.asarray(n_counts, dtype=np.float64)
    x = np.asarray(budgets, dtype=np.float64)
    return float(np.sum(n_counts * bound_term(x, alpha, d_tilde)))


def bound_term(x, alpha: float, d_tilde: int):
    x = np.asarray(x, dtype=np.float64)
    ex = np.exp(alpha * x)
    d = float(d_tilde)
    return ex / np.expm1(alpha * x) ** 2 * (d**3 + ex / ((1.0 - alpha) * x) ** 2 * d**2)
