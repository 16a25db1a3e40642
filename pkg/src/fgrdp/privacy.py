"""Privacy levels, perturbation primitives, clipping, reordering and the
per-edge budget ledger.

Levels are 1-based: level 1 is the strictest (smallest budget). A node takes
the strictest level among its incident edges; isolated nodes get the weakest
level ``L``. Node levels are treated as public metadata: both protocols need
the analyst to know them in order to group and reorder nodes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, TextIO

import numpy as np

from .graph import Graph
from .rng import open_uniforms, stream


@dataclass(frozen=True, eq=False)
class PrivacyPolicy:
    budgets: tuple[float, ...]
    edges: np.ndarray
    edge_level: np.ndarray
    node_level: np.ndarray = field(repr=False)

    @classmethod
    def from_edge_levels(cls, g: Graph, budgets, edge_level) -> "PrivacyPolicy":
        """Attach ``edge_level`` (aligned with ``g.edges()``) and derive node levels."""
        budgets = tuple(float(b) for b in budgets)
        if not budgets:
            raise ValueError("at least one privacy level is required")
        if any(not b > 0 or not math.isfinite(b) for b in budgets):
            raise ValueError(f"budgets must be positive and finite, got {budgets}")
        if any(a >= b for a, b in zip(budgets, budgets[1:])):
            raise ValueError(f"budgets must be strictly increasing by level, got {budgets}")
        edges = g.edges()
        lv = np.asarray(edge_level, dtype=np.int64)
        if lv.shape != (edges.shape[0],):
            raise ValueError("edge_level must have one entry per edge")
        L = len(budgets)
        if lv.size and (lv.min() < 1 or lv.max() > L):
            raise ValueError(f"edge levels must lie in 1..{L}")
        node = np.full(g.node_count, L, dtype=np.int64)
        np.minimum.at(node, edges[:, 0], lv)
        np.minimum.at(node, edges[:, 1], lv)
        for arr in (edges, lv, node):
            arr.flags.writeable = False
        return cls(budgets, edges, lv, node)

    @property
    def level_count(self) -> int:
        return len(self.budgets)

    @property
    def node_count(self) -> int:
        return self.node_level.shape[0]

    def budget(self, level) -> np.ndarray | float:
        """Budget of a level (or array of levels)."""
        table = np.asarray(self.budgets)
        out = table[np.asarray(level) - 1]
        return float(out) if np.ndim(out) == 0 else out

    @property
    def node_budget(self) -> np.ndarray:
        return self.budget(self.node_level)

    @property
    def edge_budget(self) -> np.ndarray:
        return self.budget(self.edge_level)

    def level_counts(self) -> np.ndarray:
        """``n_1 .. n_L``: how many nodes sit at each level."""
        return np.bincount(self.node_level - 1, minlength=self.level_count)

    def level_of(self, i: int, j: int) -> int:
        lo, hi = min(i, j), max(i, j)
        key = self.edges[:, 0] * self.node_count + self.edges[:, 1]
        pos = int(np.searchsorted(key, lo * self.node_count + hi))
        if pos >= key.shape[0] or key[pos] != lo * self.node_count + hi:
            raise KeyError(f"({i}, {j}) is not an edge")
        return int(self.edge_level[pos])

    def matches(self, g: Graph) -> bool:
        return g.node_count == self.node_count and np.array_equal(g.edges(), self.edges)

    def relabel(self, g_new: Graph, new_of_old: np.ndarray) -> "PrivacyPolicy":
        """Carry the edge levels over to ``g_new``, the relabelled graph."""
        mapped = np.asarray(new_of_old)[self.edges]
        pos = g_new.edge_index(mapped[:, 0], mapped[:, 1])
        if (pos < 0).any():
            raise ValueError("relabelled graph does not contain every policy edge")
        lv = np.empty_like(self.edge_level)
        lv[pos] = self.edge_level
        return PrivacyPolicy.from_edge_levels(g_new, self.budgets, lv)


def uniform_policy(g: Graph, epsilon: float) -> PrivacyPolicy:
    return PrivacyPolicy.from_edge_levels(g, (epsilon,), np.ones(g.edge_count, dtype=np.int64))


def assign_edge_levels(g: Graph, fractions, seed: int, budgets) -> PrivacyPolicy:
    """Draw each edge's level independently with probability ``fractions[l-1]``.

    One uniform per edge, compared against the cumulative fractions, so for a
    fixed seed the set of level-1 edges grows monotonically with
    ``fractions[0]``.
    """
    fr = [float(f) for f in fractions]
    if len(fr) != len(budgets):
        raise ValueError("need one fraction per budget")
    if any(f < 0 for f in fr):
        raise ValueError("fractions must be non-negative")
    if abs(math.fsum(fr) - 1.0) > 1e-12:
        raise ValueError(f"fractions must sum to 1, got {math.fsum(fr)!r}")
    cum = np.cumsum(fr)
    cum[-1] = 1.0
    u = stream(seed, "edge-levels").random(g.edge_count)
    lv = np.searchsorted(cum, u, side="right") + 1
    lv = np.minimum(lv, len(fr))
    return PrivacyPolicy.from_edge_levels(g, budgets, lv)


# perturbation primitives ----------------------------------------------------


def rr_retention(epsilon) -> np.ndarray | float:
    """Keep-probability ``e^eps / (1 + e^eps)`` of eps-randomized response."""
    eps = np.asarray(epsilon, dtype=np.float64)
    if np.any(~(eps > 0)):
        raise ValueError("randomized response needs epsilon > 0")
    p = 1.0 / (1.0 + np.exp(-eps))
    return float(p) if p.ndim == 0 else p


def rr_perturb_bit(bit: int, epsilon: float, rng: np.random.Generator) -> int:
    p = rr_retention(epsilon)
    return int(bit) if rng.random() < p else 1 - int(bit)


def laplace_from_uniform(u, scale):
    """Inverse Laplace CDF; ``u`` in (0, 1). A zero scale yields zero noise."""
    c = np.asarray(u, dtype=np.float64) - 0.5
    return -np.asarray(scale, dtype=np.float64) * np.sign(c) * np.log1p(-2.0 * np.abs(c))


def laplace_sample(scale: float, rng: np.random.Generator) -> float:
    if not scale > 0:
        raise ValueError("Laplace scale must be positive")
    return float(laplace_from_uniform(open_uniforms(rng, 1)[0], scale))


def laplace_noise(scales: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One Laplace draw per entry of ``scales``; entry ``i`` uses uniform ``i``."""
    scales = np.asarray(scales, dtype=np.float64)
    if np.any(scales < 0):
        raise ValueError("Laplace scales must be non-negative")
    return laplace_from_uniform(open_uniforms(rng, scales.shape[0]), scales)


# clipping and reordering ----------------------------------------------------


def clip_neighbors(g: Graph, i: int, d_tilde: int) -> np.ndarray:
    """Keep at most ``d_tilde`` neighbors of ``i``: the lowest-indexed ones."""
    if d_tilde < 0:
        raise ValueError("d_tilde must be non-negative")
    return g.neighbors(i)[:d_tilde]


def clipped_degrees(g: Graph, d_tilde: int) -> np.ndarray:
    if d_tilde < 0:
        raise ValueError("d_tilde must be non-negative")
    return np.minimum(g.degrees, d_tilde)


class Reordered(NamedTuple):
    graph: Graph
    permutation: np.ndarray  # new index -> old index
    counts: np.ndarray  # n_1 .. n_L
    policy: PrivacyPolicy


def reorder_by_level(g: Graph, policy: PrivacyPolicy) -> Reordered:
    """Relabel nodes so levels are non-decreasing in index, ties by old index."""
    if not policy.matches(g):
        raise ValueError("policy was built for a different graph")
    perm = np.argsort(policy.node_level, kind="stable")
    new_of_old = np.empty_like(perm)
    new_of_old[perm] = np.arange(perm.shape[0])
    g2 = g.relabel(new_of_old)
    return Reordered(g2, perm, policy.level_counts(), policy.relabel(g2, new_of_old))


def is_level_ordered(policy: PrivacyPolicy) -> bool:
    return bool(np.all(np.diff(policy.node_level) >= 0))


# budget ledger ---------------------------------------------------------------


class BudgetLedger:
    """Budget consumed per edge, broken down by protocol step."""

    def __init__(self, edges: np.ndarray):
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.entries: list[tuple[str, np.ndarray]] = []

    def record(self, step: str, consumed) -> None:
        consumed = np.broadcast_to(np.asarray(consumed, dtype=np.float64), (self.edges.shape[0],)).copy()
        self.entries.append((step, consumed))

    def totals(self) -> np.ndarray:
        out = np.zeros(self.edges.shape[0])
        for _, c in self.entries:
            out += c
        return out

    def write_csv(self, out: TextIO) -> None:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["edge", "step", "consumed"])
        for step, c in self.entries:
            for (u, v), x in zip(self.edges, c):
                w.writerow([f"{u}-{v}", step, repr(float(x))])

    @classmethod
    def read_csv(cls, lines: Iterable[str]) -> "BudgetLedger":
        rows = list(csv.DictReader(lines))
        keys: dict[tuple[int, int], int] = {}
        steps: dict[str, dict[int, float]] = {}
        for r in rows:
            u, v = (int(x) for x in r["edge"].split("-"))
            idx = keys.setdefault((min(u, v), max(u, v)), len(keys))
            steps.setdefault(r["step"], {})
            steps[r["step"]][idx] = steps[r["step"]].get(idx, 0.0) + float(r["consumed"])
        ledger = cls(np.array(list(keys), dtype=np.int64).reshape(-1, 2))
        for step, vals in steps.items():
            c = np.zeros(len(keys))
            for idx, x in vals.items():
                c[idx] = x
            ledger.record(step, c)
        return ledger


@dataclass
class LedgerReport:
    passed: bool
    edges_checked: int
    violations: int
    max_excess: float
    tight_edges: int
    missing_edges: list = field(default_factory=list)
    negative_entries: int = 0

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}: {self.edges_checked} edges, {self.violations} over budget "
            f"(max excess {self.max_excess:.3g}), {self.tight_edges} exactly at budget, "
            f"{len(self.missing_edges)} missing, {self.negative_entries} negative entries"
        )


def ledger_check(ledger: BudgetLedger, policy: PrivacyPolicy, tol: float = 1e-12) -> LedgerReport:
    """Every edge's summed consumption must stay within its own level's budget."""
    n = policy.node_count
    lkey = ledger.edges.min(axis=1) * n + ledger.edges.max(axis=1) if ledger.edges.size else np.empty(0, np.int64)
    order = np.argsort(lkey)
    lkey = lkey[order]
    totals = ledger.totals()[order]
    pkey = policy.edges[:, 0] * n + policy.edges[:, 1]
    pos = np.minimum(np.searchsorted(lkey, pkey), max(lkey.shape[0] - 1, 0))
    present = (lkey[pos] == pkey) if lkey.size else np.zeros(pkey.shape, bool)
    missing = [tuple(int(x) for x in e) for e in policy.edges[~present]]
    spent = np.where(present, totals[pos] if lkey.size else 0.0, 0.0)
    allowed = policy.edge_budget
    excess = spent - allowed
    over = present & (excess > tol)
    negative = sum(int((c < 0).sum()) for _, c in ledger.entries)
    tight = int((present & (np.abs(excess) <= tol)).sum())
    return LedgerReport(
        passed=not missing and not over.any() and negative == 0,
        edges_checked=int(pkey.shape[0]),
        violations=int(over.sum()),
        max_excess=float(excess[present].max()) if present.any() else 0.0,
        tight_edges=tight,
        missing_edges=missing,
        negative_entries=negative,
    )


# policy serialization --------------------------------------------------------


def write_policy(policy: PrivacyPolicy, out: TextIO) -> None:
    out.write("budgets " + " ".join(repr(b) for b in policy.budgets) + "\n")
    for (u, v), lv in zip(policy.edges, policy.edge_level):
        out.write(f"{u} {v} {lv}\n")


def read_policy(lines: Iterable[str], g: Graph) -> PrivacyPolicy:
    budgets = None
    levels = np.zeros(g.edge_count, dtype=np.int64)
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if tok[0] == "budgets":
            budgets = [float(x) for x in tok[1:]]
            continue
        if len(tok) != 3:
            raise ValueError(f"line {lineno}: expected 'i j level'")
        i, j, lv = (int(x) for x in tok)
        pos = int(g.edge_index(i, j))
        if pos < 0:
            raise ValueError(f"line {lineno}: ({i}, {j}) is not an edge of the graph")
        levels[pos] = lv
    if budgets is None:
        raise ValueError("policy file has no 'budgets' header")
    if (levels == 0).any():
        raise ValueError(f"{int((levels == 0).sum())} edges have no level")
    return PrivacyPolicy.from_edge_levels(g, budgets, levels)
