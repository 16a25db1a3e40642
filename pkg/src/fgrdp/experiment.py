"""Repeat runner and parameter sweeps emitting one CSV row per (grid point, method).

Random streams (all derived from the master ``seed``):

* ``("graph", n)``: node sample for a grid point (``("graph", n, r)`` when
  ``resample_graph`` is set),
* ``("levels", n)``: edge-level draw,
* ``("fine", r)`` / ``("uniform", r)``: protocol noise of repeat ``r``.

None of these depend on the swept budget or level fraction, so every grid
point of an epsilon or fraction sweep reuses the same coins (common random
numbers) and the fine-grained and uniform runs are paired per repeat.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .baselines import BaselineConfig, run_kstar_uniform, run_triangle_uniform
from .graph import (
    Graph,
    barabasi_albert,
    erdos_renyi,
    exact_kstar_count,
    exact_triangle_count,
    load_edge_list,
    max_degree,
    sample_induced_subgraph,
)
from .kstar import KStarRunConfig, run_kstar
from .metrics import metric_mre, metric_mse, raw_squared_error
from .privacy import PrivacyPolicy, assign_edge_levels
from .rng import derive_seed
from .triangle import TriangleRunConfig, run_triangle

log = logging.getLogger(__name__)

DATA_DIR_ENV = "FGRDP_DATA_DIR"
CSV_HEADER = [
    "task", "dataset", "n", "k", "eps1", "eps2", "alpha", "frac1", "method",
    "true_count", "mean_est", "mse", "mre", "repeats", "seed", "wall_ms",
]
DEBUG_COLUMNS = ["raw_sq_err"]
METHODS = ("fine", "uniform")


@dataclass
class ExperimentConfig:
    dataset: str = "er:500,0.05"
    task: str = "triangle"
    k: int = 2
    eps1: float = 1.0
    eps_multipliers: tuple[float, ...] = (1.0, 2.0)
    fractions: tuple[float, ...] = (0.2, 0.8)
    alpha: float = 0.5
    d_tilde: str = "exact"
    repeats: int = 100
    seed: int = 0
    sample_n: int | None = None
    sweep: str = "none"
    grid: tuple[float, ...] = ()
    methods: tuple[str, ...] = METHODS
    resample_graph: bool = False
    timing: bool = False
    debug: bool = False

    def __post_init__(self):
        if self.task not in ("triangle", "kstar"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.sweep not in ("none", "eps", "n", "frac"):
            raise ValueError(f"unknown sweep {self.sweep!r}")
        if self.sweep != "none" and not self.grid:
            raise ValueError("a sweep needs a non-empty grid")
        if len(self.eps_multipliers) != len(self.fractions):
            raise ValueError("need one fraction per privacy level")
        if self.sweep == "frac" and len(self.fractions) != 2:
            raise ValueError("fraction sweeps need exactly two levels")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.d_tilde != "exact":
            int(self.d_tilde)

    @property
    def budgets(self) -> tuple[float, ...]:
        return tuple(self.eps1 * m for m in self.eps_multipliers)

    def points(self) -> list["ExperimentConfig"]:
        """One config per grid point, with the swept field substituted."""
        if self.sweep == "none":
            return [self]
        out = []
        for x in self.grid:
            if self.sweep == "eps":
                out.append(replace(self, sweep="none", grid=(), eps1=float(x)))
            elif self.sweep == "n":
                out.append(replace(self, sweep="none", grid=(), sample_n=int(x)))
            else:
                out.append(replace(self, sweep="none", grid=(), fractions=(float(x), 1.0 - float(x))))
        return out


_LIST_KEYS = {"eps_multipliers", "fractions", "grid", "methods"}
_INT_KEYS = {"k", "repeats", "seed", "sample_n"}
_FLOAT_KEYS = {"eps1", "alpha"}
_BOOL_KEYS = {"resample_graph", "timing", "debug"}


def parse_config(lines: Iterable[str]) -> ExperimentConfig:
    """Flat ``key = value`` text; ``#`` starts a comment, lists are comma-separated."""
    kw: dict = {}
    known = set(ExperimentConfig.__dataclass_fields__)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        if key == "eps2":
            kw["_eps2"] = float(value)
            continue
        if key not in known:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in _LIST_KEYS:
            items = [v.strip() for v in value.split(",") if v.strip()]
            kw[key] = tuple(items) if key == "methods" else tuple(float(v) for v in items)
        elif key in _INT_KEYS:
            kw[key] = int(value)
        elif key in _FLOAT_KEYS:
            kw[key] = float(value)
        elif key in _BOOL_KEYS:
            kw[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            kw[key] = value
    eps2 = kw.pop("_eps2", None)
    if eps2 is not None:
        kw["eps_multipliers"] = (1.0, eps2 / kw.get("eps1", 1.0))
    return ExperimentConfig(**kw)


def resolve_dataset(spec: str, seed: int) -> Graph:
    """``er:n,p`` / ``ba:n,m`` synthetic graphs, or a SNAP edge-list path.

    Relative paths that do not exist are looked up under ``$FGRDP_DATA_DIR``.
    """
    kind, _, args = spec.partition(":")
    if kind == "er" and args:
        n, p = args.split(",")
        return erdos_renyi(int(n), float(p), derive_seed(seed, "dataset", spec))
    if kind == "ba" and args:
        n, m = args.split(",")
        return barabasi_albert(int(n), int(m), derive_seed(seed, "dataset", spec))
    path = Path(spec)
    if not path.exists() and not path.is_absolute() and os.environ.get(DATA_DIR_ENV):
        path = Path(os.environ[DATA_DIR_ENV]) / spec
    if not path.exists():
        raise FileNotFoundError(f"dataset {spec!r} not found")
    with open(path) as fh:
        g, _ = load_edge_list(fh)
    return g


def true_count(g: Graph, task: str, k: int) -> int:
    return exact_triangle_count(g) if task == "triangle" else exact_kstar_count(g, k)


def d_tilde_for(g: Graph, mode: str) -> int:
    if mode == "exact":
        return max(max_degree(g), 1)
    return int(mode)


def run_once(g: Graph, policy: PrivacyPolicy, cfg: ExperimentConfig, method: str,
             d_tilde: int, seed: int) -> float:
    if method == "fine":
        if cfg.task == "kstar":
            return run_kstar(g, KStarRunConfig(cfg.k, d_tilde, policy, seed)).estimate
        return run_triangle(g, TriangleRunConfig(d_tilde, policy, seed, cfg.alpha)).estimate
    base = BaselineConfig.strictest(policy, d_tilde=d_tilde, seed=seed, alpha=cfg.alpha, k=cfg.k)
    if cfg.task == "kstar":
        return run_kstar_uniform(g, base).estimate
    return run_triangle_uniform(g, base).estimate


@dataclass
class EstimateReport:
    method: str
    n: int
    true_count: float
    estimates: np.ndarray
    truths: np.ndarray
    wall_time: float
    params: ExperimentConfig = field(repr=False)

    @property
    def mean_estimate(self) -> float:
        return float(np.mean(self.estimates))

    def _metric(self, fn) -> float:
        if np.any(self.truths == 0):
            return math.nan
        return float(np.mean([fn([e], t) for e, t in zip(self.estimates, self.truths)]))

    @property
    def mse(self) -> float:
        return self._metric(metric_mse)

    @property
    def mre(self) -> float:
        return self._metric(metric_mre)

    @property
    def raw_sq_err(self) -> float:
        return float(np.mean([raw_squared_error([e], t) for e, t in zip(self.estimates, self.truths)]))

    def row(self) -> dict:
        c = self.params
        b = c.budgets
        return {
            "task": c.task,
            "dataset": c.dataset,
            "n": self.n,
            "k": c.k if c.task == "kstar" else "",
            "eps1": _fmt(b[0]),
            "eps2": _fmt(b[1]) if len(b) > 1 else "",
            "alpha": _fmt(c.alpha) if c.task == "triangle" else "",
            "frac1": _fmt(c.fractions[0]),
            "method": self.method,
            "true_count": _fmt(self.true_count),
            "mean_est": _fmt(self.mean_estimate),
            "mse": _fmt(self.mse),
            "mre": _fmt(self.mre),
            "repeats": len(self.estimates),
            "seed": c.seed,
            "wall_ms": _fmt(round(self.wall_time * 1000.0, 3)) if c.timing else "0",
            "raw_sq_err": _fmt(self.raw_sq_err),
        }


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def run_point(cfg: ExperimentConfig, base: Graph) -> list[EstimateReport]:
    """All methods at one grid point."""
    n_label = cfg.sample_n if cfg.sample_n is not None else base.node_count

    def graph_for(rep: int | None) -> tuple[Graph, PrivacyPolicy]:
        if cfg.sample_n is None:
            g = base
        else:
            labels = ("graph", cfg.sample_n) if rep is None else ("graph", cfg.sample_n, rep)
            g = sample_induced_subgraph(base, cfg.sample_n, derive_seed(cfg.seed, *labels))
        lv_labels = ("levels", n_label) if rep is None else ("levels", n_label, rep)
        policy = assign_edge_levels(g, cfg.fractions, derive_seed(cfg.seed, *lv_labels), cfg.budgets)
        return g, policy

    fixed = None if cfg.resample_graph else graph_for(None)
    if fixed is not None:
        fixed_truth = true_count(fixed[0], cfg.task, cfg.k)
    reports = []
    for method in cfg.methods:
        start = time.perf_counter()
        est = np.empty(cfg.repeats)
        truths = np.empty(cfg.repeats)
        for r in range(cfg.repeats):
            if fixed is None:
                g, policy = graph_for(r)
                truths[r] = true_count(g, cfg.task, cfg.k)
            else:
                g, policy = fixed
                truths[r] = fixed_truth
            est[r] = run_once(g, policy, cfg, method, d_tilde_for(g, cfg.d_tilde),
                              derive_seed(cfg.seed, method, r))
        rep = EstimateReport(method, n_label, float(np.mean(truths)), est, truths,
                             time.perf_counter() - start, cfg)
        if np.any(truths == 0):
            log.warning("true count is 0 at %s n=%s; normalised metrics set to NaN", cfg.task, n_label)
        reports.append(rep)
    return reports


def run_experiment(cfg: ExperimentConfig, base: Graph | None = None) -> list[EstimateReport]:
    if base is None:
        base = resolve_dataset(cfg.dataset, cfg.seed)
    out = []
    for point in cfg.points():
        out.extend(run_point(point, base))
    return out


def write_rows(reports: list[EstimateReport], out: TextIO, debug: bool = False) -> None:
    header = CSV_HEADER + (DEBUG_COLUMNS if debug else [])
    w = csv.DictWriter(out, fieldnames=header, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for rep in reports:
        w.writerow(rep.row())
