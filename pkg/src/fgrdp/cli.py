"""Command line entry point: ``fgrdp <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace

from .experiment import (
    ExperimentConfig,
    EstimateReport,
    d_tilde_for,
    parse_config,
    resolve_dataset,
    run_experiment,
    run_once,
    true_count,
    write_rows,
)
from .graph import exact_kstar_count, exact_triangle_count, max_degree, sample_induced_subgraph
from .kstar import KStarRunConfig, run_kstar
from .metrics import clustering_coefficient
from .privacy import BudgetLedger, assign_edge_levels, ledger_check, read_policy, uniform_policy, write_policy
from .rng import derive_seed
from .triangle import TriangleRunConfig, run_triangle


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", default="er:500,0.05",
                   help="edge-list path, or er:N,P / ba:N,M for a synthetic graph")
    p.add_argument("--sample-n", type=int, default=None, help="induced subsample size")
    p.add_argument("--seed", type=int, default=0)


def _protocol_args(p: argparse.ArgumentParser) -> None:
    _graph_args(p)
    p.add_argument("--budgets", type=_floats, default=(1.0, 2.0), help="eps_1,...,eps_L (increasing)")
    p.add_argument("--fractions", type=_floats, default=(0.2, 0.8))
    p.add_argument("--policy-in", help="read edge levels from a policy file instead of drawing them")
    p.add_argument("--policy-out", help="write the edge levels used")
    p.add_argument("--ledger-out", help="write the budget ledger of the last repeat as CSV")
    p.add_argument("--d-tilde", default="exact", help="'exact' (true max degree) or an integer")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--timing", action="store_true", help="fill wall_ms (output no longer reproducible)")


def _load_graph(args):
    g = resolve_dataset(args.graph, args.seed)
    if args.sample_n is not None:
        g = sample_induced_subgraph(g, args.sample_n, derive_seed(args.seed, "graph", args.sample_n))
    return g


def _policy(args, g):
    if args.policy_in:
        with open(args.policy_in) as fh:
            return read_policy(fh, g)
    return assign_edge_levels(g, args.fractions, derive_seed(args.seed, "levels", g.node_count), args.budgets)


def _emit(reports, args) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_rows(reports, fh)
    else:
        write_rows(reports, sys.stdout)


def _single_run(args, task: str, method: str, k: int = 2, alpha: float = 0.5) -> int:
    import time

    import numpy as np

    g = _load_graph(args)
    policy = _policy(args, g)
    if method == "uniform" and args.epsilon is not None:
        policy = uniform_policy(g, args.epsilon)
    if args.policy_out:
        with open(args.policy_out, "w") as fh:
            write_policy(policy, fh)
    cfg = ExperimentConfig(
        dataset=args.graph, task=task, k=k, eps1=policy.budgets[0],
        eps_multipliers=tuple(b / policy.budgets[0] for b in policy.budgets),
        fractions=tuple(args.fractions) if len(args.fractions) == policy.level_count
        else (1.0,) + (0.0,) * (policy.level_count - 1),
        alpha=alpha, d_tilde=args.d_tilde, repeats=args.repeats, seed=args.seed,
        sample_n=args.sample_n, methods=(method,), timing=args.timing,
    )
    d_tilde = d_tilde_for(g, args.d_tilde)
    truth = true_count(g, task, k)
    start = time.perf_counter()
    est = np.array([run_once(g, policy, cfg, method, d_tilde, derive_seed(args.seed, method, r))
                    for r in range(args.repeats)])
    rep = EstimateReport(method, g.node_count, float(truth), est, np.full(args.repeats, float(truth)),
                         time.perf_counter() - start, cfg)
    if args.ledger_out:
        last = derive_seed(args.seed, method, args.repeats - 1)
        pol = policy if method == "fine" else uniform_policy(g, min(policy.budgets))
        if task == "kstar":
            ledger = run_kstar(g, KStarRunConfig(k, d_tilde, pol, last)).ledger
        else:
            ledger = run_triangle(g, TriangleRunConfig(d_tilde, pol, last, alpha)).ledger
        with open(args.ledger_out, "w", newline="") as fh:
            ledger.write_csv(fh)
    _emit([rep], args)
    return 0


def cmd_count_exact(args) -> int:
    g = _load_graph(args)
    tri = exact_triangle_count(g)
    stars = {k: exact_kstar_count(g, k) for k in args.k}
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "edges", "d_max", "triangles", *(f"kstar{k}" for k in args.k), "clustering"])
    s2 = exact_kstar_count(g, 2)
    cc = clustering_coefficient(tri, s2).value if s2 > 0 else ""
    w.writerow([g.node_count, g.edge_count, max_degree(g), tri, *stars.values(), cc])
    return 0


def cmd_run_kstar(args) -> int:
    args.epsilon = None
    return _single_run(args, "kstar", "fine", k=args.k)


def cmd_run_triangle(args) -> int:
    args.epsilon = None
    return _single_run(args, "triangle", "fine", alpha=args.alpha)


def cmd_run_baseline(args) -> int:
    return _single_run(args, args.task, "uniform", k=args.k, alpha=args.alpha)


def cmd_experiment(args) -> int:
    with open(args.config) as fh:
        cfg = parse_config(fh)
    if args.repeats is not None:
        cfg = replace(cfg, repeats=args.repeats)
    reports = run_experiment(cfg)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_rows(reports, fh, debug=cfg.debug)
    else:
        write_rows(reports, sys.stdout, debug=cfg.debug)
    return 0


def cmd_check_ledger(args) -> int:
    g = _load_graph(args)
    with open(args.policy) as fh:
        policy = read_policy(fh, g)
    with open(args.ledger) as fh:
        ledger = BudgetLedger.read_csv(fh)
    report = ledger_check(ledger, policy)
    print(report.summary())
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fgrdp", description="Fine-grained edge-level LDP subgraph counting")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count-exact", help="exact (non-private) counts")
    _graph_args(p)
    p.add_argument("--k", type=lambda s: [int(x) for x in s.split(",")], default=[2, 3])
    p.set_defaults(func=cmd_count_exact)

    p = sub.add_parser("run-kstar", help="fine-grained k-star protocol")
    _protocol_args(p)
    p.add_argument("--k", type=int, default=2)
    p.set_defaults(func=cmd_run_kstar)

    p = sub.add_parser("run-triangle", help="fine-grained two-round triangle protocol")
    _protocol_args(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_run_triangle)

    p = sub.add_parser("run-baseline", help="uniform-budget protocol at the strictest budget")
    _protocol_args(p)
    p.add_argument("--task", choices=["kstar", "triangle"], default="triangle")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=None, help="override the uniform budget")
    p.set_defaults(func=cmd_run_baseline)

    p = sub.add_parser("experiment", help="run a sweep described by a key=value config file")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--repeats", type=int, default=None, help="override the config's repeat count")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("check-ledger", help="verify a ledger CSV against a policy file")
    _graph_args(p)
    p.add_argument("--ledger", required=True)
    p.add_argument("--policy", required=True)
    p.set_defaults(func=cmd_check_ledger)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"fgrdp: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
