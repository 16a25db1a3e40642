"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--n 2000] [--p 0.01] [--reps 5] [--end-to-end]

Kernel timings call both implementations in-process (numba must be installed
and enabled). ``--end-to-end`` also times a full triangle run in two fresh
interpreters, one with ``FGRDP_NUMBA=0``.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from fgrdp import kernels
from fgrdp._accel import HAVE_NUMBA
from fgrdp.graph import erdos_renyi, max_degree
from fgrdp.privacy import assign_edge_levels, reorder_by_level
from fgrdp.rng import stream

E2E_SNIPPET = """
import time
from fgrdp._accel import backend
from fgrdp.graph import erdos_renyi, max_degree
from fgrdp.privacy import assign_edge_levels
from fgrdp.triangle import TriangleRunConfig, run_triangle
g = erdos_renyi({n}, {p}, 0)
pol = assign_edge_levels(g, (0.2, 0.8), 0, (0.5, 1.0))
cfg = TriangleRunConfig(max_degree(g), pol, seed=0)
run_triangle(g, cfg)
t = time.perf_counter()
for r in range({reps}):
    run_triangle(g, TriangleRunConfig(cfg.d_tilde, pol, seed=r))
print(backend(), (time.perf_counter() - t) / {reps})
"""


def best_of(fn, reps):
    fn()  # warm up (and compile)
    times = []
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--p", type=float, default=0.01)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)

    g = erdos_renyi(args.n, args.p, 0)
    pol = assign_edge_levels(g, (0.2, 0.8), 0, (0.5, 1.0))
    g2, perm, _, pol2 = reorder_by_level(g, pol)
    n = g2.node_count
    uniforms = stream(0, "bench").random(n * (n - 1) // 2)
    row_p = np.where(pol2.node_level == 1, 0.6, 0.7)
    bits = kernels._rr_lower_np(g2.indptr, g2.indices, row_p, uniforms, perm)
    zone = pol2.node_level.astype(np.int64) - 1
    d = max_degree(g2)

    cases = {
        "forward_triangles": lambda impl: impl(g.indptr, g.indices),
        "rr_lower_triangle": lambda impl: impl(g2.indptr, g2.indices, row_p, uniforms, perm),
        "round2_counts": lambda impl: impl(g2.indptr, g2.indices, d, zone, 2, bits),
    }
    pairs = {
        "forward_triangles": (kernels._forward_triangles_nb, kernels._forward_triangles_np),
        "rr_lower_triangle": (kernels._rr_lower_nb, kernels._rr_lower_np),
        "round2_counts": (kernels._round2_nb, kernels._round2_np),
    }
    print(f"graph: n={args.n} p={args.p} edges={g.edge_count} d_max={d}")
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy path is timed")
    print(f"{'kernel':<20}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, call in cases.items():
        nb, np_impl = pairs[name]
        t_np = best_of(lambda: call(np_impl), args.reps)
        if HAVE_NUMBA:
            t_nb = best_of(lambda: call(nb), args.reps)
            print(f"{name:<20}{t_nb * 1e3:>12.2f}{t_np * 1e3:>12.2f}{t_np / t_nb:>10.1f}")
        else:
            print(f"{name:<20}{'-':>12}{t_np * 1e3:>12.2f}{'-':>10}")

    if args.end_to_end:
        code = E2E_SNIPPET.format(n=args.n, p=args.p, reps=args.reps)
        for flag in ("1", "0"):
            env = dict(os.environ, FGRDP_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                 text=True, check=True).stdout.split()
            print(f"run_triangle [{out[0]}]: {float(out[1]) * 1e3:.1f} ms per run")


if __name__ == "__main__":
    main()
