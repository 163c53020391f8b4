"""Compare the compiled and pure-Python diffusion kernels on an SBM graph.

    python3 benchmarks/bench_kernel.py --runs 20 --alpha -0.5

Both kernels run the same (seed node, rng seed) pairs; traces are checked for
byte-identical output before timings are reported.
"""

import argparse
import statistics
import sys
import time

from tiecontagion.calibration import seed_node_for, sub_seed
from tiecontagion.diffusion import DiffusionConfig, Simulator, _backend
from tiecontagion.graph import sbm_generate
from tiecontagion.ties import build_strength_table


def time_kernel(sim, jobs, repeat):
    best = []
    traces = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        traces = [sim.run(s, r) for s, r in jobs]
        best.append(time.perf_counter() - t0)
    return min(best), statistics.median(best), traces


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--blocks", type=int, nargs="+", default=[500, 500, 500, 500])
    ap.add_argument("--p-in", type=float, default=0.05)
    ap.add_argument("--p-out", type=float, default=0.005)
    ap.add_argument("--gamma", type=float, default=0.6)
    ap.add_argument("--alpha", type=float, default=-0.5)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--rng-seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _backend.compiled_kernel is None:
        print("compiled kernel not available; build with `pip install -e . --no-build-isolation`")
        return 1
    g = sbm_generate(args.blocks, args.p_in, args.p_out, args.rng_seed)
    table = build_strength_table(g, None, "common_friends")
    cfg = DiffusionConfig(args.gamma, args.alpha)
    jobs = [(seed_node_for(args.rng_seed, r, g.node_count), sub_seed(args.rng_seed, "bench", r))
            for r in range(args.runs)]
    print(f"graph: {g.node_count} nodes, {g.edge_count} edges; gamma={args.gamma} alpha={args.alpha}; "
          f"{args.runs} runs x {args.repeat} repeats")

    results = {}
    for name, kernel in (("cython", _backend.compiled_kernel), ("python", _backend.python_kernel)):
        sim = Simulator(g, table, cfg, kernel=kernel)
        results[name] = time_kernel(sim, jobs, args.repeat)
    same = all(a.to_json() == b.to_json() for a, b in zip(results["cython"][2], results["python"][2]))
    for name, (best, med, _) in results.items():
        print(f"{name:>7}: best {best:8.3f}s  median {med:8.3f}s  ({1000 * best / args.runs:7.2f} ms/run)")
    print(f"speedup (best): {results['python'][0] / results['cython'][0]:.1f}x; identical traces: {same}")
    return 0 if same else 2


if __name__ == "__main__":
    sys.exit(main())
