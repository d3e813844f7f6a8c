"""Benchmark the compiled kernel backend against the numpy fallback.

Times the individual kernels and the two end-to-end hot paths (inequality
campaign throughput and chart curvature throughput) under each backend.

    python benchmarks/bench_kernels.py [--samples N] [--nodes N]
"""

import argparse
import time

import numpy as np

from ricci_lab import _kernels, charts, fuzzing


def _time(fn, *args, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_inputs(n):
    rng = np.random.default_rng(0)
    rm = rng.normal(size=(n, 4, 4, 4, 4))
    rm = rm - rm.transpose(0, 2, 1, 3, 4)
    rm = rm - rm.transpose(0, 1, 2, 4, 3)
    rm = rm + rm.transpose(0, 3, 4, 1, 2)
    e = rng.normal(size=(n, 4, 4))
    e = e + e.transpose(0, 2, 1)
    f = rng.normal(size=(n, 4, 4)) + 3 * np.eye(4)
    a = rng.normal(size=(n, 4, 4))
    g = np.einsum("nij,nkj->nik", a, a) + 4 * np.eye(4)
    dg = rng.normal(size=(n, 4, 4, 4))
    dg = dg + dg.transpose(0, 1, 3, 2)
    d2g = rng.normal(size=(n, 4, 4, 4, 4))
    d2g = d2g + d2g.transpose(0, 2, 1, 3, 4)
    d2g = d2g + d2g.transpose(0, 1, 2, 4, 3)
    op = rng.normal(size=(n, 6, 6))
    return rm, e, f, g, np.linalg.inv(g), dg, d2g, op


def bench_backend(name, samples, nodes):
    _kernels.use_backend(name)
    n = 20000
    rm, e, f, g, ginv, dg, d2g, op = kernel_inputs(n)
    rows = {
        "rm_to_op": _time(_kernels.rm_to_op, rm) / n,
        "op_to_rm": _time(_kernels.op_to_rm, op) / n,
        "wee": _time(_kernels.wee, rm, e) / n,
        "frame_transform": _time(_kernels.frame_transform, rm, f) / n,
        "riemann_from_derivs": _time(_kernels.riemann_from_derivs,
                                     g, ginv, dg, d2g) / n,
    }

    cfg = fuzzing.FuzzConfig(seed=0, samples=samples)
    t0 = time.perf_counter()
    fuzzing.run_campaign(cfg, families=("tensor",))
    rows["fuzz_tensor_campaign"] = (time.perf_counter() - t0) / samples

    chart = charts.chart_s4(1.0, resolution=8)
    t0 = time.perf_counter()
    chart.integrate_many({"sigma2": lambda d: d.sigma2})
    rows["chart_curvature_pass"] = (time.perf_counter() - t0) / chart.node_count
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=100000,
                        help="fuzz samples for the campaign benchmark")
    parser.add_argument("--nodes", type=int, default=8,
                        help="chart resolution per axis")
    args = parser.parse_args()

    backends = ["numpy"]
    try:
        import ricci_lab._kernels._core  # noqa: F401
        backends.append("cython")
    except ImportError:
        print("compiled backend not built; benchmarking numpy only")

    results = {b: bench_backend(b, args.samples, args.nodes) for b in backends}

    names = list(next(iter(results.values())))
    width = max(len(n) for n in names)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    for n in names:
        line = f"{n:<{width}}  " + "  ".join(
            f"{results[b][n] * 1e6:9.3f} us" for b in backends)
        if len(backends) == 2:
            line += f"  {results['numpy'][n] / results['cython'][n]:7.2f}x"
        print(line)


if __name__ == "__main__":
    main()
