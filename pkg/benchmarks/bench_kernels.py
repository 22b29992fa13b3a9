"""Compare the compiled and pure-numpy kernel backends.

Times each kernel at Monte Carlo sizes, then a full paired Monte Carlo
comparison on a bundled scenario, once per backend.

    python benchmarks/bench_kernels.py [--runs 300] [--repeat 2000]
"""
import argparse
import timeit

import numpy as np

from bearingtma import _kernels_py, kernels
from bearingtma.config import load_scenario
from bearingtma.estimators import EstimatorConfig
from bearingtma.evaluation import run_monte_carlo


def kernel_cases(n_obs, degree):
    rng = np.random.default_rng(0)
    tau = np.linspace(-1, 1, n_obs)
    beta = rng.uniform(-np.pi, np.pi, n_obs)
    ox, oy = rng.normal(0, 1e3, (2, n_obs))
    phi = _kernels_py.basis_matrix(0, degree, tau)
    cx, cy = rng.normal(0, 5e3, (2, degree + 1))
    return {
        "basis_matrix": lambda k: k.basis_matrix(0, degree, tau),
        "basis_deriv_matrix": lambda k: k.basis_deriv_matrix(2, degree, tau),
        "design_system": lambda k: k.design_system(1, degree, tau, beta, ox, oy),
        "bearing_model": lambda k: k.bearing_model(phi, cx, cy, ox, oy),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--n-obs", type=int, default=241)
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--scenario", default="figure1_accel_big")
    args = ap.parse_args()

    backends = kernels.available_backends()
    impls = {"python": _kernels_py}
    if "cython" in backends:
        from bearingtma import _kernels

        impls["cython"] = _kernels
    print(f"kernels (n_obs={args.n_obs}, degree={args.degree}), microseconds per call")
    print(f"{'kernel':<20}" + "".join(f"{b:>12}" for b in impls) + f"{'speedup':>10}")
    for name, fn in kernel_cases(args.n_obs, args.degree).items():
        times = {b: min(timeit.repeat(lambda: fn(k), number=args.repeat, repeat=3)) / args.repeat * 1e6
                 for b, k in impls.items()}
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<20}" + "".join(f"{t:>12.2f}" for t in times.values()) + f"{speed:>9.1f}x")

    scenario = load_scenario(args.scenario)
    methods = [EstimatorConfig(method="nbearings"), EstimatorConfig(degree=2),
               EstimatorConfig(degree=2, refine=True)]
    original = kernels.BACKEND
    print(f"\nMonte Carlo: {args.scenario}, {args.runs} runs x {len(methods)} methods, seconds")
    results = {}
    try:
        for b in backends:
            kernels.set_backend(b)
            t = min(timeit.repeat(lambda: run_monte_carlo(scenario, methods, args.runs), number=1, repeat=2))
            results[b] = t
            print(f"{b:<20}{t:>12.3f}")
    finally:
        kernels.set_backend(original)
    if len(results) == 2:
        print(f"{'speedup':<20}{results['python'] / results['cython']:>11.2f}x")


if __name__ == "__main__":
    main()
