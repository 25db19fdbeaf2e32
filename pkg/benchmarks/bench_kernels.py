"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--samples N] [--repeat K]``.
Both backends consume the same random streams, so the printed estimates
should agree to rounding.
"""

import argparse
import time

import numpy as np

from fermi_equilibria import _backend
from fermi_equilibria.collision import collision_terms, dissipation_estimate
from fermi_equilibria.density import AnnulusDensity, FermiDiracDensity, RadialGridDensity
from fermi_equilibria.numerics import McConfig


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = {"python": _backend.get_kernels("python")}
    if _backend.compiled_kernels is not None:
        backends["compiled"] = _backend.compiled_kernels
    else:
        print("compiled extension not built; timing the fallback only")

    mc = McConfig(seed=1, samples=args.samples)
    grid = RadialGridDensity(np.linspace(0, 2, 41), np.linspace(0.9, 0.0, 41), 2)
    cases = [
        ("collision  fd", lambda k: collision_terms(FermiDiracDensity(1.0, 1.0, 2),
                                                    np.array([0.5, 0.0]), mc, kernels=k).gain),
        ("collision  grid", lambda k: collision_terms(grid, np.array([0.5, 0.0]), mc,
                                                      kernels=k).gain),
        ("dissipation fd", lambda k: dissipation_estimate(FermiDiracDensity(1.0, 1.0, 3), mc,
                                                          kernels=k).value),
        ("dissipation annulus", lambda k: dissipation_estimate(AnnulusDensity(0.5, 2), mc,
                                                               kernels=k).infinite_hits),
    ]
    print(f"{'case':<22}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for label, fn in cases:
        times, values = {}, {}
        for name, k in backends.items():
            times[name], values[name] = _best(lambda: fn(k), args.repeat)
        row = f"{label:<22}" + "".join(f"{times[n] * 1e3:>10.1f}ms" for n in backends)
        if "compiled" in times:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)
        if len(set(np.round(list(values.values()), 10))) > 1:
            print(f"  estimates differ: {values}")


if __name__ == "__main__":
    main()
