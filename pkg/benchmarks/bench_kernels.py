"""Compare the compiled and numpy jet kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Times raw products/quotients of random 4-variable complex jets and a full
rigid invariant evaluation, once per available backend.
"""

import argparse
import time

import numpy as np

from crflat import jet
from crflat.catalog import evaluate_grid, make_family


def _random_jet(rng, nvars, order):
    space = jet.jet_space(nvars, order)
    c = rng.standard_normal(space.size) + 1j * rng.standard_normal(space.size)
    c[0] += 5.0
    return jet.Jet(c, space, (0.0,) * nvars)


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    a, b = _random_jet(rng, 4, 6), _random_jet(rng, 4, 6)
    spec = make_family("thm54_ii", D=0.5)
    cases = {
        "mul x200 (4 vars, order 6)": lambda: [a * b for _ in range(200)],
        "div x200 (4 vars, order 6)": lambda: [a / b for _ in range(200)],
        "rigid grid (81 points)": lambda: evaluate_grid(spec),
    }
    results = {}
    for backend in jet.available_backends():
        jet.set_backend(backend)
        results[backend] = {name: _best(fn, args.repeat) for name, fn in cases.items()}

    width = max(len(n) for n in cases)
    header = "".join(f"{b:>12}" for b in results)
    print(f"{'case':<{width}}{header}{'speedup':>10}")
    for name in cases:
        row = "".join(f"{results[b][name] * 1e3:>10.2f}ms" for b in results)
        speed = ""
        if "cython" in results:
            speed = f"{results['python'][name] / results['cython'][name]:>9.1f}x"
        print(f"{name:<{width}}{row}{speed}")


if __name__ == "__main__":
    main()
