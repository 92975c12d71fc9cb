"""Compare the compiled and pure-numpy propagation kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Each workload is a (matrix size, controls, steps) triple matching a real
optimizer call: qutrit QuOpt (9, 8, 40), ququart QuOpt (16, 12, 40),
qutrit GRAPE (9, 8, 2000) and the ORT model (16, 2, 2000). Times are the
best of ``--repeat`` runs of ``propagate_with_gradient``.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from qspeed._kernels import BACKENDS
from qspeed.linalg import random_hermitian

WORKLOADS = {
    "quopt-qutrit": (9, 8, 40),
    "quopt-ququart": (16, 12, 40),
    "grape-qutrit": (9, 8, 2000),
    "ort-qutrit": (16, 2, 2000),
}


def make_inputs(n, k, steps, seed=0):
    rng = np.random.default_rng(seed)
    h0 = random_hermitian(n, rng)
    ops = np.stack([random_hermitian(n, rng) for _ in range(k)])
    amps = rng.uniform(-3, 3, (steps, k))
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return h0, ops, amps, 0.05, a


def bench(repeat: int) -> dict:
    results = {}
    for name, shape in WORKLOADS.items():
        args = make_inputs(*shape)
        row = {}
        for backend, mod in BACKENDS.items():
            mod.propagate_with_gradient(*args)  # warm-up
            number = max(1, int(0.2 / max(1e-4, timeit.timeit(lambda: mod.propagate_with_gradient(*args), number=1))))
            t = min(timeit.repeat(lambda: mod.propagate_with_gradient(*args), number=number, repeat=repeat)) / number
            row[backend] = t
        results[name] = row
    return results


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write raw timings to this file")
    args = ap.parse_args(argv)
    if "compiled" not in BACKENDS:
        print("compiled extension not built; only the numpy backend is timed", file=sys.stderr)
    results = bench(args.repeat)
    print(f"{'workload':<16}{'(n, K, steps)':<16}" + "".join(f"{b:>14}" for b in BACKENDS) + f"{'speed-up':>10}")
    for name, row in results.items():
        line = f"{name:<16}{str(WORKLOADS[name]):<16}" + "".join(f"{row[b] * 1e3:>11.3f} ms" for b in BACKENDS)
        if "compiled" in row:
            line += f"{row['python'] / row['compiled']:>9.2f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
