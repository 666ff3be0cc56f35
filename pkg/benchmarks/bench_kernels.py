"""Compare the Cython kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times polynomial batch evaluation (single point and many points) and the
Jacobiator contraction on random data sized like the property fixtures.
"""
import argparse
import timeit

import numpy as np

from diracbracket import _pykernels
from diracbracket.fixtures import random_fixture
from diracbracket.kernels import BACKEND, PolyBatch

try:
    from diracbracket import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    fx = random_fixture(0)
    polys = [x for row in fx.J.entries for x in row] + [g for row in fx.cons.gradients for g in row]
    batch = PolyBatch(polys, fx.J.N)
    args = (batch.exps, batch.coeffs, batch.owner, batch.nout)
    z = rng.uniform(-2, 2, fx.J.N)
    Z = rng.uniform(-2, 2, (1000, fx.J.N))
    n = 12
    J = rng.standard_normal((n, n))
    J = J - J.T
    dJ = np.ascontiguousarray(rng.standard_normal((n, n, n)))
    return {
        "eval_batch (1 point)": lambda k: k.eval_batch(*args, z),
        "eval_batch_points (1000 points)": lambda k: k.eval_batch_points(*args, Z),
        f"jacobiator_contract (N={n})": lambda k: k.jacobiator_contract(J, dJ),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"active backend: {BACKEND}")
    print(f"{'kernel':34s} {'python':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        if _ckernels is not None:
            np.testing.assert_allclose(fn(_ckernels), fn(_pykernels), rtol=1e-12, atol=1e-12)
        timings = []
        for mod in (_pykernels, _ckernels):
            if mod is None:
                timings.append(None)
                continue
            number, _ = timeit.Timer(lambda: fn(mod)).autorange()
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat))
            timings.append(best / number)
        py, cy = timings
        cy_s = f"{cy * 1e6:10.1f}us" if cy else f"{'n/a':>12s}"
        speed = f"{py / cy:7.1f}x" if cy else f"{'-':>8s}"
        print(f"{name:34s} {py * 1e6:10.1f}us {cy_s} {speed}")


if __name__ == "__main__":
    main()
