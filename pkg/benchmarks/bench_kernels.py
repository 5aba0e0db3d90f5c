"""Throughput of the compiled and pure-Python sampler kernels.

Each sampler is run with the same seed on both backends. The script reports
variates per second, the compiled/Python speedup, and whether the two output
streams agree bit for bit.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from levysim._backend import compiled_available
from levysim.measures import CGMYLevyDensity, CGMYSpec, GaussianDensity
from levysim.samplers import AIMH, AISF, LocalMH, LocalSF


def _cases():
    gauss = GaussianDensity(0.0, 1.0, 1.0, (-5.0, 5.0))
    cgmy = CGMYLevyDensity(CGMYSpec(1.0, 1.0, 1.0, 0.5), 0.005)
    return [
        ("local-mh  N(0,1) w=7", lambda b: LocalMH(gauss, 7.0, 1, backend=b)),
        ("local-sf  N(0,1)", lambda b: LocalSF(gauss, 1, backend=b)),
        ("aimh      N(0,1)", lambda b: AIMH(gauss, 1, backend=b)),
        ("aisf      N(0,1)", lambda b: AISF(gauss, 1, backend=b)),
        ("aisf      CGMY eps=0.005", lambda b: AISF(cgmy, 1, backend=b)),
    ]


def _rate(make, backend, n, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        s = make(backend)
        t0 = time.perf_counter()
        out = s.draw(n)
        best = min(best, time.perf_counter() - t0)
    return n / best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="variates per run")
    ap.add_argument("--repeat", type=int, default=3, help="best-of repeats")
    args = ap.parse_args(argv)
    if not compiled_available():
        raise SystemExit("compiled kernels are not built; run `pip install --no-build-isolation -e .`")

    print(f"{'sampler':28s} {'python/s':>12s} {'cython/s':>12s} {'speedup':>8s}  identical")
    for name, make in _cases():
        r_py, x_py = _rate(make, "python", args.n, args.repeat)
        r_cy, x_cy = _rate(make, "cython", args.n, args.repeat)
        same = np.array_equal(x_py, x_cy)
        print(f"{name:28s} {r_py:12.4g} {r_cy:12.4g} {r_cy / r_py:8.1f}  {same}")


if __name__ == "__main__":
    main()
