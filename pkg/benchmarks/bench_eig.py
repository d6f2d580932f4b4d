"""Time the compiled eigensolver against the numpy fallback (and LAPACK for scale).

    python benchmarks/bench_eig.py --dims 33 65 129 257 --repeats 5
"""

import argparse
import time

import numpy as np

from wignerqe._backend import BACKENDS
from wignerqe.ensembles import gue_spec, sample_wigner
from wignerqe.linalg import hermitian_eig


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[33, 65, 129, 257])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--python-max-dim", type=int, default=129, help="skip the fallback above this size")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    names = [b for b in ("compiled", "python") if b in BACKENDS]
    print(f"{'d':>5} " + " ".join(f"{n + ' [ms]':>15}" for n in names + ["lapack"]) + f" {'speedup':>9}")
    for d in args.dims:
        h = sample_wigner(gue_spec(), d, rng)
        times = {}
        for name in names:
            if name == "python" and d > args.python_max_dim:
                times[name] = float("nan")
                continue
            times[name] = best_of(lambda: hermitian_eig(h, backend=name), args.repeats)
        times["lapack"] = best_of(lambda: np.linalg.eigh(h), args.repeats)
        speed = times.get("python", float("nan")) / times.get("compiled", float("nan"))
        print(f"{d:>5} " + " ".join(f"{1e3 * times[n]:>15.3f}" for n in names + ["lapack"]) + f" {speed:>9.1f}")


if __name__ == "__main__":
    main()
