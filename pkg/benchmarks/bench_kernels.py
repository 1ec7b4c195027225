"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

import holocgh.autograd
import holocgh.optim
from holocgh import _pykernels
from holocgh.field import fraunhofer_forward
from holocgh.pipeline import RunConfig, optimize

try:
    from holocgh import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_size(n, repeat):
    rng = np.random.default_rng(0)
    phase = rng.uniform(0, 2 * np.pi, (n, n))
    h = np.exp(1j * phase)
    F = np.ascontiguousarray(fraunhofer_forward(h))
    T = rng.random((n, n))
    m = 20
    s = rng.standard_normal((m, n * n))
    y = s + 0.1 * rng.standard_normal((m, n * n))
    rho = 1.0 / np.einsum("ij,ij->i", s, y)
    order = list(range(m))
    g = rng.standard_normal(n * n)

    cases = {
        "recon_backprop": lambda k: (lambda: k.recon_backprop(F, T, 1)),
        "phase_project": lambda k: (lambda: k.phase_project(h, F)),
        "two_loop(m=20)": lambda k: (lambda: k.two_loop(s, y, rho, order, g, 1.0)),
    }
    rows = []
    for name, make in cases.items():
        py = best_of(make(_pykernels), repeat)
        c = best_of(make(_ckernels), repeat) if _ckernels else float("nan")
        rows.append((name, py, c))

    cfg = RunConfig(optimizer="lbfgs", loss="ce", iterations=20, height=n, width=n)
    for label, k in (("python", _pykernels), ("cython", _ckernels)):
        if k is None:
            continue
        holocgh.autograd.kernels = holocgh.optim.kernels = k
        t = best_of(lambda: optimize(T, cfg), max(3, repeat // 5)) / cfg.iterations
        rows.append((f"lbfgs iteration [{label}]", t, None))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; only the fallback is timed")
    for n in args.sizes:
        print(f"\n{n}x{n}")
        print(f"  {'kernel':<28} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
        for name, py, c in bench_size(n, args.repeat):
            if c is None:
                print(f"  {name:<28} {py * 1e3:>10.3f}")
            else:
                print(f"  {name:<28} {py * 1e3:>10.3f} {c * 1e3:>10.3f} {py / c:>7.2f}x")


if __name__ == "__main__":
    main()
