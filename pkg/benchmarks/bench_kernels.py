"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on inputs of the size the pipeline meets (one minute of
frames, 64 mixtures, a 128-point SVM problem); the best of N timings is
reported with the speed-up, and both backends' outputs are checked to agree.
"""

import argparse
import timeit

import numpy as np

from svdlid._kernels import _fallback

try:
    from svdlid._kernels import _core
except ImportError:
    _core = None


def cases(rng):
    seq = rng.integers(0, 64, 6000).astype(np.int64)
    p = rng.dirichlet(np.ones(32), 32)
    cum = np.ascontiguousarray(np.cumsum(p, axis=1))
    cum[:, -1] = 1.0
    u = rng.random(6000)
    x = np.vstack([rng.normal(1, 1, (64, 4)), rng.normal(-1, 1, (64, 4))])
    y = np.r_[np.ones(64), -np.ones(64)]
    k = np.ascontiguousarray(x @ x.T)
    return {
        "skipgram_counts (T=6000, M=64, K=7)": ("skipgram_counts", (seq, 7, 64)),
        "markov_walk (T=6000, 32 states)": ("markov_walk", (cum, u, 0)),
        "smo (N=128, C=1)": ("smo", (k, y, 1.0, 1e-4, 10_000_000)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled extension not built; only the fallback can be timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'python ms':>10s} {'cython ms':>10s} {'speed-up':>9s}")
    for label, (name, inputs) in cases(rng).items():
        fb = getattr(_fallback, name)
        t_py = min(timeit.repeat(lambda: fb(*inputs), number=1, repeat=args.repeat))
        if _core is None:
            print(f"{label:40s} {1e3 * t_py:10.2f} {'-':>10s} {'-':>9s}")
            continue
        cc = getattr(_core, name)
        a, b = fb(*inputs), cc(*inputs)
        a, b = (a, b) if isinstance(a, tuple) else ((a,), (b,))
        assert all(np.allclose(p, q, atol=1e-8) for p, q in zip(a, b)), name
        t_c = min(timeit.repeat(lambda: cc(*inputs), number=1, repeat=args.repeat))
        print(f"{label:40s} {1e3 * t_py:10.2f} {1e3 * t_c:10.2f} {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
