"""Compare the compiled and pure-Python LSTM recurrence kernels.

    python3 benchmarks/bench_kernels.py [--n 20] [--dims 16 64 300] [--repeat 20]

Times one forward plus backward pass over a sentence of ``n`` tokens for each
hidden size and backend, and checks the backends agree.
"""

import argparse
import timeit

import numpy as np

from lrlstm import kernels


def case(n, d, seed=0):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, d))
    W = r.uniform(0, 1 / np.sqrt(d), size=(4 * d, d))
    U = r.uniform(0, 1 / np.sqrt(d), size=(4 * d, d))
    b = np.zeros(4 * d)
    dH = r.normal(size=(n, d))
    return X, W, U, b, dH


def step(X, W, U, b, dH):
    H, C, G = kernels.lstm_forward(X, W, U, b, reverse=True)
    return H, kernels.lstm_backward(dH, X, W, U, H, C, G, reverse=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--dims", type=int, nargs="+", default=[16, 64, 300])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    print(f"backends available: {', '.join(kernels.BACKENDS)}")
    print(f"{'d':>5} {'backend':>9} {'ms/pass':>9} {'speedup':>8} {'max|diff|':>10}")
    for d in args.dims:
        data = case(args.n, d)
        timings, outputs = {}, {}
        for name in kernels.BACKENDS:
            prev = kernels.set_backend(name)
            try:
                outputs[name] = step(*data)
                t = timeit.repeat(lambda: step(*data), number=args.repeat, repeat=3)
                timings[name] = 1e3 * min(t) / args.repeat
            finally:
                kernels.set_backend(prev)
        diff = 0.0
        if len(outputs) == 2:
            a, c = outputs["compiled"], outputs["python"]
            diff = max(float(np.max(np.abs(x - y))) for x, y in zip((a[0],) + a[1], (c[0],) + c[1]))
        for name, ms in timings.items():
            speed = timings["python"] / ms
            print(f"{d:>5} {name:>9} {ms:>9.3f} {speed:>7.2f}x {diff:>10.1e}")


if __name__ == "__main__":
    main()
