"""Compare the compiled and numpy LSTM step kernels.

Times one full-batch forward + backward pass (the training inner loop)
for each backend at the widths used by the experiment matrix, and the
isolated step kernels at the same shapes.

    python benchmarks/bench_kernels.py [--repeat 5] [--batch 108] [--window 12]
"""

import argparse
import timeit

import numpy as np

from hydrocast import lstm
from hydrocast._kernels import available_backends


def bench_bptt(kern, params, X, y, repeat):
    lstm.bptt(params, (X, y), kern=kern)  # warm-up
    times = timeit.repeat(lambda: lstm.bptt(params, (X, y), kern=kern), number=1, repeat=repeat)
    return min(times)


def bench_steps(kern, B, H, repeat, number=200):
    rng = np.random.default_rng(0)
    z = rng.standard_normal((B, 4 * H))
    c_prev = rng.standard_normal((B, H))
    gates, dz = np.empty((B, 4 * H)), np.empty((B, 4 * H))
    c, tc, h, dcp = (np.empty((B, H)) for _ in range(4))
    dh = rng.standard_normal((B, H))
    dc = rng.standard_normal((B, H))

    def run():
        kern.forward_step(z, c_prev, gates, c, tc, h)
        kern.backward_step(gates, c_prev, tc, dh, dc, dz, dcp)

    return min(timeit.repeat(run, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=108)
    ap.add_argument("--window", type=int, default=12)
    ap.add_argument("--widths", default="8,100,200,400")
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the numpy backend is available")
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, (args.batch, args.window, 2))
    y = rng.uniform(0, 1, args.batch)
    print(f"batch={args.batch} window={args.window}  (best of {args.repeat})")
    print(f"{'hidden':>6} {'kernel':>8} {'step us':>10} {'bptt ms':>10}")
    for H in (int(w) for w in args.widths.split(",")):
        params = lstm.init_params(2, H, 1, seed=1)
        base = None
        for name in ("python", "cython"):
            if name not in backends:
                continue
            kern = backends[name]
            step = bench_steps(kern, args.batch, H, args.repeat) * 1e6
            full = bench_bptt(kern, params, X, y, args.repeat) * 1e3
            note = ""
            if base is None:
                base = (step, full)
            else:
                note = f"  speedup: step x{base[0] / step:.2f}, bptt x{base[1] / full:.2f}"
            print(f"{H:>6} {name:>8} {step:>10.1f} {full:>10.2f}{note}")


if __name__ == "__main__":
    main()
