"""Compare the compiled and NumPy likelihood backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Times ``loglik_grad`` on tomography-sized problems and a full MLE fit of a
3-qubit state, once per backend.
"""
import argparse
import timeit

import numpy as np

from greenghz.measure import sample_counts
from greenghz.qcore import random_density
from greenghz.tomography import design, kernels, measurement_data, mle_reconstruct


def problem(n, seed=0, events=1e4):
    rng = np.random.default_rng(seed)
    rho = random_density(n, rng)
    data = measurement_data([sample_counts(rho, s, events, rng) for s in design(n).settings])
    d = 2**n
    T = np.tril(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    T[np.diag_indices(d)] = np.abs(T.diagonal().real) + 0.5
    return rho, data, T


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = kernels.available()
    if "compiled" not in backends:
        print("compiled backend not built; only timing the NumPy fallback")
    prev = kernels.backend()

    print(f"{'kernel':<28}" + "".join(f"{b:>14}" for b in backends))
    for n in (1, 2, 3, 4):
        _, data, T = problem(n)
        label = f"loglik_grad n={n} m={len(data.counts)}"
        row = f"{label:<28}"
        for b in backends:
            kernels.use_backend(b)
            number = max(1, 20000 // len(data.counts))
            t = best_of(lambda: kernels.loglik_grad(T, data.kets, data.counts), args.repeat, number)
            row += f"{t * 1e6:>12.1f}us"
        print(row)

    rho, data, _ = problem(3, seed=1)
    row = f"{'mle_reconstruct n=3':<28}"
    for b in backends:
        kernels.use_backend(b)
        t = best_of(lambda: mle_reconstruct(data), args.repeat, 1)
        row += f"{t * 1e3:>12.1f}ms"
    print(row)
    kernels.use_backend(prev)


if __name__ == "__main__":
    main()
