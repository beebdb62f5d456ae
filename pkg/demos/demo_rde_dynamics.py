#!/usr/bin/env python3
"""Watch the population dynamics settle at one spectral parameter.

Starting every pool at the leaf value -1/eta, the sweeps mix the pools
through the tree weight laws until the empirical law of the resolvent
samples stops moving.  Prints the pool-mean trajectory, the inter-sweep
sliced Wasserstein distances, and a leaf-vs-spread initialization check.
"""

import numpy as np

import heavy_markov_lab as hml
from heavy_markov_lab.rde import sweep

ETA = 0.6 + 0.08j
ALPHA = 0.5
Z = 0.5


def main():
    print(f"alpha={ALPHA}, z={Z}, eta={ETA}")
    state = hml.init_population(ETA, Z, ALPHA, pool_size=400, seed=5)
    history = [state]
    for t in range(40):
        state = sweep(state)
        history.append(state)
        if t % 5 == 0:
            m = state.mixture_mean()
            print(f"sweep {t:>3}: mixture mean {m.real:+.4f}{m.imag:+.4f}i")

    rep = hml.convergence_diagnostics(history)
    w1 = rep["intersweep_w1"]
    print(f"\ninter-sweep W1: first {w1[0]:.4f}, last {w1[-1]:.4f}, "
          f"floor {rep['floor']:.4f}, tolerance {rep['tolerance']:.4f}")
    print(f"stationary: {rep['stationary']}")

    spread = hml.init_population(ETA, Z, ALPHA, pool_size=400, seed=5,
                                 init="spread")
    for _ in range(40):
        spread = sweep(spread)
    gap = abs(spread.mixture_mean() - state.mixture_mean())
    # same master seed: identical sweep randomness contracts both starts
    # onto one trajectory, so the gap collapses to numerical zero
    print(f"leaf vs spread initialization gap after 40 sweeps: {gap:.2e}")


if __name__ == "__main__":
    main()
