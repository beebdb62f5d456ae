#!/usr/bin/env python3
"""Second-largest eigenvalue modulus versus the tail index.

Apart from the Perron eigenvalue at 1, the spectrum appears confined to
a disc of radius r(alpha) < 1 that shrinks as alpha grows; a heuristic
guess is r ~ sqrt(1 - alpha).  This scan estimates the mean edge radius
on a small grid (modest n and trial count; the full-scale scan runs via
`heavy-markov-lab edge-scan`).
"""

import numpy as np

import heavy_markov_lab as hml
from heavy_markov_lab.lab import derive_seed


def main():
    n, trials = 1200, 8
    print(f"n = {n}, {trials} trials per tail index")
    print("alpha   mean edge radius   sqrt(1-alpha)")
    for alpha in np.linspace(0.1, 0.9, 9):
        radii = []
        for t in range(trials):
            seed = derive_seed(1234, ["edge", round(alpha, 2), t])
            s = hml.generate(n, hml.TailLaw(alpha=float(alpha)), seed)
            radii.append(hml.edge_radius(hml.eigenvalues(s.M)))
        print(f" {alpha:.1f}        {np.mean(radii):.4f}          "
              f"{np.sqrt(1 - alpha):.4f}")


if __name__ == "__main__":
    main()
