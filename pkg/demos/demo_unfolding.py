#!/usr/bin/env python3
"""Walk through the unfolding of the checked-in 5x5 weight matrix.

Starting from row 3 (1-based), the procedure reveals the two largest
entries of that row, then for each revealed column the two largest
entries over fresh rows, producing a depth-2 tree embedded in the
matrix.  The bipartized weights along tree edges dominate; the "bended"
cycle edges are the finite-size artifact that fades as n grows.
"""

import numpy as np

import heavy_markov_lab as hml


def main():
    X = hml.demo_matrix()
    print("weight matrix X:")
    print(X)

    plus = hml.unfold(X, 2, 2, 2, "plus")
    minus = hml.unfold(X, 2, 2, 2, "minus")
    print("\nvertex  phi_plus  phi_minus   (1-based indices)")
    for k in sorted(plus.phi, key=lambda k: (len(k), k)):
        label = "root" if k == () else ".".join(map(str, k))
        print(f"{label:>6}  {plus.phi[k] + 1:>8}  {minus.phi[k] + 1:>9}")

    net = hml.network_weights(X, plus)
    print("\nnetwork weights over the unfolded vertices (plus direction):")
    for (u, v), w in sorted(net.edges.items(), key=lambda kv: (len(kv[0][0]), kv[0])):
        kind = "tree  " if (u, v) in net.tree_edges() else "bended"
        lu = "root" if u == () else ".".join(map(str, u))
        lv = ".".join(map(str, v))
        print(f"  {kind}  {lu:>4} -- {lv:<4}  {w}")

    # at larger n the bended edges of the rescaled raw network vanish
    rng_demo = np.random.default_rng(7)
    print("\nmax |bended| of the rescaled raw network, one sample per n:")
    for n in (200, 800, 3200):
        Xn = (1.0 - rng_demo.random((n, n))) ** (-2.0)
        umap = hml.unfold(Xn, 0, 2, 2, "plus")
        big = hml.network_weights(Xn, umap, scaling="a_n_inverse", alpha=0.5)
        worst = max(abs(w) for w in big.bended().values())
        print(f"  n={n:>5}: {worst:.3e}")


if __name__ == "__main__":
    main()
