"""Unfolding maps: revealing alternating ranked rows and columns.

Starting from a row index ``i0``, the "plus" map reveals the ``b``
largest entries of row ``i0`` (their column indices become the first
generation), then for each revealed column the ``b`` largest entries
over not-yet-revealed rows (second generation), and so on, alternating
row and column rankings down to depth ``h``.  The "minus" map is the
same procedure on the transpose.  Ranked this way, the neighborhoods of
the bipartized weight matrix converge to the alternating trees of
:mod:`heavy_markov_lab.pwit`, which the ``local_convergence_report``
quantifies at finite ``n``.

Exclusion rules (they matter for reproducing the worked 5x5 example):
the root ranking skips the diagonal index ``i0``; every later ranking
skips exactly the indices already revealed on the side being ranked,
with the set updated after each parent finishes its block of children.
Ties break towards the smaller original index.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ensemble import make_markov, scale_a_n
from .heavy_tail import (
    sample_ppp,
    stable_variates,
    stable_sum_from_ppp,
)
from .spectra import kolmogorov_distance


class CapacityError(ValueError):
    """The matrix is too small for the requested (b, h) unfolding."""


def demo_matrix() -> np.ndarray:
    """The checked-in 5x5 weight matrix used by the golden unfolding demo."""
    ref = importlib.resources.files("heavy_markov_lab").joinpath(
        "data/demo_matrix_5x5.csv"
    )
    with ref.open("rb") as fh:
        return np.loadtxt(fh, delimiter=",")


@dataclass(frozen=True)
class UnfoldMap:
    """A realized unfolding: tree labels (tuples over 1..b) to indices in [0, n).

    ``phi`` maps each vertex label to a matrix index; ``psi()`` lifts it
    to the ``2n`` bipartized index space, sending row-side vertices to
    ``[0, n)`` and column-side vertices to ``[n, 2n)``.
    """

    direction: str  # "plus" or "minus"
    i0: int
    b: int
    h: int
    n: int
    phi: dict

    def side(self, label: tuple) -> str:
        """Which side of the bipartition a vertex indexes ("row"/"col")."""
        even = len(label) % 2 == 0
        if self.direction == "plus":
            return "row" if even else "col"
        return "col" if even else "row"

    def psi(self) -> dict:
        return {
            k: v if self.side(k) == "row" else v + self.n
            for k, v in self.phi.items()
        }


def _rank(vector: np.ndarray, excluded: set, b: int) -> list[int]:
    """Indices of the b largest entries outside ``excluded``; ties to the
    smaller index."""
    cand = np.array([j for j in range(len(vector)) if j not in excluded])
    if len(cand) < b:
        raise CapacityError(
            f"need {b} candidates but only {len(cand)} remain; matrix too small"
        )
    order = np.argsort(-vector[cand], kind="stable")
    return [int(cand[j]) for j in order[:b]]


def unfold(X: np.ndarray, i0: int, b: int, h: int, direction: str = "plus") -> UnfoldMap:
    """Build the unfolding map of ``X`` rooted at index ``i0``.

    Deterministic given ``X``; the minus direction equals the plus
    direction applied to the transpose.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if X.ndim != 2 or X.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    if not 0 <= i0 < n:
        raise ValueError(f"i0 must lie in [0, {n}), got {i0}")
    if direction == "minus":
        inner = unfold(X.T, i0, b, h, direction="plus")
        return UnfoldMap(direction="minus", i0=i0, b=b, h=h, n=n, phi=inner.phi)
    if direction != "plus":
        raise ValueError(f"direction must be 'plus' or 'minus', got {direction!r}")

    phi = {(): i0}
    revealed_rows = {i0}
    revealed_cols: set[int] = set()
    current = [()]
    for m in range(1, h + 1):
        ranking_rows = m % 2 == 1  # odd generations rank a row, revealing columns
        nxt = []
        for parent in current:
            idx = phi[parent]
            if ranking_rows:
                excluded = set(revealed_cols)
                if m == 1:
                    excluded.add(i0)  # root skips its diagonal entry
                picks = _rank(X[idx, :], excluded, b)
                revealed_cols.update(picks)
            else:
                picks = _rank(X[:, idx], set(revealed_rows), b)
                revealed_rows.update(picks)
            for j, pick in enumerate(picks, start=1):
                child = parent + (j,)
                phi[child] = pick
                nxt.append(child)
        current = nxt
    return UnfoldMap(direction=direction, i0=i0, b=b, h=h, n=n, phi=phi)


# ---------------------------------------------------------------------------
# Finite networks over the unfolded vertex set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NetworkWeights:
    """Symmetric edge weights of the unfolded finite network.

    ``edges`` maps unordered label pairs (stored with the shorter/smaller
    label first) to weights; pairs on the same side of the bipartition
    carry weight zero and are omitted.  Tree edges are parent-child pairs;
    everything else is a "bended" (cycle) edge that should vanish as n
    grows.
    """

    edges: dict
    scaling: str
    umap: UnfoldMap

    def weight(self, u: tuple, v: tuple) -> float:
        return self.edges.get(_pair(u, v), 0.0)

    def bended(self) -> dict:
        return {
            pair: w for pair, w in self.edges.items()
            if not _is_tree_edge(*pair)
        }

    def tree_edges(self) -> dict:
        return {pair: w for pair, w in self.edges.items() if _is_tree_edge(*pair)}


def _pair(u: tuple, v: tuple) -> tuple:
    return (u, v) if (len(u), u) <= (len(v), v) else (v, u)


def _is_tree_edge(u: tuple, v: tuple) -> bool:
    return (len(u) + 1 == len(v) and v[:-1] == u) or (
        len(v) + 1 == len(u) and u[:-1] == v
    )


def network_weights(
    matrix: np.ndarray,
    umap: UnfoldMap,
    scaling: str = "none",
    alpha: Optional[float] = None,
    c: float = 1.0,
) -> NetworkWeights:
    """Edge weights between all unfolded vertices under the bipartization.

    ``matrix`` is the raw weight matrix (scaling ``"a_n_inverse"``, which
    requires ``alpha``) or the normalized one (scaling ``"none"``).  Only
    opposite-side pairs carry weight; both tree and bended edges are kept.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[0] != umap.n:
        raise ValueError("matrix does not match the unfolding dimensions")
    if scaling == "a_n_inverse":
        if alpha is None:
            raise ValueError("a_n scaling requires alpha")
        scale = 1.0 / scale_a_n(umap.n, alpha, c)
    elif scaling == "none":
        scale = 1.0
    else:
        raise ValueError(f"unknown scaling {scaling!r}")
    labels = list(umap.phi)
    edges = {}
    for a in range(len(labels)):
        for b_ in range(a + 1, len(labels)):
            u, v = labels[a], labels[b_]
            su, sv = umap.side(u), umap.side(v)
            if su == sv:
                continue
            if su == "row":
                w = matrix[umap.phi[u], umap.phi[v]]
            else:
                w = matrix[umap.phi[v], umap.phi[u]]
            edges[_pair(u, v)] = float(w) * scale
    return NetworkWeights(edges=edges, scaling=scaling, umap=umap)


# ---------------------------------------------------------------------------
# Local convergence towards the tree laws
# ---------------------------------------------------------------------------

def _tree_root_top(alpha: float, trials: int, rng, terms: int = 2000) -> np.ndarray:
    """Top PD(alpha) component: xi_1 / S."""
    out = np.empty(trials)
    for t in range(trials):
        ppp = sample_ppp(alpha, terms, rng)
        out[t] = ppp.xi[0] / stable_sum_from_ppp(ppp)
    return out


def _tree_omega_first(alpha: float, trials: int, rng) -> np.ndarray:
    """First coordinate xi_1 / (xi_1 + S_1) of the unranked column limit.

    The unfolding reveals entries ranked by raw size, so the deep edge
    carries the value at the largest raw point, whose limit is the top
    Poisson point against one independent stable mass.
    """
    xi1 = rng.standard_exponential(trials) ** (-1.0 / alpha)
    s = stable_variates(alpha, trials, rng)
    return xi1 / (xi1 + s)


def _tree_ppp_top(alpha: float, trials: int, rng) -> np.ndarray:
    """Top point of the power-law process: (first arrival)**(-1/alpha)."""
    return rng.standard_exponential(trials) ** (-1.0 / alpha)


def local_convergence_report(
    alpha: float,
    n_list,
    b: int,
    h: int,
    trials: int,
    which: str = "B_to_hatT",
    seed=0,
) -> list[dict]:
    """Edge-law distances between unfolded finite networks and the trees.

    For each ``n``, unfolds ``trials`` fresh matrices at ``i0 = 0`` and
    compares selected edge weights with samples of the corresponding tree
    laws (two-sample Kolmogorov distance), plus the size of the discarded
    cycle edges for the raw-weight case.  Returns rows of
    ``{"n": ..., "statistic": ..., "value": ...}``.
    """
    if which not in ("A_to_T0", "B_to_hatT"):
        raise ValueError(f"unknown comparison {which!r}")
    if b < 2 or h < 2:
        raise ValueError("need b >= 2 and h >= 2 to see both edge types")
    rng = np.random.default_rng(seed)
    rows = []
    for n in n_list:
        root_edge = np.empty(trials)
        deep_edge = np.empty(trials)
        bended_max = np.empty(trials)
        for t in range(trials):
            X = (1.0 - rng.random((n, n))) ** (-1.0 / alpha)
            umap = unfold(X, 0, b, h, "plus")
            if which == "B_to_hatT":
                _, M = make_markov(X)
                root_edge[t] = M[0, umap.phi[(1,)]]
                deep_edge[t] = M[umap.phi[(1, 1)], umap.phi[(1,)]]
            else:
                a_n = scale_a_n(n, alpha)
                root_edge[t] = X[0, umap.phi[(1,)]] / a_n
                net = network_weights(X, umap, scaling="a_n_inverse", alpha=alpha)
                bended_max[t] = max(abs(w) for w in net.bended().values())
        if which == "B_to_hatT":
            rows.append({
                "n": n, "statistic": "root_top_edge_ks",
                "value": kolmogorov_distance(
                    root_edge, _tree_root_top(alpha, trials, rng)),
            })
            rows.append({
                "n": n, "statistic": "odd_edge_ks",
                "value": kolmogorov_distance(
                    deep_edge, _tree_omega_first(alpha, trials, rng)),
            })
        else:
            rows.append({
                "n": n, "statistic": "root_top_edge_ks",
                "value": kolmogorov_distance(
                    root_edge, _tree_ppp_top(alpha, trials, rng)),
            })
            rows.append({
                "n": n, "statistic": "bended_max_median",
                "value": float(np.median(bended_max)),
            })
            rows.append({
                "n": n, "statistic": "bended_max_mean",
                "value": float(np.mean(bended_max)),
            })
    return rows
