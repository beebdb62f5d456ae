"""Truncated alternating Poisson weighted trees and their root resolvents.

The limiting object behind the singular-value law is a rooted infinite
tree whose edge weights alternate by generation parity.  Writing
``xi^(v)`` for the ranked power-law Poisson process owned by vertex ``v``
and ``S_v`` for its total mass:

* a "PD-type" vertex ``v`` entered through a parent edge of raw size
  ``p`` gives its ``j``-th child the weight ``xi_j^(v) / (p + S_v)``
  (at the root ``p = 0``, so the weights are a PD(alpha) vector);
* an "omega-type" vertex ``v`` gives its ``j``-th child the weight
  ``xi_j^(v) / (xi_j^(v) + S_child)``, coupling the edge to the child's
  own total mass.

In the ``hat_plus`` variant the root is PD-type, in ``hat_minus`` it is
omega-type; ``ranked_*`` re-sorts the omega-type children descending.
The shift-augmented tree for a complex ``z`` hangs one extra edge of
weight ``-z`` / ``-conj(z)`` (by parity) off every vertex, leading to an
independent copy of the opposite-parity tree.

Two evaluation paths are provided:

* ``build_tree`` materializes a finite ``(b, h)`` truncation (including
  shift edges as pendant leaves) and ``root_resolvent`` runs the exact
  bottom-up recursion ``R = -1 / (eta + sum |w|^2 R_child)``; a dense
  linear-solve oracle cross-checks it in the tests.
* ``root_resolvent_sample`` expands the tree lazily (depth-first, with a
  contribution budget) and spawns the opposite-parity shift partners on
  the fly, which is how ``expected_limit_measure`` estimates the limit
  density by Stieltjes inversion.

Randomness is node-addressed: every vertex draws from a generator keyed
by (master seed, variant, path label), so refining ``b`` or ``h`` keeps
the already-built part of the tree fixed, and trials parallelize without
any shared state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .heavy_tail import (
    ppp_tail_mean,
    ppp_tail_sq_mean,
    stable_variates,
    _check_alpha,
)

VARIANTS = ("T0", "hat_plus", "hat_minus", "ranked_plus", "ranked_minus")
_VARIANT_TAG = {v: i + 1 for i, v in enumerate(VARIANTS)}

_MASK = (1 << 64) - 1


def _mix64(x: int) -> int:
    """splitmix64 finalizer; cheap stable hash step for node keys."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def _node_key(master: int, tag: int, label: tuple) -> int:
    k = _mix64(master & _MASK)
    k = _mix64(k ^ _mix64(tag))
    for part in label:
        k = _mix64(k ^ _mix64(int(part)))
    return k


def _node_rng(master: int, tag: int, label: tuple) -> np.random.Generator:
    return np.random.default_rng(_node_key(master, tag, label))


def _master_from(seed) -> int:
    """Accept an int seed or a Generator and return a 64-bit master key."""
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, _MASK, dtype=np.uint64))
    return int(seed) & _MASK


def _draw_points(rng: np.random.Generator, alpha: float, terms: int):
    """Ranked PPP points with compensated first and second tail moments."""
    arrivals = np.cumsum(rng.standard_exponential(terms))
    xi = arrivals ** (-1.0 / alpha)
    last = arrivals[-1]
    total = xi.sum() + float(ppp_tail_mean(alpha, last))
    tail_sq = float(ppp_tail_sq_mean(alpha, last))
    return xi, total, tail_sq


# ---------------------------------------------------------------------------
# Materialized trees
# ---------------------------------------------------------------------------

@dataclass
class TruncatedTreeOperator:
    """A finite rooted weighted tree, usable as a Hermitian operator.

    Arrays are indexed by node id (0 = root).  ``weight[i]`` is the weight
    of the edge from ``parent[i]`` into node ``i`` (0 at the root); shift
    augmentation leaves are marked in ``is_aug`` and carry ``-z`` or
    ``-conj(z)``.  ``raw_xi`` keeps the raw point behind each tree edge and
    ``own_sum`` the compensated total mass of each vertex's own process,
    which makes the weight-consistency identities checkable after the fact.
    """

    variant: str
    alpha: float
    b: int
    h: int
    z: Optional[complex]
    labels: list
    parent: np.ndarray
    weight: np.ndarray
    depth: np.ndarray
    is_aug: np.ndarray
    raw_xi: np.ndarray
    own_sum: np.ndarray
    master: int
    series_terms: int

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    def children(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.parent == i)

    def edge_weights(self) -> dict:
        """Map (parent label, child index within parent) -> weight."""
        out = {}
        counter = {}
        for i in range(1, self.n_nodes):
            p = int(self.parent[i])
            counter[p] = counter.get(p, 0) + 1
            out[(self.labels[p], counter[p])] = self.weight[i]
        return out

    def as_dense(self) -> np.ndarray:
        """Hermitian adjacency matrix of the tree (oracle-sized only)."""
        H = np.zeros((self.n_nodes, self.n_nodes), dtype=complex)
        for i in range(1, self.n_nodes):
            p = int(self.parent[i])
            H[p, i] = self.weight[i]
            H[i, p] = np.conj(self.weight[i])
        return H


class _Builder:
    def __init__(self, alpha, variant, b, h, z, master, series_terms, node_cap):
        self.alpha, self.variant = alpha, variant
        self.b, self.h = b, h
        self.z = None if z is None else complex(z)
        self.master = master
        self.tag = _VARIANT_TAG[variant]
        self.terms = max(series_terms, b)
        self.node_cap = node_cap
        # node records: (label, parent, weight, depth, is_aug, raw_xi, own_sum)
        self.rows = []

    def _rng(self, label):
        return _node_rng(self.master, self.tag, label)

    def _emits_pd(self, depth: int) -> bool:
        """Does a vertex at this depth hand PD-type weights to its children?"""
        if self.variant == "T0":
            return True  # placeholder; T0 handled separately
        plus = self.variant in ("hat_plus", "ranked_plus")
        even = depth % 2 == 0
        return even if plus else not even

    def _aug_weight(self, depth: int) -> complex:
        plus_like = self.variant in ("T0", "hat_plus", "ranked_plus")
        even = depth % 2 == 0
        if plus_like:
            return -self.z if even else -np.conj(self.z)
        return -np.conj(self.z) if even else -self.z

    def _add(self, label, parent, weight, depth, is_aug, raw_xi, own_sum) -> int:
        if len(self.rows) >= self.node_cap:
            raise ValueError(
                f"materialized tree would exceed {self.node_cap} nodes; "
                "reduce (b, h) or use the sampling evaluator"
            )
        self.rows.append((label, parent, weight, depth, is_aug, raw_xi, own_sum))
        return len(self.rows) - 1

    def build(self) -> TruncatedTreeOperator:
        if self.variant == "T0":
            xi, total, _ = _draw_points(self._rng(()), self.alpha, self.terms)
            root = self._add((), -1, 0.0, 0, False, np.nan, total)
            self._expand_t0(root, (), xi, 1)
        else:
            xi, total, _ = _draw_points(self._rng(()), self.alpha, self.terms)
            root = self._add((), -1, 0.0, 0, False, np.nan, total)
            if self._emits_pd(0):
                self._expand_pd(root, (), 0.0, xi, total, 1)
            else:
                self._expand_omega(root, (), xi, 1)
        if self.z is not None:
            self._augment()
        tree = self._finish()
        if self.variant in ("ranked_plus", "ranked_minus"):
            tree = _rank_omega_children(tree)
        return tree

    def _expand_t0(self, parent_id, label, xi, depth):
        if depth > self.h:
            return
        for j in range(1, self.b + 1):
            child_label = label + (j,)
            cxi, ctotal, _ = _draw_points(self._rng(child_label), self.alpha, self.terms)
            cid = self._add(child_label, parent_id, float(xi[j - 1]), depth,
                            False, float(xi[j - 1]), ctotal)
            self._expand_t0(cid, child_label, cxi, depth + 1)

    def _expand_pd(self, parent_id, label, praw, xi, total, depth):
        """Children of a PD-type vertex: weights xi_j / (praw + S_own)."""
        if depth > self.h:
            return
        den = praw + total
        for j in range(1, self.b + 1):
            child_label = label + (j,)
            cxi, ctotal, _ = _draw_points(self._rng(child_label), self.alpha, self.terms)
            w = float(xi[j - 1] / den)
            cid = self._add(child_label, parent_id, w, depth, False,
                            float(xi[j - 1]), ctotal)
            self._expand_omega(cid, child_label, cxi, depth + 1)

    def _expand_omega(self, parent_id, label, xi, depth):
        """Children of an omega-type vertex: weights xi_j / (xi_j + S_child)."""
        if depth > self.h:
            return
        for j in range(1, self.b + 1):
            child_label = label + (j,)
            cxi, ctotal, _ = _draw_points(self._rng(child_label), self.alpha, self.terms)
            w = float(xi[j - 1] / (xi[j - 1] + ctotal))
            cid = self._add(child_label, parent_id, w, depth, False,
                            float(xi[j - 1]), ctotal)
            self._expand_pd(cid, child_label, float(xi[j - 1]), cxi, ctotal, depth + 1)

    def _augment(self):
        for i, (label, _, _, depth, is_aug, _, _) in enumerate(list(self.rows)):
            if is_aug:
                continue
            self._add(label + (0,), i, self._aug_weight(depth), depth + 1,
                      True, np.nan, np.nan)

    def _finish(self) -> TruncatedTreeOperator:
        labels = [r[0] for r in self.rows]
        dtype = complex if self.z is not None else float
        return TruncatedTreeOperator(
            variant=self.variant, alpha=self.alpha, b=self.b, h=self.h,
            z=self.z,
            labels=labels,
            parent=np.array([r[1] for r in self.rows], dtype=int),
            weight=np.array([r[2] for r in self.rows], dtype=dtype),
            depth=np.array([r[3] for r in self.rows], dtype=int),
            is_aug=np.array([r[4] for r in self.rows], dtype=bool),
            raw_xi=np.array([r[5] for r in self.rows], dtype=float),
            own_sum=np.array([r[6] for r in self.rows], dtype=float),
            master=self.master, series_terms=self.terms,
        )


def _rank_omega_children(tree: TruncatedTreeOperator) -> TruncatedTreeOperator:
    """Re-sort omega-type children descending (subtrees follow their edges)."""
    plus = tree.variant == "ranked_plus"
    order = np.arange(tree.n_nodes)
    # process top-down; relabel along the way
    new_labels = list(tree.labels)
    for i in range(tree.n_nodes):
        kids = [int(c) for c in tree.children(i) if not tree.is_aug[c]]
        if len(kids) < 2:
            continue
        depth = int(tree.depth[i])
        emits_omega = (depth % 2 == 1) if plus else (depth % 2 == 0)
        if not emits_omega:
            continue
        ranked = sorted(kids, key=lambda c: -tree.weight[c].real)
        for pos, c in enumerate(ranked, start=1):
            new_labels[c] = new_labels[i] + (pos,)
    # propagate relabeling to descendants
    for i in range(1, tree.n_nodes):
        p = int(tree.parent[i])
        if tree.is_aug[i]:
            new_labels[i] = new_labels[p] + (0,)
        elif new_labels[i][:-1] != new_labels[p]:
            new_labels[i] = new_labels[p] + (new_labels[i][-1],)
    tree.labels = new_labels
    return tree


def build_tree(
    alpha: float,
    variant: str,
    b: int,
    h: int,
    seed,
    z: Optional[complex] = None,
    series_terms: int = 2000,
    node_cap: int = 2_000_000,
) -> TruncatedTreeOperator:
    """Materialize a ``(b, h)`` truncation of the chosen tree variant.

    ``seed`` is an int master key or a Generator (one key is drawn from
    it).  Shift augmentation (``z``) adds one pendant leaf per vertex.
    Intended for oracle-sized trees; the Monte Carlo estimator below
    explores large truncations without materializing them.
    """
    _check_alpha(alpha)
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if b < 1 or h < 1:
        raise ValueError("b and h must be at least 1")
    master = _master_from(seed)
    return _Builder(alpha, variant, b, h, z, master, series_terms, node_cap).build()


# ---------------------------------------------------------------------------
# Resolvents on materialized trees
# ---------------------------------------------------------------------------

def root_resolvent(tree: TruncatedTreeOperator, eta):
    """Diagonal resolvent entry at the root, ``<delta_0, (T - eta)^-1 delta_0>``.

    Computed bottom-up: ``R_v = -1 / (eta + sum_children |w|^2 R_child)``
    with leaf value ``-1/eta``.  ``eta`` (upper half plane) may be a scalar
    or an array; the result matches a dense linear solve to solver precision.
    """
    eta_arr = np.asarray(eta, dtype=complex)
    if np.any(eta_arr.imag <= 0.0):
        raise ValueError("eta must lie in the open upper half plane")
    scalar = eta_arr.ndim == 0
    eta_arr = np.atleast_1d(eta_arr)
    w2 = np.abs(tree.weight) ** 2
    acc = np.zeros((tree.n_nodes, len(eta_arr)), dtype=complex)
    order = np.argsort(-tree.depth)
    for i in order:
        R = -1.0 / (eta_arr + acc[i])
        p = int(tree.parent[i])
        if p >= 0:
            acc[p] += w2[i] * R
    out = -1.0 / (eta_arr + acc[0])
    return complex(out[0]) if scalar else out


def dense_root_resolvent(tree: TruncatedTreeOperator, eta) -> complex:
    """Oracle: solve ``(T - eta) x = delta_root`` densely and return x[root]."""
    H = tree.as_dense()
    n = tree.n_nodes
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    x = np.linalg.solve(H - complex(eta) * np.eye(n), rhs)
    return complex(x[0])


# ---------------------------------------------------------------------------
# Lazy evaluation of the shift-augmented trees over an eta grid
# ---------------------------------------------------------------------------

class _LazyEvaluator:
    """Depth-first sampler of the root resolvent of the augmented tree.

    Subtrees whose squared-weight path product falls below ``tol`` are
    replaced by the leaf value ``-1/eta``; the within-budget children are
    expanded from their own node-keyed streams.  Beyond the expanded
    prefix, omega-type edges keep exact weights (their stable masses are
    drawn in one batch) and the analytic tail of the squared weights is
    compensated towards the leaf value, so the truncation error is
    second-order in the discarded weights.
    """

    def __init__(self, alpha, z, eta, b, h, master, tag, tol, series_terms):
        self.alpha = alpha
        self.z2 = 0.0 if z is None else abs(complex(z)) ** 2
        self.eta = np.atleast_1d(np.asarray(eta, dtype=complex))
        self.b, self.h = b, h
        self.master, self.tag = master, tag
        self.tol = tol
        self.terms = series_terms
        self.leaf = -1.0 / self.eta
        # low quantile of the stable mass, used to bound omega weights of
        # not-yet-drawn children when deciding how far to scan
        probe = stable_variates(alpha, 512, _node_rng(master, tag, (0, 0)))
        self.s_low = float(np.quantile(probe, 0.002))
        self.root_weight_sq = None  # filled by run()

    def _rng(self, label):
        return _node_rng(self.master, self.tag, label)

    def run(self, root_kind: str) -> np.ndarray:
        """root_kind: 'pd' (PD-type root) or 'omega'; root carries a shift edge."""
        if root_kind == "pd":
            xi, total, tail_sq = _draw_points(self._rng(()), self.alpha, self.terms)
            val, wsq = self._pd_vertex((), 0.0, xi, total, tail_sq, self.h, 1.0, True)
        else:
            val, wsq = self._omega_vertex((), self.h, 1.0, True)
        self.root_weight_sq = wsq + self.z2
        return val

    def _pd_vertex(self, label, praw, xi, total, tail_sq, depth, budget, shifted):
        den = praw + total
        w2 = (xi[: self.b] / den) ** 2
        acc = np.zeros_like(self.leaf)
        nb = 0
        for j in range(len(w2)):
            if depth <= 1 or w2[j] * budget <= self.tol:
                break
            acc = acc + w2[j] * self._omega_value(label + (j + 1,), depth - 1,
                                                  budget * w2[j], True)
            nb += 1
        rem = float(w2[nb:].sum()) + tail_sq / den ** 2
        acc = acc + rem * self.leaf
        wsq_total = float(w2.sum()) + tail_sq / den ** 2
        if shifted and self.z2 > 0.0:
            acc = acc + self.z2 * self._omega_value(label + (0,), depth - 1,
                                                    budget * self.z2, False)
        return -1.0 / (self.eta + acc), wsq_total

    def _omega_value(self, label, depth, budget, shifted):
        if depth <= 0 or budget <= self.tol:
            return self.leaf
        val, _ = self._omega_vertex(label, depth, budget, shifted)
        return val

    def _omega_vertex(self, label, depth, budget, shifted):
        xi, _, tail_sq = _draw_points(self._rng(label), self.alpha, self.terms)
        pts = xi[: self.b]
        acc = np.zeros_like(self.leaf)
        # scan while even an unusually small stable mass could clear the budget
        wbound2 = (pts / (pts + self.s_low)) ** 2
        nscan = int(np.searchsorted(-wbound2 * budget, -self.tol))
        wsq = 0.0
        inv_s2 = []
        for j in range(nscan):
            child_label = label + (j + 1,)
            cxi, ctotal, ctail_sq = _draw_points(self._rng(child_label),
                                                 self.alpha, self.terms)
            w2 = (pts[j] / (pts[j] + ctotal)) ** 2
            wsq += w2
            inv_s2.append(1.0 / (pts[j] + ctotal) ** 2)
            if depth > 1 and w2 * budget > self.tol:
                child, _ = self._pd_vertex(child_label, pts[j], cxi, ctotal,
                                           ctail_sq, depth - 1,
                                           budget * w2, True)
            else:
                child = self.leaf
            acc = acc + w2 * child
        # exact weights for the un-scanned prefix of points, leaf subtrees
        rest = pts[nscan:]
        if len(rest):
            masses = stable_variates(self.alpha, len(rest), self._rng(label + (0, 1)))
            r2 = float(((rest / (rest + masses)) ** 2).sum())
            wsq += r2
            acc = acc + r2 * self.leaf
            inv_s2.append(float(np.mean(1.0 / (rest + masses) ** 2)))
        # analytic tail beyond the b-th point, with a 1/S^2 proxy
        proxy = float(np.mean(inv_s2[-4:])) if inv_s2 else 1.0 / self.s_low ** 2
        tail = tail_sq * proxy
        wsq += tail
        acc = acc + tail * self.leaf
        if shifted and self.z2 > 0.0:
            if depth > 1 and self.z2 * budget > self.tol:
                pxi, ptotal, ptail = _draw_points(self._rng(label + (0,)),
                                                  self.alpha, self.terms)
                partner, _ = self._pd_vertex(label + (0,), 0.0, pxi, ptotal,
                                             ptail, depth - 1,
                                             budget * self.z2, False)
            else:
                partner = self.leaf
            acc = acc + self.z2 * partner
        return -1.0 / (self.eta + acc), wsq


def root_resolvent_sample(
    alpha: float,
    variant: str,
    eta,
    b: int = 100,
    h: int = 6,
    seed=0,
    z: Optional[complex] = None,
    tol: float = 1e-7,
    series_terms: int = 64,
):
    """One Monte Carlo draw of the root resolvent of the (augmented) tree.

    Unlike ``build_tree`` + ``root_resolvent`` this never materializes the
    tree, so ``(b, h)`` like (100, 6) are cheap.  With a fixed integer
    ``seed``, enlarging ``b`` or ``h`` refines the same realization.
    """
    _check_alpha(alpha)
    master = _master_from(seed)
    if variant in ("hat_plus", "ranked_plus"):
        kind, tag = "pd", _VARIANT_TAG["hat_plus"]
    elif variant in ("hat_minus", "ranked_minus"):
        kind, tag = "omega", _VARIANT_TAG["hat_minus"]
    else:
        raise ValueError("sampling evaluator supports the alternating variants only")
    ev = _LazyEvaluator(alpha, z, eta, b, h, master, tag, tol, series_terms)
    out = ev.run(kind)
    return complex(out[0]) if np.ndim(eta) == 0 else out


# ---------------------------------------------------------------------------
# The limiting singular-value measure
# ---------------------------------------------------------------------------

@dataclass
class RootMeasureEstimate:
    """Density estimate of the limit singular-value law on a grid.

    ``density`` approximates the reflected (one-sided) measure via
    ``(2/pi) * Im m(x + i*eta_eps)`` averaged over trials; ``second_moment``
    is estimated separately from the root edge weights (no smoothing bias).
    """

    grid: np.ndarray
    density: np.ndarray
    eta_eps: float
    trials: int
    alpha: float
    z: complex
    method: str
    seed: object
    second_moment: Optional[float] = None
    params: dict = field(default_factory=dict)

    def cdf(self, normalized: bool = True) -> np.ndarray:
        """Trapezoid CDF of the one-sided density on the grid.

        ``normalized`` rescales to total mass 1, cancelling the mass pushed
        outside the window by Cauchy smoothing when comparing CDFs.
        """
        dx = np.diff(self.grid)
        c = np.concatenate([[0.0], np.cumsum(0.5 * (self.density[1:] + self.density[:-1]) * dx)])
        if normalized and c[-1] > 0:
            c = c / c[-1]
        return c

    def total_mass(self) -> float:
        return float(self.cdf(normalized=False)[-1])


def measure_trial(
    alpha: float,
    z: complex,
    b: int,
    h: int,
    grid: np.ndarray,
    eta_eps: float,
    master: int,
    trial: int,
    tol: float = 1e-7,
    series_terms: int = 64,
):
    """Density curve and squared-root-weight sum of one tree realization.

    Even trials draw the PD-rooted tree, odd trials the omega-rooted one,
    so a contiguous block of trials approximates the half/half mixture.
    Top-level and picklable for process pools.
    """
    eta = np.asarray(grid, dtype=float) + 1j * eta_eps
    kind = "pd" if trial % 2 == 0 else "omega"
    tag = _VARIANT_TAG["hat_plus"] if kind == "pd" else _VARIANT_TAG["hat_minus"]
    ev = _LazyEvaluator(alpha, z, eta, b, h, _mix64(master ^ _mix64(trial)),
                        tag, tol, series_terms)
    values = ev.run(kind)
    # one-sided density of the reflected measure: 2 * (1/pi) Im m
    return 2.0 * values.imag / np.pi, ev.root_weight_sq


def expected_limit_measure(
    alpha: float,
    z: complex = 0.0,
    trials: int = 400,
    b: int = 100,
    h: int = 6,
    grid=None,
    eta_eps: float = 0.05,
    seed=0,
    tol: float = 1e-7,
    series_terms: int = 64,
    workers: int = 1,
) -> RootMeasureEstimate:
    """Estimate the limiting singular-value density by Stieltjes inversion.

    Averages ``Im`` of the root resolvent of fresh augmented trees (half
    PD-rooted, half omega-rooted) at ``eta = x + i*eta_eps`` over the grid,
    then reflects to the positive axis.  Results are independent of
    ``workers`` because every trial owns a derived seed and the average
    runs in trial order.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if eta_eps <= 0.0:
        raise ValueError("eta_eps must be positive")
    if grid is None:
        grid = np.linspace(0.0, 6.0, 400)
    grid = np.asarray(grid, dtype=float)
    master = _master_from(seed)
    args = [(alpha, complex(z), b, h, grid, eta_eps, master, t, tol, series_terms)
            for t in range(trials)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_measure_trial_star, args, chunksize=8))
    else:
        results = [_measure_trial_star(a) for a in args]
    dens = np.mean([r[0] for r in results], axis=0)
    m2 = float(np.mean([r[1] for r in results]))
    return RootMeasureEstimate(
        grid=grid, density=dens, eta_eps=eta_eps, trials=trials, alpha=alpha,
        z=complex(z), method="pwit", seed=seed, second_moment=m2,
        params={"b": b, "h": h, "tol": tol, "series_terms": series_terms},
    )


def _measure_trial_star(a):
    return measure_trial(*a)


# ---------------------------------------------------------------------------
# Moment bound machinery
# ---------------------------------------------------------------------------

def catalan(k: int) -> int:
    """k-th Catalan number, the count of non-negative lattice loops of
    length 2k."""
    from math import comb

    if k < 0:
        raise ValueError("k must be non-negative")
    return comb(2 * k, k) // (k + 1)


def moment_bound_C(
    alpha: float,
    z: complex,
    k: int,
    trials: int = 20000,
    seed=0,
    terms: int = 2000,
) -> dict:
    """Monte Carlo estimate of ``C = E[(|z|^2 + max(1, Psi))^k]`` with
    ``Psi = sum_j omega_j^2``, plus the Dyck-path moment bounds.

    Returns ``C_estimate``, its standard error, ``catalan`` = |D_k|, and
    the two upper bounds ``4**k * C`` and ``|D_k| * C`` on the (2k)-th
    moment of the limit law.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    _check_alpha(alpha)
    rng = np.random.default_rng(seed)
    from .heavy_tail import q_constant

    q = q_constant(alpha)
    z2 = abs(complex(z)) ** 2
    vals = np.empty(trials)
    for t in range(trials):
        arr = np.cumsum(rng.standard_exponential(terms))
        xi = arr ** (-1.0 / alpha)
        psi = float(((xi / (xi + q)) ** 2).sum()
                    + ppp_tail_sq_mean(alpha, arr[-1]) / q ** 2)
        vals[t] = (z2 + max(1.0, psi)) ** k
    c_est = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(trials))
    cat = catalan(k)
    return {
        "C_estimate": c_est,
        "C_se": se,
        "catalan": cat,
        "bound": cat * c_est,
        "bound_4k": 4.0 ** k * c_est,
    }
