"""Tree construction, resolvent recursion and the limit-measure estimator."""

import numpy as np
import pytest

import heavy_markov_lab as hml
from heavy_markov_lab.pwit import (
    TruncatedTreeOperator,
    dense_root_resolvent,
    root_resolvent_sample,
    catalan,
)

ETA = 0.7 + 0.9j


def tiny_tree(weights):
    """Star tree: root plus one child per weight (handmade fixture)."""
    k = len(weights)
    return TruncatedTreeOperator(
        variant="T0", alpha=0.5, b=max(k, 1), h=1, z=None,
        labels=[()] + [(j + 1,) for j in range(k)],
        parent=np.array([-1] + [0] * k),
        weight=np.array([0.0] + list(weights), dtype=float),
        depth=np.array([0] + [1] * k),
        is_aug=np.zeros(k + 1, dtype=bool),
        raw_xi=np.full(k + 1, np.nan),
        own_sum=np.full(k + 1, np.nan),
        master=0, series_terms=0,
    )


class TestRootResolvent:
    def test_single_node(self):
        assert hml.root_resolvent(tiny_tree([]), 2j) == pytest.approx(-1 / 2j)

    def test_one_child_closed_form(self):
        # -eta / (eta^2 - w^2) at w=1, eta=i gives i/2
        assert hml.root_resolvent(tiny_tree([1.0]), 1j) == pytest.approx(0.5j)

    def test_requires_upper_half_plane(self):
        with pytest.raises(ValueError):
            hml.root_resolvent(tiny_tree([1.0]), 1.0 - 0.5j)

    @pytest.mark.parametrize("variant", ["T0", "hat_plus", "hat_minus",
                                         "ranked_plus", "ranked_minus"])
    @pytest.mark.parametrize("z", [None, 0.4 - 0.3j])
    def test_recursion_matches_dense_solve(self, variant, z):
        tree = hml.build_tree(0.5, variant, b=4, h=3, seed=hash((variant, str(z))) % 2**32,
                              z=z, series_terms=200)
        got = hml.root_resolvent(tree, ETA)
        want = dense_root_resolvent(tree, ETA)
        assert abs(got - want) < 1e-9

    def test_maps_upper_half_plane_to_itself(self):
        tree = hml.build_tree(0.5, "hat_minus", b=8, h=3, seed=3, z=0.5,
                              series_terms=200)
        for eta in (0.01j, 2.5 + 0.05j, -4.0 + 1.0j, 10j):
            r = hml.root_resolvent(tree, eta)
            assert r.imag > 0
            assert abs(r) <= 1.0 / eta.imag + 1e-12

    def test_vectorized_over_eta(self):
        tree = hml.build_tree(0.5, "hat_plus", b=5, h=2, seed=4, series_terms=100)
        grid = np.array([0.5 + 0.1j, 1.0 + 0.1j])
        vec = hml.root_resolvent(tree, grid)
        assert vec[0] == pytest.approx(hml.root_resolvent(tree, grid[0]))
        assert vec[1] == pytest.approx(hml.root_resolvent(tree, grid[1]))


class TestTreeInvariants:
    def test_t0_edges_are_ranked_points(self):
        tree = hml.build_tree(0.5, "T0", b=3, h=1, seed=5, series_terms=100)
        w = tree.weight[~tree.is_aug][1:]
        assert np.all(np.diff(w) < 0)
        assert np.all(w > 0)

    def test_pd_root_weights(self):
        tree = hml.build_tree(0.5, "hat_plus", b=6, h=2, seed=6, series_terms=400)
        kids = [i for i in tree.children(0) if not tree.is_aug[i]]
        w = tree.weight[kids].real
        assert w.sum() < 1.0
        assert np.all(np.diff(w) < 0)
        # recompute from the stored raw points and the root's own mass
        assert np.allclose(w, tree.raw_xi[kids] / tree.own_sum[0], atol=1e-15)

    def test_weight_consistency_identity(self):
        # children of an even-depth vertex entered by weight w carry
        # (1 - w) * raw_point / own_sum, exactly
        tree = hml.build_tree(0.5, "hat_plus", b=4, h=4, seed=7, series_terms=300)
        checked = 0
        for i in range(1, tree.n_nodes):
            if tree.is_aug[i] or tree.depth[i] % 2 != 0:
                continue
            w_in = tree.weight[i].real
            for c in tree.children(i):
                if tree.is_aug[c]:
                    continue
                lhs = tree.weight[c].real
                rhs = (1.0 - w_in) * tree.raw_xi[c] / tree.own_sum[i]
                assert abs(lhs - rhs) < 1e-12
                checked += 1
        assert checked > 10

    def test_weights_in_unit_interval(self):
        for variant in ("hat_plus", "hat_minus"):
            tree = hml.build_tree(0.5, variant, b=5, h=3, seed=8, series_terms=200)
            w = tree.weight[1:][~tree.is_aug[1:]].real
            assert np.all((w > 0) & (w < 1))

    def test_augmentation_leaves(self):
        z = 0.3 + 0.2j
        tree = hml.build_tree(0.5, "hat_plus", b=3, h=2, seed=9, z=z,
                              series_terms=100)
        for i in range(tree.n_nodes):
            if tree.is_aug[i]:
                continue
            aug = [c for c in tree.children(i) if tree.is_aug[c]]
            assert len(aug) == 1
            want = -z if tree.depth[i] % 2 == 0 else -np.conj(z)
            assert tree.weight[aug[0]] == want

    def test_deterministic_given_seed(self):
        a = hml.build_tree(0.5, "ranked_minus", b=4, h=3, seed=10, series_terms=100)
        b = hml.build_tree(0.5, "ranked_minus", b=4, h=3, seed=10, series_terms=100)
        assert a.labels == b.labels
        assert np.array_equal(a.weight, b.weight)

    def test_node_cap(self):
        with pytest.raises(ValueError):
            hml.build_tree(0.5, "T0", b=100, h=6, seed=11)


class TestLazyEvaluator:
    def test_truncation_stability(self):
        # same master seed: refining (b, h) barely moves the root resolvent
        base = root_resolvent_sample(0.5, "hat_plus", 2j, b=100, h=6, seed=12)
        finer = root_resolvent_sample(0.5, "hat_plus", 2j, b=150, h=7, seed=12)
        assert abs(base - finer) < 1e-3

    def test_stays_in_half_plane(self):
        for seed in range(5):
            r = root_resolvent_sample(0.5, "hat_minus", 0.4 + 0.07j, b=100,
                                      h=6, seed=seed, z=0.5)
            assert r.imag > 0 and abs(r) <= 1 / 0.07 + 1e-9

    def test_agrees_with_materialized_trees_in_law(self):
        # small truncation, no pruning: the lazy path and the built trees
        # sample the same operator, so their mean resolvents must agree
        eta, reps = 2j, 300
        lazy = np.array([
            root_resolvent_sample(0.5, "hat_plus", eta, b=10, h=3,
                                  seed=1000 + t, tol=0.0, series_terms=64)
            for t in range(reps)
        ])
        built = np.array([
            hml.root_resolvent(
                hml.build_tree(0.5, "hat_plus", b=10, h=3, seed=5000 + t,
                               series_terms=64), eta)
            for t in range(reps)
        ])
        se = np.sqrt(lazy.imag.var(ddof=1) / reps + built.imag.var(ddof=1) / reps)
        assert abs(lazy.imag.mean() - built.imag.mean()) <= 3 * se


class TestLimitMeasure:
    @pytest.fixture(scope="class")
    def small_estimate(self):
        grid = np.linspace(0.0, 5.0, 81)
        return hml.expected_limit_measure(0.5, 0.0, trials=120, b=100, h=5,
                                          grid=grid, eta_eps=0.05, seed=13)

    def test_density_positive_and_normalized(self, small_estimate):
        assert np.all(small_estimate.density >= 0.0)
        assert small_estimate.total_mass() <= 1.0 + 0.05

    def test_second_moment_oracle(self, small_estimate):
        # E[sum zeta^2] = E[sum omega_hat^2] = 1 - alpha, so the mixture's
        # second moment at z=0 is 1 - alpha
        assert small_estimate.second_moment == pytest.approx(0.5, abs=0.05)

    def test_radiality(self):
        # the estimator sees the shift only through |z|^2, so rotating z at
        # a fixed seed is an exact invariance; across seeds only Monte
        # Carlo noise remains
        grid = np.linspace(0.0, 4.0, 61)
        kw = dict(trials=120, b=100, h=5, grid=grid, eta_eps=0.05)
        real_shift = hml.expected_limit_measure(0.5, 0.35, seed=14, **kw)
        coupled = hml.expected_limit_measure(0.5, 0.35j, seed=14, **kw)
        assert np.array_equal(real_shift.density, coupled.density)
        fresh = hml.expected_limit_measure(0.5, 0.35j, seed=15, **kw)
        assert np.abs(real_shift.cdf() - fresh.cdf()).max() < 0.1

    def test_unbounded_support_probe(self):
        # sufficient event: the top point of the process is >= 1, which has
        # probability 1 - 1/e >= 1/e; on it Psi >= (1+q)^-2
        rng = np.random.default_rng(16)
        trials = 20000
        top = rng.standard_exponential(trials) ** (-2.0)
        freq = (top >= 1.0).mean()
        se = np.sqrt(freq * (1 - freq) / trials)
        assert freq + 3 * se >= np.exp(-1.0)
        q = hml.q_constant(0.5)
        psi_on_event = (1.0 / (1.0 + q)) ** 2
        assert psi_on_event >= (1 + q) ** -2


class TestMomentBound:
    def test_catalan_numbers(self):
        assert [catalan(k) for k in range(6)] == [1, 1, 2, 5, 14, 42]

    def test_c_estimate_range(self):
        rec = hml.moment_bound_C(0.5, 0.0, k=1, trials=4000, seed=17)
        assert 1.0 - 3 * rec["C_se"] <= rec["C_estimate"] <= 2.0 + 3 * rec["C_se"]
        assert rec["catalan"] == 1

    def test_fourth_moment_against_dyck_bound(self):
        # fourth moment of the root measure from materialized depth-2 trees
        # (length-4 closed walks) versus |D_2| * C(0, 2)
        m4 = []
        for t in range(40):
            variant = "hat_plus" if t % 2 == 0 else "hat_minus"
            tree = hml.build_tree(0.5, variant, b=150, h=2, seed=600 + t,
                                  series_terms=150)
            e0 = np.zeros(tree.n_nodes)
            e0[0] = 1.0
            t2 = _matvec(tree, _matvec(tree, e0))
            m4.append(float(t2 @ t2))
        rec = hml.moment_bound_C(0.5, 0.0, k=2, trials=4000, seed=18)
        bound = rec["catalan"] * (rec["C_estimate"] + 3 * rec["C_se"])
        m4_mean = np.mean(m4)
        m4_se = np.std(m4, ddof=1) / np.sqrt(len(m4))
        assert m4_mean - 3 * m4_se <= bound
        assert m4_mean <= rec["bound_4k"]


def _matvec(tree, x):
    y = np.zeros_like(x)
    w = tree.weight.real
    for i in range(1, tree.n_nodes):
        p = tree.parent[i]
        y[i] += w[i] * x[p]
        y[p] += w[i] * x[i]
    return y
