"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one `ACCEPTANCE <k>: PASS/FAIL` line (run with `-s` to
see them live).  The expensive limit estimates and pooled spectra come
from session fixtures shared with the module tests.
"""

import time
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg as sla
from scipy.special import gamma as gamma_fn

import heavy_markov_lab as hml
from heavy_markov_lab.ensemble import shift_reference_matrix
from heavy_markov_lab.heavy_tail import ppp_tail_mean, stable_variates
from heavy_markov_lab.lab import ExperimentConfig, derive_seed, run, rerun, _run_pool
from heavy_markov_lab.pwit import dense_root_resolvent
from heavy_markov_lab.spectra import (
    isotropy_effective_count,
    ks_critical_value,
)


def report(criterion, ok, detail):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


GOLDEN_TABLE = [
    "root,3,3", "1,2,2", "2,5,1", "1.1,5,4", "1.2,1,5", "2.1,4,2", "2.2,2,1",
]
GOLDEN_WEIGHTS = {
    ("root", "1"): 10.3, ("root", "2"): 3.0,
    ("1", "1.1"): 4.7, ("1", "1.2"): 3.2,
    ("1", "2.1"): 3.1, ("1", "2.2"): 1.2,
    ("2", "1.1"): 2.0, ("2", "1.2"): 0.2,
    ("2", "2.1"): 11.0, ("2", "2.2"): 1.7,
}


def test_criterion_1_golden_unfolding(tmp_path):
    t0 = time.monotonic()
    run("unfold-demo", ExperimentConfig(seed=1, out=str(tmp_path), workers=1))
    elapsed = time.monotonic() - t0
    table = (tmp_path / "unfold_table.csv").read_text().strip().splitlines()[1:]
    net_rows = (tmp_path / "unfold_network.csv").read_text().strip().splitlines()[1:]
    weights = {(r.split(",")[0], r.split(",")[1]): float(r.split(",")[2])
               for r in net_rows}
    ok = table == GOLDEN_TABLE and weights == GOLDEN_WEIGHTS and elapsed < 1.0
    report(1, ok, f"table+weights exact, runtime {elapsed:.3f}s")


def test_criterion_2_closed_form_oracles():
    t0 = time.monotonic()
    rng = np.random.default_rng(derive_seed(42, ["oracles"]))
    msgs = []
    # (a) stable Laplace transform at alpha = 1/2
    s = stable_variates(0.5, 10 ** 6, rng)
    lt = np.exp(-s)
    se = lt.std(ddof=1) / np.sqrt(len(lt))
    gap_a = abs(lt.mean() - np.exp(-np.sqrt(np.pi)))
    ok_a = gap_a <= 3 * se
    msgs.append(f"stable LT gap {gap_a:.2e} (3se={3 * se:.2e})")
    # (b) mean total of the omega sequence
    q = hml.q_constant(0.5)
    totals = np.empty(3000)
    for i in range(len(totals)):
        ppp = hml.sample_ppp(0.5, 2000, rng)
        totals[i] = (ppp.xi / (ppp.xi + q)).sum() \
            + ppp_tail_mean(0.5, ppp.arrival_times[-1]) / q
    se_b = totals.std(ddof=1) / np.sqrt(len(totals))
    ok_b = abs(totals.mean() - 1.0) <= 3 * se_b
    msgs.append(f"omega total {totals.mean():.5f}")
    # (c) closed-form inverse smallest singular value of the shift matrix
    worst = 0.0
    for n in (2, 5, 20, 100, 400):
        for z in (0.5, -0.7, 0.5 + 0.5j, 2.0 - 1.0j, 0.9j):
            direct = 1.0 / sla.svdvals(shift_reference_matrix(z, n))[-1]
            worst = max(worst, abs(direct - hml.kn_bound(z, n)))
    ok_c = worst <= 1e-10
    msgs.append(f"kn grid err {worst:.2e}")
    # (d) the two tail constants at alpha = 1/2
    ok_d = (abs(hml.gamma_constant(0.5) - 2 / np.pi) <= 1e-12
            and abs(hml.q_constant(0.5) - (np.pi / 2) ** 2) <= 1e-12)
    elapsed = time.monotonic() - t0
    ok = ok_a and ok_b and ok_c and ok_d and elapsed < 120.0
    report(2, ok, "; ".join(msgs) + f"; runtime {elapsed:.1f}s")


def test_criterion_3_exact_matrix_identities():
    shifts = (0.0, 0.5, 0.3 - 0.8j)
    worst = {"row": 0.0, "perron": 0.0, "modulus": 0.0, "m2": 0.0}
    ok = True
    for n, alpha in ((100, 0.5), (500, 0.5), (2000, 0.5), (300, 0.2), (300, 0.9)):
        s = hml.generate(n, hml.TailLaw(alpha=alpha), derive_seed(3, [n, alpha]))
        worst["row"] = max(worst["row"], np.abs(s.M.sum(1) - 1).max())
        ev = hml.eigenvalues(s.M)
        worst["perron"] = max(worst["perron"], np.abs(ev.values - 1).min())
        worst["modulus"] = max(worst["modulus"], np.abs(ev.values).max() - 1)
        sv = hml.singular_values(s.M, 0.0)
        worst["m2"] = max(worst["m2"],
                          abs(np.mean(sv.values ** 2) - (s.M ** 2).sum() / n))
        ok &= np.abs(ev.values).mean() <= sv.values.mean() + 1e-12  # Weyl
        for z in shifts:
            s1 = sla.svdvals(s.M - z * np.eye(n))[0]
            ok &= s1 ** 2 <= 2 * n * (1 + abs(z) ** 2)
    ok &= (worst["row"] < 1e-12 and worst["perron"] < 1e-9
           and worst["modulus"] < 1e-9 and worst["m2"] < 1e-10)
    report(3, ok, f"worst gaps: rows {worst['row']:.1e}, perron "
           f"{worst['perron']:.1e}, modulus excess {worst['modulus']:.1e}, "
           f"moment identity {worst['m2']:.1e}")


def test_criterion_4_tree_resolvent_oracle():
    t0 = time.monotonic()
    rng = np.random.default_rng(44)
    caps = {1: 50, 2: 30, 3: 11, 4: 6}
    variants = ("T0", "hat_plus", "hat_minus", "ranked_plus", "ranked_minus")
    worst_res, worst_id = 0.0, 0.0
    for t in range(100):
        h = int(rng.integers(1, 5))
        b = int(rng.integers(1, caps[h] + 1))
        variant = variants[t % len(variants)]
        z = None if t % 3 == 0 else complex(rng.normal(), rng.normal()) / 2
        tree = hml.build_tree(0.5, variant, b=b, h=h,
                              seed=int(rng.integers(2 ** 63)), z=z,
                              series_terms=150)
        eta = complex(rng.normal(), 0.2 + rng.random())
        worst_res = max(worst_res, abs(hml.root_resolvent(tree, eta)
                                       - dense_root_resolvent(tree, eta)))
        if variant != "T0":
            even = (tree.depth % 2 == 0) if variant.endswith("plus") else \
                   (tree.depth % 2 == 1)
            for i in range(1, tree.n_nodes):
                if tree.is_aug[i] or not even[i] or tree.depth[i] == 0:
                    continue
                w_in = tree.weight[i].real
                for c in tree.children(i):
                    if tree.is_aug[c]:
                        continue
                    rhs = (1 - w_in) * tree.raw_xi[c] / tree.own_sum[i]
                    worst_id = max(worst_id, abs(tree.weight[c].real - rhs))
    elapsed = time.monotonic() - t0
    ok = worst_res < 1e-9 and worst_id < 1e-12 and elapsed < 60.0
    report(4, ok, f"resolvent gap {worst_res:.1e}, weight identity gap "
           f"{worst_id:.1e}, runtime {elapsed:.1f}s over 100 trees")


def test_criterion_5_singular_value_convergence(limit_estimates, pooled_singular):
    t0 = time.monotonic()
    ok = True
    details = []
    for z in (0.0, 0.5):
        for method in ("pwit", "rde"):
            est = limit_estimates[(0.5, z, method)]
            table = (est.grid, est.cdf())
            pooled = np.concatenate(pooled_singular[(z, 2000)])
            pooled_ks = hml.kolmogorov_distance(pooled, table)
            ok &= pooled_ks < 0.08
            medians = []
            for n in (500, 1000, 2000):
                per_trial = [hml.kolmogorov_distance(sv, table)
                             for sv in pooled_singular[(z, n)]]
                medians.append(float(np.median(per_trial)))
            ok &= medians[0] > medians[1] > medians[2]
            details.append(
                f"z={z} {method}: pooled {pooled_ks:.4f}, medians "
                f"{medians[0]:.3f}>{medians[1]:.3f}>{medians[2]:.3f}"
            )
    report(5, ok, "; ".join(details) + f"; {time.monotonic() - t0:.0f}s")


def test_criterion_6_cross_method_agreement(limit_estimates):
    ok = True
    details = []
    for alpha in (0.2, 0.5, 0.9):
        a = limit_estimates[(alpha, 0.0, "pwit")]
        b = limit_estimates[(alpha, 0.0, "rde")]
        d = float(np.abs(a.cdf() - b.cdf()).max())
        ok &= d < 0.05
        details.append(f"alpha={alpha}: KS {d:.4f}")
    report(6, ok, "; ".join(details))


def _isotropy_trial(seed):
    from heavy_markov_lab.lab import blas_single_thread

    with blas_single_thread():
        s = hml.generate(2000, hml.TailLaw(alpha=0.5), seed)
        spec = hml.eigenvalues(s.M)
    stat = hml.isotropy_stat(spec)
    crit = ks_critical_value(isotropy_effective_count(spec), level=0.01)
    moduli = np.abs(spec.values)
    return stat < crit, float(np.mean((moduli >= 0.05) & (moduli <= 0.95)))


def test_criterion_7_isotropic_nondegenerate(limit_estimates):
    seeds = [derive_seed(77, ["iso", t]) for t in range(100)]
    results = _run_pool(_isotropy_trial, seeds, 2)
    passes = sum(1 for r in results if r[0])
    mid_mass = float(np.mean([r[1] for r in results]))
    m2 = {m: limit_estimates[(0.5, 0.0, m)].second_moment
          for m in ("pwit", "rde")}
    ok = (passes >= 95 and mid_mass > 0.5
          and all(np.sqrt(v) < 1.0 for v in m2.values()))
    report(7, ok, f"angular test {passes}/100 at 1% level, mid-modulus mass "
           f"{mid_mass:.3f}, sqrt(m2) pwit {np.sqrt(m2['pwit']):.3f} "
           f"rde {np.sqrt(m2['rde']):.3f}")


def test_criterion_8_edge_radius_scan(tmp_path):
    t0 = time.monotonic()
    cfg = ExperimentConfig(seed=88, out=str(tmp_path), n=3000, trials=20,
                           grid=(0.1, 0.9, 9), workers=2)
    run("edge-scan", cfg)
    rows = (tmp_path / "edge_scan.csv").read_text().strip().splitlines()[1:]
    alphas, means, refs = [], [], []
    for r in rows:
        parts = r.split(",")
        alphas.append(float(parts[0]))
        means.append(float(parts[1]))
        refs.append(float(parts[3]))
    monotone = all(a > b for a, b in zip(means, means[1:]))
    # proximity to sqrt(1 - alpha) is reported, not asserted
    gaps = ", ".join(f"a={a:.1f}: {m:.3f} (ref {r:.3f})"
                     for a, m, r in zip(alphas, means, refs))
    report(8, monotone, f"mean edge radius decreasing: {monotone}; {gaps}; "
           f"{time.monotonic() - t0:.0f}s")


def test_criterion_9_determinism(tmp_path):
    base = dict(alpha=0.5, n=200, trials=4)
    m1 = run("spectrum", ExperimentConfig(seed=99, out=str(tmp_path / "serial"),
                                          workers=1, **base))
    m2 = run("spectrum", ExperimentConfig(seed=99, out=str(tmp_path / "parallel"),
                                          workers=2, **base))
    _, same = rerun(tmp_path / "serial" / "manifest.json",
                    out=tmp_path / "rerun")
    ok = m1.files == m2.files and same
    report(9, ok, f"serial==parallel digests: {m1.files == m2.files}; "
           f"manifest rerun identical: {same}")
