"""Experiment orchestration: configs, seeding, workers, persistence.

Every run is driven by an ``ExperimentConfig`` (seed mandatory, no
wall-clock defaults) and produces CSV data plus JSON metadata and a
``RunManifest``.  Per-trial randomness comes from ``derive_seed``, a
collision-resistant, order-sensitive hash of (master seed, labels), so
re-running a manifest -- serially or across any number of workers --
reproduces every output byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .heavy_tail import (
    TailLaw,
    q_constant,
    gamma_constant,
    sample_ppp,
    ppp_tail_mean,
    stable_variates,
)
from .ensemble import generate, kn_bound, shift_reference_matrix
from .spectra import singular_values, eigenvalues, edge_radius
from .pwit import expected_limit_measure, catalan
from .rde import stieltjes_density
from .unfolding import demo_matrix, unfold, network_weights, local_convergence_report


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


COMMANDS = (
    "spectrum", "singular", "pwit-measure", "rde-measure", "unfold-demo",
    "local-convergence", "edge-scan", "oracle-suite",
)


def derive_seed(master: int, labels) -> int:
    """Derive a 64-bit stream seed from a master seed and a label path.

    Order-sensitive and collision-resistant (blake2b over length-prefixed
    label encodings).  Stable across platforms and versions: the encoding
    below is frozen.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master).to_bytes(16, "little", signed=True))
    for label in labels:
        data = str(label).encode("utf-8")
        kind = b"i" if isinstance(label, (int, np.integer)) else b"s"
        h.update(kind + len(data).to_bytes(4, "little") + data)
    return int.from_bytes(h.digest(), "little")


def default_workers() -> int:
    env = os.environ.get("HML_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"HML_THREADS must be an integer, got {env!r}")
    return min(os.cpu_count() or 1, 4)


@dataclass
class ExperimentConfig:
    """Command parameters; unused fields stay None and are not echoed."""

    seed: int
    out: str
    alpha: Optional[float] = None
    n: Optional[int] = None
    n_list: Optional[list] = None
    z: complex = 0.0
    trials: int = 1
    b: int = 100
    h: int = 6
    pool_size: int = 400
    eta_eps: float = 0.05
    grid: Optional[tuple] = None  # (min, max, count)
    fmt: str = "csv"
    which: str = "B_to_hatT"
    workers: Optional[int] = None

    def validate(self, command: str) -> None:
        if self.seed is None:
            raise ConfigError("seed is mandatory")
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        needs_alpha = command not in ("unfold-demo", "oracle-suite", "edge-scan")
        if needs_alpha:
            if self.alpha is None:
                raise ConfigError(f"{command} requires --alpha")
            if not 0.0 < self.alpha < 1.0:
                raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if command in ("spectrum", "singular", "edge-scan"):
            if self.n is None or self.n < 2:
                raise ConfigError(f"{command} requires --n >= 2")
        if command == "local-convergence" and not self.n_list:
            raise ConfigError("local-convergence requires --n-list")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.eta_eps <= 0.0:
            raise ConfigError("eta-eps must be positive")
        if self.grid is not None:
            lo, hi, count = self.grid
            if not (hi > lo and int(count) >= 2):
                raise ConfigError("grid must be MIN,MAX,COUNT with MAX>MIN, COUNT>=2")

    def grid_array(self, default=(0.0, 6.0, 400)) -> np.ndarray:
        lo, hi, count = self.grid if self.grid is not None else default
        return np.linspace(float(lo), float(hi), int(count))

    def echo(self) -> dict:
        d = asdict(self)
        d["z"] = [complex(self.z).real, complex(self.z).imag]
        return {k: v for k, v in d.items() if v is not None}


@dataclass
class RunManifest:
    command: str
    config: dict
    code_version: str
    trial_seeds: list
    files: dict  # name -> sha256
    wall_time_s: float

    def write(self, path: Path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_table(path: Path, header: list, rows: list, fmt: str) -> None:
    """Deterministic table writer; shortest round-trip float formatting."""

    def cell(v):
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return str(v)

    if fmt == "json":
        payload = [dict(zip(header, [cell(v) for v in row])) for row in rows]
        with open(path.with_suffix(".json"), "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")


def _write_meta(path: Path, record: dict) -> None:
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Trial workers (top level: picklable)
# ---------------------------------------------------------------------------

def blas_single_thread():
    """Context pinning BLAS to one thread inside trial computations.

    Pinning is unconditional: threaded LAPACK kernels reorder reductions,
    so the same trial could otherwise produce different low-order bits
    depending on the worker count, breaking byte-identical reruns.  The
    nonsymmetric eigensolver also gains nothing from threading at these
    sizes, so process-level parallelism with pinned BLAS is faster too.
    """
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=1)
    except ImportError:
        import contextlib

        return contextlib.nullcontext()


def _spectrum_trial(args):
    alpha, n, seed = args
    with blas_single_thread():
        sample = generate(n, TailLaw(alpha=alpha), seed)
        return eigenvalues(sample.M, alpha=alpha, seed=seed).values


def _singular_trial(args):
    alpha, n, z, seed = args
    with blas_single_thread():
        sample = generate(n, TailLaw(alpha=alpha), seed)
        return singular_values(sample.M, z, alpha=alpha, seed=seed).values


def _edge_trial(args):
    # dense eigensolve: the bulk edge sits close to the Perron value, which
    # starves iterative top-k solvers on matrices this dense
    alpha, n, seed = args
    with blas_single_thread():
        sample = generate(n, TailLaw(alpha=alpha), seed)
        return edge_radius(eigenvalues(sample.M, alpha=alpha, seed=seed))


def _run_pool(fn, argses, workers: int):
    if workers > 1 and len(argses) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, argses))
    return [fn(a) for a in argses]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def run(command: str, config: ExperimentConfig) -> RunManifest:
    """Execute one command; write data, metadata and the manifest."""
    config.validate(command)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    workers = config.workers if config.workers is not None else default_workers()
    t0 = time.monotonic()
    handler = _HANDLERS[command]
    files, trial_seeds = handler(config, outdir, workers)
    manifest = RunManifest(
        command=command,
        config=config.echo(),
        code_version=__version__,
        trial_seeds=trial_seeds,
        files={name: _sha256(outdir / name) for name in files},
        wall_time_s=time.monotonic() - t0,
    )
    manifest.write(outdir / "manifest.json")
    return manifest


def rerun(manifest_path, out=None) -> tuple[RunManifest, bool]:
    """Re-execute a manifest's run and report digest equality."""
    with open(manifest_path) as fh:
        record = json.load(fh)
    cfg_dict = dict(record["config"])
    zr, zi = cfg_dict.pop("z", [0.0, 0.0])
    cfg_dict["z"] = complex(zr, zi)
    if "grid" in cfg_dict and cfg_dict["grid"] is not None:
        cfg_dict["grid"] = tuple(cfg_dict["grid"])
    if "n_list" in cfg_dict and cfg_dict["n_list"] is not None:
        cfg_dict["n_list"] = list(cfg_dict["n_list"])
    if out is not None:
        cfg_dict["out"] = str(out)
    config = ExperimentConfig(**cfg_dict)
    manifest = run(record["command"], config)
    same = manifest.files == record["files"]
    return manifest, same


def _cmd_spectrum(config: ExperimentConfig, outdir: Path, workers: int):
    seeds = [derive_seed(config.seed, ["trial", t]) for t in range(config.trials)]
    vals = _run_pool(
        _spectrum_trial, [(config.alpha, config.n, s) for s in seeds], workers
    )
    rows = []
    for t, ev in enumerate(vals):
        rows.extend((t, v.real, v.imag) for v in ev)
    _write_table(outdir / "eigenvalues.csv", ["trial", "re", "im"], rows, config.fmt)
    moduli = np.concatenate([np.abs(ev) for ev in vals])
    lo, hi, nbins = config.grid if config.grid is not None else (0.0, 1.05, 60)
    counts, edges = np.histogram(moduli, bins=int(nbins), range=(lo, hi))
    hist_rows = [(edges[i], edges[i + 1], int(counts[i])) for i in range(len(counts))]
    _write_table(outdir / "modulus_hist.csv",
                 ["bin_left", "bin_right", "count"], hist_rows, config.fmt)
    _write_meta(outdir / "spectrum_meta.json", {
        "kind": "eigen", "alpha": config.alpha, "n": config.n,
        "trials": config.trials, "seed": config.seed,
    })
    names = ["eigenvalues.csv", "modulus_hist.csv", "spectrum_meta.json"]
    if config.fmt == "json":
        names = ["eigenvalues.json", "modulus_hist.json", "spectrum_meta.json"]
    return names, seeds


def _cmd_singular(config: ExperimentConfig, outdir: Path, workers: int):
    seeds = [derive_seed(config.seed, ["trial", t]) for t in range(config.trials)]
    vals = _run_pool(
        _singular_trial,
        [(config.alpha, config.n, config.z, s) for s in seeds],
        workers,
    )
    rows = []
    for t, sv in enumerate(vals):
        rows.extend((t, s) for s in sv)
    _write_table(outdir / "singular_values.csv", ["trial", "s"], rows, config.fmt)
    _write_meta(outdir / "singular_meta.json", {
        "kind": "singular", "alpha": config.alpha, "n": config.n,
        "z": [complex(config.z).real, complex(config.z).imag],
        "trials": config.trials, "seed": config.seed,
    })
    names = ["singular_values.csv" if config.fmt == "csv" else "singular_values.json",
             "singular_meta.json"]
    return names, seeds


def _cmd_pwit_measure(config: ExperimentConfig, outdir: Path, workers: int):
    grid = config.grid_array()
    est = expected_limit_measure(
        config.alpha, config.z, trials=config.trials, b=config.b, h=config.h,
        grid=grid, eta_eps=config.eta_eps, seed=config.seed, workers=workers,
    )
    return _write_measure(est, config, outdir, "pwit"), [config.seed]


def _cmd_rde_measure(config: ExperimentConfig, outdir: Path, workers: int):
    grid = config.grid_array()
    est = stieltjes_density(
        config.alpha, config.z, grid=grid, eta_eps=config.eta_eps,
        pool_size=config.pool_size, seed=config.seed, workers=workers,
    )
    return _write_measure(est, config, outdir, "rde"), [config.seed]


def _write_measure(est, config: ExperimentConfig, outdir: Path, method: str):
    rows = list(zip(est.grid, est.density))
    name = f"{method}_measure.csv"
    _write_table(outdir / name, ["x", "density"], rows, config.fmt)
    _write_meta(outdir / f"{method}_measure_meta.json", {
        "method": method, "alpha": est.alpha,
        "z": [est.z.real, est.z.imag],
        "eta_eps": est.eta_eps, "trials": est.trials,
        "second_moment": est.second_moment, "seed": config.seed,
        "params": est.params,
    })
    if config.fmt == "json":
        name = f"{method}_measure.json"
    return [name, f"{method}_measure_meta.json"]


def _label(vertex: tuple) -> str:
    return "root" if vertex == () else ".".join(str(k) for k in vertex)


def _cmd_unfold_demo(config: ExperimentConfig, outdir: Path, workers: int):
    X = demo_matrix()
    i0 = 2  # third row, matching the published walk-through
    plus = unfold(X, i0, 2, 2, "plus")
    minus = unfold(X, i0, 2, 2, "minus")
    order = sorted(plus.phi, key=lambda k: (len(k), k))
    # 1-based indices in the emitted table
    rows = [(_label(k), plus.phi[k] + 1, minus.phi[k] + 1) for k in order]
    _write_table(outdir / "unfold_table.csv",
                 ["vertex", "phi_plus", "phi_minus"], rows, config.fmt)
    net = network_weights(X, plus, scaling="none")
    net_rows = [
        (_label(u), _label(v), w, "tree" if (u, v) in net.tree_edges() else "bended")
        for (u, v), w in sorted(net.edges.items(), key=lambda kv: (len(kv[0][0]), kv[0]))
    ]
    _write_table(outdir / "unfold_network.csv",
                 ["u", "v", "weight", "edge_type"], net_rows, config.fmt)
    _write_meta(outdir / "unfold_meta.json", {
        "n": 5, "i0_one_based": i0 + 1, "b": 2, "h": 2, "seed": config.seed,
    })
    names = ["unfold_table.csv", "unfold_network.csv", "unfold_meta.json"]
    if config.fmt == "json":
        names = ["unfold_table.json", "unfold_network.json", "unfold_meta.json"]
    return names, [config.seed]


def _cmd_local_convergence(config: ExperimentConfig, outdir: Path, workers: int):
    rows_raw = local_convergence_report(
        config.alpha, config.n_list, config.b, config.h, config.trials,
        which=config.which, seed=config.seed,
    )
    rows = [(r["n"], r["statistic"], r["value"]) for r in rows_raw]
    _write_table(outdir / "local_convergence.csv",
                 ["n", "statistic", "value"], rows, config.fmt)
    _write_meta(outdir / "local_convergence_meta.json", {
        "alpha": config.alpha, "n_list": list(config.n_list),
        "b": config.b, "h": config.h, "trials": config.trials,
        "which": config.which, "seed": config.seed,
    })
    names = ["local_convergence.csv" if config.fmt == "csv" else "local_convergence.json",
             "local_convergence_meta.json"]
    return names, [config.seed]


def _cmd_edge_scan(config: ExperimentConfig, outdir: Path, workers: int):
    lo, hi, count = config.grid if config.grid is not None else (0.1, 0.9, 9)
    alphas = np.linspace(float(lo), float(hi), int(count))
    rows = []
    seeds = []
    for ai, alpha in enumerate(alphas):
        trial_seeds = [derive_seed(config.seed, ["alpha", ai, "trial", t])
                       for t in range(config.trials)]
        seeds.extend(trial_seeds)
        radii = _run_pool(
            _edge_trial, [(float(alpha), config.n, s) for s in trial_seeds], workers
        )
        rows.append((
            float(alpha), float(np.mean(radii)), float(np.median(radii)),
            float(np.sqrt(1.0 - alpha)), config.trials,
        ))
    _write_table(outdir / "edge_scan.csv",
                 ["alpha", "mean_edge_radius", "median_edge_radius",
                  "reference_sqrt_one_minus_alpha", "trials"], rows, config.fmt)
    _write_meta(outdir / "edge_scan_meta.json", {
        "n": config.n, "trials": config.trials, "seed": config.seed,
        "alphas": [float(a) for a in alphas],
    })
    names = ["edge_scan.csv" if config.fmt == "csv" else "edge_scan.json",
             "edge_scan_meta.json"]
    return names, seeds


def _cmd_oracle_suite(config: ExperimentConfig, outdir: Path, workers: int):
    """Closed-form checks with explicit references; all must pass."""
    import scipy.linalg as sla

    rng = np.random.default_rng(derive_seed(config.seed, ["oracle"]))
    rows = []

    def check(name, value, reference, tol):
        err = abs(value - reference)
        rows.append((name, value, reference, err, "pass" if err <= tol else "FAIL"))

    check("gamma_constant_0.5", gamma_constant(0.5), 2.0 / np.pi, 1e-12)
    check("q_constant_0.5", q_constant(0.5), (np.pi / 2.0) ** 2, 1e-12)
    for alpha in (0.2, 0.5, 0.9):
        check(f"gamma_q_identity_{alpha}",
              gamma_constant(alpha) * q_constant(alpha) ** alpha, 1.0, 1e-12)
    # K_n formula vs direct SVD of the rank-one shift matrix
    worst = 0.0
    for n in (2, 5, 20, 100):
        for z in (0.5, -0.3 + 0.4j, 2.0, 0.9j):
            direct = 1.0 / sla.svdvals(shift_reference_matrix(z, n))[-1]
            worst = max(worst, abs(direct - kn_bound(z, n)))
    check("kn_formula_vs_svd_grid", worst, 0.0, 1e-10)
    # stable Laplace transform at alpha = 0.5, theta = 1
    s = stable_variates(0.5, 10 ** 6, rng)
    lt = np.exp(-s)
    se = lt.std(ddof=1) / np.sqrt(len(lt))
    check("stable_laplace_0.5", float(lt.mean()), float(np.exp(-np.sqrt(np.pi))),
          3.0 * se)
    # mean total of the omega sequence equals 1 (tail compensated by
    # omega ~ xi/q below the truncation point)
    q = q_constant(0.5)
    totals = np.empty(4000)
    for i in range(len(totals)):
        ppp = sample_ppp(0.5, 2000, rng)
        totals[i] = (ppp.xi / (ppp.xi + q)).sum() \
            + ppp_tail_mean(0.5, ppp.arrival_times[-1]) / q
    check("omega_sum_mean", float(totals.mean()), 1.0,
          3.0 * float(totals.std(ddof=1) / np.sqrt(len(totals))))
    check("catalan_2", float(catalan(2)), 2.0, 0.0)
    check("catalan_3", float(catalan(3)), 5.0, 0.0)
    _write_table(outdir / "oracle_suite.csv",
                 ["check", "value", "reference", "abs_error", "status"],
                 rows, config.fmt)
    failures = [r for r in rows if r[4] == "FAIL"]
    _write_meta(outdir / "oracle_suite_meta.json", {
        "seed": config.seed, "checks": len(rows), "failures": len(failures),
    })
    names = ["oracle_suite.csv" if config.fmt == "csv" else "oracle_suite.json",
             "oracle_suite_meta.json"]
    return names, [config.seed]


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "singular": _cmd_singular,
    "pwit-measure": _cmd_pwit_measure,
    "rde-measure": _cmd_rde_measure,
    "unfold-demo": _cmd_unfold_demo,
    "local-convergence": _cmd_local_convergence,
    "edge-scan": _cmd_edge_scan,
    "oracle-suite": _cmd_oracle_suite,
}
