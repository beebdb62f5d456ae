"""Construction of the random Markov matrix ensemble.

A sample is built from ``n**2`` i.i.d. heavy-tailed weights ``X[i, j]``:
each row is divided by its row sum ``rho[i]``, giving a row-stochastic
matrix ``M``.  A row summing to zero (impossible under a continuous law,
but allowed for injected fixtures) is replaced by the corresponding
identity row.

The module also provides the Hermitian bipartization of ``M - z`` whose
spectrum is the symmetrized set of singular values, the closed-form
bound ``kn_bound`` on the inverse smallest singular value of the rank-one
shift matrix ``I - z * ones @ e1^T``, and a CSV/JSON dump format for
reproducibility.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .heavy_tail import TailLaw, sample_heavy


@dataclass(frozen=True)
class EnsembleSample:
    """One realization of the ensemble: raw weights, row sums, Markov matrix."""

    n: int
    X: np.ndarray
    rho: np.ndarray
    M: np.ndarray
    law: TailLaw
    seed: object


def make_markov(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalize a non-negative matrix, returning ``(rho, M)``.

    Zero rows map to identity rows so that ``M`` is always row-stochastic.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    if np.any(X < 0.0):
        raise ValueError("weights must be non-negative")
    rho = X.sum(axis=1)
    M = np.zeros_like(X)
    live = rho > 0.0
    M[live] = X[live] / rho[live, None]
    for i in np.flatnonzero(~live):
        M[i, i] = 1.0
    return rho, M


def generate(n: int, law: TailLaw, seed) -> EnsembleSample:
    """Generate one ``n x n`` sample from ``law``.

    ``seed`` may be anything accepted by ``numpy.random.default_rng``; it
    is stored verbatim for provenance.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    rng = np.random.default_rng(seed)
    X = sample_heavy(law, n * n, rng).reshape(n, n)
    rho, M = make_markov(X)
    return EnsembleSample(n=n, X=X, rho=rho, M=M, law=law, seed=seed)


def scale_a_n(n: int, alpha: float, c: float = 1.0) -> float:
    """The natural scale ``a_n = (c*n)**(1/alpha)`` of row maxima and sums."""
    return (c * n) ** (1.0 / alpha)


# ---------------------------------------------------------------------------
# Bipartization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BipartizedMatrix:
    """Hermitian ``2n x 2n`` matrix with off-diagonal blocks ``M - z`` and its
    conjugate transpose; its eigenvalues are plus/minus the singular values
    of ``M - z``."""

    z: complex
    H: np.ndarray


def bipartize(M: np.ndarray, z: complex = 0.0) -> BipartizedMatrix:
    """Build the Hermitian bipartization of ``M - z``."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    z = complex(z)
    shifted = M.astype(complex) - z * np.eye(n)
    H = np.zeros((2 * n, 2 * n), dtype=complex)
    H[:n, n:] = shifted
    H[n:, :n] = shifted.conj().T
    return BipartizedMatrix(z=z, H=H)


# ---------------------------------------------------------------------------
# Smallest-singular-value machinery for the rank-one shift
# ---------------------------------------------------------------------------

def shift_reference_matrix(z: complex, n: int) -> np.ndarray:
    """The ``n x n`` matrix ``I - z * P`` with ``P[i, 0] = 1``, else 0.

    Its inverse smallest singular value is the constant returned by
    ``kn_bound`` and controls the small-ball estimate for the smallest
    singular value of ``M - z``.
    """
    A = np.eye(n, dtype=complex)
    A[:, 0] -= z
    return A


def kn_bound(z: complex, n: int) -> float:
    """Closed form for ``1 / s_min(shift_reference_matrix(z, n))``.

    Singular at ``z == 1`` (the matrix loses rank there).
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    z = complex(z)
    if z == 1.0:
        raise ValueError("shift z = 1 is singular: the reference matrix is not invertible")
    az2 = abs(z) ** 2
    b2 = abs(1.0 - z) ** 2
    t = 1.0 + (n - 1) * az2 + b2
    kn2 = (t + np.sqrt(t * t - 4.0 * b2)) / (2.0 * b2)
    return float(np.sqrt(kn2))


# ---------------------------------------------------------------------------
# Dump format: CSV matrices plus a JSON sidecar
# ---------------------------------------------------------------------------

def dump_sample(sample: EnsembleSample, directory, stem: str = "sample") -> dict:
    """Write ``X`` and ``M`` as full-precision CSV plus a JSON sidecar.

    Returns the sidecar record.  ``%.17g`` formatting round-trips float64
    exactly, so ``load_sample`` reproduces the arrays bit for bit.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.savetxt(directory / f"{stem}_X.csv", sample.X, fmt="%.17g", delimiter=",")
    np.savetxt(directory / f"{stem}_M.csv", sample.M, fmt="%.17g", delimiter=",")
    sidecar = {
        "n": sample.n,
        "alpha": sample.law.alpha,
        "c": sample.law.c,
        "recipe": sample.law.recipe,
        "seed": sample.seed,
    }
    with open(directory / f"{stem}.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


# ---------------------------------------------------------------------------
# Desk-scale limit-law statistics (row/column marginals without the full
# matrix, so 1e4-trial comparisons stay cheap)
# ---------------------------------------------------------------------------

def row_limit_samples(
    alpha: float, n: int, trials: int, rng: np.random.Generator, k: int = 5
) -> dict:
    """Top-k ranked row statistics over many fresh rows.

    Returns ``scaled_x`` (ranked ``X[0, :] / a_n``, shape (trials, k)) and
    ``markov_row`` (ranked ``M[0, :]``, same shape).  Only a single row is
    generated per trial; its law is exactly that of a row of the full
    ensemble.
    """
    a_n = scale_a_n(n, alpha)
    scaled = np.empty((trials, k))
    markov = np.empty((trials, k))
    chunk = max(1, min(trials, (1 << 23) // n))
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        rows = (1.0 - rng.random((m, n))) ** (-1.0 / alpha)
        part = -np.partition(-rows, k - 1, axis=1)[:, :k]
        part = -np.sort(-part, axis=1)
        scaled[done:done + m] = part / a_n
        markov[done:done + m] = part / rows.sum(axis=1)[:, None]
        done += m
    return {"scaled_x": scaled, "markov_row": markov}


def column_top_samples(
    alpha: float,
    n: int,
    trials: int,
    rng: np.random.Generator,
    candidates: int = 64,
) -> np.ndarray:
    """Largest entry of a normalized column, ``max_j X[j, 0] / rho_j``.

    Only the rows holding the ``candidates`` largest raw column entries
    can realistically win: every row sum is at least ``n - 1`` while the
    excluded entries sit far below the candidates on the ``a_n`` scale,
    so the error probability is negligible at these sizes.  Only the
    candidate rows' sums are generated.
    """
    out = np.empty(trials)
    inv = -1.0 / alpha
    for t in range(trials):
        col = (1.0 - rng.random(n)) ** inv
        top = np.argpartition(-col, candidates - 1)[:candidates]
        rest = (1.0 - rng.random((candidates, n - 1))) ** inv
        rho = col[top] + rest.sum(axis=1)
        out[t] = (col[top] / rho).max()
    return out


def entry_vs_rowsum_scan(
    alpha: float, n: int, t: float, trials: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Rao-Blackwellized estimate of ``n * P(X[0,0] > t/(1+t) * rho_0)``.

    The event equals ``X[0,0] > t * rho_hat`` with ``rho_hat`` the row sum
    without the diagonal; conditioning on ``rho_hat`` gives the exact
    probability ``min(1, (t * rho_hat)**-alpha)`` for the unit-tail law.
    Returns (estimate, standard error).
    """
    vals = np.empty(trials)
    for i in range(trials):
        rho_hat = ((1.0 - rng.random(n - 1)) ** (-1.0 / alpha)).sum()
        vals[i] = min(1.0, (t * rho_hat) ** (-alpha))
    est = n * vals.mean()
    se = n * vals.std(ddof=1) / np.sqrt(trials)
    return float(est), float(se)


def load_sample(directory, stem: str = "sample") -> EnsembleSample:
    """Read back a sample written by ``dump_sample``."""
    directory = Path(directory)
    with open(directory / f"{stem}.json") as fh:
        sidecar = json.load(fh)
    X = np.loadtxt(directory / f"{stem}_X.csv", delimiter=",", ndmin=2)
    M = np.loadtxt(directory / f"{stem}_M.csv", delimiter=",", ndmin=2)
    rho = X.sum(axis=1)
    law = TailLaw(alpha=sidecar["alpha"], c=sidecar["c"], recipe=sidecar["recipe"])
    return EnsembleSample(
        n=sidecar["n"], X=X, rho=rho, M=M, law=law, seed=sidecar["seed"]
    )
