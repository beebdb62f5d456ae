"""Spectral computations and empirical-measure statistics.

The two empirical objects of interest for an ``n x n`` Markov matrix are

* the singular-value measure of ``M - z`` (``kind="singular"``), and
* the complex eigenvalue measure of ``M`` (``kind="eigen"``),

both stored as flat value arrays with their metadata.  On top of these the
module provides moments, Kolmogorov distances, the log potential
``-(1/n) * sum log s_i`` used by hermitization, an angular-uniformity
statistic for isotropy checks, and the second-largest modulus ("edge
radius") of the spectrum.

Decompositions go through a swappable backend so that the numerical
engine stays orthogonal to the statistics; the default is dense LAPACK
via numpy/scipy.  ``top_moduli`` offers an iterative (ARPACK) shortcut
for the leading moduli of large matrices, validated against the dense
path in the test suite.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .ensemble import bipartize


class NumericalFaultError(RuntimeError):
    """A decomposition failed to converge or produced invalid output."""


class SpectrumAtShiftError(ValueError):
    """The shift ``z`` is (numerically) part of the spectrum."""


class DenseLapackBackend:
    """Default decomposition backend: dense LAPACK routines.

    Swap by passing any object with the same three methods (e.g. a GPU
    or iterative implementation) to the functions below.
    """

    @staticmethod
    def svdvals(A: np.ndarray) -> np.ndarray:
        return sla.svdvals(A)

    @staticmethod
    def eigvals(A: np.ndarray) -> np.ndarray:
        return np.linalg.eigvals(A)

    @staticmethod
    def eigvalsh(A: np.ndarray) -> np.ndarray:
        return np.linalg.eigvalsh(A)


DEFAULT_BACKEND = DenseLapackBackend()


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """A finite multiset of singular values or complex eigenvalues."""

    kind: str  # "singular" or "eigen"
    values: np.ndarray
    n: int
    z: complex = 0.0
    alpha: Optional[float] = None
    seed: object = None

    def __post_init__(self):
        if self.kind not in ("singular", "eigen"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")

    def ranked(self) -> np.ndarray:
        """Values sorted descending (by modulus for eigen kind)."""
        if self.kind == "singular":
            return np.sort(self.values)[::-1]
        return self.values[np.argsort(-np.abs(self.values))]

    def real_magnitudes(self) -> np.ndarray:
        """Singular values, or eigenvalue moduli for the eigen kind."""
        if self.kind == "singular":
            return np.asarray(self.values, dtype=float)
        return np.abs(self.values)


def singular_values(
    M: np.ndarray,
    z: complex = 0.0,
    method: str = "svd",
    alpha: Optional[float] = None,
    seed=None,
    backend=DEFAULT_BACKEND,
) -> EmpiricalSpectrum:
    """Singular values of ``M - z*I``.

    ``method="svd"`` decomposes the shifted ``n x n`` matrix directly;
    ``method="bipartized"`` takes the non-negative eigenvalues of the
    Hermitian ``2n x 2n`` bipartization.  The two agree to 1e-9 and are
    cross-checked in the tests.
    """
    M = np.asarray(M)
    n = M.shape[0]
    z = complex(z)
    if method == "svd":
        shifted = M - z * np.eye(n) if z != 0.0 else M
        vals = backend.svdvals(shifted)
    elif method == "bipartized":
        ev = backend.eigvalsh(bipartize(M, z).H)
        vals = np.sort(ev[ev >= 0.0])[::-1]
        # numerical zeros may land on either side; keep exactly n values
        if len(vals) != n:
            vals = np.sort(np.abs(ev))[::-1][: 2 * n : 2]
    else:
        raise ValueError(f"unknown method {method!r}")
    return EmpiricalSpectrum(
        kind="singular", values=np.asarray(vals, dtype=float), n=n, z=z,
        alpha=alpha, seed=seed,
    )


def eigenvalues(
    M: np.ndarray, alpha: Optional[float] = None, seed=None, backend=DEFAULT_BACKEND
) -> EmpiricalSpectrum:
    """All complex eigenvalues of a real square matrix.

    On convergence failure the offending matrix is dumped to a temp file
    and a ``NumericalFaultError`` pointing at it is raised.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    try:
        vals = backend.eigvals(M)
    except np.linalg.LinAlgError as exc:
        with tempfile.NamedTemporaryFile(
            mode="w", suffix=".csv", prefix="eig_fail_", delete=False
        ) as fh:
            np.savetxt(fh, M, fmt="%.17g", delimiter=",")
            dump = fh.name
        raise NumericalFaultError(
            f"eigendecomposition failed to converge; matrix dumped to {dump}"
        ) from exc
    return EmpiricalSpectrum(
        kind="eigen", values=np.asarray(vals, dtype=complex), n=n,
        alpha=alpha, seed=seed,
    )


def empirical_moments(spec: EmpiricalSpectrum, orders: Sequence[int]) -> list[float]:
    """Moments ``(1/n) * sum |value|**k`` for each order ``k``."""
    mags = spec.real_magnitudes()
    out = []
    for k in orders:
        if k < 1:
            raise ValueError("moment orders must be >= 1")
        out.append(float(np.mean(mags ** k)))
    return out


# ---------------------------------------------------------------------------
# Kolmogorov distances
# ---------------------------------------------------------------------------

def _as_sample(a) -> np.ndarray:
    if isinstance(a, EmpiricalSpectrum):
        return np.sort(a.real_magnitudes())
    return np.sort(np.asarray(a, dtype=float))


def kolmogorov_distance(a, b) -> float:
    """Sup distance between two empirical CDFs, or one CDF and a table.

    ``a`` is an ``EmpiricalSpectrum`` (or plain real sample).  ``b`` may be
    the same, a callable CDF, or a tabulated CDF ``(grid, values)`` in which
    case the sup runs over the grid points.
    """
    x = _as_sample(a)
    if len(x) == 0:
        raise ValueError("empty sample")
    nx = len(x)
    if callable(b):
        f = np.asarray(b(x), dtype=float)
        hi = np.arange(1, nx + 1) / nx - f
        lo = f - np.arange(0, nx) / nx
        return float(max(hi.max(), lo.max(), 0.0))
    if isinstance(b, tuple) and len(b) == 2 and not isinstance(b[0], EmpiricalSpectrum):
        grid, cdf = (np.asarray(v, dtype=float) for v in b)
        emp = np.searchsorted(x, grid, side="right") / nx
        return float(np.abs(emp - cdf).max())
    y = _as_sample(b)
    if len(y) == 0:
        raise ValueError("empty sample")
    both = np.concatenate([x, y])
    cx = np.searchsorted(x, both, side="right") / nx
    cy = np.searchsorted(y, both, side="right") / len(y)
    return float(np.abs(cx - cy).max())


# ---------------------------------------------------------------------------
# Log potential
# ---------------------------------------------------------------------------

def log_potential(spec: EmpiricalSpectrum, floor: float = 1e-9) -> float:
    """``-(1/n) * sum log s_i`` for a singular spectrum at shift ``z``.

    Equals ``-(1/n) * log |det(M - z)|``.  Raises ``SpectrumAtShiftError``
    instead of clamping when a singular value sits below ``floor``; silent
    clamping would corrupt integrability experiments near the spectrum.
    """
    if spec.kind != "singular":
        raise ValueError("log potential is defined on singular spectra")
    s = np.asarray(spec.values, dtype=float)
    if np.any(s < floor):
        raise SpectrumAtShiftError(
            f"shift z={spec.z} lies within {floor} of the spectrum "
            f"(min singular value {s.min():.3e})"
        )
    return float(-np.mean(np.log(s)))


# ---------------------------------------------------------------------------
# Isotropy and edge statistics
# ---------------------------------------------------------------------------

def _drop_perron(values: np.ndarray) -> np.ndarray:
    keep = np.ones(len(values), dtype=bool)
    keep[np.argmin(np.abs(values - 1.0))] = False
    return values[keep]


def folded_angles(spec: EmpiricalSpectrum, exclude_perron: bool = True) -> np.ndarray:
    """Eigenvalue arguments folded to [0, pi] (conjugate pairs coincide)."""
    if spec.kind != "eigen":
        raise ValueError("angles are defined on eigen spectra")
    vals = np.asarray(spec.values, dtype=complex)
    if exclude_perron:
        vals = _drop_perron(vals)
    return np.abs(np.angle(vals))


def isotropy_stat(spec: EmpiricalSpectrum, exclude_perron: bool = True) -> float:
    """KS statistic of folded eigenvalue angles against uniform on [0, pi].

    An isotropic limit law makes the folded angles uniform; values near 1
    indicate a degenerate (e.g. purely real) angular distribution.
    """
    theta = folded_angles(spec, exclude_perron)
    if len(theta) < 10:
        raise ValueError("need at least 10 eigenvalues after exclusion")
    return kolmogorov_distance(theta, lambda t: np.clip(t / np.pi, 0.0, 1.0))


def isotropy_effective_count(
    spec: EmpiricalSpectrum, exclude_perron: bool = True, imag_tol: float = 1e-9
) -> int:
    """Number of independent folded angles: real eigenvalues count once,
    conjugate pairs once."""
    vals = np.asarray(spec.values, dtype=complex)
    if exclude_perron:
        vals = _drop_perron(vals)
    n_real = int(np.sum(np.abs(vals.imag) <= imag_tol))
    return n_real + (len(vals) - n_real) // 2


def ks_critical_value(m: int, level: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value ``c(level) / sqrt(m)``.

    ``c`` solves ``2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 c^2) = level``;
    ``c(0.01) = 1.6276``, ``c(0.05) = 1.3581``.
    """
    from scipy.optimize import brentq

    def tail(c):
        k = np.arange(1, 101)
        return 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k**2 * c**2))

    c = brentq(lambda v: tail(v) - level, 0.3, 3.0)
    return float(c / np.sqrt(m))


def edge_radius(spec: EmpiricalSpectrum) -> float:
    """Second-largest eigenvalue modulus (largest after removing the
    eigenvalue closest to 1)."""
    if spec.kind != "eigen":
        raise ValueError("edge radius is defined on eigen spectra")
    if len(spec.values) < 2:
        raise ValueError("need at least 2 eigenvalues")
    return float(np.abs(_drop_perron(np.asarray(spec.values, dtype=complex))).max())


def top_moduli(M: np.ndarray, k: int = 8, backend=DEFAULT_BACKEND) -> np.ndarray:
    """Leading ``k`` eigenvalues by modulus, descending.

    Uses ARPACK on the dense operator (a few matvec sweeps instead of a
    full O(n^3) decomposition), falling back to the dense backend if the
    iteration stalls.  Intended for edge statistics of large matrices.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if k >= n - 1:
        vals = backend.eigvals(M)
    else:
        try:
            vals = spla.eigs(
                M, k=k, which="LM", return_eigenvectors=False,
                maxiter=5000, tol=1e-10,
            )
        except (spla.ArpackNoConvergence, RuntimeError):
            vals = backend.eigvals(M)
    return vals[np.argsort(-np.abs(vals))][:k]
