"""Samplers for the heavy-tailed primitives used throughout the lab.

Everything here lives in the infinite-mean regime: a tail index
``alpha`` in (0, 1) and weights whose tail satisfies
``t**alpha * P(x >= t) -> c``.  The module provides

* ``TailLaw`` / ``sample_heavy`` -- i.i.d. matrix entries,
* ``sample_ppp`` -- the Poisson point process of intensity
  ``alpha * t**(-alpha-1)`` realised as inverse powers of unit-Poisson
  arrival times,
* ``sample_stable`` -- the one-sided alpha-stable sum
  ``S = sum_i xi_i`` with Laplace transform
  ``E[exp(-theta*S)] = exp(-Gamma(1-alpha) * theta**alpha)``,
* ``sample_pd`` -- the Poisson-Dirichlet vector ``xi / S``,
* ``sample_omega`` / ``sample_omega_hat`` -- the ranked column limits
  ``xi/(xi+q)`` and ``xi_i/(xi_i+S_i)``.

All samplers are pure functions of their parameters and a
``numpy.random.Generator``; identical generators give bit-identical
output.  Infinite series are truncated at ``N`` terms and the missing
tail is replaced by its conditional mean given the last arrival time,
which keeps the truncated stable sums on the exact Laplace transform
to well below Monte Carlo resolution for ``N >= 2000``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma as _gamma_fn

DEFAULT_SERIES_TERMS = 2000


def gamma_constant(alpha: float) -> float:
    """Return ``1 / (Gamma(1+alpha) * Gamma(1-alpha))``.

    This is the constant governing the rescaled tail of a single entry
    against its row sum, ``n * P(X > t/(1+t) * rho) -> gamma * t**-alpha``.
    """
    _check_alpha(alpha)
    return 1.0 / (_gamma_fn(1.0 + alpha) * _gamma_fn(1.0 - alpha))


def q_constant(alpha: float) -> float:
    """Return ``q = (Gamma(1+alpha) * Gamma(1-alpha))**(1/alpha)``.

    ``q`` is the scale at which ranked column entries of the normalized
    matrix converge to ``xi/(xi+q)``; equivalently ``gamma_constant(alpha)
    == q**-alpha``.
    """
    _check_alpha(alpha)
    return (_gamma_fn(1.0 + alpha) * _gamma_fn(1.0 - alpha)) ** (1.0 / alpha)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"tail index must lie in (0, 1), got {alpha}")


def inverse_power(u, alpha: float):
    """Map uniforms ``u`` in (0, 1] to ``u**(-1/alpha)``.

    The output has exact tail ``P(x >= t) = t**-alpha`` for ``t >= 1``.
    """
    _check_alpha(alpha)
    return np.asarray(u, dtype=float) ** (-1.0 / alpha)


@dataclass(frozen=True)
class TailLaw:
    """Parameters of a heavy-tailed entry distribution.

    ``recipe`` selects the sampler: ``"inverse_power"`` draws
    ``U**(-1/alpha)`` with ``U`` uniform on (0, 1], which has tail
    constant ``c = 1`` exactly; ``"custom"`` delegates to
    ``custom_sampler(rng, count)``, in which case ``c`` must be supplied
    by the caller.
    """

    alpha: float
    c: float = 1.0
    recipe: str = "inverse_power"
    custom_sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.c <= 0.0:
            raise ValueError(f"tail constant must be positive, got {self.c}")
        if self.recipe not in ("inverse_power", "custom"):
            raise ValueError(f"unknown recipe {self.recipe!r}")
        if self.recipe == "custom" and self.custom_sampler is None:
            raise ValueError("custom recipe requires a custom_sampler")


def sample_heavy(law: TailLaw, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. weights from ``law``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if law.recipe == "custom":
        out = np.asarray(law.custom_sampler(rng, count), dtype=float)
        if out.shape != (count,):
            raise ValueError("custom sampler returned wrong shape")
        return out
    # 1 - random() is uniform on (0, 1]; avoids u == 0 -> inf
    u = 1.0 - rng.random(count)
    return inverse_power(u, law.alpha)


# ---------------------------------------------------------------------------
# Poisson point process with intensity alpha * t**(-alpha-1)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PppSample:
    """First ``truncation`` ranked points of the power-law Poisson process.

    ``xi[i] = arrival_times[i]**(-1/alpha)`` where the arrival times are
    the (increasing) jump times of a unit-rate Poisson process, so ``xi``
    is strictly decreasing almost surely.
    """

    xi: np.ndarray
    arrival_times: np.ndarray
    alpha: float
    truncation: int


def sample_ppp(alpha: float, N: int, rng: np.random.Generator) -> PppSample:
    """Sample the ranked power-law Poisson process, truncated at ``N`` points."""
    _check_alpha(alpha)
    if N < 1:
        raise ValueError("truncation must be at least 1")
    arrivals = np.cumsum(rng.standard_exponential(N))
    xi = arrivals ** (-1.0 / alpha)
    return PppSample(xi=xi, arrival_times=arrivals, alpha=alpha, truncation=N)


def ppp_tail_mean(alpha: float, last_arrival) -> np.ndarray:
    """Conditional mean of ``sum_{i>N} xi_i`` given the N-th arrival time.

    Points beyond ``last_arrival`` form a unit Poisson process on
    ``(last_arrival, inf)``, so the mean is
    ``integral_x^inf t**(-1/alpha) dt = alpha/(1-alpha) * x**(-(1-alpha)/alpha)``.
    """
    x = np.asarray(last_arrival, dtype=float)
    return (alpha / (1.0 - alpha)) * x ** (-(1.0 - alpha) / alpha)


def ppp_tail_sq_mean(alpha: float, last_arrival) -> np.ndarray:
    """Conditional mean of ``sum_{i>N} xi_i**2`` given the N-th arrival time."""
    x = np.asarray(last_arrival, dtype=float)
    return (alpha / (2.0 - alpha)) * x ** (-(2.0 - alpha) / alpha)


def stable_sum_from_ppp(ppp: PppSample) -> float:
    """Tail-compensated total mass ``S = sum_i xi_i`` of a PPP sample."""
    return float(ppp.xi.sum() + ppp_tail_mean(ppp.alpha, ppp.arrival_times[-1]))


# ---------------------------------------------------------------------------
# One-sided alpha-stable sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StableSum:
    """A positive draw of the one-sided alpha-stable law.

    Normalization: ``E[exp(-theta*s)] = exp(-Gamma(1-alpha) * theta**alpha)``,
    the law of the total mass of the power-law Poisson process.
    """

    s: float
    alpha: float


def _kanter_standard(alpha: float, size, rng: np.random.Generator):
    """One-sided stable variates with Laplace transform exp(-theta**alpha).

    Kanter's exact transformation: with U uniform on (0, pi) and E a unit
    exponential,

        a(U) = (sin(alpha*U)**alpha * sin((1-alpha)*U)**(1-alpha) / sin(U))**(1/(1-alpha))
        S0   = (a(U) / E)**((1-alpha)/alpha)
    """
    u = rng.uniform(0.0, np.pi, size)
    e = rng.standard_exponential(size)
    a = (
        np.sin(alpha * u) ** alpha
        * np.sin((1.0 - alpha) * u) ** (1.0 - alpha)
        / np.sin(u)
    ) ** (1.0 / (1.0 - alpha))
    return (a / e) ** ((1.0 - alpha) / alpha)


def stable_variates(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Array of stable sums on the PPP normalization (see ``StableSum``)."""
    _check_alpha(alpha)
    return _gamma_fn(1.0 - alpha) ** (1.0 / alpha) * _kanter_standard(alpha, size, rng)


def sample_stable(alpha: float, rng: np.random.Generator) -> StableSum:
    """Draw one one-sided stable sum by Kanter's exact method."""
    return StableSum(s=float(stable_variates(alpha, None, rng)), alpha=alpha)


# ---------------------------------------------------------------------------
# Poisson-Dirichlet and the column-limit sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PdVector:
    """Truncated Poisson-Dirichlet PD(alpha) vector.

    ``zeta`` holds the first ``len(zeta)`` ranked components ``xi_i / S``;
    ``remainder_mass`` is the compensated mass of all later components, so
    ``zeta.sum() + remainder_mass == 1`` up to rounding.
    """

    zeta: np.ndarray
    remainder_mass: float
    alpha: float


def sample_pd(alpha: float, N: int, rng: np.random.Generator) -> PdVector:
    """Sample PD(alpha) as a tail-compensated normalized PPP."""
    ppp = sample_ppp(alpha, N, rng)
    tail = float(ppp_tail_mean(alpha, ppp.arrival_times[-1]))
    total = ppp.xi.sum() + tail
    return PdVector(zeta=ppp.xi / total, remainder_mass=tail / total, alpha=alpha)


def sample_omega(alpha: float, N: int, rng: np.random.Generator) -> np.ndarray:
    """Ranked sequence ``omega_i = xi_i / (xi_i + q)`` in (0, 1).

    This is the limit law of the ranked column entries of the row-normalized
    matrix; the map ``t -> t/(t+q)`` is increasing, so the output inherits
    the ranking of the PPP.
    """
    ppp = sample_ppp(alpha, N, rng)
    q = q_constant(alpha)
    return ppp.xi / (ppp.xi + q)


def sample_omega_hat(alpha: float, N: int, rng: np.random.Generator) -> np.ndarray:
    """Unranked sequence ``omega_hat_i = xi_i / (xi_i + S_i)``.

    ``{S_i}`` are i.i.d. stable sums independent of the PPP.  Ranked, this
    sequence has the same law as ``sample_omega``.
    """
    ppp = sample_ppp(alpha, N, rng)
    s = stable_variates(alpha, N, rng)
    return ppp.xi / (ppp.xi + s)
