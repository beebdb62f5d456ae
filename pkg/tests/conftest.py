"""Shared fixtures.

The limit-measure estimates and the pooled finite-n spectra are expensive
(minutes); they are computed once per session and shared between the
method-agreement tests and the acceptance suite.
"""

import numpy as np
import pytest

import heavy_markov_lab as hml
from heavy_markov_lab.lab import derive_seed, _run_pool, _singular_trial

MEASURE_GRID = np.linspace(0.0, 6.0, 121)
ETA_EPS = 0.05

LIMIT_COMBOS = ((0.5, 0.0), (0.5, 0.5), (0.2, 0.0), (0.9, 0.0))


@pytest.fixture(scope="session")
def limit_estimates():
    """Limit singular-value densities keyed by (alpha, z, method)."""
    out = {}
    for alpha, z in LIMIT_COMBOS:
        out[(alpha, z, "pwit")] = hml.expected_limit_measure(
            alpha, z, trials=300, b=100, h=6, grid=MEASURE_GRID,
            eta_eps=ETA_EPS, seed=101, workers=2,
        )
        out[(alpha, z, "rde")] = hml.stieltjes_density(
            alpha, z, grid=MEASURE_GRID, eta_eps=ETA_EPS, pool_size=400,
            seed=202, workers=2,
        )
    return out


@pytest.fixture(scope="session")
def pooled_singular():
    """Per-trial singular values at alpha=0.5, keyed by (z, n); 10 trials."""
    out = {}
    for z in (0.0, 0.5):
        for n in (500, 1000, 2000):
            seeds = [derive_seed(7000, ["sv", z, n, t]) for t in range(10)]
            out[(z, n)] = _run_pool(
                _singular_trial, [(0.5, n, complex(z), s) for s in seeds], 2
            )
    return out
