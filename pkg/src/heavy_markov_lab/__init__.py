"""Desk-scale laboratory for spectra of heavy-tailed random Markov matrices.

Row-normalizing an i.i.d. matrix of infinite-mean weights produces a
random stochastic matrix whose singular-value and eigenvalue measures
have nontrivial limits driven only by the tail index.  This package
samples the finite ensembles, builds the limiting alternating weighted
trees, solves the associated resolvent distributional equations, and
cross-checks everything against closed-form oracles.
"""

__version__ = "0.1.0"

from .heavy_tail import (
    TailLaw,
    PppSample,
    StableSum,
    PdVector,
    q_constant,
    gamma_constant,
    sample_heavy,
    sample_ppp,
    sample_stable,
    sample_pd,
    sample_omega,
    sample_omega_hat,
)
from .ensemble import (
    EnsembleSample,
    BipartizedMatrix,
    generate,
    make_markov,
    bipartize,
    kn_bound,
    scale_a_n,
)
from .spectra import (
    EmpiricalSpectrum,
    singular_values,
    eigenvalues,
    empirical_moments,
    kolmogorov_distance,
    log_potential,
    isotropy_stat,
    edge_radius,
)
from .pwit import (
    TruncatedTreeOperator,
    RootMeasureEstimate,
    build_tree,
    root_resolvent,
    root_resolvent_sample,
    expected_limit_measure,
    moment_bound_C,
)
from .rde import (
    PopulationState,
    init_population,
    sweep,
    stieltjes_density,
    convergence_diagnostics,
)
from .unfolding import (
    UnfoldMap,
    NetworkWeights,
    unfold,
    network_weights,
    local_convergence_report,
    demo_matrix,
)
from .lab import ExperimentConfig, RunManifest, derive_seed, run
