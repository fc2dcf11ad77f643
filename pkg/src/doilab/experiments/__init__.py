"""Randomized inequality campaigns and the non-multiplier diagnostics."""

from .campaigns import (
    DEFAULT_SEED,
    holder_experiment,
    holder_sweep,
    identity_experiment,
    ideal_lipschitz_experiment,
    lipschitz_experiment,
    quasicommutator_experiment,
    run_trials,
    schatten_holder_experiment,
)
from .ensembles import holder_field, periodic_bandlimited, random_tuple, trial_rng, tuple_pair
from .report import SCHEMA_VERSION, ExperimentReport
from .counterexample import (
    SURROGATES,
    counterexample_d2f,
    fourier_exponent,
    g_sanity,
    positive_multiplier_check_3d,
    section_norms,
)
