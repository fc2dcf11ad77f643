"""Scalar fields on R^n, filters, seminorms and moduli of continuity."""

from .fields import Sampler, TrigSum, make_bandlimited, sine_integral_1d, sine_integral_field
from .filters import FilterBank, band_weight, cutoff_omega, kappa1, smoothstep, tail_weight
from .moduli import Divergent, Modulus, check_modulus, modulus_doublestar, modulus_star
from .norms import (
    bernstein_check,
    besov_seminorm,
    grid_axes,
    lambda_norm,
    lp_band,
    lp_component,
    lp_tail,
    lp_tail_check,
    sample_pairs,
    sup_norm,
)
