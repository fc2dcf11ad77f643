"""Central numerical tolerances and grid densities.

Every function that needs one of these takes it as an explicit keyword and
falls back to :data:`DEFAULTS`.  Nothing here is mutated at runtime; build a
new instance with :meth:`Tolerances.replace` (the CLI does this from flags
and config files).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import ConfigInvalid


@dataclass(frozen=True)
class Tolerances:
    hermitian_rtol: float = 1e-12
    commute_rtol: float = 1e-10  # times max ||A_i||^2
    reconstruct_rtol: float = 1e-8
    unitary_atol: float = 1e-10
    cluster_gap: float = 1e-8  # relative eigenvalue gap for degeneracy
    identity_rtol: float = 1e-9  # tau_id, times ||f||_inf
    representation_rtol: float = 1e-8  # tau_rep, times ||f||_inf
    partition_atol: float = 1e-12
    modulus_rtol: float = 1e-6
    grid_points_per_axis: int = 1024
    grid_total_points: int = 1 << 20
    gauss_legendre_nodes: int = 32
    fourier_radius: int = 24

    def replace(self, **changes) -> "Tolerances":
        names = {f.name for f in dataclasses.fields(self)}
        unknown = set(changes) - names
        if unknown:
            raise ConfigInvalid(f"unknown tolerance keys: {sorted(unknown)}")
        for key, value in changes.items():
            if not isinstance(value, (int, float)) or value <= 0:
                raise ConfigInvalid(f"tolerance {key} must be a positive number, got {value!r}")
        return dataclasses.replace(self, **changes)


DEFAULTS = Tolerances()


def points_per_axis(n: int, tol: Tolerances = DEFAULTS) -> int:
    """Grid density for dense sampling in dimension ``n`` under the total budget."""
    per_axis = int(tol.grid_total_points ** (1.0 / n))
    return max(8, min(tol.grid_points_per_axis, per_axis))
