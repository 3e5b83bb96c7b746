"""Truncated bosonic Fock space over the grid sites."""

from .basis import BASIS_ORDER_VERSION, OccupationBasis, basis_dimension, build_basis, sector_dimension
from .operators import (
    annihilate,
    annihilation_matrix,
    create,
    creation_matrix,
    dGamma_apply,
    dgamma_matrix,
    number_apply,
    number_power_norm,
    quartic_onsite_apply,
    weyl_apply,
    wick_rank_one_expectation,
)
from .states import coherent_state, hermite_state, poisson_tail, required_n_max
from .vector import FockVector, LadderConvention

__all__ = [
    "BASIS_ORDER_VERSION", "OccupationBasis", "basis_dimension", "build_basis", "sector_dimension",
    "annihilate", "annihilation_matrix", "create", "creation_matrix", "dGamma_apply", "dgamma_matrix",
    "number_apply", "number_power_norm", "quartic_onsite_apply", "weyl_apply",
    "wick_rank_one_expectation", "coherent_state", "hermite_state", "poisson_tail", "required_n_max",
    "FockVector", "LadderConvention",
]
