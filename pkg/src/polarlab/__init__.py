"""Numerical laboratory for threshold nonlocal energies under symmetrization.

Grid-exact polarization (two-point rearrangement) and Schwarz rearrangement,
the jump-threshold nonlocal energy with its exact decomposition identities,
fractional seminorms and their limit studies, Lorentz-quasinorm decay bounds,
and Riesz fractional gradients with a probe of the open polarization
inequality.
"""

from .grid import (
    DistributionFunction,
    GridError,
    GridFunction,
    GridSpec,
    LorentzParams,
    discrete_gradient_energy,
    distribution_function,
    is_radially_decreasing,
    lorentz_quasinorm,
    lp_norm,
    pointwise_decay_bound,
)
from .halfspaces import AlignedHalfSpace, HalfSpace, HalfSpaceSchedule
from .rearrange import (
    CellPartition,
    contraction_check,
    iterate_polarization,
    polarization_partition,
    polarize,
    polarize_general,
    schwarz_rearrange,
)
from .energy import (
    EnergyValue,
    GuardError,
    KernelParams,
    angular_moment,
    gagliardo_seminorm,
    polarization_defect,
    sobolev_ratio,
    threshold_energy,
    threshold_energy_restricted,
    young_weight_energy,
)
from .riesz import (
    FractionalGradientField,
    fractional_energy_density,
    fractional_gradient,
    fractional_gradient_spectral,
    polarization_inequality_probe,
    reflection_decomposition,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
