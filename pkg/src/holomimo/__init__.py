"""Electromagnetic simulator and optimizer for holographic planar array uplinks.

Builds multi-user channel and colored-noise models from first
principles (dyadic propagation kernel, isotropic interference),
truncates them on plane-wave mode sets, and maximizes the sum spectral
efficiency with iterative water-filling.  Benchmark schemes
(half-wavelength discrete arrays, equal power, dense-grid decomposition)
and a sweep CLI round out the toolkit.
"""

from . import errors
from .benchmarks import (
    DiscreteArraySpec,
    discrete_array,
    discrete_benchmark_result,
    discrete_benchmark_se,
    discrete_channel,
    discrete_noise_covariance,
    optimal_decomposition_result,
    optimal_decomposition_se,
)
from .cache import MatrixCache
from .coupling import (
    CouplingMatrix,
    QuadratureSpec,
    assemble_coupling,
    coupling_block,
    field_projection,
)
from .fields import (
    ETA0,
    MU0,
    SPEED_OF_LIGHT,
    AngularQuadSpec,
    PhysicalConstants,
    emi_autocorrelation,
    green,
    green_pairs,
    wave_vector,
)
from .geometry import (
    AlignedAperture,
    ApertureSpec,
    Scenario,
    align_aperture,
    build_rotation,
    validate_scenario,
)
from .modes import (
    CurrentGrid,
    ModeIndexSet,
    current_grid,
    expand_current,
    mode_set,
    reconstruct_current,
    rx_basis_eval,
    rx_basis_ft,
    tx_basis_eval,
    tx_basis_ft,
)
from .noise import NoiseCovariance, emi_covariance, noise_covariance
from .sweep import (
    ResultRow,
    SweepConfig,
    emit_plot,
    parse_config,
    place_users_semicircle,
    run_sweep,
    scenario_for,
)
from .waterfilling import (
    AllocationResult,
    UserCovariance,
    equal_power_allocation,
    iterative_water_filling,
    sum_rate,
    water_fill,
    whiten_and_decompose,
)

__version__ = "0.1.0"
