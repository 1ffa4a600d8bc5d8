"""Exact and floating-point harmonic analysis over finite digit spaces.

The package models finitely supported measures on digit vectors over an
odd prime modulus q, their discrete Fourier transforms (exact cyclotomic
or floating point), energy and content diagnostics, a trilinear
decomposition that counts three-term arithmetic progressions, and a
plane-sampling experiment that converts AP-rich plane fractions into
lower bounds on AP counts.
"""

__version__ = "0.1.0"

from .apcount import (
    APReport,
    ErrorBound,
    IdentityViolation,
    SeparationPredicate,
    character_sum_nonzero,
    count_aps_set,
    error_bound,
    extract_progressions,
    spectral_decomposition,
    trilinear_g,
    trilinear_g_separated,
)
from .base import (
    CycScalar,
    DualVec,
    LevelError,
    Modulus,
    ModulusError,
    ModulusMismatchError,
    PointVec,
    abs_dual,
    abs_point,
    character,
    check_modulus,
    decompose,
    pair,
    project,
)
from .measures import (
    BallReport,
    MeasureError,
    MeasureTable,
    PointSet,
    ball_condition_constant,
    energy_baseline,
    energy_proportionality,
    energy_spatial,
    energy_spectral,
    hausdorff_content,
    make_capset_measure,
    make_cascade_measure,
    make_haar_ball,
    pushforward,
    read_measure,
    read_pointset,
    self_energy,
    threshold_small_atoms,
    write_measure,
    write_pointset,
)
from .spectral import (
    DecayFit,
    DenseTable,
    ShellStats,
    SpectralTable,
    decay_fit,
    dft_forward,
    dft_inverse,
    shell_profile,
    write_spectrum_csv,
)
from .subspaces import (
    ParameterError,
    Plane,
    VarnavidesReport,
    choose_dprime,
    count_subspaces_containing,
    dependence_probability,
    enumerate_planes,
    enumerate_subspaces,
    gaussian_binomial,
    restrict,
    sample_plane,
    varnavides_experiment,
)
