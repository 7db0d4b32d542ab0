"""Nodal intersections of arithmetic random waves on the three-torus.

The package enumerates lattice-point shells |mu|^2 = m, restricts the random
Laplace eigenfunction F to straight line segments, counts the zeros of that
restriction, and evaluates the exact pair-sum bounds on the zero-count
variance for rational, irrational, and half-rational direction classes.  The
``nodal-lab`` command exposes the same pipeline as CSV/JSON report runs.
"""

from .arithmetic import (
    BoundMode,
    BoundReport,
    PairSums,
    RieszResult,
    SquaredCovarianceTerms,
    integral_sq,
    pair_sums,
    q_sum,
    r2_terms,
    riesz_energy,
    variance_bound,
)
from .diophantine import (
    Direction,
    PsiBound,
    Rationality,
    RationalApprox,
    approx_direction,
    dirichlet_1d,
    dirichlet_simultaneous,
    segment_psi_bound,
    unit_difference_bound,
)
from .geometry import (
    CapSpec,
    CountResult,
    SegmentSpec,
    Slab,
    cap_from,
    chi_hat,
    cone_region,
    count_in_cap,
    count_in_segment,
    covering_bound,
    kappa,
    segment_from,
    slab_region,
    slicing_bound,
)
from .lattice import (
    LatticePoint,
    MClass,
    ProjectedShell,
    Shell,
    classify_m,
    enumerate_shell,
    project_shell,
    scale_check,
)
from .nodal import (
    DegenerateSampleError,
    MonteCarloReport,
    ZeroCount,
    ZeroFlags,
    count_zeros,
    monte_carlo,
    shifted_sample,
)
from .randomwave import (
    CovarianceValues,
    LineSegment,
    WaveSample,
    covariance,
    evaluate_F,
    evaluate_F_complex,
    evaluate_f,
    evaluate_f_prime,
    line_frequencies,
    sample_wave,
    second_moment_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "BoundMode",
    "BoundReport",
    "CapSpec",
    "CountResult",
    "CovarianceValues",
    "DegenerateSampleError",
    "Direction",
    "LatticePoint",
    "LineSegment",
    "MClass",
    "MonteCarloReport",
    "PairSums",
    "ProjectedShell",
    "PsiBound",
    "Rationality",
    "RationalApprox",
    "RieszResult",
    "SegmentSpec",
    "Shell",
    "Slab",
    "SquaredCovarianceTerms",
    "WaveSample",
    "ZeroCount",
    "ZeroFlags",
    "approx_direction",
    "cap_from",
    "chi_hat",
    "classify_m",
    "cone_region",
    "count_in_cap",
    "count_in_segment",
    "count_zeros",
    "covariance",
    "covering_bound",
    "dirichlet_1d",
    "dirichlet_simultaneous",
    "enumerate_shell",
    "evaluate_F",
    "evaluate_F_complex",
    "evaluate_f",
    "evaluate_f_prime",
    "integral_sq",
    "kappa",
    "line_frequencies",
    "monte_carlo",
    "pair_sums",
    "project_shell",
    "q_sum",
    "r2_terms",
    "riesz_energy",
    "sample_wave",
    "scale_check",
    "second_moment_ratio",
    "segment_from",
    "segment_psi_bound",
    "shifted_sample",
    "slab_region",
    "slicing_bound",
    "unit_difference_bound",
    "variance_bound",
]
