"""Catenary Lyapunov functions and metrics for isolated sets.

A catenary function satisfies ``L'' = a^2 L`` along orbits of a flow (or
``L(f x) - 2 L(x) + L(f^-1 x) = L(x)`` for a homeomorphism), so along every
orbit it has the form ``A e^{at} + B e^{-at}``.  The package builds such
functions and pseudo-metrics around isolated sets of desk-scale systems and
checks the defining relations numerically.
"""

from .blocks import Block, HitTimes, boundary_projections, classify_point, cocycle_check, hit_times
from .discrete import (
    LAMBDA_S,
    LAMBDA_U,
    DiscreteCatenarySpec,
    DiscreteSystem,
    PairSuspension,
    SymbolicPoint,
    catenary_roots,
    discrete_catenary_bvp,
    expansivity_probe,
    full_shift,
    hausdorff_pair_metric,
    hyperspace_iterate,
    local_metric,
    pair_system,
    second_difference,
    shift_metric,
    suspension_catenary,
)
from .errors import (
    BasinError,
    CapacityError,
    CatenaryError,
    ConfigError,
    DivergenceError,
    DomainError,
    PartitionError,
    ProjectionError,
    SpecError,
    TruncationError,
)
from .fields import (
    BVPSpec,
    CatenaryReport,
    ScalarField,
    attractor_lyapunov,
    catenary_bvp,
    catenary_bvp_field,
    catenary_sum_field,
    catenary_sum_pseudometric,
    derived_decreasing,
    exact_decay_lyapunov,
    exact_growth_lyapunov,
    linear_pseudometric,
    smooth_lyapunov,
    verify_catenary,
)
from .flows import (
    ClosedFormFlow,
    FakeSingularitySpec,
    FlowResult,
    FlowSystem,
    LinearModelSpec,
    ODEFlow,
    SuspensionFlow,
    make_fake_singularity,
    make_linear_attractor,
    make_suspension,
    orbit_trace,
)
from .metric import (
    FinitePointSet,
    LocalMetric,
    SizeFunctionSpec,
    delta_cardinality,
    farthest_point_refs,
    glue_local_metric,
    hausdorff_distance,
    metric_axioms_check,
    whitney_size,
)
from .sections import (
    ReparamState,
    SectionSpec,
    fit_section_spec,
    reparametrize,
    section_project,
    sectional_metric,
    theta,
)

__version__ = "0.1.0"
