"""Magnetic flows on R^n and on spheres: simulation and exact certification
of their first integrals."""

from ._backend import BACKEND
from .brackets import (
    NotClosed,
    RationalObservable,
    Verdict,
    dirac_bracket,
    identity_test,
    magnetic_bracket,
    structure_constants,
)
from .dynamics import (
    FlowSpec,
    HypothesisViolated,
    StepFailure,
    Trajectory,
    integrate,
    pendulum_circle_radius,
    pendulum_momentum_drift,
    rn_closed_form,
    sphere_vector_field,
    unit_speed_state,
    unitary_reduction,
)
from .integrals import (
    DimensionCertificate,
    InconsistentRanks,
    IntegralCatalog,
    NotApplicable,
    build_catalog,
    commuting_chain,
    jacobian_rank,
    liouville_set,
    nc_dimension_check,
)
from .phasecore import (
    GaugeOffset,
    MagneticField,
    NotSkew,
    PhaseState,
    SystemParams,
    ZeroPosition,
    canonicalize_kappa,
    project_to_constraints,
    sample_constrained_point,
)
from .poly import DimensionMismatch, PhaseVars, Poly

__all__ = [
    "DimensionMismatch",
    "PhaseVars",
    "Poly",
    "BACKEND",
    "DimensionCertificate",
    "FlowSpec",
    "GaugeOffset",
    "HypothesisViolated",
    "InconsistentRanks",
    "IntegralCatalog",
    "MagneticField",
    "NotApplicable",
    "NotClosed",
    "NotSkew",
    "PhaseState",
    "RationalObservable",
    "StepFailure",
    "SystemParams",
    "Trajectory",
    "Verdict",
    "ZeroPosition",
    "build_catalog",
    "canonicalize_kappa",
    "commuting_chain",
    "dirac_bracket",
    "identity_test",
    "integrate",
    "jacobian_rank",
    "liouville_set",
    "magnetic_bracket",
    "nc_dimension_check",
    "pendulum_circle_radius",
    "pendulum_momentum_drift",
    "project_to_constraints",
    "rn_closed_form",
    "sample_constrained_point",
    "sphere_vector_field",
    "structure_constants",
    "unit_speed_state",
    "unitary_reduction",
]
