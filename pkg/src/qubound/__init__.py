"""Sequential two-outcome quantum measurements and numerical checks of the
quantum union bound, gentle sequential measurement, and their refinements."""

from qubound.errors import (
    ConstructionFailure,
    DeadTrajectory,
    DimMismatch,
    InvalidParameter,
    InvalidProjector,
    NotPSD,
    NumericalFailure,
    ParameterOutOfRange,
    QuboundError,
    ZeroProbabilityBranch,
)
from qubound.qstate import (
    DensityMatrix,
    Effect,
    MeasurementOp,
    Projector,
    condition,
    expectation,
    fidelity,
    infidelity,
    root_fidelity,
    trace_distance,
)
from qubound.seqmeas import Trajectory, run_sequence


__all__ = [
    "ConstructionFailure",
    "DeadTrajectory",
    "DensityMatrix",
    "DimMismatch",
    "Effect",
    "InvalidParameter",
    "InvalidProjector",
    "MeasurementOp",
    "NotPSD",
    "NumericalFailure",
    "ParameterOutOfRange",
    "Projector",
    "QuboundError",
    "Trajectory",
    "ZeroProbabilityBranch",
    "condition",
    "expectation",
    "fidelity",
    "infidelity",
    "root_fidelity",
    "run_sequence",
    "trace_distance",
]
