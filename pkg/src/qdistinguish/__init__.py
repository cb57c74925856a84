"""Quantum channel distinguishability and measurement uncertainty relations."""

from .channels import (
    Apparatus,
    OutputFactor,
    QuantumChannel,
    StinespringIsometry,
    choi_matrix,
    complement_of,
    compose,
    ideal_measurement,
    joint_apparatus,
    luders_apparatus,
    pinch,
    stinespring_of,
)
from .opcore import DimensionError, Observable, overlap_matrix, partial_trace, tensor, trace_distance
from .sdp import (
    SolverError,
    SolverOptions,
    diamond_distance,
    min_constant_distance,
    min_measprep_distance,
    min_recovery_measurement,
)
from .uncertainty import (
    GRACE,
    ComplementarityPair,
    IsometryAlignment,
    VerificationReport,
    align_isometries,
    complementarity,
    disturbance,
    error,
    verify_ed,
    verify_jm,
    verify_leakage,
    verify_measprep,
    verify_stinespring_sandwich,
)

__version__ = "0.1.0"
