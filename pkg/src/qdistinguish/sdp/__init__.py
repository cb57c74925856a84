from .formulations import (
    ConstantFit,
    DiamondResult,
    MeasPrepFit,
    RecoveryFit,
    diamond_distance,
    min_constant_distance,
    min_measprep_distance,
    min_recovery_measurement,
    sampled_lower_bound,
)
from .hermitian import LmiBuilder, LmiSolution
from .solver import SdpProblem, SdpSolution, SolverError, SolverOptions, solve
