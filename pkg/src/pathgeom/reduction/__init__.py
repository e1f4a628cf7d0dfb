"""Staged Cartan reduction of a pair of second-order ODEs."""

from .flat import ProlongedState, flat_check
from .generic import GenericTorsion, generic_reduce
from .groups import GroupParams
from .pipeline import (
    FLAT_CANDIDATE,
    GENERIC_BRANCH,
    UNDETERMINED_BRANCH,
    Stage1Reduction,
    TorsionStage1,
    TorsionStage2,
    check,
    classify_branch,
    lift_coframe,
    stage1_normalize,
    stage1_torsion,
    stage2_torsion,
)
from .structure import StageError
from .verdict import FLAT, GENERIC, UNDETERMINED, InvariantSet, Verdict

__all__ = [
    "FLAT", "FLAT_CANDIDATE", "GENERIC", "GENERIC_BRANCH", "UNDETERMINED", "UNDETERMINED_BRANCH",
    "GenericTorsion", "GroupParams", "InvariantSet", "ProlongedState", "Stage1Reduction", "StageError",
    "TorsionStage1", "TorsionStage2", "Verdict", "check", "classify_branch", "flat_check",
    "generic_reduce", "lift_coframe", "stage1_normalize", "stage1_torsion", "stage2_torsion",
]
