"""Functionally divided manipulation synergies for multi-fingered hands.

Fit principal-axis synergies on hand-posture datasets, restrict them to the
joints of fingers assigned the manipulation function, and drive a hand
through a switching runtime that pins the fixed fingers in place. Includes a
simulated task harness, a CLI (``fdms``), and a live-steering HTTP/WebSocket
service.
"""

from .build import (
    FDMSModel,
    FunctionAssignment,
    build_fdms,
    build_grasp_synergy,
    build_task_specific,
)
from .errors import FDMSError, ValidationError
from .hand import (
    Finger,
    FingerChain,
    HandModel,
    JointKind,
    JointSpec,
    clamp_posture,
    default_hand_model,
    flat_posture,
    forward_kinematics,
    joints_for_fingers,
    load_hand_model,
)
from .notation import (
    CatalogEntry,
    FunctionUnit,
    MovementUnit,
    decompose_unit,
    fdms_unit_catalog,
    function_to_subspace,
    kamakura_catalog,
    parse_movement_unit,
    unit_to_function,
)
from .switching import (
    Phase,
    RuntimeState,
    SynergyDatabase,
    SynergyKind,
    TaskScript,
    Termination,
    begin_phase,
    drive_with_coefficients,
    drive_with_posture,
    run_script,
)
from .synergy import (
    Centering,
    JointSubset,
    PostureSequence,
    SynergyMatrix,
    SynergyModel,
    SynergyPCA,
    approximate_sequence,
    coefficients,
    contribution_ratios,
    cumulative_contribution,
    decode,
    extract_subvector,
    fit_pca,
    min_components_for_ratio,
    project_posture,
    reconstruction_mse,
    synergy_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "Centering",
    "CatalogEntry",
    "FDMSError",
    "FDMSModel",
    "Finger",
    "FingerChain",
    "FunctionAssignment",
    "FunctionUnit",
    "HandModel",
    "JointKind",
    "JointSpec",
    "JointSubset",
    "MovementUnit",
    "Phase",
    "PostureSequence",
    "RuntimeState",
    "SynergyDatabase",
    "SynergyKind",
    "SynergyMatrix",
    "SynergyModel",
    "SynergyPCA",
    "TaskScript",
    "Termination",
    "ValidationError",
    "approximate_sequence",
    "begin_phase",
    "build_fdms",
    "build_grasp_synergy",
    "build_task_specific",
    "clamp_posture",
    "coefficients",
    "contribution_ratios",
    "cumulative_contribution",
    "decode",
    "decompose_unit",
    "default_hand_model",
    "drive_with_coefficients",
    "drive_with_posture",
    "extract_subvector",
    "fdms_unit_catalog",
    "fit_pca",
    "flat_posture",
    "forward_kinematics",
    "function_to_subspace",
    "joints_for_fingers",
    "kamakura_catalog",
    "load_hand_model",
    "min_components_for_ratio",
    "parse_movement_unit",
    "project_posture",
    "reconstruction_mse",
    "run_script",
    "synergy_matrix",
    "unit_to_function",
]
