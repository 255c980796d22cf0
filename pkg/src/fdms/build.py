"""Constructing the three synergy kinds.

A grasp synergy is fit on diverse grasping postures over the full joint
space. A task-specific synergy is fit the same way but only on recordings of
one task. A functionally divided manipulation synergy (FDMS) restricts the
*grasp* data to the joints of the fingers assigned the manipulation function
and fits there — reusing the cheap-to-collect grasp dataset for every
function split instead of recording per task.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .hand import FINGER_ORDER, HandModel
from .notation import FunctionUnit
from .synergy import (
    Centering,
    JointSubset,
    PostureSequence,
    SynergyModel,
    concatenate,
    extract_subvector,
    fit_pca,
)


@dataclass(frozen=True)
class FunctionAssignment:
    """Per-finger M/F functions, optionally overridden joint-by-joint, with
    the joint subset they induce on a specific hand model."""

    functions: FunctionUnit
    resolved_subset: JointSubset
    joint_overrides: tuple[tuple[str, str], ...] = ()

    @classmethod
    def resolve(
        cls,
        model: HandModel,
        functions: FunctionUnit | str,
        joint_overrides: Mapping[str, str] | None = None,
    ) -> "FunctionAssignment":
        """Compute the joint subset of the M-assigned joints on ``model``.

        A joint's function is its finger's label unless ``joint_overrides``
        names the joint explicitly.
        """
        if isinstance(functions, str):
            functions = FunctionUnit(functions)
        overrides = dict(joint_overrides or {})
        known = set(model.joint_names)
        for name, func in overrides.items():
            if name not in known:
                raise ValidationError(f"override names unknown joint {name!r}")
            if func not in ("M", "F"):
                raise ValidationError(f"override for {name!r} must be M or F, got {func!r}")

        finger_func = {
            FINGER_ORDER[i]: functions.functions[i] for i in range(len(FINGER_ORDER))
        }
        indices = []
        for idx, joint in enumerate(model.joints, start=1):
            func = overrides.get(joint.name, finger_func[joint.finger])
            if func == "M":
                indices.append(idx)
        if not indices:
            raise ValidationError(
                f"assignment {functions} resolves to zero manipulation joints on this model"
            )
        return cls(
            functions=functions,
            resolved_subset=JointSubset(tuple(indices), model.d),
            joint_overrides=tuple(sorted(overrides.items())),
        )


@dataclass(frozen=True)
class FDMSModel:
    """A synergy fit on grasp data restricted to an assignment's joints."""

    base: SynergyModel
    assignment: FunctionAssignment
    label: str = ""

    def __post_init__(self) -> None:
        if self.base.subset != self.assignment.resolved_subset:
            raise ValidationError(
                "FDMS base subset does not match the assignment's resolved subset"
            )
        if not self.label:
            object.__setattr__(self, "label", str(self.assignment.functions))

    @property
    def f(self) -> int:
        return self.base.f


def build_grasp_synergy(
    grasp_seq: PostureSequence, centering: Centering = Centering.CENTERED
) -> SynergyModel:
    """Fit over the full joint space of the grasp dataset."""
    return fit_pca(grasp_seq, centering)


def build_task_specific(
    task_seqs: Sequence[PostureSequence], centering: Centering = Centering.CENTERED
) -> SynergyModel:
    """Fit over the full joint space of one task's recordings, stacked."""
    return fit_pca(concatenate(task_seqs), centering)


def build_fdms(
    grasp_seq: PostureSequence,
    assignment: FunctionAssignment,
    centering: Centering = Centering.CENTERED,
) -> FDMSModel:
    """Restrict grasp data to the assignment's manipulation joints and fit.

    Equivalent by construction to ``fit_pca(extract_subvector(X, subset))``
    with the subset recorded on the resulting model.
    """
    subset = assignment.resolved_subset
    if subset.dimension != grasp_seq.d:
        raise ValidationError(
            f"assignment is over a {subset.dimension}-joint hand but grasp data has "
            f"{grasp_seq.d} columns"
        )
    sub = extract_subvector(grasp_seq, subset)
    base = fit_pca(sub, centering, subset=subset)
    return FDMSModel(base=base, assignment=assignment)
