"""Kinematic description of a multi-fingered hand.

A hand is an ordered list of rotational joints grouped into fingers. Each
finger is modeled as its own planar serial chain rooted at a palm frame, which
is all the simulated task predicates and the steering UI need: fingertip
positions in a plane, joint limits, and a stable 1-based joint indexing shared
by every other module (joint 1 is the first joint in the document, joint ``d``
the last).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping

import numpy as np

from .errors import DuplicateJointError, ValidationError
from .synergy import JointSubset
from .validation import as_vector, readonly


class Finger(enum.Enum):
    THUMB = "Thumb"
    INDEX = "Index"
    MIDDLE = "Middle"
    RING = "Ring"
    PINKY = "Pinky"


#: Canonical thumb-to-pinky ordering used anywhere fingers are enumerated.
FINGER_ORDER: tuple[Finger, ...] = (
    Finger.THUMB,
    Finger.INDEX,
    Finger.MIDDLE,
    Finger.RING,
    Finger.PINKY,
)


class JointKind(enum.Enum):
    ROTATION = "Rotation"
    MCP = "MCP"
    PIP = "PIP"


@dataclass(frozen=True)
class JointSpec:
    """One rotational joint: identity, travel limits, and the length of the
    link distal to it."""

    name: str
    finger: Finger
    kind: JointKind
    limit_lo: float
    limit_hi: float
    link_length: float

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("joint name must be nonempty")
        if not self.limit_lo < self.limit_hi:
            raise ValidationError(
                f"joint {self.name!r}: limit_lo ({self.limit_lo}) must be < "
                f"limit_hi ({self.limit_hi})"
            )
        if not self.link_length > 0:
            raise ValidationError(f"joint {self.name!r}: link_length must be > 0")


@dataclass(frozen=True)
class PalmFrame:
    """Planar base pose of a finger chain: origin in meters, heading in
    radians."""

    origin: tuple[float, float]
    direction: float


@dataclass(frozen=True)
class HandModel:
    """Immutable hand description; safe to share across threads.

    ``finger_joints`` maps each present finger to its ordered 1-based joint
    indices and always partitions ``{1..d}``.
    """

    joints: tuple[JointSpec, ...]
    palm_frames: Mapping[Finger, PalmFrame]
    finger_joints: Mapping[Finger, tuple[int, ...]] = field(init=False)
    d: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.joints:
            raise ValidationError("hand model must declare at least one joint")
        names = [j.name for j in self.joints]
        seen: set[str] = set()
        for name in names:
            if name in seen:
                raise DuplicateJointError(f"joint {name!r} declared more than once")
            seen.add(name)

        grouped: dict[Finger, list[int]] = {}
        for idx, joint in enumerate(self.joints, start=1):
            grouped.setdefault(joint.finger, []).append(idx)

        for finger in grouped:
            if finger not in self.palm_frames:
                raise ValidationError(f"finger {finger.value} has joints but no palm frame")
        for finger in self.palm_frames:
            if finger not in grouped:
                raise ValidationError(f"finger {finger.value} has a palm frame but zero joints")

        object.__setattr__(
            self,
            "finger_joints",
            {f: tuple(grouped[f]) for f in FINGER_ORDER if f in grouped},
        )
        object.__setattr__(self, "d", len(self.joints))
        # Partition check: every index in exactly one finger.
        flat = sorted(i for idxs in self.finger_joints.values() for i in idxs)
        assert flat == list(range(1, self.d + 1)), "finger_joints must partition 1..d"

    @property
    def joint_names(self) -> tuple[str, ...]:
        return tuple(j.name for j in self.joints)

    @property
    def fingers(self) -> tuple[Finger, ...]:
        return tuple(self.finger_joints.keys())

    @property
    def limits_lo(self) -> np.ndarray:
        return readonly(np.array([j.limit_lo for j in self.joints]))

    @property
    def limits_hi(self) -> np.ndarray:
        return readonly(np.array([j.limit_hi for j in self.joints]))

    def joint_index(self, name: str) -> int:
        """1-based index of a joint by name."""
        for idx, joint in enumerate(self.joints, start=1):
            if joint.name == name:
                return idx
        raise ValidationError(f"unknown joint name {name!r}")


@dataclass(frozen=True)
class FingerChain:
    """Planar pose of one finger: base origin, the point after each joint's
    link, and the fingertip (last point)."""

    points: np.ndarray  # (k + 1, 2), row 0 = palm origin
    tip: np.ndarray  # (2,)


def _require_finger(value: str) -> Finger:
    try:
        return Finger(value)
    except ValueError as exc:
        raise ValidationError(f"unknown finger {value!r}") from exc


def _require_kind(value: str) -> JointKind:
    try:
        return JointKind(value)
    except ValueError as exc:
        raise ValidationError(f"unknown joint kind {value!r}") from exc


def load_hand_model(document: str | Mapping) -> HandModel:
    """Build a validated :class:`HandModel` from a JSON document.

    ``document`` is either the JSON text or the already-parsed mapping with
    keys ``joints`` (ordered list of joint objects) and ``palm_frames``.
    Angles are radians, lengths meters.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"hand model document is not valid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise ValidationError("hand model document must be a JSON object")

    try:
        raw_joints = document["joints"]
        raw_frames = document["palm_frames"]
    except KeyError as exc:
        raise ValidationError(f"hand model document missing key {exc.args[0]!r}") from exc
    if not isinstance(raw_joints, list) or not raw_joints:
        raise ValidationError("hand model 'joints' must be a nonempty list")

    joints = []
    for i, item in enumerate(raw_joints):
        try:
            joints.append(
                JointSpec(
                    name=str(item["name"]),
                    finger=_require_finger(item["finger"]),
                    kind=_require_kind(item["kind"]),
                    limit_lo=float(item["limit_lo"]),
                    limit_hi=float(item["limit_hi"]),
                    link_length=float(item["link_length"]),
                )
            )
        except KeyError as exc:
            raise ValidationError(
                f"joint entry {i} missing field {exc.args[0]!r}"
            ) from exc

    frames = {}
    for key, frame in raw_frames.items():
        finger = _require_finger(key)
        try:
            origin = frame["origin"]
            direction = float(frame["direction"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"palm frame for {key} is malformed") from exc
        if len(origin) != 2:
            raise ValidationError(f"palm frame origin for {key} must be a 2-point")
        frames[finger] = PalmFrame(
            origin=(float(origin[0]), float(origin[1])), direction=direction
        )

    return HandModel(joints=tuple(joints), palm_frames=frames)


def default_hand_model() -> HandModel:
    """The bundled 10-DoF model: thumb rotation + MCP, then MCP + PIP for
    index through pinky."""
    text = resources.files("fdms._data").joinpath("default_hand.json").read_text()
    return load_hand_model(text)


def flat_posture(model: HandModel) -> np.ndarray:
    """All-zero posture clamped into the model's limits (the rest pose)."""
    return clamp_posture(model, np.zeros(model.d))


def clamp_posture(model: HandModel, posture) -> np.ndarray:
    """Clamp each angle into its joint's travel range. Idempotent."""
    p = as_vector(posture, "posture", size=model.d)
    lo = np.array([j.limit_lo for j in model.joints])
    hi = np.array([j.limit_hi for j in model.joints])
    return np.clip(p, lo, hi)


def forward_kinematics(model: HandModel, posture) -> dict[Finger, FingerChain]:
    """Planar chain positions for every finger.

    Each finger starts at its palm origin heading along its palm direction;
    every joint adds its angle to the heading and advances by its link length.
    Deterministic: identical inputs give bit-identical outputs.
    """
    p = as_vector(posture, "posture", size=model.d)
    out: dict[Finger, FingerChain] = {}
    for finger, idxs in model.finger_joints.items():
        frame = model.palm_frames[finger]
        heading = frame.direction
        x, y = frame.origin
        points = [(x, y)]
        for idx in idxs:
            joint = model.joints[idx - 1]
            heading += p[idx - 1]
            x += joint.link_length * math.cos(heading)
            y += joint.link_length * math.sin(heading)
            points.append((x, y))
        arr = readonly(np.array(points))
        out[finger] = FingerChain(points=arr, tip=arr[-1])
    return out


def joints_for_fingers(model: HandModel, fingers: Iterable[Finger]) -> JointSubset:
    """Ascending 1-based indices of every joint on the given fingers."""
    selected = set(fingers)
    if not selected:
        raise ValidationError("finger set must be nonempty")
    for finger in selected:
        if finger not in model.finger_joints:
            raise ValidationError(f"model has no joints for finger {finger.value}")
    indices = sorted(
        i for finger in selected for i in model.finger_joints[finger]
    )
    return JointSubset(tuple(indices), dimension=model.d)
