"""Synergy database, task scripts, and the switching runtime.

A task is a sequence of phases, each naming a registered synergy, a retained
component count, and a finger-function assignment. Entering a phase snapshots
the current values of every joint outside the assignment's subset; while the
phase is active those joints are pinned to the snapshot bit-for-bit and only
the manipulation joints are driven, through the phase's synergy projection.
Commands for frozen joints are ignored entirely.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import dataio
from .build import FDMSModel, FunctionAssignment
from .errors import (
    DuplicateNameError,
    FileFormatError,
    NotFoundError,
    StreamExhaustedError,
    ValidationError,
)
from .hand import HandModel, clamp_posture, flat_posture
from .synergy import (
    SynergyMatrix,
    SynergyModel,
    coefficients,
    decode,
    synergy_matrix,
)
from .validation import as_vector

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")

DB_FORMAT = "fdms-db"
SCRIPT_FORMAT = "fdms-task-script"


class SynergyKind(enum.Enum):
    GRASP = "grasp"
    TASK_SPECIFIC = "task-specific"
    FDMS = "fdms"


@dataclass(frozen=True)
class DatabaseEntry:
    name: str
    kind: SynergyKind
    model: SynergyModel | FDMSModel


class SynergyDatabase:
    """Named, immutable synergy models; persisted as a directory with an
    index file."""

    def __init__(self) -> None:
        self._entries: dict[str, DatabaseEntry] = {}

    def register(
        self, name: str, model: SynergyModel | FDMSModel, kind: SynergyKind | None = None
    ) -> None:
        if not _NAME_RE.match(name):
            raise ValidationError(f"invalid database entry name {name!r}")
        if name in self._entries:
            raise DuplicateNameError(f"database already has an entry named {name!r}")
        if kind is None:
            kind = SynergyKind.FDMS if isinstance(model, FDMSModel) else SynergyKind.GRASP
        if kind is SynergyKind.FDMS and not isinstance(model, FDMSModel):
            raise ValidationError(f"entry {name!r} declared fdms but is a plain synergy")
        self._entries[name] = DatabaseEntry(name=name, kind=kind, model=model)

    def lookup(self, name: str) -> DatabaseEntry:
        try:
            return self._entries[name]
        except KeyError:
            raise NotFoundError(f"no synergy named {name!r} in the database") from None

    def names(self) -> list[str]:
        return list(self._entries)

    def entries(self) -> list[DatabaseEntry]:
        return list(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def save(self, path) -> None:
        """Write one synergy file per entry plus ``index.json``."""
        root = Path(path)
        root.mkdir(parents=True, exist_ok=True)
        index = {"format": DB_FORMAT, "version": 1, "entries": []}
        for entry in self._entries.values():
            filename = f"{entry.name}.json"
            dataio.save_synergy(entry.model, root / filename)
            index["entries"].append(
                {"name": entry.name, "path": filename, "kind": entry.kind.value}
            )
        dataio.write_json(index, root / "index.json")

    @classmethod
    def load(cls, path) -> "SynergyDatabase":
        root = Path(path)
        index_path = root / "index.json"
        if not index_path.exists():
            raise FileFormatError(f"{root}: no index.json, not a synergy database")
        try:
            index = json.loads(index_path.read_text())
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{index_path}: not valid JSON: {exc}") from exc
        if index.get("format") != DB_FORMAT:
            raise FileFormatError(f"{index_path}: not a database index")
        db = cls()
        for item in index.get("entries", []):
            try:
                name, rel, kind = item["name"], item["path"], SynergyKind(item["kind"])
            except (KeyError, ValueError) as exc:
                raise FileFormatError(f"{index_path}: corrupt entry {item!r}") from exc
            model = dataio.load_synergy(root / rel)
            db.register(name, model, kind)
        return db


def base_model(model: SynergyModel | FDMSModel) -> SynergyModel:
    return model.base if isinstance(model, FDMSModel) else model


@dataclass(frozen=True)
class Termination:
    """Phase end condition: a fixed step count, or an external signal (the
    interactive service's operator)."""

    kind: str  # "fixed_steps" | "external"
    steps: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("fixed_steps", "external"):
            raise ValidationError(f"unknown termination kind {self.kind!r}")
        if self.kind == "fixed_steps":
            if self.steps is None or self.steps < 1:
                raise ValidationError("fixed_steps termination needs steps >= 1")
        elif self.steps is not None:
            raise ValidationError("external termination takes no step count")

    @classmethod
    def fixed(cls, steps: int) -> "Termination":
        return cls("fixed_steps", int(steps))

    @classmethod
    def external(cls) -> "Termination":
        return cls("external")


@dataclass(frozen=True)
class Phase:
    assignment: FunctionAssignment
    synergy: str
    n_s: int
    termination: Termination


@dataclass(frozen=True)
class TaskScript:
    name: str
    phases: tuple[Phase, ...]

    def __post_init__(self) -> None:
        if not self.phases:
            raise ValidationError("task script needs at least one phase")


def validate_phase(phase: Phase, db: SynergyDatabase) -> SynergyModel:
    """Check a phase against the database; returns the phase's base model."""
    base = base_model(db.lookup(phase.synergy).model)
    if not 1 <= phase.n_s <= base.f:
        raise ValidationError(
            f"phase n_s={phase.n_s} out of range 1..{base.f} for synergy {phase.synergy!r}"
        )
    if phase.assignment.resolved_subset != base.subset:
        raise ValidationError(
            f"phase assignment subset {phase.assignment.resolved_subset.indices} does not "
            f"match synergy {phase.synergy!r} subset {base.subset.indices}"
        )
    return base


def validate_script(script: TaskScript, db: SynergyDatabase) -> None:
    for phase in script.phases:
        validate_phase(phase, db)


class RuntimeState:
    """Single-owner, serially-mutated state of one steering session."""

    def __init__(self, model: HandModel, initial_posture=None) -> None:
        self.model = model
        if initial_posture is None:
            self.current_posture = flat_posture(model)
        else:
            self.current_posture = clamp_posture(model, initial_posture)
        self.phase_index: int | None = None
        self.assignment: FunctionAssignment | None = None
        self.matrix: SynergyMatrix | None = None
        self.synergy_name: str | None = None
        self.frozen_values: dict[int, float] = {}
        self.coefficients: np.ndarray | None = None

    @property
    def frozen_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.frozen_values))


def begin_phase(state: RuntimeState, phase: Phase, db: SynergyDatabase) -> RuntimeState:
    """Activate a phase: snapshot the fixed joints, build the synergy matrix,
    and read off the current manipulation coefficients."""
    base = validate_phase(phase, db)
    if base.subset.dimension != state.model.d:
        raise ValidationError(
            f"synergy {phase.synergy!r} is over a {base.subset.dimension}-joint hand, "
            f"session hand has {state.model.d}"
        )
    S = synergy_matrix(base, phase.n_s)
    subset = phase.assignment.resolved_subset
    state.frozen_values = {
        i: float(state.current_posture[i - 1]) for i in subset.complement()
    }
    state.matrix = S
    state.assignment = phase.assignment
    state.synergy_name = phase.synergy
    state.phase_index = 0 if state.phase_index is None else state.phase_index + 1
    state.coefficients = coefficients(S, state.current_posture[subset.zero_based()])
    return state


def _compose_output(state: RuntimeState, subvector: np.ndarray) -> np.ndarray:
    subset = state.assignment.resolved_subset
    out = np.empty(state.model.d)
    out[subset.zero_based()] = subvector
    for idx, value in state.frozen_values.items():
        out[idx - 1] = value
    # Clamp after projection so in-span commands stay exact; frozen values are
    # already inside limits, so clipping leaves them bit-identical.
    out = clamp_posture(state.model, out)
    state.current_posture = out
    return out.copy()


def drive_with_posture(state: RuntimeState, commanded) -> np.ndarray:
    """Project the commanded subvector through the active synergy; frozen
    joints take their snapshot values no matter what was commanded."""
    if state.matrix is None or state.assignment is None:
        raise ValidationError("no active phase; call begin_phase first")
    cmd = as_vector(commanded, "commanded posture", size=state.model.d)
    sub = cmd[state.assignment.resolved_subset.zero_based()]
    z = coefficients(state.matrix, sub)
    state.coefficients = z
    return _compose_output(state, decode(state.matrix, z))


def drive_with_coefficients(state: RuntimeState, z) -> np.ndarray:
    """Drive the manipulation joints directly in synergy coordinates."""
    if state.matrix is None or state.assignment is None:
        raise ValidationError("no active phase; call begin_phase first")
    zv = as_vector(z, "coefficients", size=state.matrix.n_s)
    state.coefficients = zv.copy()
    return _compose_output(state, decode(state.matrix, zv))


def run_script(
    script: TaskScript,
    db: SynergyDatabase,
    inputs: Sequence,
    model: HandModel,
    initial_posture=None,
) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Run every phase over its input stream.

    ``inputs`` holds one stream of full commanded postures per phase; a
    fixed-step phase consumes exactly its step count (erroring if the stream
    is shorter), an external-signal phase consumes its whole stream. Returns
    the concatenated output trajectory and per-phase ``(start, end)`` row
    bounds.
    """
    validate_script(script, db)
    if len(inputs) != len(script.phases):
        raise ValidationError(
            f"script has {len(script.phases)} phases but got {len(inputs)} input streams"
        )
    state = RuntimeState(model, initial_posture)
    outputs: list[np.ndarray] = []
    boundaries: list[tuple[int, int]] = []
    for phase, stream in zip(script.phases, inputs):
        begin_phase(state, phase, db)
        stream = np.asarray(stream, dtype=np.float64)
        if phase.termination.kind == "fixed_steps":
            if stream.shape[0] < phase.termination.steps:
                raise StreamExhaustedError(
                    f"phase {state.phase_index} needs {phase.termination.steps} postures, "
                    f"stream has {stream.shape[0]}"
                )
            stream = stream[: phase.termination.steps]
        start = len(outputs)
        for row in stream:
            outputs.append(drive_with_posture(state, row))
        boundaries.append((start, len(outputs)))
    return np.array(outputs), boundaries


# --- task-script files -----------------------------------------------------


def _termination_to_dict(t: Termination) -> dict:
    doc: dict = {"kind": t.kind}
    if t.steps is not None:
        doc["steps"] = t.steps
    return doc


def script_to_dict(script: TaskScript) -> dict:
    return {
        "format": SCRIPT_FORMAT,
        "version": 1,
        "name": script.name,
        "phases": [
            {
                "assignment": {
                    "functions": str(p.assignment.functions),
                    "joint_overrides": dict(p.assignment.joint_overrides),
                },
                "synergy": p.synergy,
                "n_s": p.n_s,
                "termination": _termination_to_dict(p.termination),
            }
            for p in script.phases
        ],
    }


def script_from_dict(doc: Mapping, model: HandModel) -> TaskScript:
    """Parse a script document, resolving assignments against ``model``.

    A phase assignment is either a bare five-symbol M/F string or an object
    with ``functions`` and optional ``joint_overrides``.
    """
    try:
        if doc.get("format") != SCRIPT_FORMAT:
            raise FileFormatError(f"not a task script (format={doc.get('format')!r})")
        phases = []
        for item in doc["phases"]:
            raw = item["assignment"]
            if isinstance(raw, str):
                assignment = FunctionAssignment.resolve(model, raw)
            else:
                assignment = FunctionAssignment.resolve(
                    model, raw["functions"], raw.get("joint_overrides")
                )
            term = item["termination"]
            phases.append(
                Phase(
                    assignment=assignment,
                    synergy=str(item["synergy"]),
                    n_s=int(item["n_s"]),
                    termination=Termination(term["kind"], term.get("steps")),
                )
            )
        return TaskScript(name=str(doc["name"]), phases=tuple(phases))
    except FileFormatError:
        raise
    except KeyError as exc:
        raise FileFormatError(f"task script missing key {exc.args[0]!r}") from exc
    except Exception as exc:
        raise FileFormatError(f"invalid task script: {exc}") from exc


def save_task_script(script: TaskScript, path) -> None:
    dataio.write_json(script_to_dict(script), path)


def load_task_script(path, model: HandModel) -> TaskScript:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return script_from_dict(doc, model)
    except FileFormatError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
