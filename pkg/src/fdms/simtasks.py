"""Synthetic datasets, simulated tasks, and success-rate evaluation.

The harness mirrors a tabletop protocol at desk scale: a grasp dataset of 33
target postures approached from the flat hand, twenty recordings each of a
scissors open/close task and a switch press task, explicit success predicates
over output trajectories, and a sweep of task success rate against the number
of retained synergy components. All randomness flows from one seed, so every
dataset, report, and chart is reproducible byte for byte.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import dataio
from .build import FDMSModel, FunctionAssignment
from .errors import FileFormatError, ValidationError
from .hand import Finger, HandModel, JointKind, clamp_posture
from .switching import (
    Phase,
    SynergyDatabase,
    SynergyKind,
    TaskScript,
    Termination,
    base_model,
    run_script,
)
from .synergy import PostureSequence

TASK_FORMAT = "fdms-task"

#: Interpolation steps per grasp target.
GRASP_RAMP_STEPS = 10
#: Targets in the synthetic grasp family set.
GRASP_TARGET_COUNT = 33

#: Per-step jitter on ramping/moving joints (radians), clipped at two sigma.
MOVE_JITTER_SIGMA = 0.02
#: Per-step jitter on joints that are being held, kept well inside the
#: predicates' hold tolerance.
HOLD_JITTER_SIGMA = 0.005


class TaskKind(enum.Enum):
    SCISSORS = "scissors"
    SWITCH = "switch"


@dataclass(frozen=True)
class TaskSpec:
    """Predicate parameters and generator layout for one simulated task.

    All thresholds live in the task file, not in code. Joint references are
    resolved against a hand model at load time; indices are 1-based.
    """

    kind: TaskKind
    functions: str
    joint_functions: tuple[tuple[str, str], ...]
    hold_tolerance: float
    hold_joints: tuple[int, ...]
    grasp_steps: int
    manip_steps: int
    script: str
    # scissors predicate
    open_amplitude: float = 0.0
    cycles: int = 0
    opposition: tuple[int, int] = (0, 0)
    # switch predicate
    press_threshold: float = 0.0
    press_joint: int = 0

    def __post_init__(self) -> None:
        if self.hold_tolerance <= 0:
            raise ValidationError("hold tolerance must be > 0")
        if self.kind is TaskKind.SCISSORS:
            if self.open_amplitude <= 0 or self.cycles < 1:
                raise ValidationError("scissors task needs open_amplitude > 0 and cycles >= 1")
        else:
            if self.press_threshold <= 0:
                raise ValidationError("switch task needs press_threshold > 0")
        if self.grasp_steps < 1 or self.manip_steps < 1:
            raise ValidationError("segment step counts must be >= 1")

    def assignment(self, model: HandModel) -> FunctionAssignment:
        return FunctionAssignment.resolve(
            model, self.functions, dict(self.joint_functions)
        )


def load_task_spec(kind: TaskKind | str, model: HandModel) -> TaskSpec:
    """Load one of the bundled task files."""
    kind = TaskKind(kind) if isinstance(kind, str) else kind
    text = resources.files("fdms._data").joinpath(f"task_{kind.value}.json").read_text()
    return task_spec_from_dict(json.loads(text), model)


def load_task_spec_file(path, model: HandModel) -> TaskSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON: {exc}") from exc
    return task_spec_from_dict(doc, model)


def task_spec_from_dict(doc: dict, model: HandModel) -> TaskSpec:
    try:
        if doc.get("format") != TASK_FORMAT:
            raise FileFormatError(f"not a task document (format={doc.get('format')!r})")
        kind = TaskKind(doc["kind"])
        pred = doc["predicate"]
        gen = doc["generator"]
        common = dict(
            kind=kind,
            functions=str(doc["functions"]),
            joint_functions=tuple(sorted(dict(doc["joint_functions"]).items())),
            hold_tolerance=float(pred["hold_tolerance"]),
            hold_joints=tuple(model.joint_index(n) for n in pred["hold_joints"]),
            grasp_steps=int(gen["grasp_steps"]),
            manip_steps=int(gen["manip_steps"]),
            script=str(doc.get("script", "")),
        )
        if kind is TaskKind.SCISSORS:
            a, b = pred["opposition"]
            return TaskSpec(
                open_amplitude=float(pred["open_amplitude"]),
                cycles=int(pred["cycles"]),
                opposition=(model.joint_index(a), model.joint_index(b)),
                **common,
            )
        return TaskSpec(
            press_threshold=float(pred["press_threshold"]),
            press_joint=model.joint_index(pred["press_joint"]),
            **common,
        )
    except FileFormatError:
        raise
    except KeyError as exc:
        raise FileFormatError(f"task document missing key {exc.args[0]!r}") from exc
    except Exception as exc:
        raise FileFormatError(f"invalid task document: {exc}") from exc


# --- dataset synthesis ------------------------------------------------------


def _jitter(rng: np.random.Generator, size: int, sigma: float) -> np.ndarray:
    return np.clip(rng.normal(0.0, sigma, size), -2 * sigma, 2 * sigma)


def _target_from_curls(
    model: HandModel, thumb_rotation: float, curls: dict[Finger, float]
) -> np.ndarray:
    """Joint-space target: rotation joints take the rotation value, MCP joints
    curl * limit, PIP joints flex slightly less than their MCP."""
    target = np.zeros(model.d)
    for finger, idxs in model.finger_joints.items():
        curl = curls[finger]
        for idx in idxs:
            joint = model.joints[idx - 1]
            if joint.kind is JointKind.ROTATION:
                target[idx - 1] = thumb_rotation
            elif joint.kind is JointKind.MCP:
                target[idx - 1] = curl * joint.limit_hi
            else:
                target[idx - 1] = 0.8 * curl * joint.limit_hi
    return target


def _grasp_targets(model: HandModel, rng: np.random.Generator) -> list[np.ndarray]:
    """33 grasp targets drawn from three families (power, precision, lateral).

    Thumb rotation spans a wide range across families while thumb flexion
    stays moderate, so the dominant thumb-subspace coordination is rotation.
    """
    fingers = list(model.finger_joints)
    targets = []

    def draw(rot_range, thumb_curl, index_mid, ring_pinky):
        rot = rng.uniform(*rot_range)
        curls = {}
        for finger in fingers:
            if finger is Finger.THUMB:
                curls[finger] = rng.uniform(*thumb_curl)
            elif finger in (Finger.INDEX, Finger.MIDDLE):
                curls[finger] = rng.uniform(*index_mid)
            else:
                curls[finger] = rng.uniform(*ring_pinky)
        return _target_from_curls(model, rot, curls)

    for _ in range(11):  # power: everything wraps around the object
        targets.append(draw((0.3, 1.1), (0.10, 0.30), (0.55, 0.95), (0.55, 0.95)))
    for _ in range(11):  # precision: fingertip grip, ulnar fingers relaxed
        targets.append(draw((-0.1, 0.5), (0.08, 0.25), (0.35, 0.70), (0.10, 0.40)))
    for _ in range(11):  # lateral: thumb opposes the side of the index
        targets.append(draw((-0.7, 0.0), (0.10, 0.28), (0.30, 0.80), (0.20, 0.55)))
    return targets


def synthesize_grasp_dataset(model: HandModel, seed: int) -> PostureSequence:
    """Ramps from the flat hand to 33 grasp targets, 10 steps each, with
    small per-joint jitter. Deterministic per seed."""
    rng = np.random.default_rng(seed)
    targets = _grasp_targets(model, rng)
    rows = []
    for target in targets:
        for t in np.linspace(0.0, 1.0, GRASP_RAMP_STEPS):
            row = t * target + _jitter(rng, model.d, MOVE_JITTER_SIGMA)
            rows.append(clamp_posture(model, row))
    return PostureSequence(
        np.array(rows), model.joint_names, provenance=f"synthetic-grasp-seed{seed}"
    )


def _entry_posture(kind: TaskKind, model: HandModel, rng: np.random.Generator) -> np.ndarray:
    by_name = {
        TaskKind.SCISSORS: {
            "Thumb rot.": 0.5, "Thumb MCP": 0.45,
            "Index MCP": 0.55, "Index PIP": 0.35,
            "Middle MCP": 0.55, "Middle PIP": 0.35,
            "Ring MCP": 0.8, "Ring PIP": 0.6,
            "Pinky MCP": 0.8, "Pinky PIP": 0.6,
        },
        TaskKind.SWITCH: {
            "Thumb rot.": 0.3, "Thumb MCP": 0.25,
            "Index MCP": 0.7, "Index PIP": 0.5,
            "Middle MCP": 0.7, "Middle PIP": 0.5,
            "Ring MCP": 0.7, "Ring PIP": 0.5,
            "Pinky MCP": 0.7, "Pinky PIP": 0.5,
        },
    }[kind]
    entry = np.array([by_name[j.name] for j in model.joints])
    entry = entry + rng.uniform(-0.05, 0.05, model.d)
    return clamp_posture(model, entry)


def synthesize_task_sequences(
    spec: TaskSpec, model: HandModel, seed: int, count: int
) -> list[PostureSequence]:
    """Seeded task recordings: a grasp ramp into the tool-holding posture,
    then the manipulation segment (scissors oscillation or switch press).

    Held joints carry much smaller jitter than moving ones so they stay well
    inside the hold tolerance of the success predicates.
    """
    if count < 2:
        raise ValidationError(f"need at least 2 sequences, got {count}")
    rng = np.random.default_rng(seed)
    moving = _moving_joint_profile(spec, model)
    sequences = []
    for run in range(count):
        entry = _entry_posture(spec.kind, model, rng)
        rows = []
        for t in np.linspace(0.0, 1.0, spec.grasp_steps):
            row = t * entry + _jitter(rng, model.d, MOVE_JITTER_SIGMA)
            rows.append(clamp_posture(model, row))
        for u in np.linspace(0.0, 1.0, spec.manip_steps):
            row = entry.copy()
            for idx0, profile in moving.items():
                row[idx0] += profile(u)
            jit = _jitter(rng, model.d, HOLD_JITTER_SIGMA)
            for idx0 in moving:
                jit[idx0] = _jitter(rng, 1, MOVE_JITTER_SIGMA)[0]
            rows.append(clamp_posture(model, row + jit))
        sequences.append(
            PostureSequence(
                np.array(rows),
                model.joint_names,
                provenance=f"synthetic-{spec.kind.value}-seed{seed}-run{run}",
            )
        )
    return sequences


def _moving_joint_profile(
    spec: TaskSpec, model: HandModel
) -> dict[int, Callable[[float], float]]:
    """0-based joint index -> offset from the entry posture as a function of
    normalized manipulation time."""
    idx = {j.name: i for i, j in enumerate(model.joints)}
    if spec.kind is TaskKind.SCISSORS:
        amp, cycles = 0.3, 3

        def osc(scale):
            return lambda u: scale * amp * np.sin(2 * np.pi * cycles * u)

        return {
            idx["Thumb rot."]: osc(0.4),
            idx["Thumb MCP"]: osc(1.0),
            idx["Index MCP"]: osc(-1.0),
            idx["Index PIP"]: osc(-0.5),
            idx["Middle MCP"]: osc(-1.0),
            idx["Middle PIP"]: osc(-0.5),
        }
    press_to = 1.1

    def press(scale):
        return lambda u: scale * np.sin(np.pi * u)

    return {
        idx["Thumb MCP"]: press(press_to - 0.25),
        idx["Thumb rot."]: press(0.1),
    }


def split_fit_eval(
    sequences: Sequence[PostureSequence],
) -> tuple[list[PostureSequence], list[PostureSequence]]:
    """Even indices fit the synergies, odd indices are held out for
    evaluation."""
    fit = [s for i, s in enumerate(sequences) if i % 2 == 0]
    hold = [s for i, s in enumerate(sequences) if i % 2 == 1]
    return fit, hold


# --- success predicates -----------------------------------------------------


def _manip_segment(trajectory: np.ndarray, spec: TaskSpec) -> np.ndarray:
    traj = np.asarray(trajectory, dtype=np.float64)
    if traj.ndim != 2 or traj.shape[0] == 0:
        raise ValidationError("trajectory must be a nonempty 2-D array")
    if traj.shape[0] > spec.grasp_steps:
        return traj[spec.grasp_steps :]
    return traj


def _holds(segment: np.ndarray, spec: TaskSpec) -> bool:
    entry = segment[0]
    for idx in spec.hold_joints:
        if np.any(np.abs(segment[:, idx - 1] - entry[idx - 1]) > spec.hold_tolerance):
            return False
    return True


def scissors_success(trajectory, spec: TaskSpec) -> bool:
    """Open/close the blades the required number of times while the ulnar
    fingers keep their grip.

    The opposition signal is the difference of the two designated joints,
    relative to its value at manipulation entry; one cycle is a rise above
    the open amplitude followed by a fall below its negative.
    """
    seg = _manip_segment(trajectory, spec)
    a, b = spec.opposition
    signal = seg[:, a - 1] - seg[:, b - 1]
    rel = signal - signal[0]
    count, armed = 0, False
    for value in rel:
        if not armed and value >= spec.open_amplitude:
            armed = True
        elif armed and value <= -spec.open_amplitude:
            count += 1
            armed = False
    return count >= spec.cycles and _holds(seg, spec)


def switch_success(trajectory, spec: TaskSpec) -> bool:
    """Press the switch past its travel threshold while every other finger
    keeps the grasp."""
    seg = _manip_segment(trajectory, spec)
    pressed = bool(np.any(seg[:, spec.press_joint - 1] >= spec.press_threshold))
    return pressed and _holds(seg, spec)


def success_predicate(spec: TaskSpec) -> Callable[[np.ndarray, TaskSpec], bool]:
    return scissors_success if spec.kind is TaskKind.SCISSORS else switch_success


# --- evaluation -------------------------------------------------------------

#: Database entry name used for the grasping phase of every evaluation run.
GRASP_ENTRY = "grasp"


def standard_entry_names(spec: TaskSpec) -> dict[SynergyKind, str]:
    """Conventional database names used by the evaluation harness."""
    return {
        SynergyKind.GRASP: GRASP_ENTRY,
        SynergyKind.TASK_SPECIFIC: f"ts_{spec.kind.value}",
        SynergyKind.FDMS: f"fdms_{spec.functions}",
    }


def _eval_script(
    spec: TaskSpec,
    db: SynergyDatabase,
    entry_name: str,
    n_s: int,
    model: HandModel,
) -> TaskScript:
    """Two phases: full-rank grasp synergy for the approach, then the synergy
    under test (at the swept component count) for the manipulation."""
    entry = db.lookup(entry_name)
    grasp_base = base_model(db.lookup(GRASP_ENTRY).model)
    all_m = FunctionAssignment.resolve(model, "MMMMM")
    if isinstance(entry.model, FDMSModel):
        manip_assignment = entry.model.assignment
    else:
        manip_assignment = all_m
    return TaskScript(
        name=f"eval-{spec.kind.value}-{entry_name}-ns{n_s}",
        phases=(
            Phase(
                assignment=all_m,
                synergy=GRASP_ENTRY,
                n_s=grasp_base.f,
                termination=Termination.fixed(spec.grasp_steps),
            ),
            Phase(
                assignment=manip_assignment,
                synergy=entry_name,
                n_s=n_s,
                termination=Termination.fixed(spec.manip_steps),
            ),
        ),
    )


def evaluate_success_rate(
    spec: TaskSpec,
    db: SynergyDatabase,
    entry_name: str,
    eval_sequences: Sequence[PostureSequence],
    n_s: int,
    model: HandModel,
) -> tuple[int, int]:
    """Replay each held-out sequence through the switching runtime and apply
    the task predicate. Returns (successes, trials)."""
    predicate = success_predicate(spec)
    script = _eval_script(spec, db, entry_name, n_s, model)
    successes = 0
    for seq in eval_sequences:
        if seq.n != spec.grasp_steps + spec.manip_steps:
            raise ValidationError(
                f"evaluation sequence has {seq.n} rows, expected "
                f"{spec.grasp_steps + spec.manip_steps}"
            )
        streams = [seq.data[: spec.grasp_steps], seq.data[spec.grasp_steps :]]
        trajectory, _ = run_script(script, db, streams, model)
        if predicate(trajectory, spec):
            successes += 1
    return successes, len(eval_sequences)


@dataclass(frozen=True)
class ReportRow:
    task: str
    synergy_kind: str
    synergy_name: str
    n_s: int
    trials: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials


@dataclass(frozen=True)
class EvaluationReport:
    task: str
    rows: tuple[ReportRow, ...]
    dataset_hash: str
    seed: int

    def series(self) -> dict[str, list[tuple[int, float]]]:
        out: dict[str, list[tuple[int, float]]] = {}
        for row in self.rows:
            out.setdefault(row.synergy_kind, []).append((row.n_s, row.rate))
        return out


def sweep_components(
    spec: TaskSpec,
    db: SynergyDatabase,
    eval_sequences: Sequence[PostureSequence],
    model: HandModel,
    seed: int,
    entry_names: dict[SynergyKind, str] | None = None,
) -> EvaluationReport:
    """Success rate for every synergy kind at every admissible component
    count."""
    names = entry_names or standard_entry_names(spec)
    eval_hash = dataio.content_hash(
        b"".join(seq.canonical_bytes() for seq in eval_sequences)
    )
    rows = []
    for kind in (SynergyKind.GRASP, SynergyKind.TASK_SPECIFIC, SynergyKind.FDMS):
        name = names[kind]
        f = base_model(db.lookup(name).model).f
        for n_s in range(1, f + 1):
            successes, trials = evaluate_success_rate(
                spec, db, name, eval_sequences, n_s, model
            )
            rows.append(
                ReportRow(
                    task=spec.kind.value,
                    synergy_kind=kind.value,
                    synergy_name=name,
                    n_s=n_s,
                    trials=trials,
                    successes=successes,
                )
            )
    return EvaluationReport(
        task=spec.kind.value, rows=tuple(rows), dataset_hash=eval_hash, seed=seed
    )


def report_to_csv(report: EvaluationReport) -> str:
    lines = ["task,synergy_kind,synergy_name,n_s,trials,successes,rate"]
    for row in report.rows:
        lines.append(
            f"{row.task},{row.synergy_kind},{row.synergy_name},{row.n_s},"
            f"{row.trials},{row.successes},{row.rate!r}"
        )
    lines.append(f"# dataset_hash={report.dataset_hash} seed={report.seed}")
    return "\n".join(lines) + "\n"


_SERIES_COLORS = {
    "grasp": "#1f77b4",
    "task-specific": "#2ca02c",
    "fdms": "#d62728",
}


def report_to_svg(report: EvaluationReport) -> str:
    """Deterministic line chart: success rate against retained components,
    one series per synergy kind."""
    width, height = 640, 420
    left, right, top, bottom = 60, 20, 40, 50
    plot_w, plot_h = width - left - right, height - top - bottom
    max_ns = max(row.n_s for row in report.rows)

    def sx(n_s: int) -> float:
        if max_ns == 1:
            return left + plot_w / 2
        return left + (n_s - 1) / (max_ns - 1) * plot_w

    def sy(rate: float) -> float:
        return top + (1.0 - rate) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{report.task} task: success rate vs retained components</text>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" '
        f'stroke="black"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = sy(tick)
        parts.append(
            f'<line x1="{left - 4}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick:g}</text>'
        )
    for n_s in range(1, max_ns + 1):
        x = sx(n_s)
        parts.append(
            f'<line x1="{x:.1f}" y1="{top + plot_h}" x2="{x:.1f}" y2="{top + plot_h + 4}" '
            f'stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{top + plot_h + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{n_s}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">retained components</text>'
    )
    legend_y = top + 8
    for kind, points in report.series().items():
        color = _SERIES_COLORS.get(kind, "#7f7f7f")
        coords = " ".join(f"{sx(n):.1f},{sy(r):.1f}" for n, r in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for n, r in points:
            parts.append(
                f'<circle cx="{sx(n):.1f}" cy="{sy(r):.1f}" r="3" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{left + plot_w - 4}" y="{legend_y}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12" fill="{color}">{kind}</text>'
        )
        legend_y += 16
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def save_report(report: EvaluationReport, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"report_{report.task}.csv"
    svg_path = out / f"report_{report.task}.svg"
    csv_path.write_text(report_to_csv(report))
    svg_path.write_text(report_to_svg(report))
    return csv_path, svg_path
