"""File formats: posture CSV, synergy JSON, hand-model JSON, content hashes.

Everything is radians; no other angle unit is accepted anywhere. Floats are
written with Python's shortest round-trip representation, so save/load is
lossless, and every load re-validates the full type invariants — files are
never trusted.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ._hash import HASH_ALGORITHM, content_hash
from .build import FDMSModel, FunctionAssignment
from .errors import FileFormatError
from .hand import HandModel, load_hand_model
from .notation import FunctionUnit
from .synergy import Centering, JointSubset, PostureSequence, SynergyModel

__all__ = [
    "HASH_ALGORITHM",
    "content_hash",
    "load_posture_csv",
    "save_posture_csv",
    "load_synergy",
    "save_synergy",
    "synergy_to_dict",
    "synergy_from_dict",
    "assignment_to_dict",
    "assignment_from_dict",
    "load_hand_model_file",
    "write_json",
]

SYNERGY_FORMAT = "fdms-synergy"


def save_posture_csv(seq: PostureSequence, path) -> None:
    """Header row of joint names, then one posture per row in radians."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(seq.joint_names)
        for row in seq.data:
            writer.writerow([repr(float(v)) for v in row])


def load_posture_csv(path) -> PostureSequence:
    """Parse a posture CSV, naming the exact cell on any bad value."""
    path = Path(path)
    with path.open("r", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]  # tolerate a trailing blank line
    if not rows:
        raise FileFormatError(f"{path}: file is empty")
    header = [c.strip() for c in rows[0]]
    if not header or any(not name for name in header):
        raise FileFormatError(f"{path}: header row must name every joint")
    width = len(header)
    if len(rows) < 2:
        raise FileFormatError(f"{path}: no posture rows after the header")

    data = np.empty((len(rows) - 1, width))
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != width:
            raise FileFormatError(
                f"{path}: row {r} has {len(row)} cells, expected {width}"
            )
        for c, cell in enumerate(row, start=1):
            try:
                data[r - 1, c - 1] = float(cell)
            except ValueError:
                raise FileFormatError(
                    f"{path}: non-numeric cell at row {r}, column {c} ({cell!r})"
                ) from None
    try:
        return PostureSequence(data, tuple(header), provenance=str(path))
    except Exception as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def assignment_to_dict(assignment: FunctionAssignment) -> dict:
    return {
        "functions": str(assignment.functions),
        "joint_overrides": dict(assignment.joint_overrides),
        "resolved_subset": {
            "indices": list(assignment.resolved_subset.indices),
            "dimension": assignment.resolved_subset.dimension,
        },
    }


def assignment_from_dict(doc: dict) -> FunctionAssignment:
    try:
        subset = JointSubset(
            tuple(doc["resolved_subset"]["indices"]),
            int(doc["resolved_subset"]["dimension"]),
        )
        return FunctionAssignment(
            functions=FunctionUnit(doc["functions"]),
            resolved_subset=subset,
            joint_overrides=tuple(sorted(dict(doc.get("joint_overrides", {})).items())),
        )
    except FileFormatError:
        raise
    except KeyError as exc:
        raise FileFormatError(f"assignment block missing key {exc.args[0]!r}") from exc
    except Exception as exc:
        raise FileFormatError(f"invalid assignment block: {exc}") from exc


def synergy_to_dict(model: SynergyModel | FDMSModel) -> dict:
    """JSON document for a synergy; FDMS adds its label and assignment."""
    base = model.base if isinstance(model, FDMSModel) else model
    doc = {
        "format": SYNERGY_FORMAT,
        "version": 1,
        "hash_algorithm": HASH_ALGORITHM,
        "kind": "fdms" if isinstance(model, FDMSModel) else "synergy",
        "subset": {
            "indices": list(base.subset.indices),
            "dimension": base.subset.dimension,
        },
        "joint_names": list(base.joint_names),
        "mean": [float(v) for v in base.mean],
        "eigenvectors": {
            "rows": base.f,
            "cols": base.f,
            "data": [float(v) for v in np.asarray(base.eigenvectors).ravel(order="C")],
        },
        "eigenvalues": [float(v) for v in base.eigenvalues],
        "centering": base.centering.value,
        "source_hash": base.source_hash,
    }
    if isinstance(model, FDMSModel):
        doc["label"] = model.label
        doc["assignment"] = assignment_to_dict(model.assignment)
    return doc


def synergy_from_dict(doc: dict) -> SynergyModel | FDMSModel:
    try:
        if doc.get("format") != SYNERGY_FORMAT:
            raise FileFormatError(f"not a synergy document (format={doc.get('format')!r})")
        subset = JointSubset(tuple(doc["subset"]["indices"]), int(doc["subset"]["dimension"]))
        vec_block = doc["eigenvectors"]
        rows, cols = int(vec_block["rows"]), int(vec_block["cols"])
        flat = np.asarray(vec_block["data"], dtype=np.float64)
        if flat.size != rows * cols:
            raise FileFormatError(
                f"eigenvector block declares {rows}x{cols} but carries {flat.size} values"
            )
        base = SynergyModel(
            subset=subset,
            mean=np.asarray(doc["mean"], dtype=np.float64),
            eigenvectors=flat.reshape(rows, cols),
            eigenvalues=np.asarray(doc["eigenvalues"], dtype=np.float64),
            centering=Centering(doc["centering"]),
            source_hash=str(doc["source_hash"]),
            joint_names=tuple(doc["joint_names"]),
        )
        if doc["kind"] == "fdms":
            assignment = assignment_from_dict(doc["assignment"])
            return FDMSModel(base=base, assignment=assignment, label=str(doc.get("label", "")))
        return base
    except FileFormatError:
        raise
    except KeyError as exc:
        raise FileFormatError(f"synergy document missing key {exc.args[0]!r}") from exc
    except Exception as exc:
        raise FileFormatError(f"invalid synergy document: {exc}") from exc


def write_json(doc: dict, path) -> None:
    """Deterministic JSON serialization used for every JSON artifact."""
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def save_synergy(model: SynergyModel | FDMSModel, path) -> None:
    write_json(synergy_to_dict(model), path)


def load_synergy(path) -> SynergyModel | FDMSModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return synergy_from_dict(doc)
    except FileFormatError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def load_hand_model_file(path) -> HandModel:
    path = Path(path)
    return load_hand_model(path.read_text())
