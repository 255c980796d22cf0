"""Command-line entry points for the full pipeline.

Every command is a thin composition of library operations. Success exits 0;
any failure prints a single ``error: <Type>: <message>`` line on stderr and
exits 1.
"""

from __future__ import annotations

import functools
import json
import re
import sys
from pathlib import Path

import click

from . import dataio, simtasks
from .build import FDMSModel, FunctionAssignment, build_fdms, build_task_specific
from .errors import FDMSError
from .hand import default_hand_model
from .notation import (
    decompose_unit,
    fdms_unit_catalog,
    kamakura_catalog,
    parse_movement_unit,
)
from .switching import SynergyDatabase, SynergyKind, base_model
from .synergy import (
    Centering,
    JointSubset,
    approximate_sequence,
    concatenate,
    extract_subvector,
    synergy_matrix,
)

_FUNCTIONS_RE = re.compile(r"^[MF]{5}$")


def _fail(exc: BaseException) -> None:
    click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
    sys.exit(1)


def command_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FDMSError as exc:
            _fail(exc)
        except OSError as exc:
            _fail(exc)

    return wrapper


def _load_model(model_path: str | None):
    if model_path is None:
        return default_hand_model()
    return dataio.load_hand_model_file(model_path)


@click.group()
def main() -> None:
    """Functionally divided manipulation synergies."""


@main.command("fit")
@click.option("--data", "data_paths", multiple=True, required=True, type=click.Path(exists=True), help="Posture CSV; repeat to concatenate recordings.")
@click.option("--assignment", "assignment_spec", required=True, help="Five-symbol M/F string or an assignment JSON file.")
@click.option("--centering", type=click.Choice(["centered", "uncentered"]), default="centered", show_default=True)
@click.option("--model", "model_path", type=click.Path(exists=True), default=None, help="Hand model JSON (default: bundled 10-DoF hand).")
@click.option("--out", "out_path", required=True, type=click.Path())
@command_errors
def fit_cmd(data_paths, assignment_spec, centering, model_path, out_path) -> None:
    """Fit a synergy from posture data under a function assignment."""
    sequences = [dataio.load_posture_csv(p) for p in data_paths]
    mode = Centering(centering)

    if _FUNCTIONS_RE.match(assignment_spec):
        functions, overrides = assignment_spec, None
    else:
        doc = json.loads(Path(assignment_spec).read_text())
        functions, overrides = doc["functions"], doc.get("joint_overrides")

    if functions == "MMMMM" and not overrides:
        model = build_task_specific(sequences, mode)
    else:
        hand = _load_model(model_path)
        assignment = FunctionAssignment.resolve(hand, functions, overrides)
        seq = sequences[0] if len(sequences) == 1 else concatenate(sequences)
        model = build_fdms(seq, assignment, mode)
    dataio.save_synergy(model, out_path)
    click.echo(f"wrote {out_path}")


@main.command("approx")
@click.option("--synergy", "synergy_path", required=True, type=click.Path(exists=True))
@click.option("--ns", "n_s", required=True, type=int)
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@command_errors
def approx_cmd(synergy_path, n_s, data_path, out_path) -> None:
    """Batch-project a posture CSV through a synergy's leading components."""
    model = dataio.load_synergy(synergy_path)
    base = base_model(model)
    seq = dataio.load_posture_csv(data_path)
    if seq.joint_names != base.joint_names:
        if set(base.joint_names) <= set(seq.joint_names):
            cols = tuple(
                seq.joint_names.index(name) + 1 for name in base.joint_names
            )
            seq = extract_subvector(seq, JointSubset(tuple(sorted(cols)), seq.d))
            if seq.joint_names != base.joint_names:
                _fail(FDMSError("data columns cannot be reordered to match the synergy"))
        else:
            _fail(FDMSError("data joint names do not cover the synergy's joints"))
    S = synergy_matrix(base, n_s)
    dataio.save_posture_csv(approximate_sequence(S, seq), out_path)
    click.echo(f"wrote {out_path}")


@main.command("eval")
@click.option("--task", required=True, type=click.Choice(["scissors", "switch"]))
@click.option("--db", "db_path", required=True, type=click.Path(exists=True))
@click.option("--seed", required=True, type=int)
@click.option("--count", default=20, show_default=True, type=int, help="Task recordings to synthesize (half held out for evaluation).")
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@command_errors
def eval_cmd(task, db_path, seed, count, model_path, out_dir) -> None:
    """Sweep success rate against retained components; emit CSV + SVG."""
    hand = _load_model(model_path)
    db = SynergyDatabase.load(db_path)
    spec = simtasks.load_task_spec(task, hand)
    sequences = simtasks.synthesize_task_sequences(spec, hand, seed, count)
    _, eval_seqs = simtasks.split_fit_eval(sequences)
    report = simtasks.sweep_components(spec, db, eval_seqs, hand, seed)
    csv_path, svg_path = simtasks.save_report(report, out_dir)
    click.echo(f"wrote {csv_path}")
    click.echo(f"wrote {svg_path}")


@main.group("units")
def units_group() -> None:
    """Movement-unit and function-unit catalogs."""


@units_group.command("list")
@click.option("--json", "as_json", is_flag=True, default=False)
@command_errors
def units_list(as_json) -> None:
    """Print the 12 function units and the 16 frequent movement units."""
    fdms_units = fdms_unit_catalog()
    kamakura = kamakura_catalog()
    if as_json:
        doc = {
            "fdms_units": [str(u) for u in fdms_units],
            "kamakura": [
                {"unit": str(e.unit), "frequency_percent": e.frequency_percent}
                for e in kamakura
            ],
        }
        click.echo(json.dumps(doc, indent=2))
        return
    click.echo("FDMS units")
    for i, unit in enumerate(fdms_units, start=1):
        click.echo(f"  {i:>2}  {unit}")
    click.echo("Movement units (frequency %)")
    for entry in kamakura:
        click.echo(f"  {entry.unit}  {entry.frequency_percent:>5.1f}")
    total = sum(e.frequency_percent for e in kamakura)
    click.echo(f"  Total  {total:>5.1f}")


@main.command("decompose")
@click.argument("unit")
@command_errors
def decompose_cmd(unit) -> None:
    """Split a movement unit into single-group units."""
    parts = decompose_unit(parse_movement_unit(unit))
    click.echo(" ".join(str(p) for p in parts))


@main.group("db")
def db_group() -> None:
    """Synergy database maintenance."""


@db_group.command("register")
@click.option("--db", "db_path", required=True, type=click.Path())
@click.option("--name", required=True)
@click.option("--synergy", "synergy_path", required=True, type=click.Path(exists=True))
@click.option("--kind", type=click.Choice([k.value for k in SynergyKind]), default=None, help="Default: fdms for FDMS files, grasp otherwise.")
@command_errors
def db_register(db_path, name, synergy_path, kind) -> None:
    """Add a synergy file to a database directory (created if missing)."""
    path = Path(db_path)
    db = SynergyDatabase.load(path) if (path / "index.json").exists() else SynergyDatabase()
    model = dataio.load_synergy(synergy_path)
    db.register(name, model, SynergyKind(kind) if kind else None)
    db.save(path)
    click.echo(f"registered {name} ({len(db)} entries)")


@db_group.command("list")
@click.option("--db", "db_path", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, default=False)
@command_errors
def db_list(db_path, as_json) -> None:
    """List database entries."""
    db = SynergyDatabase.load(db_path)
    entries = [
        {
            "name": e.name,
            "kind": e.kind.value,
            "label": e.model.label if isinstance(e.model, FDMSModel) else None,
            "f": base_model(e.model).f,
        }
        for e in db.entries()
    ]
    if as_json:
        click.echo(json.dumps(entries, indent=2))
        return
    for e in entries:
        label = e["label"] or "-"
        click.echo(f"  {e['name']:<20} {e['kind']:<14} {label:<6} f={e['f']}")


@main.command("gen")
@click.option("--kind", required=True, type=click.Choice(["grasp", "scissors", "switch"]))
@click.option("--seed", required=True, type=int)
@click.option("--count", default=20, show_default=True, type=int, help="Sequences to generate (task kinds only).")
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", required=True, type=click.Path(), help="CSV path for grasp; directory for task kinds.")
@command_errors
def gen_cmd(kind, seed, count, model_path, out_path) -> None:
    """Synthesize the seeded grasp dataset or task recordings."""
    hand = _load_model(model_path)
    if kind == "grasp":
        seq = simtasks.synthesize_grasp_dataset(hand, seed)
        dataio.save_posture_csv(seq, out_path)
        click.echo(f"wrote {out_path} ({seq.n}x{seq.d})")
        return
    spec = simtasks.load_task_spec(kind, hand)
    sequences = simtasks.synthesize_task_sequences(spec, hand, seed, count)
    out_dir = Path(out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, seq in enumerate(sequences):
        target = out_dir / f"{kind}_{i:02d}.csv"
        dataio.save_posture_csv(seq, target)
    click.echo(f"wrote {len(sequences)} sequences under {out_dir}")


@main.command("serve")
@click.option("--db", "db_path", required=True, type=click.Path(exists=True))
@click.option("--port", required=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None, help="Static UI bundle to serve at / (default: auto-detect frontend/dist).")
@command_errors
def serve_cmd(db_path, port, host, model_path, ui_dir) -> None:
    """Run the live-steering HTTP/WebSocket service."""
    import uvicorn

    from .service import create_app

    app = create_app(
        db=SynergyDatabase.load(db_path),
        model=_load_model(model_path),
        ui_dir=ui_dir,
    )
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
