"""Five-symbol movement-unit notation and finger-function assignment.

A movement unit encodes one segment of an object-handling motion as five
symbols, thumb through pinky. ``O`` marks a motionless finger; ``X``, ``Y``
and ``Z`` mark up to three distinct motion groups, assigned in scan order:
the first moving finger gets ``X``, the first finger moving differently gets
``Y``, and a third distinct motion gets ``Z``. Function units relabel fingers
as ``M`` (manipulation) or ``F`` (fixed); every motion group maps to ``M``
and ``O`` maps to ``F``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import (
    InvalidSymbolError,
    MultiGroupError,
    NonCanonicalUnitError,
    ValidationError,
)

if TYPE_CHECKING:
    from .hand import HandModel
    from .synergy import JointSubset

MOTION_SYMBOLS = "XYZ"
UNIT_LENGTH = 5


@dataclass(frozen=True)
class MovementUnit:
    """Canonical five-symbol unit over {X, Y, Z, O}, thumb to pinky."""

    symbols: str

    def __post_init__(self) -> None:
        _validate_unit(self.symbols)

    def __str__(self) -> str:
        return self.symbols

    @property
    def groups(self) -> tuple[str, ...]:
        """Distinct motion symbols present, in X, Y, Z order."""
        return tuple(s for s in MOTION_SYMBOLS if s in self.symbols)

    def moving_fingers(self, symbol: str) -> tuple[int, ...]:
        """0-based finger positions carrying ``symbol``."""
        return tuple(i for i, s in enumerate(self.symbols) if s == symbol)


@dataclass(frozen=True)
class FunctionUnit:
    """Five M/F labels, thumb to pinky; at least one finger manipulates."""

    functions: str

    def __post_init__(self) -> None:
        if len(self.functions) != UNIT_LENGTH:
            raise ValidationError(
                f"function unit must have {UNIT_LENGTH} symbols, got {self.functions!r}"
            )
        bad = set(self.functions) - set("MF")
        if bad:
            raise ValidationError(f"function unit may only contain M and F, got {self.functions!r}")
        if "M" not in self.functions:
            raise ValidationError("function unit must assign M to at least one finger")

    def __str__(self) -> str:
        return self.functions

    @property
    def manipulation_fingers(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.functions) if s == "M")


@dataclass(frozen=True)
class CatalogEntry:
    unit: MovementUnit
    frequency_percent: float

    def __post_init__(self) -> None:
        if not self.frequency_percent > 0:
            raise ValidationError("catalog frequency must be > 0")


def _validate_unit(text: str) -> None:
    if len(text) != UNIT_LENGTH:
        raise ValidationError(f"movement unit must have {UNIT_LENGTH} symbols, got {text!r}")
    bad = set(text) - set(MOTION_SYMBOLS + "O")
    if bad:
        raise InvalidSymbolError(
            f"movement unit {text!r} contains invalid symbol(s) {sorted(bad)}"
        )
    seen: set[str] = set()
    for ch in text:
        if ch == "O":
            continue
        rank = MOTION_SYMBOLS.index(ch)
        required = set(MOTION_SYMBOLS[:rank])
        if not required <= seen:
            missing = "".join(sorted(required - seen))
            raise NonCanonicalUnitError(
                f"movement unit {text!r} uses {ch} before {missing} has appeared"
            )
        seen.add(ch)


def parse_movement_unit(text: str) -> MovementUnit:
    """Validate a five-character string as a canonical movement unit."""
    return MovementUnit(str(text))


def decompose_unit(unit: MovementUnit) -> list[MovementUnit]:
    """Split a unit into single-group units, one per motion group.

    Each output keeps exactly one group's fingers, relabeled ``X`` since a
    lone group is by definition the first mover; everything else becomes
    ``O``. Outputs come in X, Y, Z order of the source groups. Units with at
    most one group come back unchanged.
    """
    groups = unit.groups
    if len(groups) <= 1:
        return [unit]
    out = []
    for symbol in groups:
        members = unit.moving_fingers(symbol)
        chars = ["X" if i in members else "O" for i in range(UNIT_LENGTH)]
        out.append(MovementUnit("".join(chars)))
    return out


def unit_to_function(unit: MovementUnit) -> FunctionUnit:
    """Relabel a single-group unit: motion fingers M, idle fingers F."""
    groups = unit.groups
    if len(groups) > 1:
        raise MultiGroupError(
            f"unit {unit} has {len(groups)} motion groups; decompose it first"
        )
    if not groups:
        raise ValidationError(f"unit {unit} has no moving finger to assign M")
    return FunctionUnit("".join("F" if s == "O" else "M" for s in unit.symbols))


#: The twelve function units a manipulation-capable hand needs, shipped as a
#: fixed catalog (the published list is not exactly the image of the observed
#: movement-unit table under decomposition, so it is not regenerated).
_FDMS_UNITS = (
    "MMMMM",
    "MFFFF",
    "FMMMM",
    "MMFFF",
    "FFMMM",
    "FFFMM",
    "FMFFF",
    "MMMFF",
    "FFMFF",
    "FFMMF",
    "MMMMF",
    "FMMMF",
)

#: Movement units observed in daily object handling with frequency above 1%,
#: with their observed share of all units (percent). Totals 68.4.
_KAMAKURA_UNITS = (
    ("XXXXX", 8.5),
    ("XYYYY", 9.0),
    ("XOOOO", 8.9),
    ("OXXXX", 3.5),
    ("XXYYY", 1.9),
    ("XXOOO", 3.2),
    ("OOXXX", 5.1),
    ("OOOXX", 2.4),
    ("XYZZZ", 3.5),
    ("XYOOO", 4.8),
    ("OXYYY", 2.6),
    ("OXOOO", 8.9),
    ("XYYOO", 1.9),
    ("OOXOO", 1.9),
    ("OOXXO", 1.3),
    ("XYYYO", 1.0),
)


def fdms_unit_catalog() -> list[FunctionUnit]:
    """The twelve per-finger function assignments, in catalog order."""
    return [FunctionUnit(u) for u in _FDMS_UNITS]


def kamakura_catalog() -> list[CatalogEntry]:
    """Kamakura's frequent movement units with their observed frequencies."""
    return [
        CatalogEntry(parse_movement_unit(unit), freq) for unit, freq in _KAMAKURA_UNITS
    ]


def function_to_subspace(fu: FunctionUnit, model: "HandModel") -> "JointSubset":
    """Joint subset spanned by the fingers assigned M, on a given hand."""
    from .hand import FINGER_ORDER, joints_for_fingers

    fingers = [FINGER_ORDER[i] for i in fu.manipulation_fingers]
    return joints_for_fingers(model, fingers)
