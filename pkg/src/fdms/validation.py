"""Small input-validation helpers shared by the numeric modules.

These mirror the role of scikit-learn's ``check_array`` at the scale this
package needs: coerce to float64 ndarrays, pin shapes, reject non-finite
values, and raise :class:`~fdms.errors.ValidationError` with a message that
names the offending argument.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def as_matrix(values, name: str = "data", *, n_cols: int | None = None) -> np.ndarray:
    """Coerce to a 2-D float64 array, optionally pinning the column count."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    if n_cols is not None and arr.shape[1] != n_cols:
        raise ValidationError(f"{name} must have {n_cols} columns, got {arr.shape[1]}")
    return arr


def as_vector(values, name: str = "vector", *, size: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float64 array, optionally pinning its length."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    if size is not None and arr.shape[0] != size:
        raise ValidationError(f"{name} must have length {size}, got {arr.shape[0]}")
    return arr


def readonly(arr: np.ndarray) -> np.ndarray:
    """Return a copy of ``arr`` with the writeable flag cleared.

    The domain types are immutable after construction; freezing the buffers
    makes accidental in-place mutation fail loudly instead of corrupting a
    shared model.
    """
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out
