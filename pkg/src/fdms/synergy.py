"""Posture datasets, principal-axis synergy models, and projection.

A synergy is an orthonormal joint-coordination basis obtained from the
eigendecomposition of a posture dataset's covariance. Keeping the leading
``n_s`` basis columns gives a synergy matrix ``S``; ``S @ S.T`` is the
orthogonal projector onto the synergy subspace and is how a commanded posture
is approximated with few control inputs.

All types here are immutable after construction and fitting is a pure
function, so everything can be shared freely across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._hash import content_hash
from .errors import DegenerateVarianceError, FDMSError, ValidationError
from .validation import as_matrix, as_vector, readonly

#: Negative eigenvalues of the covariance within this tolerance are rounding
#: noise and get clamped to zero; anything more negative means the covariance
#: computation itself is broken.
EIGENVALUE_TOLERANCE = 1e-12

#: Hard orthonormality bound at construction; violations beyond this mean a
#: corrupt basis (fitted bases land near machine precision, ~1e-15).
ORTHONORMALITY_TOLERANCE = 1e-6


class Centering(enum.Enum):
    """Whether deviations from the column mean are projected, or raw vectors."""

    CENTERED = "centered"
    UNCENTERED = "uncentered"


@dataclass(frozen=True)
class PostureSequence:
    """An ``n x d`` stack of hand postures in radians, one posture per row."""

    data: np.ndarray
    joint_names: tuple[str, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        arr = as_matrix(self.data, "posture sequence")
        if arr.shape[0] < 1:
            raise ValidationError("posture sequence must contain at least one row")
        if len(self.joint_names) != arr.shape[1]:
            raise ValidationError(
                f"got {len(self.joint_names)} joint names for {arr.shape[1]} columns"
            )
        object.__setattr__(self, "data", readonly(arr))
        object.__setattr__(self, "joint_names", tuple(str(n) for n in self.joint_names))

    @classmethod
    def from_array(cls, data, joint_names=None, provenance: str = "") -> "PostureSequence":
        arr = as_matrix(data, "posture sequence")
        if joint_names is None:
            joint_names = tuple(f"joint_{i + 1}" for i in range(arr.shape[1]))
        return cls(arr, tuple(joint_names), provenance)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def canonical_bytes(self) -> bytes:
        """Stable byte encoding (shape, names, raw float64 rows) for hashing."""
        header = ",".join(self.joint_names).encode() + b"\n"
        shape = f"{self.n}x{self.d}\n".encode()
        return shape + header + np.ascontiguousarray(self.data).tobytes()

    def hash(self) -> str:
        return content_hash(self.canonical_bytes())


def concatenate(sequences: Sequence[PostureSequence]) -> PostureSequence:
    """Stack sequences row-wise; joint names must agree exactly."""
    if not sequences:
        raise ValidationError("need at least one posture sequence")
    names = sequences[0].joint_names
    for seq in sequences[1:]:
        if seq.joint_names != names:
            raise ValidationError("cannot concatenate sequences with differing joint names")
    data = np.vstack([seq.data for seq in sequences])
    provenance = "+".join(s.provenance for s in sequences if s.provenance)
    return PostureSequence(data, names, provenance)


@dataclass(frozen=True)
class JointSubset:
    """Strictly increasing 1-based joint indices into a ``dimension``-joint
    hand."""

    indices: tuple[int, ...]
    dimension: int

    def __post_init__(self) -> None:
        idxs = tuple(int(i) for i in self.indices)
        if not idxs:
            raise ValidationError("joint subset must be nonempty")
        if any(i < 1 or i > self.dimension for i in idxs):
            raise ValidationError(
                f"joint indices must lie in 1..{self.dimension}, got {idxs}"
            )
        if any(b <= a for a, b in zip(idxs, idxs[1:])):
            raise ValidationError(f"joint indices must be strictly increasing, got {idxs}")
        object.__setattr__(self, "indices", idxs)

    @classmethod
    def full(cls, dimension: int) -> "JointSubset":
        return cls(tuple(range(1, dimension + 1)), dimension)

    @property
    def f(self) -> int:
        return len(self.indices)

    @property
    def is_full(self) -> bool:
        return self.f == self.dimension

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1

    def complement(self) -> tuple[int, ...]:
        inside = set(self.indices)
        return tuple(i for i in range(1, self.dimension + 1) if i not in inside)


def extract_subvector(seq: PostureSequence, subset: JointSubset) -> PostureSequence:
    """Select the subset's columns, in subset order, with filtered names."""
    if subset.dimension != seq.d:
        raise ValidationError(
            f"subset is over a {subset.dimension}-joint space but sequence has {seq.d} columns"
        )
    cols = subset.zero_based()
    names = tuple(seq.joint_names[i] for i in cols)
    return PostureSequence(seq.data[:, cols], names, seq.provenance)


@dataclass(frozen=True)
class SynergyModel:
    """Principal-axis decomposition of a posture dataset.

    ``eigenvectors`` columns are the coordination axes in descending
    ``eigenvalues`` order; ``subset`` records which source-model joints the
    ``f``-dimensional rows refer to.
    """

    subset: JointSubset
    mean: np.ndarray
    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    centering: Centering
    source_hash: str
    joint_names: tuple[str, ...]

    def __post_init__(self) -> None:
        f = self.subset.f
        mean = as_vector(self.mean, "mean", size=f)
        vecs = as_matrix(self.eigenvectors, "eigenvectors", n_cols=f)
        if vecs.shape[0] != f:
            raise ValidationError(f"eigenvectors must be {f}x{f}, got {vecs.shape}")
        vals = as_vector(self.eigenvalues, "eigenvalues", size=f)
        if np.any(vals < -EIGENVALUE_TOLERANCE):
            raise ValidationError(
                f"eigenvalues contain a negative value beyond tolerance: {vals.min()}"
            )
        vals = np.where(np.abs(vals) <= EIGENVALUE_TOLERANCE, 0.0, vals)
        if np.any(np.diff(vals) > 0):
            raise ValidationError("eigenvalues must be sorted in descending order")
        gram = vecs.T @ vecs
        err = np.max(np.abs(gram - np.eye(f)))
        if err > ORTHONORMALITY_TOLERANCE:
            raise ValidationError(
                f"eigenvector basis is not orthonormal (max deviation {err:.3g})"
            )
        if len(self.joint_names) != f:
            raise ValidationError(
                f"got {len(self.joint_names)} joint names for a {f}-joint model"
            )
        object.__setattr__(self, "mean", readonly(mean))
        object.__setattr__(self, "eigenvectors", readonly(vecs))
        object.__setattr__(self, "eigenvalues", readonly(vals))
        object.__setattr__(self, "joint_names", tuple(str(n) for n in self.joint_names))

    @property
    def f(self) -> int:
        return self.subset.f


@dataclass(frozen=True)
class SynergyMatrix:
    """The leading ``n_s`` coordination axes of a model, plus the metadata
    needed to project with them."""

    S: np.ndarray
    n_s: int
    mean: np.ndarray
    subset: JointSubset
    centering: Centering
    joint_names: tuple[str, ...]

    def __post_init__(self) -> None:
        f = self.subset.f
        if not 1 <= self.n_s <= f:
            raise ValidationError(f"n_s must lie in 1..{f}, got {self.n_s}")
        S = as_matrix(self.S, "S", n_cols=self.n_s)
        if S.shape[0] != f:
            raise ValidationError(f"S must be {f}x{self.n_s}, got {S.shape}")
        gram = S.T @ S
        err = np.max(np.abs(gram - np.eye(self.n_s)))
        if err > ORTHONORMALITY_TOLERANCE:
            raise ValidationError(f"S columns are not orthonormal (max deviation {err:.3g})")
        mean = as_vector(self.mean, "mean", size=f)
        object.__setattr__(self, "S", readonly(S))
        object.__setattr__(self, "mean", readonly(mean))

    @property
    def f(self) -> int:
        return self.subset.f


def fit_pca(
    seq: PostureSequence,
    centering: Centering = Centering.CENTERED,
    subset: JointSubset | None = None,
) -> SynergyModel:
    """Eigendecompose the sample covariance of a posture dataset.

    The covariance is ``M.T @ M / (n - 1)`` with ``M`` the (optionally
    mean-centered) data. Output is deterministic: eigenvalues descending with
    ties kept in ascending original-axis order, tiny negatives clamped to
    zero, and each eigenvector's largest-magnitude entry made positive.

    ``subset`` only records which source-model joints the columns of ``seq``
    are; it does not select columns (use :func:`extract_subvector` first).
    """
    if seq.n < 2:
        raise ValidationError(f"need at least 2 postures to fit, got {seq.n}")
    if subset is None:
        subset = JointSubset.full(seq.d)
    elif subset.f != seq.d:
        raise ValidationError(
            f"subset has {subset.f} joints but sequence has {seq.d} columns"
        )

    X = seq.data
    if centering is Centering.CENTERED:
        mean = X.mean(axis=0)
    else:
        mean = np.zeros(seq.d)
    M = X - mean
    cov = M.T @ M / (seq.n - 1)

    try:
        evals, evecs = np.linalg.eigh(cov)
    except np.linalg.LinAlgError as exc:
        raise FDMSError(f"eigensolver failed to converge: {exc}") from exc

    # eigh returns ascending order; stable descending sort keeps equal
    # eigenvalues in ascending original-axis order.
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    evecs = evecs[:, order]

    if np.any(evals < -EIGENVALUE_TOLERANCE):
        raise ValidationError(
            f"covariance produced eigenvalue {evals.min()}, beyond tolerance"
        )
    evals = np.where(np.abs(evals) <= EIGENVALUE_TOLERANCE, 0.0, evals)

    # Sign convention: largest-magnitude entry of each column positive.
    for k in range(evecs.shape[1]):
        pivot = int(np.argmax(np.abs(evecs[:, k])))
        if evecs[pivot, k] < 0:
            evecs[:, k] = -evecs[:, k]

    return SynergyModel(
        subset=subset,
        mean=mean,
        eigenvectors=evecs,
        eigenvalues=evals,
        centering=centering,
        source_hash=seq.hash(),
        joint_names=seq.joint_names,
    )


def synergy_matrix(model: SynergyModel, n_s: int) -> SynergyMatrix:
    """Keep the first ``n_s`` coordination axes."""
    if not 1 <= n_s <= model.f:
        raise ValidationError(f"n_s must lie in 1..{model.f}, got {n_s}")
    return SynergyMatrix(
        S=model.eigenvectors[:, :n_s],
        n_s=n_s,
        mean=model.mean,
        subset=model.subset,
        centering=model.centering,
        joint_names=model.joint_names,
    )


def coefficients(S: SynergyMatrix, posture) -> np.ndarray:
    """Coordinates of a posture in the synergy basis."""
    p = as_vector(posture, "posture", size=S.f)
    if S.centering is Centering.CENTERED:
        return S.S.T @ (p - S.mean)
    return S.S.T @ p


def decode(S: SynergyMatrix, z) -> np.ndarray:
    """Posture reconstructed from synergy coordinates."""
    zv = as_vector(z, "coefficients", size=S.n_s)
    if S.centering is Centering.CENTERED:
        return S.mean + S.S @ zv
    return S.S @ zv


def project_posture(S: SynergyMatrix, posture) -> np.ndarray:
    """Orthogonal projection of a posture onto the synergy subspace.

    Implemented as ``decode(coefficients(p))`` so the round trip is exact by
    construction.
    """
    return decode(S, coefficients(S, posture))


def approximate_sequence(S: SynergyMatrix, seq: PostureSequence) -> PostureSequence:
    """Row-wise projection of a whole sequence; shape preserved."""
    if seq.d != S.f:
        raise ValidationError(f"sequence has {seq.d} columns but synergy expects {S.f}")
    rows = np.empty_like(seq.data)
    for i in range(seq.n):
        rows[i] = project_posture(S, seq.data[i])
    return PostureSequence(rows, seq.joint_names, seq.provenance)


def reconstruction_mse(S: SynergyMatrix, seq: PostureSequence) -> float:
    """Mean squared reconstruction error of a sequence under projection.

    Normalized by ``n - 1`` to match the covariance convention, which makes
    the training-set error equal the sum of the discarded eigenvalues in
    centered mode.
    """
    if seq.n < 2:
        raise ValidationError("reconstruction error needs at least 2 rows")
    approx = approximate_sequence(S, seq)
    residual = seq.data - approx.data
    return float(np.sum(residual * residual) / (seq.n - 1))


def contribution_ratios(model: SynergyModel) -> np.ndarray:
    """Fraction of total variance carried by each coordination axis."""
    total = float(np.sum(model.eigenvalues))
    if total <= 0.0:
        raise DegenerateVarianceError(
            "total variance is zero (constant dataset), contribution ratios undefined"
        )
    return model.eigenvalues / total


def cumulative_contribution(model: SynergyModel, k: int) -> float:
    """Variance fraction explained by the first ``k`` axes."""
    if not 1 <= k <= model.f:
        raise ValidationError(f"k must lie in 1..{model.f}, got {k}")
    return float(np.sum(contribution_ratios(model)[:k]))


def min_components_for_ratio(model: SynergyModel, threshold: float) -> int:
    """Smallest number of axes whose cumulative contribution reaches
    ``threshold``."""
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must lie in (0, 1], got {threshold}")
    cumulative = np.cumsum(contribution_ratios(model))
    for k in range(1, model.f + 1):
        if cumulative[k - 1] >= threshold - 1e-12:
            return k
    return model.f


class SynergyPCA(TransformerMixin, BaseEstimator):
    """Estimator-style wrapper over the functional fitting path.

    ``fit`` accepts an ``(n, d)`` array (or a :class:`PostureSequence`),
    ``transform`` maps postures to synergy coordinates, and
    ``inverse_transform`` reconstructs them, so synergy extraction drops into
    scikit-learn pipelines and model-selection tooling unchanged.

    Parameters
    ----------
    n_components:
        Number of coordination axes to keep; ``None`` keeps all.
    centering:
        ``"centered"`` (default) or ``"uncentered"``.
    """

    def __init__(self, n_components: int | None = None, centering: str = "centered"):
        self.n_components = n_components
        self.centering = centering

    def fit(self, X, y=None):
        seq = X if isinstance(X, PostureSequence) else PostureSequence.from_array(X)
        mode = Centering(self.centering)
        self.model_ = fit_pca(seq, mode)
        self.n_components_ = self.model_.f if self.n_components is None else int(self.n_components)
        self.matrix_ = synergy_matrix(self.model_, self.n_components_)
        self.mean_ = self.model_.mean
        self.components_ = self.matrix_.S.T
        self.explained_variance_ = self.model_.eigenvalues
        self.explained_variance_ratio_ = contribution_ratios(self.model_)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "matrix_"):
            raise NotFittedError("SynergyPCA must be fitted before use")

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        data = X.data if isinstance(X, PostureSequence) else as_matrix(X, "X", n_cols=self.model_.f)
        return np.array([coefficients(self.matrix_, row) for row in data])

    def inverse_transform(self, Z) -> np.ndarray:
        self._check_fitted()
        Z = as_matrix(Z, "Z", n_cols=self.n_components_)
        return np.array([decode(self.matrix_, row) for row in Z])

    def project(self, X) -> np.ndarray:
        """Round trip: project each posture onto the synergy subspace."""
        return self.inverse_transform(self.transform(X))
