"""Votes, labels and the factor functions of the label model.

Accuracy factors are ``lambda_j * y``. Dependency factors act on an ordered
pair of labeling functions ``(j, k)`` and the label; for every asymmetric kind
LF ``k`` acts on LF ``j``. All factors take values in {-1, 0, +1}.

Every evaluator here is vectorized: ``lam_j``, ``lam_k`` and ``y`` may be
scalars or broadcastable integer arrays.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimMismatch, ValidationError

VOTES = (-1, 0, 1)
LABELS = (-1, 1)


class DependencyKind(str, enum.Enum):
    FIXING = "fixing"
    REINFORCING = "reinforcing"
    PRIORITY = "priority"
    BOLSTERING = "bolstering"
    NEGATED = "negated"

    @classmethod
    def parse(cls, value) -> "DependencyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(
                f"unknown dependency kind {value!r}; expected one of "
                f"{[k.value for k in cls]}") from None


ALL_KINDS = tuple(DependencyKind)
SYMMETRIC_KINDS = frozenset({DependencyKind.BOLSTERING})


@dataclass(frozen=True, order=True)
class DependencySpec:
    """A pairwise dependency factor: LF ``k`` acts on LF ``j``.

    Bolstering is symmetric in ``(j, k)`` and is stored with ``j < k``.
    """

    j: int
    k: int
    kind: DependencyKind

    def __post_init__(self):
        kind = DependencyKind.parse(self.kind)
        j, k = int(self.j), int(self.k)
        if j < 0 or k < 0:
            raise ValidationError(f"LF indices must be nonnegative, got ({j}, {k})")
        if j == k:
            raise ValidationError(f"a dependency needs two distinct LFs, got j = k = {j}")
        if kind in SYMMETRIC_KINDS and j > k:
            j, k = k, j
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "kind", kind)

    def to_dict(self) -> dict:
        return {"j": self.j, "k": self.k, "kind": self.kind.value}

    @classmethod
    def from_dict(cls, d) -> "DependencySpec":
        return cls(int(d["j"]), int(d["k"]), d["kind"])


def check_deps(deps: Iterable[DependencySpec], m: int) -> tuple[DependencySpec, ...]:
    """Validate a dependency list against ``m`` LFs; reject duplicates."""
    out = []
    seen = set()
    for spec in deps:
        if not isinstance(spec, DependencySpec):
            spec = DependencySpec.from_dict(spec) if isinstance(spec, dict) else DependencySpec(*spec)
        if spec.j >= m or spec.k >= m:
            raise DimMismatch(f"{spec} references an LF index >= m = {m}")
        if spec in seen:
            raise ValidationError(f"duplicate dependency {spec}")
        seen.add(spec)
        out.append(spec)
    return tuple(out)


def as_votes(values, ndim=None) -> np.ndarray:
    """Return ``values`` as an int8 array, checking every entry is a vote."""
    arr = np.asarray(values)
    if ndim is not None and arr.ndim != ndim:
        raise DimMismatch(f"expected a {ndim}-d vote array, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isin(arr, VOTES)):
            raise ValidationError("votes must be integers in {-1, 0, 1}")
    arr = arr.astype(np.int8)
    if arr.size and (arr.min() < -1 or arr.max() > 1):
        raise ValidationError("votes must be integers in {-1, 0, 1}")
    return arr


def check_label(y) -> int:
    if y not in LABELS:
        raise ValidationError(f"label must be -1 or +1, got {y!r}")
    return int(y)


def accuracy_factor(row, y) -> np.ndarray:
    """phi_1(lambda, y) = lambda * y, componentwise."""
    return as_votes(row) * np.int8(check_label(y))


def _pair_factor(kind: DependencyKind, lj, lk, y):
    lj = np.asarray(lj, dtype=np.int8)
    lk = np.asarray(lk, dtype=np.int8)
    y = np.asarray(y, dtype=np.int8)
    if kind is DependencyKind.FIXING:
        pos = (lj == -y) & (lk == y)
        neg = (lj == 0) & (lk != 0)
    elif kind is DependencyKind.REINFORCING:
        pos = (lj == y) & (lk == y)
        neg = (lj == 0) & (lk != 0)
    elif kind is DependencyKind.PRIORITY:
        pos = (lj == -y) & (lk == y)
        neg = (lj == y) & (lk == -y)
    elif kind is DependencyKind.BOLSTERING:
        pos = (lj == y) & (lk == y)
        # "lambda_j = lambda_k != y" is read over non-abstaining votes, so a
        # double abstain stays 0.
        neg = ((lj == -y) & (lk == -y)) | ((lj == -lk) & (lj != 0))
    elif kind is DependencyKind.NEGATED:
        pos = (lj == -y) & (lk == y)
        neg = ((lj == y) & (lk == -y)) | ((lj == lk) & (lj != 0))
    else:  # pragma: no cover
        raise ValidationError(f"unknown kind {kind!r}")
    return pos.astype(np.int8) - neg.astype(np.int8)


def pair_factor(kind, lam_j, lam_k, y):
    """Evaluate one dependency kind on ``(lambda_j, lambda_k, y)``, vectorized."""
    out = _pair_factor(DependencyKind.parse(kind), lam_j, lam_k, y)
    return int(out) if out.ndim == 0 else out


def dependency_factor(spec: DependencySpec, row, y) -> int:
    row = as_votes(row, ndim=1)
    if max(spec.j, spec.k) >= row.shape[0]:
        raise DimMismatch(f"{spec} does not fit a row of length {row.shape[0]}")
    return int(_pair_factor(spec.kind, row[spec.j], row[spec.k], check_label(y)))


def factor_vector(row, y, deps: Sequence[DependencySpec] = ()) -> np.ndarray:
    """phi(lambda, y) = (phi_1, phi_2) with dependency entries in list order."""
    row = as_votes(row, ndim=1)
    y = check_label(y)
    deps = check_deps(deps, row.shape[0])
    out = np.empty(row.shape[0] + len(deps), dtype=np.int8)
    out[:row.shape[0]] = row * y
    for i, spec in enumerate(deps):
        out[row.shape[0] + i] = _pair_factor(spec.kind, row[spec.j], row[spec.k], y)
    return out


def factor_matrix(rows, y, deps: Sequence[DependencySpec] = ()) -> np.ndarray:
    """Factor vectors for many rows at once.

    ``rows`` is ``(n, m)``; ``y`` is a label or a length-``n`` label vector.
    Returns an ``(n, m + M)`` int8 array. Dependencies are assumed validated.
    """
    rows = np.asarray(rows, dtype=np.int8)
    n, m = rows.shape
    y = np.broadcast_to(np.asarray(y, dtype=np.int8), (n,))
    out = np.empty((n, m + len(deps)), dtype=np.int8)
    np.multiply(rows, y[:, None], out=out[:, :m])
    for i, spec in enumerate(deps):
        out[:, m + i] = _pair_factor(spec.kind, rows[:, spec.j], rows[:, spec.k], y)
    return out


def label_flip_constant(kind) -> int:
    """max over (lambda_j, lambda_k, y) of |phi(lambda, y) - phi(lambda, -y)|.

    A value of 1 means the factor can shift the posterior logit by at most its
    weight; 2 means the shift can reach twice the weight.
    """
    kind = DependencyKind.parse(kind)
    return max(
        abs(int(_pair_factor(kind, a, b, y)) - int(_pair_factor(kind, a, b, -y)))
        for a, b, y in itertools.product(VOTES, VOTES, LABELS))
