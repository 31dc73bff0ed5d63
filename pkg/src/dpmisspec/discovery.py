"""Score candidate LF dependencies against held-aside true labels.

The strength of a dependency is the sum of its factor over a labeled set,
``v = sum_i phi(lambda_ij, lambda_ik, y_i)``. Candidates are ranked per kind and
the strongest ``d`` of each kind are kept. Truth labels enter only here; the
fitting code never sees them.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimMismatch, ValidationError
from .factors import ALL_KINDS, DependencyKind, DependencySpec, _pair_factor, as_votes


@dataclass(frozen=True)
class DependencyScore:
    spec: DependencySpec
    value: int


def _check(data, truth):
    data = as_votes(data, ndim=2)
    truth = np.asarray(truth).reshape(-1)
    if truth.size != data.shape[0]:
        raise DimMismatch(f"{data.shape[0]} vote rows but {truth.size} truth labels")
    if truth.size and not np.all(np.isin(truth, (-1, 1))):
        raise ValidationError("truth labels must be -1 or +1")
    return data, truth.astype(np.int8)


def factor_strength(data, truth, spec: DependencySpec) -> int:
    data, truth = _check(data, truth)
    if max(spec.j, spec.k) >= data.shape[1]:
        raise DimMismatch(f"{spec} does not fit m = {data.shape[1]}")
    vals = _pair_factor(spec.kind, data[:, spec.j], data[:, spec.k], truth)
    return int(vals.astype(np.int64).sum())


def all_pairs(m: int) -> list[tuple[int, int]]:
    return [(j, k) for j, k in itertools.product(range(m), repeat=2) if j != k]


def candidate_pairs(data, min_cofire: int = 10) -> list[tuple[int, int]]:
    """Ordered pairs whose LFs both vote on at least ``min_cofire`` rows."""
    data = as_votes(data, ndim=2)
    active = (data != 0).astype(np.int64)
    cofire = active.T @ active
    return [(j, k) for j, k in all_pairs(data.shape[1]) if cofire[j, k] >= min_cofire]


class RankedDependencies(dict):
    """Maps each :class:`DependencyKind` to scores sorted by value desc, then (j, k) asc."""

    def rows(self) -> list[DependencyScore]:
        return [s for kind in ALL_KINDS for s in self.get(kind, [])]


def rank_dependencies(data, truth, kinds: Iterable = ALL_KINDS,
                      candidates: Sequence[tuple[int, int]] | None = None) -> RankedDependencies:
    data, truth = _check(data, truth)
    m = data.shape[1]
    if candidates is None:
        candidates = all_pairs(m)
    kinds = sorted({DependencyKind.parse(k) for k in kinds}, key=ALL_KINDS.index)
    ranked = RankedDependencies()
    for kind in kinds:
        specs = sorted({DependencySpec(j, k, kind) for j, k in candidates})
        scores = [DependencyScore(s, factor_strength(data, truth, s)) for s in specs]
        scores.sort(key=lambda sc: (-sc.value, sc.spec.j, sc.spec.k))
        ranked[kind] = scores
    return ranked


def select_top_d(ranked: RankedDependencies, d: int, min_value: int = 1) -> list[DependencySpec]:
    """First ``min(d, available)`` specs of each kind, skipping scores below ``min_value``.

    With the default ``min_value = 1`` only positively scoring dependencies
    are ever selected.
    """
    if d < 0:
        raise ValidationError(f"d must be nonnegative, got {d}")
    out = []
    for kind in ALL_KINDS:
        eligible = [s.spec for s in ranked.get(kind, []) if s.value >= min_value]
        out.extend(eligible[:d])
    return out


def write_ranked_csv(ranked: RankedDependencies, path, lf_names: Sequence[str] | None = None):
    path = Path(path)
    names = list(lf_names) if lf_names else None
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lf_j_name", "lf_k_name", "kind", "value"])
        for sc in ranked.rows():
            j, k = sc.spec.j, sc.spec.k
            w.writerow([names[j] if names else f"lf_{j}", names[k] if names else f"lf_{k}",
                        sc.spec.kind.value, sc.value])
    return path
