"""Exponential-family label models over LF votes and a binary latent label.

The joint is ``p(lambda, y) = exp(mu1 . phi1(lambda, y) + mu2 . phi2(lambda, y)) / Z``.
A model with no dependencies is the conditionally independent model.

Exact quantities (partition function, joint, marginals, likelihood gradient)
enumerate all ``3**m`` vote rows, so they are limited to ``m <= ENUM_CAP``.
The posterior ``p(y = +1 | lambda)`` has a closed sigmoid form and works for
any ``m``.

Enumeration order: rows are listed in base-3 order of ``lambda + 1`` with the
first LF as the most significant digit. All reductions over states are numpy
sums/matmuls in that order, so results are reproducible for fixed inputs.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logsumexp

from .errors import CapExceeded, DimMismatch, ValidationError
from .factors import DependencySpec, as_votes, check_deps, check_label, factor_matrix

ENUM_CAP = 12


@dataclass(frozen=True)
class ModelParams:
    """Accuracy weights ``mu1`` (length m) and dependency weights ``mu2`` bound to ``deps``."""

    mu1: np.ndarray
    mu2: np.ndarray = field(default_factory=lambda: np.zeros(0))
    deps: tuple[DependencySpec, ...] = ()

    def __post_init__(self):
        mu1 = np.array(self.mu1, dtype=float).reshape(-1)
        mu2 = np.array(self.mu2, dtype=float).reshape(-1)
        if mu1.size < 1:
            raise ValidationError("a label model needs at least one LF")
        deps = check_deps(self.deps, mu1.size)
        if mu2.size != len(deps):
            raise DimMismatch(f"mu2 has {mu2.size} entries but {len(deps)} dependencies were given")
        if not (np.all(np.isfinite(mu1)) and np.all(np.isfinite(mu2))):
            raise ValidationError("model parameters must be finite")
        mu1.setflags(write=False)
        mu2.setflags(write=False)
        object.__setattr__(self, "mu1", mu1)
        object.__setattr__(self, "mu2", mu2)
        object.__setattr__(self, "deps", deps)

    @property
    def m(self) -> int:
        return self.mu1.size

    @property
    def M(self) -> int:
        return len(self.deps)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.mu1, self.mu2])

    @classmethod
    def zeros(cls, m, deps=()):
        deps = check_deps(deps, m)
        return cls(np.zeros(m), np.zeros(len(deps)), deps)

    @classmethod
    def independent(cls, theta):
        return cls(theta)

    def with_vector(self, vec) -> "ModelParams":
        vec = np.asarray(vec, dtype=float)
        if vec.size != self.m + self.M:
            raise DimMismatch(f"expected {self.m + self.M} parameters, got {vec.size}")
        return ModelParams(vec[:self.m], vec[self.m:], self.deps)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "mu1": [float(v) for v in self.mu1],
            "deps": [d.to_dict() for d in self.deps],
            "mu2": [float(v) for v in self.mu2],
        }

    @classmethod
    def from_dict(cls, d) -> "ModelParams":
        try:
            mu1 = d["mu1"]
            deps = tuple(DependencySpec.from_dict(x) for x in d.get("deps", []))
            mu2 = d.get("mu2", [])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed model document: {exc}") from None
        params = cls(mu1, mu2, deps)
        if "m" in d and int(d["m"]) != params.m:
            raise DimMismatch(f"model document says m = {d['m']} but mu1 has {params.m} entries")
        return params

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return (self.deps == other.deps and np.array_equal(self.mu1, other.mu1)
                and np.array_equal(self.mu2, other.mu2))

    def __hash__(self):
        return hash((self.mu1.tobytes(), self.mu2.tobytes(), self.deps))


def check_cap(m: int):
    if m > ENUM_CAP:
        raise CapExceeded(m, ENUM_CAP)


@functools.lru_cache(maxsize=16)
def all_rows(m: int) -> np.ndarray:
    """All ``3**m`` vote rows in enumeration order, shape ``(3**m, m)``."""
    check_cap(m)
    codes = np.arange(3 ** m)
    powers = 3 ** np.arange(m - 1, -1, -1)
    rows = (codes[:, None] // powers[None, :]) % 3 - 1
    rows = rows.astype(np.int8)
    rows.setflags(write=False)
    return rows


def row_codes(rows) -> np.ndarray:
    """Index of each row in the enumeration order."""
    rows = np.asarray(rows, dtype=np.int64)
    m = rows.shape[-1]
    powers = 3 ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return (rows + 1) @ powers


@functools.lru_cache(maxsize=8)
def enumerated_factors(m: int, deps: tuple[DependencySpec, ...]):
    """Factor matrices of every row for ``y = +1`` and ``y = -1`` (stored as float64)."""
    rows = all_rows(m)
    f_pos = factor_matrix(rows, 1, deps).astype(float)
    f_neg = factor_matrix(rows, -1, deps).astype(float)
    f_pos.setflags(write=False)
    f_neg.setflags(write=False)
    return f_pos, f_neg


def _check_data(params: ModelParams, data) -> np.ndarray:
    data = as_votes(data)
    if data.ndim == 1:
        data = data[None, :]
    if data.ndim != 2 or data.shape[1] != params.m:
        raise DimMismatch(f"vote matrix shape {data.shape} does not match m = {params.m}")
    return data


def unnormalized_log_joint(params: ModelParams, row, y) -> float:
    row = _check_data(params, row)
    phi = factor_matrix(row, check_label(y), params.deps)[0]
    return float(phi @ params.vector)


def enumerated_scores(params: ModelParams):
    """Unnormalized log-joint of every enumerated row, for ``y = +1`` and ``y = -1``."""
    f_pos, f_neg = enumerated_factors(params.m, params.deps)
    vec = params.vector
    return f_pos @ vec, f_neg @ vec


def log_partition(params: ModelParams) -> float:
    s_pos, s_neg = enumerated_scores(params)
    return float(logsumexp(np.concatenate([s_pos, s_neg])))


def partition_function(params: ModelParams) -> float:
    return float(np.exp(log_partition(params)))


def joint_table(params: ModelParams) -> np.ndarray:
    """Normalized joint over all rows; column 0 is ``y = -1``, column 1 is ``y = +1``."""
    s_pos, s_neg = enumerated_scores(params)
    log_z = logsumexp(np.concatenate([s_pos, s_neg]))
    return np.exp(np.column_stack([s_neg, s_pos]) - log_z)


def marginal_table(params: ModelParams) -> np.ndarray:
    """``p(lambda)`` for every enumerated row."""
    s_pos, s_neg = enumerated_scores(params)
    log_z = logsumexp(np.concatenate([s_pos, s_neg]))
    return np.exp(np.logaddexp(s_pos, s_neg) - log_z)


def joint_prob(params: ModelParams, row, y) -> float:
    check_cap(params.m)
    return float(np.exp(unnormalized_log_joint(params, row, y) - log_partition(params)))


def marginal_prob(params: ModelParams, row) -> float:
    check_cap(params.m)
    row = _check_data(params, row)
    s = [float(factor_matrix(row, lab, params.deps)[0] @ params.vector) for lab in (1, -1)]
    return float(np.exp(np.logaddexp(*s) - log_partition(params)))


def posterior_logit(params: ModelParams, rows) -> np.ndarray:
    """``mu . (phi(lambda, +1) - phi(lambda, -1))`` for each row."""
    rows = _check_data(params, rows)
    logit = 2.0 * (rows @ params.mu1)
    if params.M:
        d_pos = factor_matrix(rows, 1, params.deps)[:, params.m:]
        d_neg = factor_matrix(rows, -1, params.deps)[:, params.m:]
        logit = logit + (d_pos.astype(np.int16) - d_neg) @ params.mu2
    return logit


def posterior(params: ModelParams, rows):
    """Closed-form ``p(y = +1 | lambda)``.

    Returns a float for a single row and an array for a 2-d vote matrix.
    No enumeration is involved.
    """
    single = np.ndim(rows) == 1
    p = expit(posterior_logit(params, rows))
    return float(p[0]) if single else p


def state_counts(params_or_m, data) -> np.ndarray:
    """How many times each enumerated row occurs in ``data``."""
    m = params_or_m.m if isinstance(params_or_m, ModelParams) else int(params_or_m)
    check_cap(m)
    data = as_votes(data, ndim=2)
    if data.shape[1] != m:
        raise DimMismatch(f"vote matrix has {data.shape[1]} columns, expected {m}")
    return np.bincount(row_codes(data), minlength=3 ** m).astype(float)


def _ll_and_grad(params: ModelParams, counts: np.ndarray, need_grad=True):
    f_pos, f_neg = enumerated_factors(params.m, params.deps)
    vec = params.vector
    s_pos, s_neg = f_pos @ vec, f_neg @ vec
    n = counts.sum()
    log_z = logsumexp(np.concatenate([s_pos, s_neg]))
    log_marg = np.logaddexp(s_pos, s_neg)
    ll = float(counts @ log_marg - n * log_z)
    if not need_grad:
        return ll, None
    q = np.exp(s_pos - log_marg)  # posterior of y = +1 per state
    w_data_pos = counts * q
    w_data_neg = counts - w_data_pos
    p_pos = np.exp(s_pos - log_z)
    p_neg = np.exp(s_neg - log_z)
    grad = (w_data_pos - n * p_pos) @ f_pos + (w_data_neg - n * p_neg) @ f_neg
    return ll, grad


def log_marginal_likelihood(params: ModelParams, data) -> float:
    """``sum_i log sum_y p(lambda_i, y)`` computed exactly."""
    data = _check_data(params, data)
    counts = state_counts(params, data)
    return _ll_and_grad(params, counts, need_grad=False)[0]


def grad_log_marginal_likelihood(params: ModelParams, data) -> np.ndarray:
    """Gradient of :func:`log_marginal_likelihood` w.r.t. ``(mu1, mu2)``.

    Data term uses the posterior of each row; the model term is the exact
    expectation of the factors under the joint.
    """
    data = _check_data(params, data)
    counts = state_counts(params, data)
    return _ll_and_grad(params, counts)[1]


def majority_vote(data) -> np.ndarray:
    """Soft majority vote: fraction of non-abstaining votes that are +1, 0.5 on ties/no votes."""
    data = as_votes(data, ndim=2).astype(float)
    pos = (data > 0).sum(1)
    neg = (data < 0).sum(1)
    out = np.full(data.shape[0], 0.5)
    np.divide(pos, pos + neg, out=out, where=(pos + neg) > 0)
    return out

