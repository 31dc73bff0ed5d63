"""Maximum marginal-likelihood fitting of label models.

Both fitters ascend the per-row objective ``log_marginal_likelihood / n -
l2_penalty / 2 * ||mu||^2`` with a fixed step size. Exact mode computes the
model expectation of the factors by enumeration; Gibbs mode replaces it with
an average over persistent sampling chains (stochastic maximum likelihood).

Neither fitter accepts ground-truth labels.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from . import model as lm
from .errors import NonFinite, ValidationError
from .factors import DependencySpec, as_votes, check_deps, factor_matrix
from .sampling import GibbsKernel, make_rng

logger = logging.getLogger(__name__)

MODES = ("exact", "gibbs")


@dataclass
class FitConfig:
    step_size: float = 0.5
    max_iters: int = 2000
    l2_penalty: float = 0.0
    tolerance: float = 1e-6
    seed: int = 0
    mode: str = "exact"
    # Accuracy weights start here rather than at 0: at mu = 0 the accuracy
    # gradient vanishes identically (label-flip symmetry), so a zero start never moves.
    init_accuracy: float = 0.5
    gibbs_chains: int = 200
    burn_in: int = 100
    steps_per_iter: int = 1

    def __post_init__(self):
        self.mode = str(self.mode).lower()
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.step_size > 0:
            raise ValidationError("step_size must be positive")
        if self.max_iters < 0:
            raise ValidationError("max_iters must be nonnegative")
        if self.l2_penalty < 0:
            raise ValidationError("l2_penalty must be nonnegative")
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")
        if min(self.gibbs_chains, self.burn_in, self.steps_per_iter) < 1:
            raise ValidationError("gibbs_chains, burn_in and steps_per_iter must be >= 1")

    @classmethod
    def from_dict(cls, d) -> "FitConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown fit config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FitReport:
    params: lm.ModelParams
    iterations: int
    log_likelihood: Optional[float]
    grad_norm: float
    converged: bool
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "iterations": self.iterations,
            "log_likelihood": self.log_likelihood,
            "grad_norm": self.grad_norm,
            "converged": self.converged,
        }


def _initial_vector(m, n_deps, config: FitConfig) -> np.ndarray:
    vec = np.zeros(m + n_deps)
    vec[:m] = config.init_accuracy
    return vec


def _prepare(data, deps):
    data = as_votes(data, ndim=2)
    if data.shape[0] < 1 or data.shape[1] < 1:
        raise ValidationError(f"need a non-empty vote matrix, got shape {data.shape}")
    return data, check_deps(deps, data.shape[1])


def fit_exact(data, deps: Sequence[DependencySpec] = (), config: FitConfig | None = None) -> FitReport:
    """Full-batch gradient ascent on the exact marginal likelihood."""
    config = config or FitConfig()
    data, deps = _prepare(data, deps)
    n, m = data.shape
    lm.check_cap(m)
    counts = lm.state_counts(m, data)
    params = lm.ModelParams.zeros(m, deps)
    vec = _initial_vector(m, len(deps), config)

    history = []
    converged = False
    iterations = 0
    while True:
        ll, grad = lm._ll_and_grad(params.with_vector(vec), counts)
        objective = ll / n - 0.5 * config.l2_penalty * float(vec @ vec)
        grad = grad / n - config.l2_penalty * vec
        if not (np.isfinite(objective) and np.all(np.isfinite(grad))):
            raise NonFinite(f"objective diverged at iteration {iterations}; reduce step_size")
        history.append(objective)
        grad_norm = float(np.max(np.abs(grad))) if grad.size else 0.0
        if grad_norm < config.tolerance:
            converged = True
            break
        if iterations >= config.max_iters:
            break
        vec = vec + config.step_size * grad
        iterations += 1

    logger.debug("fit_exact: %d iterations, ll=%.6f, |grad|=%.3g", iterations, ll, grad_norm)
    return FitReport(params.with_vector(vec), iterations, ll, grad_norm, converged, history)


def fit_gibbs(data, deps: Sequence[DependencySpec] = (), config: FitConfig | None = None) -> FitReport:
    """Stochastic maximum likelihood with persistent Gibbs chains.

    The data term of the gradient is exact (closed-form posteriors); the
    model term averages the factors over ``gibbs_chains`` persistent chains
    advanced ``steps_per_iter`` sweeps per iteration. Works for any ``m``.
    """
    config = config or FitConfig(mode="gibbs")
    data, deps = _prepare(data, deps)
    n, m = data.shape
    params = lm.ModelParams.zeros(m, deps)
    vec = _initial_vector(m, len(deps), config)
    f_pos = factor_matrix(data, 1, deps).astype(float)
    f_neg = factor_matrix(data, -1, deps).astype(float)
    f_diff = f_pos - f_neg

    rng = make_rng(config.seed)
    grad_norm = float("nan")
    iterations = 0
    if config.max_iters > 0:
        kernel = GibbsKernel(params.with_vector(vec))
        lam, y = kernel.init_chains(config.gibbs_chains, rng)
        for _ in range(config.burn_in):
            kernel.sweep(lam, y, rng)
    for iterations in range(1, config.max_iters + 1):
        q = expit(f_diff @ vec)
        data_term = (q @ f_pos + (1.0 - q) @ f_neg) / n
        kernel = GibbsKernel(params.with_vector(vec))
        model_term = np.zeros_like(vec)
        for _ in range(config.steps_per_iter):
            kernel.sweep(lam, y, rng)
            model_term += factor_matrix(lam, y, deps).mean(axis=0)
        model_term /= config.steps_per_iter
        grad = data_term - model_term - config.l2_penalty * vec
        grad_norm = float(np.max(np.abs(grad))) if grad.size else 0.0
        vec = vec + config.step_size * grad
        if not np.all(np.isfinite(vec)):
            raise NonFinite(f"parameters diverged at iteration {iterations}; reduce step_size")

    fitted = params.with_vector(vec)
    ll = lm.log_marginal_likelihood(fitted, data) if m <= lm.ENUM_CAP else None
    converged = bool(grad_norm < config.tolerance)
    return FitReport(fitted, iterations, ll, grad_norm, converged)


def fit(data, deps: Sequence[DependencySpec] = (), config: FitConfig | None = None) -> FitReport:
    config = config or FitConfig()
    if config.mode == "exact":
        return fit_exact(data, deps, config)
    return fit_gibbs(data, deps, config)
