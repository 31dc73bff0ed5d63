"""Misspecification bounds between a dependency model and an independent model.

The closed-form bounds are pure functions of parameter vectors. The
``empirical_*`` functions compute the bounded quantities exactly by
enumerating every vote row, so they need ``m <= ENUM_CAP``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.special import log_expit

from . import model as lm
from .errors import DimMismatch, NegativeGamma
from .factors import label_flip_constant


def _l1(v) -> float:
    return float(np.sum(np.abs(np.asarray(v, dtype=float))))


def _accuracy_gap(mu1, theta) -> float:
    mu1 = np.asarray(mu1, dtype=float).reshape(-1)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if mu1.shape != theta.shape:
        raise DimMismatch(f"accuracy vectors differ in length: {mu1.size} vs {theta.size}")
    return _l1(mu1 - theta)


def posterior_bound(mu1, theta, mu2) -> float:
    """Bound on ``|p_mu(y|lambda) - p_theta(y|lambda)|``: ``||mu1 - theta||_1 / 2 + ||mu2||_1 / 4``."""
    return 0.5 * _accuracy_gap(mu1, theta) + 0.25 * _l1(mu2)


def flip_aware_posterior_bound(mu1, theta, mu2, deps) -> float:
    """Posterior-gap bound weighting each ``|mu2_l|`` by its kind's label-flip constant.

    Priority, bolstering and negated factors can change by 2 when ``y`` flips,
    so their weights count double here; fixing and reinforcing count once.
    This is a separate, looser bound and does not replace :func:`posterior_bound`.
    """
    mu2 = np.asarray(mu2, dtype=float).reshape(-1)
    if mu2.size != len(deps):
        raise DimMismatch(f"{mu2.size} dependency weights for {len(deps)} dependencies")
    consts = np.array([label_flip_constant(d.kind) for d in deps], dtype=float)
    return 0.5 * _accuracy_gap(mu1, theta) + 0.25 * float(consts @ np.abs(mu2))


def kl_bound(mu1, theta, mu2) -> float:
    """Bound on the conditional KL divergence: ``2 ||mu1 - theta||_1 + ||mu2||_1``."""
    return 2.0 * _accuracy_gap(mu1, theta) + _l1(mu2)


def risk_gap_bound(gamma, mu1_star, theta, mu2_star) -> float:
    """Generalization-risk bound ``gamma + 2 ||mu1* - theta||_1 + ||mu2*||_1``."""
    if gamma < 0:
        raise NegativeGamma(f"gamma must be nonnegative, got {gamma}")
    return float(gamma) + kl_bound(mu1_star, theta, mu2_star)


def noise_aware_risk_bound(mu1_star, theta, mu2_star) -> float:
    """Bound on ``|R_mu*(w) - R_theta(w)|`` for a loss in [0, 1]: ``||mu1* - theta||_1 + ||mu2*||_1 / 2``."""
    return _accuracy_gap(mu1_star, theta) + 0.5 * _l1(mu2_star)


def _check_pair(p_mu: lm.ModelParams, p_theta: lm.ModelParams):
    if p_mu.m != p_theta.m:
        raise DimMismatch(f"models have different m: {p_mu.m} vs {p_theta.m}")
    lm.check_cap(p_mu.m)


def empirical_max_posterior_gap(p_mu: lm.ModelParams, p_theta: lm.ModelParams) -> float:
    """Max over all rows and labels of ``|p_mu(y|lambda) - p_theta(y|lambda)|``.

    The gap is the same for both labels, so only ``y = +1`` is evaluated.
    """
    _check_pair(p_mu, p_theta)
    rows = lm.all_rows(p_mu.m)
    return float(np.max(np.abs(lm.posterior(p_mu, rows) - lm.posterior(p_theta, rows))))


def max_posterior_gap_witness(p_mu: lm.ModelParams, p_theta: lm.ModelParams):
    """The row attaining :func:`empirical_max_posterior_gap`, with both posteriors."""
    _check_pair(p_mu, p_theta)
    rows = lm.all_rows(p_mu.m)
    a, b = lm.posterior(p_mu, rows), lm.posterior(p_theta, rows)
    i = int(np.argmax(np.abs(a - b)))
    return rows[i].tolist(), float(a[i]), float(b[i])


def empirical_kl(p_mu: lm.ModelParams, p_theta: lm.ModelParams) -> float:
    """Conditional KL ``sum_lambda p_mu(lambda) KL(p_mu(.|lambda) || p_theta(.|lambda))``.

    This is the expected KL between posteriors, weighted by the marginal of
    ``p_mu``; it is not the KL between the two joints.
    """
    _check_pair(p_mu, p_theta)
    rows = lm.all_rows(p_mu.m)
    weight = lm.marginal_table(p_mu)
    a = lm.posterior_logit(p_mu, rows)
    b = lm.posterior_logit(p_theta, rows)
    q = np.exp(log_expit(a))
    kl_rows = q * (log_expit(a) - log_expit(b)) + (1 - q) * (log_expit(-a) - log_expit(-b))
    return max(float(weight @ kl_rows), 0.0)


@dataclass
class BoundReport:
    posterior_bound: float
    empirical_max_posterior_gap: float
    kl_bound: float
    empirical_kl: float
    risk_gap_bound: float
    empirical_risk_gap: Optional[float] = None
    kl_form: str = "conditional-KL (posterior KL weighted by p_mu marginal)"

    @property
    def posterior_slack(self) -> float:
        return self.posterior_bound - self.empirical_max_posterior_gap

    @property
    def kl_slack(self) -> float:
        return self.kl_bound - self.empirical_kl

    @property
    def risk_slack(self) -> Optional[float]:
        if self.empirical_risk_gap is None:
            return None
        return self.risk_gap_bound - self.empirical_risk_gap

    def violations(self, tol=1e-9) -> list[str]:
        out = []
        if self.posterior_slack < -tol:
            out.append("posterior")
        if self.kl_slack < -tol:
            out.append("kl")
        if self.risk_slack is not None and self.risk_slack < -tol:
            out.append("risk")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(posterior_slack=self.posterior_slack, kl_slack=self.kl_slack,
                 risk_slack=self.risk_slack)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        rows = [
            ("posterior", self.posterior_bound, self.empirical_max_posterior_gap, self.posterior_slack),
            ("kl", self.kl_bound, self.empirical_kl, self.kl_slack),
            ("risk", self.risk_gap_bound, self.empirical_risk_gap, self.risk_slack),
        ]
        lines = [f"{'quantity':<10} {'bound':>12} {'empirical':>12} {'slack':>12}"]
        for name, bound, emp, slack in rows:
            fmt = lambda v: f"{v:12.6f}" if v is not None else f"{'-':>12}"
            lines.append(f"{name:<10} {fmt(bound)} {fmt(emp)} {fmt(slack)}")
        return "\n".join(lines)


def bound_report(p_mu: lm.ModelParams, p_theta: lm.ModelParams, gamma: float = 0.0,
                 empirical_risk_gap: Optional[float] = None) -> BoundReport:
    """All three bounds plus the enumerated posterior gap and conditional KL.

    ``p_theta`` must be an independent model (no dependencies).
    """
    if p_theta.M:
        raise DimMismatch("the comparison model p_theta must have no dependencies")
    return BoundReport(
        posterior_bound=posterior_bound(p_mu.mu1, p_theta.mu1, p_mu.mu2),
        empirical_max_posterior_gap=empirical_max_posterior_gap(p_mu, p_theta),
        kl_bound=kl_bound(p_mu.mu1, p_theta.mu1, p_mu.mu2),
        empirical_kl=empirical_kl(p_mu, p_theta),
        risk_gap_bound=risk_gap_bound(gamma, p_mu.mu1, p_theta.mu1, p_mu.mu2),
        empirical_risk_gap=empirical_risk_gap,
    )
