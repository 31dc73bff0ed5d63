"""End-to-end experiments: the over-specification sweep and bound-verification campaigns."""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import bounds as bd
from . import discovery, downstream, ingestion
from . import model as lm
from .errors import ValidationError, ViolationFound
from .factors import ALL_KINDS, DependencyKind
from .fit import FitConfig, fit
from .sampling import gibbs_sample, make_rng, random_params, sample_exact

logger = logging.getLogger(__name__)

VARIANT_ALIASES = {
    "all": ALL_KINDS,
    "B&N": (DependencyKind.BOLSTERING, DependencyKind.NEGATED),
    "F&P": (DependencyKind.FIXING, DependencyKind.PRIORITY),
}

SWEEP_COLUMNS = ["variant", "d", "n_deps", "mu2_l1", "posterior_bound", "empirical_gap",
                 "auc_mean", "auc_std"]


def default_d_values() -> list[int]:
    return [0, *range(1, 40, 2), 40]


@dataclass
class SweepConfig:
    """Settings for :func:`run_sweep`.

    Data comes either from files (``votes_path`` and ``truth_path``, optional
    ``features_path``) or is sampled from ``true_params``. When neither is
    given, an independent model with ``m`` accuracy weights drawn uniformly
    from ``accuracy_range`` is used.
    """

    m: int = 10
    n: int = 10000
    true_params: Optional[dict] = None
    accuracy_range: tuple = (0.1, 1.0)
    votes_path: Optional[str] = None
    truth_path: Optional[str] = None
    features_path: Optional[str] = None
    d_values: list = field(default_factory=default_d_values)
    variants: dict = field(default_factory=lambda: {"all": [k.value for k in ALL_KINDS]})
    runs: int = 20
    seed: int = 0
    train_fraction: float = 0.5
    min_cofire: int = 10
    noise_dim: int = 0
    fit: dict = field(default_factory=lambda: {"max_iters": 500, "tolerance": 1e-5})
    train: dict = field(default_factory=dict)

    def __post_init__(self):
        self.d_values = [int(d) for d in self.d_values]
        if any(d < 0 for d in self.d_values) or self.d_values != sorted(self.d_values):
            raise ValidationError("d_values must be nonnegative and sorted ascending")
        if not 1 <= self.runs <= 100:
            raise ValidationError("runs must be between 1 and 100")
        if not 0 < self.train_fraction < 1:
            raise ValidationError("train_fraction must lie strictly between 0 and 1")
        variants = {}
        for name, kinds in self.variants.items():
            if isinstance(kinds, str):
                kinds = VARIANT_ALIASES.get(kinds, [kinds])
            variants[str(name)] = [DependencyKind.parse(k).value for k in kinds]
        self.variants = variants
        self.accuracy_range = tuple(self.accuracy_range)
        FitConfig.from_dict(self.fit)
        downstream.TrainConfig.from_dict(self.train)

    @classmethod
    def from_dict(cls, d) -> "SweepConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValidationError(f"unknown sweep config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["accuracy_range"] = list(self.accuracy_range)
        return d


@dataclass
class SweepRecord:
    variant: str
    d: int
    n_deps: int
    mu2_l1: float
    posterior_bound: float
    empirical_gap: Optional[float]
    auc_mean: float
    auc_std: float
    aucs: list = field(default_factory=list)
    params: Optional[lm.ModelParams] = None

    def csv_row(self) -> list:
        return [self.variant, self.d, self.n_deps, repr(self.mu2_l1), repr(self.posterior_bound),
                "" if self.empirical_gap is None else repr(self.empirical_gap),
                repr(self.auc_mean), repr(self.auc_std)]


def _sweep_data(config: SweepConfig):
    if config.votes_path:
        if not config.truth_path:
            raise ValidationError("a file-based sweep needs truth_path for discovery and evaluation")
        votes = ingestion.load_votes_csv(config.votes_path)
        truth = ingestion.load_truth_csv(config.truth_path)
        if truth.size != votes.shape[0]:
            raise ValidationError(f"{votes.shape[0]} vote rows but {truth.size} truth labels")
        feats = (ingestion.load_features_csv(config.features_path) if config.features_path
                 else downstream.make_features(votes, config.noise_dim, config.seed))
        return votes, truth, feats
    if config.true_params is not None:
        params = lm.ModelParams.from_dict(config.true_params)
    else:
        lo, hi = config.accuracy_range
        params = lm.ModelParams(make_rng(config.seed).uniform(lo, hi, size=config.m))
    if params.m <= lm.ENUM_CAP:
        data = sample_exact(params, config.n, config.seed + 1)
    else:
        data = gibbs_sample(params, config.n, burn_in=1000, thin=10, seed=config.seed + 1)
    feats = downstream.make_features(data.labels, config.noise_dim, config.seed + 2)
    return data.labels, data.truth, feats


def run_sweep(config: SweepConfig, progress: Callable[[str], None] | None = None) -> list[SweepRecord]:
    """Fit label models with the top-``d`` dependencies per kind and score a downstream model.

    For every variant and every ``d``: dependencies are ranked on the training
    split with the truth labels, the strongest ``d`` per kind are modeled, the
    label model is fit on the training votes alone, and ``runs`` downstream
    classifiers (seeds ``seed .. seed + runs - 1``) are trained on its
    posteriors and scored by ROC-AUC on the held-out split.
    """
    votes, truth, feats = _sweep_data(config)
    n = votes.shape[0]
    order = make_rng(config.seed + 3).permutation(n)
    n_train = int(round(config.train_fraction * n))
    tr, te = order[:n_train], order[n_train:]
    fit_cfg = FitConfig.from_dict(config.fit)
    train_cfg = downstream.TrainConfig.from_dict(config.train)
    m = votes.shape[1]

    baseline = fit(votes[tr], (), fit_cfg).params
    candidates = discovery.candidate_pairs(votes[tr], config.min_cofire)
    records = []
    for variant, kinds in config.variants.items():
        ranked = discovery.rank_dependencies(votes[tr], truth[tr], kinds, candidates)
        for d in config.d_values:
            deps = discovery.select_top_d(ranked, d)
            params = baseline if not deps else fit(votes[tr], deps, fit_cfg).params
            post = lm.posterior(params, votes[tr])
            gap = bd.empirical_max_posterior_gap(params, baseline) if m <= lm.ENUM_CAP else None
            aucs = []
            for r in range(config.runs):
                cfg = downstream.TrainConfig(**{**train_cfg.to_dict(), "seed": train_cfg.seed + config.seed + r})
                clf = downstream.train_noise_aware(feats[tr], post, cfg)
                aucs.append(downstream.roc_auc(clf.predict(feats[te]), truth[te]))
            rec = SweepRecord(
                variant=variant, d=d, n_deps=len(deps), mu2_l1=float(np.abs(params.mu2).sum()),
                posterior_bound=bd.posterior_bound(params.mu1, baseline.mu1, params.mu2),
                empirical_gap=gap, auc_mean=float(np.mean(aucs)), auc_std=float(np.std(aucs)),
                aucs=aucs, params=params)
            records.append(rec)
            msg = (f"{variant} d={d} deps={rec.n_deps} |mu2|_1={rec.mu2_l1:.4f} "
                   f"auc={rec.auc_mean:.4f}+-{rec.auc_std:.4f}")
            logger.info(msg)
            if progress:
                progress(msg)
    return records


def write_sweep_csv(records, path):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for rec in records:
            w.writerow(rec.csv_row())
    return path


def run_bound_campaign(trials: int = 1000, m_range=(2, 5), seed: int = 0, max_deps: int = 3,
                       risk_trials: Optional[int] = None, risk_m_max: int = 4,
                       param_range: float = 2.0, strict: bool = True,
                       posterior_bound_fn=bd.posterior_bound, kl_bound_fn=bd.kl_bound,
                       risk_bound_fn=bd.noise_aware_risk_bound) -> dict:
    """Randomized check that every enumerated quantity sits below its bound.

    Each of ``trials`` draws a dependency model ``p_mu`` (``m`` in ``m_range``,
    up to ``max_deps`` random dependencies) and an independent ``p_theta``,
    parameters uniform in ``[-param_range, param_range]``, and checks the
    posterior-gap and conditional-KL bounds. ``risk_trials`` (default
    ``trials // 2``) further draws with ``m <= risk_m_max`` check the
    noise-aware risk gap of a randomly initialized classifier.

    Returns a summary dict; with ``strict`` any violation raises
    :class:`ViolationFound` carrying the witnesses. The bound functions can be
    swapped out, which the test-suite uses as a negative control.
    """
    lo, hi = int(m_range[0]), int(m_range[1])
    if lo < 2 or hi < lo or hi > lm.ENUM_CAP:
        raise ValidationError(f"m_range must satisfy 2 <= lo <= hi <= {lm.ENUM_CAP}, got {m_range}")
    if risk_trials is None:
        risk_trials = trials // 2
    rng = make_rng(seed)
    summary = {
        "trials": int(trials), "risk_trials": int(risk_trials), "seed": int(seed),
        "m_range": [lo, hi], "max_deps": int(max_deps),
        "min_posterior_slack": None, "min_kl_slack": None, "min_risk_slack": None,
        "min_empirical_kl": None, "max_empirical_gap": None, "violations": 0,
    }
    witnesses = []

    def update(key, value, op):
        summary[key] = value if summary[key] is None else op(summary[key], value)

    for t in range(trials):
        m = int(rng.integers(lo, hi + 1))
        n_deps = int(rng.integers(0, max_deps + 1))
        p_mu = random_params(rng, m, n_deps, -param_range, param_range)
        p_theta = lm.ModelParams(rng.uniform(-param_range, param_range, size=m))
        gap = bd.empirical_max_posterior_gap(p_mu, p_theta)
        kl = bd.empirical_kl(p_mu, p_theta)
        post_slack = posterior_bound_fn(p_mu.mu1, p_theta.mu1, p_mu.mu2) - gap
        kl_slack = kl_bound_fn(p_mu.mu1, p_theta.mu1, p_mu.mu2) - kl
        update("min_posterior_slack", post_slack, min)
        update("min_kl_slack", kl_slack, min)
        update("min_empirical_kl", kl, min)
        update("max_empirical_gap", gap, max)
        for name, slack in (("posterior", post_slack), ("kl", kl_slack)):
            if slack < -1e-9 or (name == "kl" and kl < 0):
                witnesses.append({"trial": t, "bound": name, "slack": slack,
                                  "p_mu": p_mu.to_dict(), "p_theta": p_theta.to_dict()})

    risk_hi = min(hi, risk_m_max)
    for t in range(risk_trials):
        m = int(rng.integers(min(lo, risk_hi), risk_hi + 1))
        n_deps = int(rng.integers(0, max_deps + 1))
        p_true = random_params(rng, m, n_deps, -param_range, param_range)
        p_theta = lm.ModelParams(rng.uniform(-param_range, param_range, size=m))
        clf = downstream.Classifier.init(3 * m, (16, 16), seed=int(rng.integers(2 ** 31)))
        clf.weights = [(w * 3.0, b + rng.normal(size=b.shape)) for w, b in clf.weights]
        gap = downstream.empirical_risk_gap(p_true, p_theta, clf)
        slack = risk_bound_fn(p_true.mu1, p_theta.mu1, p_true.mu2) - gap
        update("min_risk_slack", slack, min)
        if slack < -1e-9:
            witnesses.append({"trial": t, "bound": "risk", "slack": slack,
                              "p_mu": p_true.to_dict(), "p_theta": p_theta.to_dict()})

    summary["violations"] = len(witnesses)
    summary["witnesses"] = witnesses
    for w in witnesses:
        logger.error("bound violation: %s", w)
    if witnesses and strict:
        raise ViolationFound(summary, witnesses)
    return summary
