import csv
import inspect

import numpy as np
import pytest

from dpmisspec import bounds as bd
from dpmisspec.errors import ValidationError, ViolationFound
from dpmisspec.fit import FitConfig, fit, fit_exact, fit_gibbs
from dpmisspec.harness import (SWEEP_COLUMNS, SweepConfig, default_d_values, run_bound_campaign,
                               run_sweep, write_sweep_csv)


def small_config(**kw):
    base = dict(m=5, n=600, d_values=[0, 1, 3], runs=2, seed=1,
                variants={"all": "all", "B&N": "B&N"},
                fit={"max_iters": 200}, train={"epochs": 3})
    base.update(kw)
    return SweepConfig.from_dict(base)


@pytest.fixture(scope="module")
def sweep():
    return run_sweep(small_config())


def test_default_d_values():
    assert default_d_values()[:4] == [0, 1, 3, 5] and default_d_values()[-1] == 40


def test_sweep_row_count_and_columns(sweep, tmp_path):
    assert len(sweep) == 2 * 3
    path = write_sweep_csv(sweep, tmp_path / "sweep.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == SWEEP_COLUMNS and len(rows) == 7
    for rec in sweep:
        assert len(rec.aucs) == 2
        assert rec.n_deps <= rec.d * (5 if rec.variant == "all" else 2)


def test_sweep_d0_is_independent_baseline(sweep):
    for rec in sweep:
        if rec.d == 0:
            assert rec.n_deps == 0 and rec.mu2_l1 == 0.0
            assert rec.empirical_gap == 0.0 and rec.posterior_bound == 0.0
    d0 = [r for r in sweep if r.d == 0]
    assert d0[0].params == d0[1].params
    assert d0[0].auc_mean == d0[1].auc_mean


def test_sweep_gap_within_bound(sweep):
    for rec in sweep:
        if rec.empirical_gap is not None and rec.n_deps:
            flip = bd.flip_aware_posterior_bound(rec.params.mu1, sweep[0].params.mu1, rec.params.mu2,
                                                 rec.params.deps)
            assert rec.empirical_gap <= flip + 1e-9


def test_sweep_is_deterministic(sweep):
    again = run_sweep(small_config())
    assert [r.csv_row() for r in again] == [r.csv_row() for r in sweep]


def test_sweep_config_validation():
    with pytest.raises(ValidationError):
        small_config(d_values=[3, 1])
    with pytest.raises(ValidationError):
        small_config(runs=101)
    with pytest.raises(ValidationError):
        small_config(variants={"x": "similar"})
    with pytest.raises(ValidationError):
        SweepConfig.from_dict({"bogus": 1})


def test_fit_api_has_no_truth_parameter():
    for fn in (fit, fit_exact, fit_gibbs):
        names = set(inspect.signature(fn).parameters)
        assert not names & {"truth", "labels", "y"}


def test_empty_campaign():
    summary = run_bound_campaign(trials=0)
    assert summary["trials"] == 0 and summary["violations"] == 0 and summary["witnesses"] == []
    assert summary["min_posterior_slack"] is None


def test_small_campaign_is_clean():
    summary = run_bound_campaign(trials=60, seed=3)
    assert summary["violations"] == 0
    assert summary["min_posterior_slack"] >= -1e-9 and summary["min_kl_slack"] >= -1e-9
    assert summary["min_risk_slack"] >= -1e-9 and summary["min_empirical_kl"] >= 0


def test_corrupted_bound_is_caught():
    def too_tight(mu1, theta, mu2):
        return 0.01 * bd.posterior_bound(mu1, theta, mu2)

    with pytest.raises(ViolationFound) as exc:
        run_bound_campaign(trials=20, seed=0, posterior_bound_fn=too_tight)
    assert exc.value.witnesses and exc.value.witnesses[0]["bound"] == "posterior"
    summary = run_bound_campaign(trials=20, seed=0, posterior_bound_fn=too_tight, strict=False)
    assert summary["violations"] > 0


def test_campaign_rejects_bad_range():
    with pytest.raises(ValidationError):
        run_bound_campaign(trials=1, m_range=(1, 20))


def test_file_based_sweep(tmp_path, sweep):
    from dpmisspec.ingestion import save_truth_csv, save_votes_csv
    from dpmisspec.model import ModelParams
    from dpmisspec.sampling import sample_exact

    data = sample_exact(ModelParams(np.linspace(0.2, 1.0, 4)), 300, seed=0)
    save_votes_csv(data.labels, tmp_path / "v.csv")
    save_truth_csv(data.truth, tmp_path / "t.csv")
    cfg = small_config(votes_path=str(tmp_path / "v.csv"), truth_path=str(tmp_path / "t.csv"),
                       variants={"all": "all"}, runs=1)
    recs = run_sweep(cfg)
    assert len(recs) == 3 and recs[0].params.m == 4
    assert FitConfig.from_dict(cfg.fit).max_iters == 200
