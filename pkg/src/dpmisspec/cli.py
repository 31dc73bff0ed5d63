"""Command-line entry point.

Every subcommand accepts ``--config <json>``; flags given on the command line
override keys in that file. Outputs are written into the ``--out`` directory.
Exit codes: 0 success, 2 validation error, 3 bound violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bounds as bd
from . import discovery, downstream, ingestion
from . import model as lm
from .errors import CapExceeded, DPMisspecError, ValidationError, ViolationFound
from .factors import ALL_KINDS, DependencySpec
from .fit import FitConfig, fit
from .harness import SweepConfig, run_bound_campaign, run_sweep, write_sweep_csv
from .sampling import gibbs_sample, make_rng, sample_exact

EXIT_OK, EXIT_VALIDATION, EXIT_VIOLATION = 0, 2, 3

FIT_KEYS = ["step_size", "max_iters", "l2_penalty", "tolerance", "seed", "mode", "init_accuracy",
            "gibbs_chains", "burn_in", "steps_per_iter"]
TRAIN_KEYS = ["step_size", "epochs", "batch_size", "seed", "loss", "hidden"]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _add(p, name, **kw):
    p.add_argument(f"--{name.replace('_', '-')}", dest=name, default=argparse.SUPPRESS, **kw)


def _load_config(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ValidationError("config file must hold a JSON object")
    skip = {"command", "config", "out", "func", "verbose"}
    cfg.update({k: v for k, v in vars(args).items() if k not in skip})
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) in (None, "")]
    if missing:
        raise ValidationError(f"missing required setting(s): {', '.join(missing)}")


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sub(cfg, keys, prefix=""):
    return {k: cfg[prefix + k] for k in keys if prefix + k in cfg}


def _load_deps(path):
    if not path:
        return ()
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(raw, dict):
        raw = raw.get("deps", [])
    return tuple(DependencySpec.from_dict(d) for d in raw)


def cmd_generate(args):
    cfg = _load_config(args)
    seed = int(cfg.get("seed", 0))
    if cfg.get("model"):
        params = ingestion.load_model_json(cfg["model"])
    elif cfg.get("true_params"):
        params = lm.ModelParams.from_dict(cfg["true_params"])
    else:
        _require(cfg, "m")
        lo, hi = cfg.get("accuracy_range", (0.1, 1.0))
        params = lm.ModelParams(make_rng(seed).uniform(lo, hi, size=int(cfg["m"])))
    n = int(cfg.get("n", 1000))
    method = cfg.get("method", "exact" if params.m <= lm.ENUM_CAP else "gibbs")
    if method == "exact":
        data = sample_exact(params, n, seed)
    elif method == "gibbs":
        data = gibbs_sample(params, n, int(cfg.get("burn_in", 1000)), int(cfg.get("thin", 10)), seed,
                            chains=int(cfg.get("chains", 64)))
    else:
        raise ValidationError(f"unknown sampling method {method!r}")
    data.save(_out(args))
    return EXIT_OK


def cmd_apply_lfs(args):
    cfg = _load_config(args)
    _require(cfg, "corpus", "lfs")
    lfs = ingestion.load_lfs_json(cfg["lfs"])
    corpus = ingestion.load_corpus(cfg["corpus"], cfg.get("truth"))
    votes = ingestion.apply_keyword_lfs(corpus, lfs)
    out = _out(args)
    ingestion.save_votes_csv(votes, out / "votes.csv")
    if corpus.truth is not None:
        ingestion.save_truth_csv(corpus.truth, out / "truth.csv")
    return EXIT_OK


def cmd_fit(args):
    cfg = _load_config(args)
    _require(cfg, "votes")
    votes = ingestion.load_votes_csv(cfg["votes"])
    deps = _load_deps(cfg.get("deps"))
    fit_cfg = FitConfig.from_dict({**cfg.get("fit", {}), **_sub(cfg, FIT_KEYS)})
    report = fit(votes, deps, fit_cfg)
    out = _out(args)
    ingestion.save_model_json(report.params, out / "model.json")
    ingestion.write_json({**report.to_dict(), "config": fit_cfg.to_dict()}, out / "fit_report.json")
    return EXIT_OK


def cmd_posterior(args):
    cfg = _load_config(args)
    _require(cfg, "model", "votes")
    params = ingestion.load_model_json(cfg["model"])
    votes = ingestion.load_votes_csv(cfg["votes"])
    ingestion.save_posteriors_csv(lm.posterior(params, votes), _out(args) / "posteriors.csv")
    return EXIT_OK


def cmd_bounds(args):
    cfg = _load_config(args)
    _require(cfg, "model", "theta")
    p_mu = ingestion.load_model_json(cfg["model"])
    p_theta = ingestion.load_model_json(cfg["theta"])
    risk_gap = None
    if cfg.get("classifier"):
        clf = downstream.Classifier.from_dict(json.loads(Path(cfg["classifier"]).read_text(encoding="utf-8")))
        risk_gap = downstream.empirical_risk_gap(p_mu, p_theta, clf)
    report = bd.bound_report(p_mu, p_theta, float(cfg.get("gamma", 0.0)), risk_gap)
    ingestion.write_json(report.to_dict(), _out(args) / "bounds.json")
    print(report.table())
    return EXIT_OK


def cmd_discover_deps(args):
    cfg = _load_config(args)
    _require(cfg, "votes", "truth")
    votes = ingestion.load_votes_csv(cfg["votes"])
    truth = ingestion.load_truth_csv(cfg["truth"])
    names = [lf.name for lf in ingestion.load_lfs_json(cfg["lfs"])] if cfg.get("lfs") else None
    if names is not None and len(names) != votes.shape[1]:
        raise ValidationError(f"{len(names)} LF names for {votes.shape[1]} vote columns")
    kinds = cfg.get("kinds") or [k.value for k in ALL_KINDS]
    candidates = discovery.candidate_pairs(votes, int(cfg.get("min_cofire", 10)))
    ranked = discovery.rank_dependencies(votes, truth, kinds, candidates)
    out = _out(args)
    discovery.write_ranked_csv(ranked, out / "ranked.csv", names)
    selected = discovery.select_top_d(ranked, int(cfg.get("d", 1)))
    ingestion.write_json({"deps": [s.to_dict() for s in selected]}, out / "deps.json")
    return EXIT_OK


def cmd_train(args):
    cfg = _load_config(args)
    _require(cfg, "votes")
    votes = ingestion.load_votes_csv(cfg["votes"])
    if cfg.get("posteriors"):
        post = ingestion.load_posteriors_csv(cfg["posteriors"])
    elif cfg.get("model"):
        post = lm.posterior(ingestion.load_model_json(cfg["model"]), votes)
    else:
        raise ValidationError("train needs either posteriors or model")
    feats = (ingestion.load_features_csv(cfg["features"]) if cfg.get("features")
             else downstream.one_hot_votes(votes))
    train_cfg = downstream.TrainConfig.from_dict({**cfg.get("train", {}), **_sub(cfg, TRAIN_KEYS)})
    clf = downstream.train_noise_aware(feats, post, train_cfg)
    out = _out(args)
    ingestion.write_json(clf.to_dict(), out / "classifier.json")
    auc = brier = None
    if cfg.get("truth"):
        truth = ingestion.load_truth_csv(cfg["truth"])
        pred = clf.predict(feats)
        auc = downstream.roc_auc(pred, truth)
        brier = downstream.brier_score(pred, truth)
    (out / "metrics.json").write_text(downstream.metrics_json(auc, brier, None) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load_config(args)
    sweep_cfg = SweepConfig.from_dict(cfg)
    records = run_sweep(sweep_cfg, progress=lambda msg: logging.getLogger("dpmisspec").info(msg))
    out = _out(args)
    write_sweep_csv(records, out / "sweep.csv")
    ingestion.write_json({
        "config": sweep_cfg.to_dict(),
        "records": [{"variant": r.variant, "d": r.d, "n_deps": r.n_deps, "mu2_l1": r.mu2_l1,
                     "posterior_bound": r.posterior_bound, "empirical_gap": r.empirical_gap,
                     "auc_mean": r.auc_mean, "auc_std": r.auc_std, "aucs": r.aucs,
                     "params": r.params.to_dict()} for r in records],
    }, out / "sweep.json")
    return EXIT_OK


def cmd_verify_bounds(args):
    cfg = _load_config(args)
    out = _out(args)
    kwargs = dict(trials=int(cfg.get("trials", 1000)),
                  m_range=(int(cfg.get("m_min", 2)), int(cfg.get("m_max", 5))),
                  seed=int(cfg.get("seed", 0)), max_deps=int(cfg.get("max_deps", 3)))
    if "risk_trials" in cfg:
        kwargs["risk_trials"] = int(cfg["risk_trials"])
    try:
        summary = run_bound_campaign(**kwargs)
    except ViolationFound as exc:
        ingestion.write_json(exc.summary, out / "bound_campaign.json")
        print(f"bound violation(s): {len(exc.witnesses)}", file=sys.stderr)
        return EXIT_VIOLATION
    ingestion.write_json(summary, out / "bound_campaign.json")
    for key in ("min_posterior_slack", "min_kl_slack", "min_risk_slack"):
        value = summary[key]
        print(f"{key:<22} {'-' if value is None else f'{value:.6f}'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpmisspec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with settings; flags override it")
        p.add_argument("--out", required=True, help="output directory")
        p.set_defaults(func=func)
        return p

    p = command("generate", cmd_generate, "sample a synthetic dataset from a label model")
    _add(p, "model", help="model JSON to sample from")
    _add(p, "m", type=int, help="number of LFs for a random independent model")
    _add(p, "n", type=int)
    _add(p, "seed", type=int)
    _add(p, "method", choices=["exact", "gibbs"])
    _add(p, "burn_in", type=int)
    _add(p, "thin", type=int)
    _add(p, "chains", type=int)

    p = command("apply-lfs", cmd_apply_lfs, "apply keyword LFs to a text corpus")
    _add(p, "corpus", help="text file, one document per line")
    _add(p, "lfs", help="LF definitions JSON")
    _add(p, "truth", help="optional truth CSV aligned with the corpus")

    p = command("fit", cmd_fit, "fit a label model to a votes CSV")
    _add(p, "votes")
    _add(p, "deps", help="JSON list of dependencies (or deps.json from discover-deps)")
    for key, typ in (("step_size", float), ("max_iters", int), ("l2_penalty", float),
                     ("tolerance", float), ("seed", int), ("mode", str), ("init_accuracy", float),
                     ("gibbs_chains", int), ("burn_in", int), ("steps_per_iter", int)):
        _add(p, key, type=typ)

    p = command("posterior", cmd_posterior, "compute probabilistic labels")
    _add(p, "model")
    _add(p, "votes")

    p = command("bounds", cmd_bounds, "evaluate misspecification bounds for two models")
    _add(p, "model", help="dependency model p_mu")
    _add(p, "theta", help="independent model p_theta")
    _add(p, "gamma", type=float)
    _add(p, "classifier", help="optional classifier JSON (one-hot vote features) for the risk gap")

    p = command("discover-deps", cmd_discover_deps, "rank dependencies against true labels")
    _add(p, "votes")
    _add(p, "truth")
    _add(p, "lfs", help="LF JSON, used for names in ranked.csv")
    _add(p, "kinds", type=_str_list, help="comma-separated kinds")
    _add(p, "min_cofire", type=int)
    _add(p, "d", type=int)

    p = command("train", cmd_train, "train the downstream classifier on probabilistic labels")
    _add(p, "votes")
    _add(p, "posteriors")
    _add(p, "model")
    _add(p, "features")
    _add(p, "truth")
    for key, typ in (("step_size", float), ("epochs", int), ("batch_size", int), ("seed", int),
                     ("loss", str), ("hidden", _int_list)):
        _add(p, key, type=typ)

    p = command("sweep", cmd_sweep, "run the over-specification sweep")
    _add(p, "m", type=int)
    _add(p, "n", type=int)
    _add(p, "votes_path")
    _add(p, "truth_path")
    _add(p, "features_path")
    _add(p, "d_values", type=_int_list)
    _add(p, "runs", type=int)
    _add(p, "seed", type=int)
    _add(p, "min_cofire", type=int)
    _add(p, "noise_dim", type=int)

    p = command("verify-bounds", cmd_verify_bounds, "randomized bound-dominance campaign")
    _add(p, "trials", type=int)
    _add(p, "risk_trials", type=int)
    _add(p, "m_min", type=int)
    _add(p, "m_max", type=int)
    _add(p, "max_deps", type=int)
    _add(p, "seed", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ValidationError, CapExceeded, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DPMisspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
