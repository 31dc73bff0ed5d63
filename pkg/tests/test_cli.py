import json
import subprocess
import sys

import pytest

from dpmisspec import bounds as bd
from dpmisspec import cli


def run(*argv):
    return cli.main([str(a) for a in argv])


def snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def make_workspace(root):
    """Input files for :func:`pipeline`, plus the generated dataset it reads."""
    (root / "corpus.txt").write_text("well worth watching\nit was not worth it\ndo not watch\n"
                                     "worth every penny\nnot worth the ticket\n")
    (root / "truth.csv").write_text("1\n-1\n-1\n1\n-1\n")
    (root / "lfs.json").write_text(json.dumps([
        {"name": "worth", "pattern": "worth", "emit": 1},
        {"name": "not worth", "pattern": "not worth", "emit": -1},
        {"name": "not", "pattern": "not", "emit": -1},
    ]))
    (root / "sweep.json").write_text(json.dumps({
        "m": 4, "n": 400, "d_values": [0, 1], "runs": 2, "seed": 2,
        "fit": {"max_iters": 100}, "train": {"epochs": 2}}))
    assert run("generate", "--m", 4, "--n", 400, "--seed", 1, "--out", root / "gen") == 0
    return root


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    return make_workspace(tmp_path_factory.mktemp("cli"))


def pipeline(root):
    """Every subcommand with its output directory, in dependency order."""
    gen = root / "gen"
    return [
        ("generate", ["--m", 4, "--n", 400, "--seed", 1]),
        ("apply-lfs", ["--corpus", root / "corpus.txt", "--lfs", root / "lfs.json",
                       "--truth", root / "truth.csv"]),
        ("discover-deps", ["--votes", gen / "votes.csv", "--truth", gen / "truth.csv", "--d", 1]),
        ("fit", ["--votes", gen / "votes.csv", "--max-iters", 100]),
        ("fit", ["--votes", gen / "votes.csv", "--deps", "{prev}/discover-deps/deps.json", "--max-iters", 100]),
        ("posterior", ["--model", "{prev}/fit/model.json", "--votes", gen / "votes.csv"]),
        ("bounds", ["--model", "{prev}/fit-2/model.json", "--theta", "{prev}/fit/model.json"]),
        ("train", ["--votes", gen / "votes.csv", "--posteriors", "{prev}/posterior/posteriors.csv",
                   "--truth", gen / "truth.csv", "--epochs", 3]),
        ("sweep", ["--config", root / "sweep.json"]),
        ("verify-bounds", ["--trials", 20, "--seed", 4]),
    ]


def run_pipeline(root, tag):
    base = root / tag
    outputs = {}
    for cmd, args in pipeline(root):
        name = cmd if cmd not in outputs else f"{cmd}-2"
        args = [str(a).replace("{prev}", str(base)) for a in args]
        assert run(cmd, *args, "--out", base / name) == 0, cmd
        outputs[name] = snapshot(base / name)
    return outputs


def test_every_subcommand_is_byte_deterministic(workspace):
    first = run_pipeline(workspace, "a")
    second = run_pipeline(workspace, "b")
    assert set(first) == {"generate", "apply-lfs", "discover-deps", "fit", "fit-2", "posterior", "bounds",
                          "train", "sweep", "verify-bounds"}
    for name in first:
        assert first[name] == second[name], name
    assert set(first["generate"]) == {"votes.csv", "truth.csv", "dataset.json"}
    assert first["apply-lfs"]["votes.csv"].decode().splitlines() == ["1,0,0", "1,-1,-1", "0,0,-1",
                                                                      "1,0,0", "1,-1,-1"]


def test_config_file_and_flag_override(workspace, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 3, "n": 50, "seed": 9}))
    assert run("generate", "--config", cfg, "--n", 20, "--out", tmp_path / "o") == 0
    assert len((tmp_path / "o" / "votes.csv").read_text().splitlines()) == 20


def test_bounds_prints_table(workspace, tmp_path, capsys):
    (tmp_path / "mu.json").write_text(json.dumps({"m": 1, "mu1": [1.0], "deps": [], "mu2": []}))
    (tmp_path / "th.json").write_text(json.dumps({"m": 1, "mu1": [0.0], "deps": [], "mu2": []}))
    assert run("bounds", "--model", tmp_path / "mu.json", "--theta", tmp_path / "th.json",
               "--out", tmp_path / "b") == 0
    out = capsys.readouterr().out
    assert "0.500000" in out and "0.380797" in out


def test_validation_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n")
    assert run("fit", "--votes", bad, "--out", tmp_path / "f") == 2
    assert run("fit", "--out", tmp_path / "f") == 2
    assert run("fit", "--votes", tmp_path / "missing.csv", "--out", tmp_path / "f") == 2
    wide = tmp_path / "wide.csv"
    wide.write_text(",".join(["1"] * 13) + "\n")
    assert run("fit", "--votes", wide, "--out", tmp_path / "f") == 2


def test_bound_violation_exits_3(tmp_path, monkeypatch):
    real = cli.run_bound_campaign

    def corrupted(**kw):
        return real(posterior_bound_fn=lambda a, b, c: 0.01 * bd.posterior_bound(a, b, c), **kw)

    monkeypatch.setattr(cli, "run_bound_campaign", corrupted)
    assert run("verify-bounds", "--trials", 10, "--out", tmp_path / "v") == 3
    summary = json.loads((tmp_path / "v" / "bound_campaign.json").read_text())
    assert summary["violations"] > 0


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dpmisspec", "verify-bounds", "--trials", "0",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
