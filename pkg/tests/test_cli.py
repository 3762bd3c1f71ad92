import json
import os

import pytest

from spiralspec import cli

FAST = {
    "tasks": ["convdiff"],
    "convdiff": {"h": 0.1, "eigs": [{"R": 40, "eta": 0.0, "k": 6}],
                 "sigma_min": [{"lambda": [-0.15, 0.0], "R": [10, 20], "eta": [0.0]}]},
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_defaults_load():
    cfg = cli.load_config(None)
    assert cfg["seed"] == 0 and cfg["tasks"] == []


@pytest.mark.parametrize("bad", [
    {"bogus": 1},
    {"spiral": {"eigs": {"k": 10, "extra": True}}},
    {"tasks": ["nope"]},
    {"convdiff": {"eigs": [{"R": 10}]}},
    {"seed": -1},
])
def test_invalid_config_rejected(bad):
    with pytest.raises(cli.ConfigError):
        cli.load_config(bad)


def test_unreadable_config_exit_code(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    assert cli.main(["run", "--config", write_cfg(tmp_path, {"x": 1}), "--out", str(tmp_path / "o")]) \
        == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_empty_task_list(tmp_path):
    out = tmp_path / "empty"
    assert cli.main(["run", "--config", write_cfg(tmp_path, {}), "--out", str(out)]) == cli.EXIT_OK
    man = json.loads((out / "manifest.json").read_text())
    assert man["tasks"] == {} and man["files"] == []


def test_dependency_planning():
    cfg = cli.load_config({"tasks": ["spiral.eigs"]})
    assert cli.plan_tasks(cfg) == ["wavetrain", "curves", "spiral.solve", "spiral.eigs"]
    cfg = cli.load_config({"tasks": ["curves"], "wavetrain": {"source": "simulate"}})
    assert cli.plan_tasks(cfg) == ["wavetrain", "curves"]


def test_manifest_complete_and_reproducible(tmp_path):
    cfg = write_cfg(tmp_path, FAST)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", "--config", cfg, "--out", str(a)]) == cli.EXIT_OK
    assert cli.main(["convdiff", "--config", cfg, "--out", str(b), "--workers", "2"]) == cli.EXIT_OK
    man = json.loads((a / "manifest.json").read_text())
    assert man["tasks"] == {"convdiff": "ok"}
    listed = {f["path"] for f in man["files"]}
    assert listed == {n for n in os.listdir(a) if n != "manifest.json"}
    assert set(man["config"]) == set(cli.DEFAULTS)
    for name in listed:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_failure_skips_dependents(tmp_path, monkeypatch):
    def boom(ctx):
        raise RuntimeError("injected")

    monkeypatch.setitem(cli.RUNNERS, "wavetrain", boom)
    cfg = cli.load_config(dict(FAST, tasks=["convdiff", "curves"], wavetrain={"source": "simulate"}))
    code, man, _ = cli.run(cfg, out=str(tmp_path / "f"))
    assert code == cli.EXIT_TASK
    assert man["tasks"] == {"convdiff": "ok", "wavetrain": "failed", "curves": "skipped"}
    assert "injected" in man["errors"]["wavetrain"]
