import json

import numpy as np
import pytest

from ltlab import functions as fn
from ltlab.cli import main
from ltlab.config import default_config, with_overrides
from ltlab.experiments import ExperimentError, brownian_local_time_mean, default_threads, run_experiment
from ltlab.report import HEADER, read_csv, rows_to_csv, rows_to_json, summarize

SMALL = dict(n_steps=1024, n_paths=4)


def cfg_for(exp, **kw):
    return with_overrides(default_config(exp), **{**SMALL, **kw})


@pytest.mark.parametrize(
    "exp, per_path",
    [("conservation", 1), ("theorem1", 5), ("theorem2", 10), ("identity27", 5), ("occupation31", 1), ("localtime_stats", 1)],
)
def test_each_experiment_runs(exp, per_path):
    kw = {"function": fn.product("s", fn.cosine())} if exp == "occupation31" else {}
    rows = run_experiment(cfg_for(exp, **kw), threads=1)
    assert len(rows) == SMALL["n_paths"] * per_path
    assert [r.path_id for r in rows] == sorted(r.path_id for r in rows)
    assert all(np.isfinite([r.lhs, r.rhs, r.abs_err, r.rel_err]).all() for r in rows)


def test_pvariation_audit_rows():
    rows = run_experiment(default_config("pvariation_audit"))
    assert len(rows) == 3 * 5
    assert all(r.lhs <= r.rhs * (1 + 1e-9) for r in rows)
    assert rows[0].variant == "p=1.0"


def test_conservation_ten_paths():
    rows = run_experiment(with_overrides(default_config("conservation"), n_paths=10), threads=2)
    assert len(rows) == 10
    assert max(r.rel_err for r in rows) <= 1e-12


def test_theorem1_linear_exact():
    rows = run_experiment(cfg_for("theorem1", function=fn.linear()))
    assert max(r.rel_err for r in rows) <= 1e-10


def test_identity27_rows_exact():
    rows = run_experiment(cfg_for("identity27", function=fn.cosine()))
    assert max(r.abs_err for r in rows) <= 1e-10


def test_theorem2_row_order():
    rows = run_experiment(cfg_for("theorem2", n_paths=1, sign_convention="both"))
    keys = [(r.epsilon, r.variant, r.sign_convention) for r in rows]
    assert keys[:4] == [
        (0.125, "backward", "resolved"),
        (0.125, "backward", "paper"),
        (0.125, "symmetric", "resolved"),
        (0.125, "symmetric", "paper"),
    ]


def test_csv_is_byte_identical_across_threads():
    cfg = cfg_for("theorem2", process=default_config().process)
    texts = {rows_to_csv(run_experiment(cfg, threads=t)) for t in (1, 1, 3, 4)}
    assert len(texts) == 1


def test_csv_round_trip():
    rows = run_experiment(cfg_for("theorem1"))
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(HEADER)
    assert read_csv(text) == rows


def test_summarize():
    rows = run_experiment(cfg_for("conservation", n_paths=1))
    g = summarize(rows)["groups"][0]
    assert g["n"] == 1 and g["lhs"]["se"] == 0.0
    with pytest.raises(ValueError):
        summarize([])
    stats = summarize(run_experiment(cfg_for("localtime_stats", n_paths=30)))
    assert stats["oracle"]["expected"] == pytest.approx(np.sqrt(2 / np.pi))
    assert abs(stats["oracle"]["z"]) < 5


def test_brownian_local_time_mean():
    assert brownian_local_time_mean(1.0) == pytest.approx(0.7978845608028654, rel=1e-15)
    assert brownian_local_time_mean(4.0, 0.0, 0.5) == pytest.approx(0.5 * 2 * 0.7978845608028654)
    assert brownian_local_time_mean(1.0, 10.0) < 1e-15


def test_experiment_error_has_path_context():
    cfg = cfg_for("theorem1", space=(-0.01, 0.01, 4), eps_ladder=(0.005,))
    with pytest.raises(ExperimentError, match="path_id 0"):
        run_experiment(cfg)


def test_threads_env(monkeypatch):
    monkeypatch.setenv("LTLAB_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("LTLAB_THREADS", "x")
    with pytest.raises(ValueError):
        default_threads()


# ---- command line


def write(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return p


def test_cli_run_csv(tmp_path, capsys):
    cfg = write(tmp_path, "experiment = conservation\nn_paths = 3\nn_steps = 512\n")
    assert main(["run", str(cfg), "--threads", "2"]) == 0
    out, err = capsys.readouterr()
    lines = out.splitlines()
    assert lines[0] == ",".join(HEADER) and len(lines) == 4
    assert "conservation" in err


def test_cli_run_json_to_file(tmp_path, capsys):
    cfg = write(tmp_path, "experiment = theorem1\nn_paths = 2\nn_steps = 512\n")
    target = tmp_path / "out.json"
    assert main(["run", str(cfg), "--format", "json", "--output", str(target), "--quiet"]) == 0
    assert capsys.readouterr().out == ""
    doc = json.loads(target.read_text())
    assert doc["schema_version"] == 1 and doc["columns"] == HEADER and len(doc["rows"]) == 10
    assert doc["summary"]["groups"][0]["n"] == 2


def test_cli_json_matches_rows():
    rows = run_experiment(cfg_for("conservation", n_paths=2))
    doc = json.loads(rows_to_json(rows))
    assert doc["rows"][1]["path_id"] == 1 and isinstance(doc["rows"][0]["lhs"], float)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", str(write(tmp_path, "experiment = theorem1\nbogus = 1\n"))]) == 1
    assert "line 2" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1
    assert main(["run", str(write(tmp_path, "experiment = conservation\n")), "--threads", "0"]) == 1
    assert main([]) == 1
    assert main(["frobnicate"]) == 1


def test_cli_print_defaults_round_trips(capsys):
    from ltlab.config import parse_config

    assert main(["print-defaults"]) == 0
    out = capsys.readouterr().out
    assert parse_config(out) == default_config()


def test_cli_help_lists_defaults(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    assert "eps_ladder" in out and "LTLAB_THREADS" in out


def test_cli_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 8


def test_cli_selftest_failure_exit_code(monkeypatch):
    import ltlab.cli

    monkeypatch.setattr(ltlab.cli, "run_selftest", lambda: [("broken", False, "x")])
    assert main(["selftest"]) == 2
