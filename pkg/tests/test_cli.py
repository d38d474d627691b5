import json
import os
import subprocess
import sys

import pytest

from twrsim import SweepResult
from twrsim.cli import (
    CSV_HEADER,
    build_network_config,
    main,
    read_sweep_csv,
    write_csv,
)


def mini_config(tmp_path, **extra):
    data = {
        "k": 2,
        "n": 6,
        "snr_db": 10.0,
        "epsilon": 1.0,
        "t_max": 1.0,
        "seed": 1,
        "sweep": {
            "snr_points_db": [5, 10],
            "n_points": [6],
            "protocols": ["LC-CF"],
            "selectors": ["ORS"],
            "trials": 100,
        },
    }
    data.update(extra)
    path = tmp_path / "mini.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_single_smoke(capsys):
    code = main(["single", "--k", "2", "--n", "50", "--snr-db", "20", "--seed", "7"])
    out = capsys.readouterr().out
    assert code == 0
    assert "single realization" in out
    assert "sum_rate" in out
    for label in ("ORS", "max-min-SNR", "random", "AF", "DF", "LC-CF"):
        assert label in out


def test_single_respects_trial_flag(capsys):
    main(["single", "--k", "1", "--n", "3", "--snr-db", "10", "--seed", "3", "--trial", "5"])
    assert "trial=5" in capsys.readouterr().out


def test_sweep_writes_csv_with_schema(tmp_path, capsys):
    cfg = mini_config(tmp_path)
    code = main(["sweep-n", "--config", cfg, "--output-dir", str(tmp_path)])
    assert code == 0
    out_path = tmp_path / "sweep-n.csv"
    assert out_path.exists()
    lines = out_path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3  # two SNR points, one protocol, one selector
    fields = lines[1].split(",")
    assert fields[0] == "n-sweep"
    assert fields[1] == "LC-CF"
    assert fields[2] == "ORS"
    assert fields[-1] == "1"  # seed column


def test_missing_config_reports_path(tmp_path, capsys):
    code = main(["sweep-n", "--config", str(tmp_path / "absent.json")])
    err = capsys.readouterr().err
    assert code == 2
    assert "absent.json" in err


def test_malformed_config_rejected(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["sweep-n", "--config", str(bad)])
    assert code == 2
    assert "bad.json" in capsys.readouterr().err


def test_unknown_protocol_rejected(tmp_path, capsys):
    cfg = mini_config(tmp_path)
    code = main(["sweep-n", "--config", cfg, "--protocols", "ZF", "--output-dir", str(tmp_path)])
    assert code == 2
    assert "ZF" in capsys.readouterr().err


def test_cli_overrides_beat_config_and_defaults(tmp_path):
    cfg = mini_config(tmp_path)
    main(
        [
            "sweep-n",
            "--config",
            cfg,
            "--seed",
            "42",
            "--trials",
            "50",
            "--output-dir",
            str(tmp_path),
            "--out",
            "o.csv",
        ]
    )
    rows = read_sweep_csv(str(tmp_path / "o.csv")).rows
    assert all(r.trials == 50 for r in rows)
    assert read_sweep_csv(str(tmp_path / "o.csv")).seed == 42


class _Args:
    k = None
    n = None
    snr_db = None
    epsilon = None
    t_max = None
    seed = None
    outage_fallback = None


def test_precedence_config_over_default():
    cfg = build_network_config(_Args(), {"k": 3, "seed": 9})
    assert cfg.k == 3
    assert cfg.seed == 9
    assert cfg.epsilon == 1.0  # default


def test_same_seed_runs_are_byte_identical(tmp_path):
    cfg = mini_config(tmp_path)
    main(["sweep-n", "--config", cfg, "--output-dir", str(tmp_path), "--out", "a.csv"])
    main(["sweep-n", "--config", cfg, "--output-dir", str(tmp_path), "--out", "b.csv"])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    cfg = mini_config(tmp_path)
    target = tmp_path / "from_env"
    monkeypatch.setenv("TWRSIM_OUTPUT_DIR", str(target))
    code = main(["sweep-n", "--config", cfg])
    assert code == 0
    assert (target / "sweep-n.csv").exists()


def test_empty_result_yields_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(SweepResult(rows=(), seed=5), str(path))
    assert path.read_text() == CSV_HEADER + "\n"


def test_csv_round_trip_is_exact(tmp_path):
    cfg = mini_config(tmp_path)
    main(["sweep-n", "--config", cfg, "--output-dir", str(tmp_path), "--out", "r.csv"])
    first = (tmp_path / "r.csv").read_bytes()
    parsed = read_sweep_csv(str(tmp_path / "r.csv"))
    write_csv(parsed, str(tmp_path / "r2.csv"))
    assert (tmp_path / "r2.csv").read_bytes() == first


def test_write_is_atomic_and_overwrites(tmp_path):
    path = tmp_path / "out.csv"
    path.write_text("stale")
    write_csv(SweepResult(rows=(), seed=1), str(path))
    assert path.read_text() == CSV_HEADER + "\n"
    leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".twrsim-")]
    assert leftovers == []


def test_write_failure_mentions_path(tmp_path):
    missing_dir = tmp_path / "nope" / "out.csv"
    with pytest.raises(OSError) as err:
        write_csv(SweepResult(rows=(), seed=1), str(missing_dir))
    assert "out.csv" in str(err.value)


def test_read_rejects_foreign_csv(tmp_path):
    alien = tmp_path / "alien.csv"
    alien.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(Exception):
        read_sweep_csv(str(alien))


def test_budget_refusal_exits_nonzero(tmp_path, capsys):
    cfg = mini_config(tmp_path)
    code = main(
        [
            "sweep-n",
            "--config",
            cfg,
            "--work-budget",
            "100",
            "--output-dir",
            str(tmp_path),
        ]
    )
    assert code == 2
    assert "budget" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "twr-sim" in capsys.readouterr().out


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "twrsim.cli", "single", "--k", "1", "--n", "2",
         "--snr-db", "0", "--seed", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "single realization" in proc.stdout


def test_committed_recipes_parse():
    here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    configs = os.path.join(here, "configs")
    names = sorted(os.listdir(configs))
    assert {
        "fig3.json",
        "fig3_underscaled.json",
        "fig4_n20.json",
        "fig4_n50.json",
        "fig5.json",
        "lemma1.json",
    } <= set(names)
    for name in names:
        with open(os.path.join(configs, name)) as handle:
            data = json.load(handle)
        assert "sweep" in data
        assert "kind" in data["sweep"]
