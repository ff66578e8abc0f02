import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smartpilot.cli import main
from smartpilot.config import RunConfig, format_config, parse_config, read_config_text
from smartpilot.errors import ConfigurationError


def test_empty_config_gives_table_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("# nothing\n\n")
    cfg = parse_config(path)
    assert (cfg.cells, cfg.users_per_cell, cfg.cell_radius) == (7, 8, 500.0)
    assert (cfg.path_loss_exponent, cfg.shadow_sigma_db, cfg.cell_edge_snr_db) == (3.0, 8.0, 20.0)
    assert (cfg.pilot_power_dbm, cfg.data_power_dbm) == (0.0, 0.0)
    sys_cfg = cfg.system_config()
    assert sys_cfg.pilot_power == sys_cfg.data_power == 1.0
    assert sys_cfg.data_noise_var == pytest.approx(0.01)


def test_zero_users_names_invariant_and_line(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("seed = 1\nusers_per_cell = 0\n")
    with pytest.raises(ConfigurationError, match=r"line 2: users_per_cell: K >= 1"):
        parse_config(path)


def test_flag_overrides_file(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text("seed = 7  # from file\ntrials = 5\n")
    cfg = parse_config(path, {"seed": 42})
    assert cfg.seed == 42
    assert cfg.trials == 5


def test_unknown_key_and_bad_value():
    with pytest.raises(ConfigurationError, match="line 3: unknown key 'colour'"):
        read_config_text("seed = 1\n\ncolour = red\n")
    with pytest.raises(ConfigurationError, match="line 1: cannot parse"):
        read_config_text("trials = many\n")
    with pytest.raises(ConfigurationError, match="line 1"):
        read_config_text("just text\n")


def test_auto_values():
    values, _ = read_config_text("antennas = auto\nstrategies = spa, random\n")
    assert values == {"antennas": None, "strategies": ("spa", "random")}


configs = st.builds(
    RunConfig,
    cells=st.sampled_from([1, 7]),
    users_per_cell=st.integers(1, 12),
    cell_radius=st.floats(1.0, 5000.0),
    shadow_sigma_db=st.floats(0.0, 12.0),
    pilot_power_dbm=st.floats(-30.0, 30.0),
    antennas=st.none() | st.lists(st.integers(1, 1024), min_size=1, max_size=5).map(tuple),
    trials=st.none() | st.integers(1, 10**6),
    seed=st.integers(0, 2**63 - 1),
    strategies=st.none()
    | st.lists(st.sampled_from(["spa", "random", "optimal_p"]), min_size=1, max_size=3).map(tuple),
    write_json=st.booleans(),
    out=st.sampled_from(["results", "out/dir", "a_b"]),
)


@settings(max_examples=100, deadline=None)
@given(configs)
def test_config_round_trip(cfg):
    values, _ = read_config_text(format_config(cfg))
    assert RunConfig(**values) == cfg


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_cdf_command(tmp_path):
    out = tmp_path / "cdf"
    assert main(["cdf", "--trials", "10", "--antennas", "8,32", "--strategies", "random,spa", "--out", str(out)]) == 0
    rows = read_csv(out / "cdf.csv")
    assert rows[0] == ["sinr_db", "random_m8", "spa_m8", "random_m32", "spa_m32"]
    data = np.array(rows[1:], dtype=float)
    assert data[0, 0] == -60.0 and data[-1, 0] == 30.0
    assert np.all(np.diff(data[:, 1:], axis=0) >= 0)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["scenario"]["trials"] == 10
    assert set(summary["strategies"]) == {"random", "spa"}
    assert "wall_clock_seconds" in json.loads((out / "timing.json").read_text())


def test_capacity_command(tmp_path):
    out = tmp_path / "cap"
    assert main(["capacity-sweep", "--trials", "5", "--antennas", "8,16", "--out", str(out)]) == 0
    rows = read_csv(out / "capacity.csv")
    assert rows[0] == ["m", "random", "conventional", "spa", "optimal_p"]
    assert [r[0] for r in rows[1:]] == ["8", "16"]


def test_convergence_command_single_cell(tmp_path):
    cfg = tmp_path / "one.cfg"
    cfg.write_text("cells = 1\nmax_sweeps = 4\n")
    out = tmp_path / "conv"
    assert main(["convergence", "--config", str(cfg), "--trials", "3", "--antennas", "8", "--out", str(out)]) == 0
    rows = read_csv(out / "convergence.csv")
    assert rows[0] == ["sweep", "cell0_m8", "cell0_minf"]
    values = [r[1] for r in rows[1:]]
    assert len(set(values[1:])) == 1
    assert all(r[2] == "inf" for r in rows[1:])


def test_exhaustive_with_large_k_exits_nonzero(tmp_path, capsys):
    code = main(
        ["cdf", "--trials", "1", "--strategies", "optimal_p", "--out", str(tmp_path)]
        + ["--config", str(_write(tmp_path / "k.cfg", "users_per_cell = 10\n"))]
    )
    assert code != 0
    assert "k_max_exhaustive" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path, capsys):
    code = main(["cdf", "--config", str(_write(tmp_path / "x.cfg", "cells = 3\n"))])
    assert code == 2
    assert "line 1" in capsys.readouterr().err


def _write(path, text):
    path.write_text(text)
    return path


def _outputs(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name not in ("timing.json", "config.txt")}


@pytest.mark.parametrize("command", ["cdf", "capacity-sweep", "convergence"])
def test_byte_identical_runs(tmp_path, monkeypatch, command):
    args = [command, "--trials", "4", "--antennas", "8", "--seed", "123"]
    monkeypatch.setenv("SMARTPILOT_WORKERS", "1")
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("SMARTPILOT_WORKERS", "2")
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert _outputs(tmp_path / "a") == _outputs(tmp_path / "b")


def test_csv_cells_are_finite_or_inf(tmp_path):
    out = tmp_path / "c"
    assert main(["capacity-sweep", "--trials", "3", "--antennas", "4", "--out", str(out)]) == 0
    for row in read_csv(out / "capacity.csv")[1:]:
        for cell in row:
            assert cell in ("inf", "-inf") or np.isfinite(float(cell))


def test_validate_quick(capsys):
    assert main(["validate", "--quick"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4 and all(line.startswith("PASS") for line in lines)
