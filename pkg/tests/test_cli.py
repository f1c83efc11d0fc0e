import csv
import hashlib
import subprocess
import sys

import pytest

from uwasn_sim import experiment
from uwasn_sim.cli import main
from uwasn_sim.config import ScenarioConfig
from uwasn_sim.experiment import (CellError, SweepSpec, default_workers, parse_node_range,
                                  run_simulation, run_sweep, sized_config)


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _rows(path):
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text("num_nodes = 24\nnum_sources = 3\nrounds = 12\n")
    return path


def test_run_defaults_eer_gives_101_lines(tmp_path):
    assert main(["run", "--protocol", "eer", "--seed", "1", "--out", str(tmp_path)]) == 0
    out = tmp_path / "rounds_eer_1.csv"
    assert len(out.read_text().splitlines()) == 101


def test_run_zero_rounds_header_only(tmp_path):
    assert main(["run", "--protocol", "vbf", "--rounds", "0", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "rounds_vbf_1.csv").read_text().count("\n") == 1


@pytest.mark.parametrize("protocol", ["vbf", "dbr", "eer"])
def test_run_twice_identical(tmp_path, small_config, protocol):
    digests = []
    for name in ("a", "b"):
        args = ["run", "--config", str(small_config), "--protocol", protocol,
                "--seed", "3", "--out", str(tmp_path / name)]
        assert main(args) == 0
        digests.append(_digest(tmp_path / name / f"rounds_{protocol}_3.csv"))
    assert digests[0] == digests[1]


def test_sweep_single_cell(tmp_path):
    args = ["sweep", "--protocols", "vbf", "--nodes", "4:4:1", "--seeds", "1",
            "--rounds", "5", "--out", str(tmp_path)]
    assert main(args) == 0
    rows = _rows(tmp_path / "sweep.csv")
    assert len(rows) == 1
    assert (rows[0]["protocol"], rows[0]["seed"], rows[0]["num_nodes"]) == ("vbf", "1", "4")


def test_default_grid_row_count(tmp_path):
    assert main(["sweep", "--rounds", "1", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "sweep.csv")
    assert len(rows) == 900
    assert sorted({int(r["num_nodes"]) for r in rows}) == list(range(4, 77, 8))


def test_protocol_order_does_not_matter(tmp_path, small_config):
    for name, protocols in (("a", "vbf,eer,dbr"), ("b", "dbr,vbf,eer")):
        args = ["sweep", "--config", str(small_config), "--protocols", protocols,
                "--nodes", "12:20:8", "--seeds", "2", "--out", str(tmp_path / name)]
        assert main(args) == 0
    assert _digest(tmp_path / "a" / "sweep.csv") == _digest(tmp_path / "b" / "sweep.csv")


def test_concurrent_sweep_matches_sequential(tmp_path, small_config):
    for name, workers in (("seq", "1"), ("par", "2")):
        args = ["sweep", "--config", str(small_config), "--nodes", "12:28:8", "--seeds", "3",
                "--workers", workers, "--out", str(tmp_path / name)]
        assert main(args) == 0
    assert _digest(tmp_path / "seq" / "sweep.csv") == _digest(tmp_path / "par" / "sweep.csv")


def test_paired_topologies():
    base = ScenarioConfig(rounds=0)
    for n in (12, 36):
        cfg = sized_config(base, n)
        digests = {p: run_simulation(cfg, p, seed=4).simulation.state.position_digest()
                   for p in ("vbf", "dbr", "eer")}
        assert len(set(digests.values())) == 1


def test_failed_cell_names_itself(monkeypatch):
    real = experiment.run_simulation

    def flaky(config, protocol, seed, **kw):
        if config.num_nodes == 12 and seed == 2:
            raise RuntimeError("boom")
        return real(config, protocol, seed, **kw)

    monkeypatch.setattr(experiment, "run_simulation", flaky)
    spec = SweepSpec(("vbf",), (4, 12), 2, ScenarioConfig(rounds=2))
    with pytest.raises(CellError, match="num_nodes=12 seed=2"):
        run_sweep(spec, workers=1)


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(("vbf",), (4,), 0, ScenarioConfig())
    with pytest.raises(ValueError):
        SweepSpec(("aodv",), (4,), 1, ScenarioConfig())
    with pytest.raises(ValueError):
        parse_node_range("1:5:1")
    with pytest.raises(ValueError):
        parse_node_range("4-76")
    assert parse_node_range("4:76:8")[-1] == 76
    assert parse_node_range("20:76:8") == [20, 28, 36, 44, 52, 60, 68, 76]


def test_small_networks_shrink_source_count():
    assert sized_config(ScenarioConfig(), 4).num_sources == 3


def test_worker_env_default(monkeypatch):
    monkeypatch.setenv("UWASN_SIM_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("UWASN_SIM_WORKERS")
    assert default_workers() == 1


@pytest.fixture
def one_hop_config(tmp_path):
    path = tmp_path / "tiny.cfg"
    # a 100 m cube: every sensor hears the sink directly
    path.write_text("num_nodes = 2\nnum_sources = 1\nregion.x_max = 100\n"
                    "region.y_max = 100\nregion.z_max = 100\n")
    return path


def test_ga_trace_one_hop(tmp_path, one_hop_config):
    assert main(["ga-trace", "--config", str(one_hop_config), "--seed", "2",
                 "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "ga_trace_2.csv")
    assert len(rows) == 1 and rows[0]["generation"] == "1"


def test_ga_trace_costs(tmp_path):
    assert main(["ga-trace", "--seed", "1", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "ga_trace_1.csv")
    best = [float(r["best_cost"]) for r in rows]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert 1 <= len(rows) <= ScenarioConfig().ga.max_generations
    assert [int(r["generation"]) for r in rows] == list(range(1, len(rows) + 1))


def test_ga_trace_unreachable(tmp_path, capsys):
    cfg = tmp_path / "sparse.cfg"
    cfg.write_text("num_nodes = 2\nnum_sources = 1\nregion.z_max = 2000\n"
                   "transmission_range_high = 10\ntransmission_range_low = 5\n")
    assert main(["ga-trace", "--config", str(cfg), "--out", str(tmp_path)]) == 3
    assert "no path" in capsys.readouterr().err


def test_validate_config(tmp_path, small_config, capsys):
    assert main(["validate-config", "--config", str(small_config)]) == 0
    bad = tmp_path / "bad.cfg"
    bad.write_text("rounds = 5\nnum_nodes = banana\n")
    assert main(["validate-config", "--config", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["run", "--protocol", "aodv"],
    ["run"],
    ["sweep", "--nodes", "nonsense"],
    ["sweep", "--protocols", "vbf,aodv"],
    ["validate-config", "--config", "/nonexistent/x.cfg"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(argv, tmp_path):
    with pytest.raises(SystemExit) as exc:
        code = main(argv + ["--out", str(tmp_path)] if argv[0] != "validate-config" else argv)
        raise SystemExit(code)
    assert exc.value.code == 1


def test_unwritable_output_exits_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--protocol", "vbf", "--rounds", "1", "--out", str(blocker)]) == 2


def test_module_entry_point(tmp_path, small_config):
    proc = subprocess.run([sys.executable, "-m", "uwasn_sim", "validate-config",
                           "--config", str(small_config)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "24 nodes" in proc.stdout
