import csv
import hashlib
import math

import pytest

from uwasn_sim.config import ScenarioConfig
from uwasn_sim.experiment import run_simulation
from uwasn_sim.metrics import (ROUND_SERIES_HEADER, SWEEP_HEADER, RoundMetrics, RunSummary,
                               mean_delay, network_lifetime, pdr, summarize,
                               write_round_series, write_sweep)


def test_pdr_examples():
    assert pdr(80, 100) == 0.8
    assert pdr(0, 0) == 0.0
    assert pdr(100, 100) == 1.0
    with pytest.raises(ValueError):
        pdr(1, -1)


def test_lifetime_examples():
    assert network_lifetime([10] * 100, 10) is None
    series = [10] * 36 + [9] * 64
    assert network_lifetime(series, 10) == 37
    with pytest.raises(ValueError):
        network_lifetime([], 10)


def test_round_metrics_invariants():
    with pytest.raises(ValueError):
        RoundMetrics(1, generated=1, delivered=2, delay_samples=(1.0, 1.0),
                     residual_total=1.0, alive_nodes=1)
    with pytest.raises(ValueError):
        RoundMetrics(1, generated=2, delivered=1, delay_samples=(),
                     residual_total=1.0, alive_nodes=1)


def _m(r, gen, delays, residual, alive):
    return RoundMetrics(r, gen, len(delays), tuple(delays), residual, alive, gen - len(delays))


def test_summary():
    metrics = [_m(1, 2, [1.0], 10.0, 3), _m(2, 2, [2.0, 3.0], 9.0, 2)]
    s = summarize("eer", 4, 4, metrics)
    assert s.pdr == 0.75
    assert s.mean_delay == 2.0
    assert s.lifetime_round == 2
    assert s.final_residual == 9.0
    assert mean_delay([_m(1, 1, [], 1.0, 1)]) is None


def _lines(path):
    return path.read_text(encoding="utf-8").splitlines()


def test_round_series_format(tmp_path):
    metrics = [_m(2, 2, [1.5, 2.5], 9.0, 3), _m(1, 2, [], 10.0, 3)]
    path = write_round_series(metrics, tmp_path / "r.csv", "dbr", 7)
    assert _lines(path) == [
        ",".join(ROUND_SERIES_HEADER),
        "dbr,7,1,0.000000,,10.000000,3",
        "dbr,7,2,0.500000,2.000000,9.000000,3",
    ]


def test_empty_run_is_header_only(tmp_path):
    path = write_round_series([], tmp_path / "r.csv", "vbf", 1)
    assert path.read_text() == ",".join(ROUND_SERIES_HEADER) + "\n"


def test_hundred_rounds_give_101_lines(tmp_path):
    result = run_simulation(ScenarioConfig(num_nodes=20), "dbr", seed=3)
    path = write_round_series(result.metrics, tmp_path / "r.csv", "dbr", 3)
    lines = _lines(path)
    assert len(lines) == 101
    rows = list(csv.DictReader(lines))
    assert [int(r["round"]) for r in rows] == list(range(1, 101))
    residual = [float(r["residual_total_j"]) for r in rows]
    assert all(b <= a for a, b in zip(residual, residual[1:]))
    assert all(0.0 <= float(r["pdr_cum"]) <= 1.0 for r in rows)


def test_round_series_rerun_is_byte_identical(tmp_path):
    digests = []
    for i in range(2):
        result = run_simulation(ScenarioConfig(num_nodes=30, rounds=30), "eer", seed=5)
        path = write_round_series(result.metrics, tmp_path / f"{i}.csv", "eer", 5)
        digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def _s(protocol, seed, n, lifetime=None):
    return RunSummary(protocol, seed, n, 0.5, None, lifetime)


def test_one_summary_two_lines(tmp_path):
    path = write_sweep([_s("vbf", 1, 4, 12)], tmp_path / "s.csv")
    assert _lines(path) == [",".join(SWEEP_HEADER), "vbf,1,4,0.500000,,12"]


def test_sweep_rows_sorted_and_lifetime_blank(tmp_path):
    rows = [_s("vbf", 2, 4), _s("eer", 1, 12), _s("vbf", 1, 12), _s("eer", 1, 4), _s("vbf", 1, 4)]
    lines = _lines(write_sweep(rows, tmp_path / "s.csv"))
    keys = [tuple(line.split(",")[:3]) for line in lines[1:]]
    assert keys == [("eer", "1", "4"), ("eer", "1", "12"), ("vbf", "1", "4"), ("vbf", "2", "4"),
                    ("vbf", "1", "12")]
    assert all(line.endswith(",") for line in lines[1:])


def test_sweep_row_count(tmp_path):
    rows = [_s(p, s, n) for p in ("vbf", "dbr", "eer") for n in range(4, 77, 8) for s in range(1, 31)]
    assert len(_lines(write_sweep(rows, tmp_path / "s.csv"))) == 901


def test_unwritable_path_names_target(tmp_path):
    target = tmp_path / "missing" / "r.csv"
    with pytest.raises(OSError, match="missing"):
        write_round_series([], target, "vbf", 1)


@pytest.mark.parametrize("protocol", ["vbf", "dbr", "eer"])
def test_delays_respect_one_hop_bound(protocol):
    result = run_simulation(ScenarioConfig(rounds=30), protocol, seed=9, record_trace=True)
    cfg = result.simulation.config
    assert result.simulation.deliveries
    for d in result.simulation.deliveries:
        straight = math.dist(d.positions[d.source], d.positions[0])
        assert d.delay >= straight / 1500 + cfg.tx_duration - 1e-12
