import csv
import json

import numpy as np
import pytest

from localprice import cli
from localprice.dynamics import RunRecord, SimConfig
from localprice.io import (OutputError, OutputSpec, config_hash, record_from_json, record_to_json,
                           write_records)
from localprice.observables import Histogram

TINY = ["--nodes", "64", "--sweeps", "40", "--replicas", "2"]


def _record():
    cfg = SimConfig(n_nodes=32, sweeps=100, replicas=3, seed=7)
    rec = RunRecord(config=cfg, label="demo")
    for x, y in [(0, 16.0), (10, 1 / 3), (100, 2.0 ** -40)]:
        rec.add_point("walls", x, y)
    rec.add_point("variance", 1.5, 0.1 + 0.2)
    rec.histograms.append((100, Histogram(2, -3, np.array([1, 0, 5]))))
    return rec


def test_parse_defaults():
    inv = cli.parse_cli(["--experiment", "fig7", "--seed", "42"])
    assert inv.experiment == "fig7"
    assert inv.config.seed == 42
    assert (inv.config.n_nodes, inv.config.sweeps, inv.config.replicas) == (1024, 10_000, 16)
    assert inv.output.format == "csv" and not inv.output.force


def test_parse_dimension_uses_factorisation():
    inv = cli.parse_cli(["--dimension", "2.2"])
    assert inv.config.m_extra == 3
    assert inv.config.q == pytest.approx(0.8)
    assert inv.config.dimension == pytest.approx(2.2, abs=1e-12)


def test_parse_offsets():
    inv = cli.parse_cli(["--offsets", "5,50", "--q", "0.5"])
    assert inv.config.offsets == (5, 50) and inv.config.m_extra == 2


@pytest.mark.parametrize("argv,needle", [
    (["--q", "1.5"], "--q"),
    (["--dimension", "2", "--q", "0.5"], "--q"),
    (["--dimension", "2", "--extra-neighbors", "2"], "--extra-neighbors"),
    (["--bogus"], "unrecognized"),
    (["--offsets", "5,50", "--extra-neighbors", "1"], "--offsets"),
    (["--experiment", "fig4", "--dimension", "2"], "one-dimensional"),
    (["--smooth-window", "4"], "--smooth-window"),
    (["--dimension", "0.5"], "--dimension"),
])
def test_usage_errors(argv, needle, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.parse_cli(argv)
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert needle in err
    if argv[0] == "--dimension" and len(argv) > 2:
        assert "--dimension" in err


def test_main_exit_codes(tmp_path):
    assert cli.main(["--nope"]) == 2
    out = tmp_path / "o"
    assert cli.main(TINY + ["--out", str(out)]) == 0
    # second run without --force refuses to overwrite
    assert cli.main(TINY + ["--out", str(out)]) == 1
    assert cli.main(TINY + ["--out", str(out), "--force"]) == 0


def test_write_csv_layout(tmp_path):
    paths = write_records([_record()], OutputSpec(tmp_path, "csv"))
    names = sorted(p.name for p in paths)
    assert names == ["manifest.json", "run-00-demo.histograms.csv", "run-00-demo.series.csv"]
    raw = (tmp_path / "run-00-demo.series.csv").read_bytes()
    assert b"\r" not in raw
    rows = list(csv.DictReader(raw.decode("utf-8").splitlines()))
    assert list(rows[0]) == ["abscissa", "value", "series", "replica_pool"]
    assert float(rows[1]["value"]) == 1 / 3
    assert float(rows[2]["value"]) == 2.0 ** -40
    assert rows[3]["value"] == repr(0.1 + 0.2)
    assert rows[0]["replica_pool"] == "3"
    hist = list(csv.DictReader((tmp_path / "run-00-demo.histograms.csv").read_text().splitlines()))
    assert [(h["bin_center"], h["count"]) for h in hist] == [("-2.5", "1"), ("-0.5", "0"), ("1.5", "5")]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert {f["file"] for f in manifest["files"]} == set(names) - {"manifest.json"}
    assert all(f["config_hash"] == config_hash(_record().config) for f in manifest["files"])


def test_json_round_trip_and_csv_agreement(tmp_path):
    rec = _record()
    write_records([rec], OutputSpec(tmp_path, "both", emit_plot_data=True))
    doc = json.loads((tmp_path / "run-00-demo.json").read_text())
    back = record_from_json(doc)
    assert back.series == rec.series
    assert back.config == rec.config
    assert back.histograms[0][1] == rec.histograms[0][1]
    rows = list(csv.DictReader((tmp_path / "run-00-demo.series.csv").read_text().splitlines()))
    csv_points = [(float(r["abscissa"]), float(r["value"])) for r in rows]
    json_points = [tuple(p) for pts in doc["series"].values() for p in pts]
    assert sorted(csv_points) == sorted(json_points)
    assert (tmp_path / "run-00-demo.dat").read_text().startswith("# walls\n0.0 16.0\n10.0 0.3333333333333333\n")


def test_config_hash_stable():
    a = SimConfig(n_nodes=50, seed=3)
    assert config_hash(a) == config_hash(SimConfig(n_nodes=50, seed=3))
    assert config_hash(a) != config_hash(SimConfig(n_nodes=50, seed=4))
    assert len(config_hash(a)) == 16


def test_existing_files_not_overwritten(tmp_path):
    spec = OutputSpec(tmp_path, "json")
    write_records([_record()], spec)
    before = (tmp_path / "run-00-demo.json").read_bytes()
    with pytest.raises(OutputError):
        write_records([_record()], spec)
    assert (tmp_path / "run-00-demo.json").read_bytes() == before


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError):
        write_records([_record()], OutputSpec(blocker / "sub", "csv"))


def test_empty_records_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_records([], OutputSpec(tmp_path))


@pytest.mark.parametrize("experiment,extra", [
    ("fig1", ["--dimensions", "1,2"]), ("fig3", []), ("fig4", []), ("fig5", []),
    ("fig6", ["--sizes", "32,64"]), ("fig7", ["--dimensions", "1,1.5,2"]), ("custom", ["--dimension", "1.5"]),
])
def test_every_experiment_runs_and_reruns_byte_identical(tmp_path, experiment, extra):
    argv = ["--experiment", experiment, *TINY, "--format", "both", "--out", str(tmp_path), *extra]
    assert cli.main(argv) == 0
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert cli.main(argv + ["--force"]) == 0
    second = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert first == second
    manifest = json.loads(first["manifest.json"])
    assert {f["file"] for f in manifest["files"]} == set(first) - {"manifest.json"}


def test_fig5_record_carries_fit(tmp_path):
    argv = ["--experiment", "fig5", "--nodes", "128", "--sweeps", "300", "--replicas", "2",
            "--format", "json", "--out", str(tmp_path)]
    assert cli.main(argv) == 0
    (doc_path,) = tmp_path.glob("fig5-*.json")
    fit = json.loads(doc_path.read_text())["meta"]["fit"]
    assert set(fit) == {"slope", "intercept", "r_squared"}
    assert fit["slope"] < 0


def test_record_to_json_handles_nan():
    rec = _record()
    rec.meta["excess_kurtosis"] = float("nan")
    assert record_to_json(rec)["meta"]["excess_kurtosis"] is None
