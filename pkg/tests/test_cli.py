import json

import pytest

from npspect import cli

CFG = """
[run]
output = {out}
cache_dir = {cache}

[geometry]
kind = sphere

[ladder]
grids = 6x12, 8x16, 10x20

[material]
kind = constant
lambda = 1
mu = 1

[analysis]
matrices = symmetrized, np
oracle_jmax = 2
"""


@pytest.fixture
def config(tmp_path, monkeypatch):
    monkeypatch.delenv("NPSPECT_CACHE_DIR", raising=False)
    path = tmp_path / "sphere.cfg"
    path.write_text(CFG.format(out=tmp_path / "out", cache=tmp_path / "cache"))
    return path


def test_spectrum_run_and_cache(config, tmp_path, caplog):
    assert cli.main(["spectrum", "--config", str(config)]) == cli.EXIT_OK
    out = tmp_path / "out"
    for name in ("spectrum.csv", "spectrum_np.csv", "report.json", "resolved.cfg"):
        assert (out / name).exists()
    report = json.loads((out / "report.json").read_text())
    assert {"prediction", "ladder", "fits"} <= set(report)
    assert report["assembled"] > 0
    first = (out / "spectrum.csv").read_bytes()
    assert first.splitlines()[0] == b"grid_id,index,value"

    caplog.set_level("INFO")
    assert cli.main(["spectrum", "--config", str(out / "resolved.cfg"), "--output", str(tmp_path / "again")]) == 0
    again = json.loads((tmp_path / "again" / "report.json").read_text())
    assert again["assembled"] == 0 and again["cache_hits"] > 0
    assert any("cache hit" in r.getMessage() for r in caplog.records)
    assert (tmp_path / "again" / "spectrum.csv").read_bytes() == first


def test_config_errors_exit_code(tmp_path, caplog):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[material]\nmuu = 1\n")
    assert cli.main(["spectrum", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert "material.muu" in caplog.text


def test_usage_errors():
    assert cli.main(["verify", "--suite", "nope"]) == cli.EXIT_USAGE
    assert cli.main([]) == cli.EXIT_USAGE


def test_verify_cheap_suite(tmp_path):
    out = tmp_path / "v.json"
    assert cli.main(["verify", "--suite", "symbol_identities", "--output", str(out)]) == cli.EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["passed"] and doc["verdicts"] and all(v["passed"] for v in doc["verdicts"])


def test_symbol_and_oracle_dump(tmp_path):
    out = tmp_path / "sym.json"
    assert cli.main(["symbol", "--xi", "0.6,0.8", "--output", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data
    csv = tmp_path / "oracle.csv"
    assert cli.main(["oracle-dump", "--jmax", "3", "--output", str(csv)]) == 0
    assert len(csv.read_text().splitlines()) == 4


def test_cache_subcommand(config, tmp_path, capsys):
    cli.main(["spectrum", "--config", str(config)])
    capsys.readouterr()
    assert cli.main(["cache", "inspect", "--dir", str(tmp_path / "cache")]) == 0
    listing = capsys.readouterr().out
    assert "np" in listing
    assert cli.main(["cache", "clear", "--dir", str(tmp_path / "cache")]) == 0
    assert not list((tmp_path / "cache").glob("*.npsm"))
