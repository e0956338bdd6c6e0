import csv
import json
import subprocess
import sys

import pytest

from levyarea import __version__
from levyarea.cli import main, resolve_config
from levyarea.errors import ConfigError

SCALING_COLUMNS = ["eta", "raw_value", "regular_estimate", "singular_part", "fitted_value"]
CLT_COLUMNS = ["sample_index", "rescaled_area"]


def _write(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_resolve_defaults():
    cfg = resolve_config({"schema_version": 1, "experiment": "clt-test"})
    assert cfg["alpha"] == 0.2 and cfg["seed"] == 20240601 and cfg["n_paths"] == 2000


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        resolve_config({"schema_version": 1, "experiment": "simulate", "bogus": 1})


def test_wrong_schema_version():
    with pytest.raises(ConfigError):
        resolve_config({"schema_version": 2, "experiment": "simulate"})


def test_alpha_deny_list():
    with pytest.raises(ConfigError, match="degenerate"):
        resolve_config({"schema_version": 1, "experiment": "clt-test", "alpha": 0.125})


def test_unknown_tolerance_key():
    with pytest.raises(ConfigError):
        resolve_config({"schema_version": 1, "experiment": "iminus", "tolerances": {"foo": 1}})


def test_malformed_alpha_exit_code(tmp_path, capsys):
    path = _write(tmp_path, "bad.json", {"schema_version": 1, "experiment": "clt-test", "alpha": 0.3})
    assert main(["run", path]) == 1
    err = capsys.readouterr().err
    assert "(0, 1/4)" in err and "ConfigError" in err


def test_invalid_json_exit_code(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == 1


def test_result_document(tmp_path, capsys):
    out = tmp_path / "res.json"
    code = main(["iminus", "--set", "n_cases=5", "--output", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["pass"] is True
    assert doc["library_version"] == __version__
    assert "Re" in doc["b_convention"] and "Philox" in doc["rng"]
    assert doc["config"]["n_cases"] == 5 and doc["config"]["experiment"] == "iminus"
    assert "workers" not in doc["config"]


def test_failed_assertion_exit_code(capsys):
    code = main(["iminus", "--set", "n_cases=3", "--set", 'tolerances={"rtol": 1e-30}'])
    assert code == 2
    assert json.loads(capsys.readouterr().out)["pass"] is False


def test_echoed_config_reproduces(tmp_path, capsys):
    out = tmp_path / "a.json"
    main(["connected-moment", "--eta", "0.05", "--output", str(out)])
    doc = json.loads(out.read_text())
    cfg = doc["config"]
    cfg["output"] = str(tmp_path / "b.json")
    path = _write(tmp_path, "echo.json", cfg)
    assert main(["run", path]) == 0
    again = json.loads((tmp_path / "b.json").read_text())
    doc["config"]["output"] = cfg["output"]
    assert again == doc


def test_scaling_fit_csv(tmp_path, capsys):
    out = tmp_path / "fit.csv"
    main(["scaling-fit", "--set", "etas=[0.08, 0.04, 0.02]", "--csv", str(out), "--output",
          str(tmp_path / "fit.json")])
    rows = list(csv.reader(out.open()))
    assert rows[0] == SCALING_COLUMNS
    assert len(rows) == 4


def test_clt_csv_and_cache(tmp_path, capsys):
    cache = tmp_path / "ens.bin"
    args = ["clt-test", "--eta", "0.05", "--n-paths", "500", "--cache", str(cache),
            "--csv", str(tmp_path / "clt.csv"), "--output"]
    main(args + [str(tmp_path / "r1.json")])
    assert cache.exists()
    rows = list(csv.reader((tmp_path / "clt.csv").open()))
    assert rows[0] == CLT_COLUMNS and len(rows) == 501
    stamp = cache.stat().st_mtime_ns
    main(args + [str(tmp_path / "r2.json")])
    assert cache.stat().st_mtime_ns == stamp
    r1 = json.loads((tmp_path / "r1.json").read_text())
    r2 = json.loads((tmp_path / "r2.json").read_text())
    r1["config"].pop("output")
    r2["config"].pop("output")
    assert r1 == r2


def test_random_seed_is_echoed(capsys):
    main(["simulate", "--eta", "0.1", "--n-paths", "20", "--seed", "random"])
    doc = json.loads(capsys.readouterr().out)
    assert isinstance(doc["config"]["seed"], int)


@pytest.mark.parametrize("workers", ["1", "2", "3"])
def test_byte_identical_across_workers(workers, tmp_path, monkeypatch):
    monkeypatch.setenv("LEVYAREA_WORKERS", workers)
    out = tmp_path / f"w{workers}.json"
    main(["simulate", "--eta", "0.05", "--n-paths", "600", "--output", str(out)])
    ref = tmp_path / "ref.json"
    main(["simulate", "--eta", "0.05", "--n-paths", "600", "--workers", "1", "--output", str(ref)])
    body = out.read_text().replace(str(out), "X")
    assert body == ref.read_text().replace(str(ref), "X")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "levyarea", "connected-moment", "--eta", "0.1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["experiment"] == "connected-moment"


@pytest.mark.xfail(reason="the rescaled-area variance at eta = 0.01 is far below c_irr(1, 0.2)",
                   strict=False)
def test_clt_example_passes(tmp_path, capsys):
    code = main(["clt-test", "--eta", "0.01", "--n-paths", "2000", "--seed", "42",
                 "--output", str(tmp_path / "clt.json")])
    assert code == 0
