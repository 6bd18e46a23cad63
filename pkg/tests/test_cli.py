import csv
import io
import json

import pytest

from rsmoment import cli


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("RSMOMENT_CACHE", str(tmp_path / "cache"))
    return tmp_path / "cache"


def run_json(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"command": "nope"},
        {"command": "identity", "k": 13},
        {"command": "identity", "k": 10},
        {"command": "weights", "precision_digits": 20},
        {"command": "weights", "format": "xml"},
        {"command": "mainterm", "g_index": -1},
    ],
)
def test_run_config_rejects(kwargs):
    with pytest.raises(cli.UsageError):
        cli.RunConfig(**kwargs)


def test_odd_weight_exit_code(capsys):
    assert cli.main(["mainterm", "--k", "13"]) == cli.EXIT_USAGE
    assert "even integer" in capsys.readouterr().err


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        cli.main(["weights", "--format", "yaml"])
    assert exc.value.code == 2


def test_g_index_out_of_range(capsys):
    assert cli.main(["moment", "--k", "12", "--g-index", "1"]) == cli.EXIT_USAGE


def test_weights_json_envelope(capsys):
    code, doc = run_json(["weights", "--k", "40", "--t-max", "30"], capsys)
    assert code == cli.EXIT_PASS
    assert set(doc) == {"schema_version", "version", "timestamp", "run_config", "status", "report"}
    assert doc["run_config"]["k"] == 40 and doc["status"] == "pass"


def test_weights_csv(capsys):
    assert cli.main(["weights", "--k", "40", "--t-max", "30", "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows and all(r["value"] for r in rows)


def test_deterministic_modulo_timestamp(tmp_path):
    docs = []
    for name in ("a.json", "b.json"):
        p = tmp_path / name
        assert cli.main(["weights", "--k", "24", "--t-max", "20", "--output", str(p)]) == 0
        d = json.loads(p.read_text())
        d.pop("timestamp")
        d["run_config"].pop("output_path")
        docs.append(d)
    assert docs[0] == docs[1]


def test_cache_list_empty(isolated_cache, capsys):
    code, doc = run_json(["cache", "list"], capsys)
    assert code == 0
    assert doc["report"]["entries"] == []
    assert doc["report"]["root"] == str(isolated_cache)


def test_cache_warm_dimension_zero_note():
    rep = cli.cache_admin("warm", (14, 14))
    assert rep["warmed"] == []
    assert "dimension zero" in rep["notes"][0]


def test_cache_warm_list_clear(capsys):
    rep = cli.cache_admin("warm", (12, 12), n_max=200)
    assert rep["warmed"] == [12]
    listed = cli.cache_admin("list")["entries"]
    assert listed and all(e["bytes"] > 0 for e in listed)
    assert cli.cache_admin("clear")["removed"] == len(listed)
    assert cli.cache_admin("list")["entries"] == []


def test_cache_bad_action():
    with pytest.raises(cli.UsageError):
        cli.cache_admin("prune")


def test_mainterm_command(capsys):
    code, doc = run_json(["mainterm", "--k", "12", "--method", "limit"], capsys)
    assert code in (0, 1)
    assert doc["report"]["k"] == 12
