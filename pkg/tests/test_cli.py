import importlib
import json

import pytest

import cli
from cli import OrderLimitError, RunConfig, load_environment, main, parse_operand
from exporter import VerificationReport
from jet_model import JetPoly, make_word
from suites import SUITES
from udf_engine import ExtractionError, StarConsistencyError, UDFEngine
from weyl_fedosov import SECTION_KINDS


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    for name in ("UDF_MAX_ORDER", "UDF_DEFAULT_ORDER", "UDF_DEGREE", "UDF_JOBS", "UDF_MOYAL_SIGN",
                 "UDF_OUTPUT_FORMAT"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("UDF_CACHE", str(tmp_path / "cache"))


def test_environment_defaults():
    env = load_environment()
    assert env["max_order"] == 4
    assert env["default_order"] == 2
    assert env["moyal_sign"] == 1


@pytest.mark.parametrize("name,value", [
    ("UDF_MAX_ORDER", "four"),
    ("UDF_JOBS", "0"),
    ("UDF_MOYAL_SIGN", "2"),
    ("UDF_OUTPUT_FORMAT", "pdf"),
])
def test_invalid_environment_names_the_variable(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValueError, match=name):
        load_environment()


def test_invalid_environment_is_a_usage_error(monkeypatch, capsys):
    monkeypatch.setenv("UDF_JOBS", "zero")
    assert main(["compute-r", "--order", "0"]) == 2
    assert "UDF_JOBS" in capsys.readouterr().err


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig("compute-r", order=-1)
    with pytest.raises(ValueError):
        RunConfig("compute-r", jobs=0)
    assert issubclass(OrderLimitError, ValueError)


def test_compute_r_order_zero(capsys):
    assert main(["--quiet", "compute-r", "--order", "0"]) == 0
    assert "1 ⊗ 1" in capsys.readouterr().out


def test_compute_r_order_one_json_is_cached_and_stable(capsys, tmp_path):
    assert main(["--format", "json", "compute-r", "--order", "1"]) == 0
    first = capsys.readouterr()
    payload = json.loads(first.out)
    assert [entry["k"] for entry in payload["orders"]] == [0, 1]
    assert "config_hash" in payload["generation_metadata"]
    assert list((tmp_path / "cache").glob("r_*.json"))

    assert main(["--format", "json", "compute-r", "--order", "1"]) == 0
    second = capsys.readouterr()
    assert second.out == first.out
    assert "Loaded R from cache" in second.err


def test_corrupted_cache_is_recomputed(capsys, tmp_path):
    config = RunConfig("compute-r", order=0, cache=str(tmp_path / "cache"))
    (tmp_path / "cache").mkdir()
    path = tmp_path / "cache" / f"r_{config.config_hash()[:16]}.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["compute-r", "--order", "0"]) == 0
    captured = capsys.readouterr()
    assert "⚠️" in captured.err
    assert "1 ⊗ 1" in captured.out
    assert json.loads(path.read_text(encoding="utf-8"))["config_hash"] == config.config_hash()


def test_order_limit(monkeypatch, capsys):
    monkeypatch.setenv("UDF_MAX_ORDER", "1")
    assert main(["compute-r", "--order", "2"]) == 2
    assert "exceeds the limit" in capsys.readouterr().err


def test_no_command_is_usage_error():
    assert main([]) == 2


def test_dump_twisted_unit(capsys):
    assert main(["--quiet", "dump", "u_alpha_inv", "3", "0"]) == 0
    out = capsys.readouterr().out
    assert "u_alpha_inv" in out
    assert len([line for line in out.splitlines() if line.strip()]) >= 5


def test_dump_seed_only(capsys):
    assert main(["--quiet", "--format", "json", "dump", "hat_f", "0", "0"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert len(rows) == 1
    assert rows[0]["m"] == 0 and rows[0]["n"] == 0


def test_parse_operand():
    assert parse_operand("f:a") == (JetPoly.function("f"), make_word("a"))
    assert parse_operand("g[1,0]:a b^-1") == (JetPoly.function("g", 1, 0), make_word("a b^-1"))
    assert parse_operand("1:")[0] == JetPoly.one()
    with pytest.raises(ValueError):
        parse_operand("f")


def test_star_eval_order_zero(capsys):
    assert main(["--quiet", "--format", "json", "star-eval", "f:a", "g:b", "--order", "0"]) == 0
    terms = json.loads(capsys.readouterr().out)["terms"]
    assert len(terms) == 1


def test_verify_appendix_with_grid_file(tmp_path, capsys):
    spec = {"identity": "s_sums", "n_max": 3, "grid": {"A": [0, 1, 2, 3, 4], "B": [1, 2, 3, 4, 5]}}
    grid_file = tmp_path / "grid.json"
    grid_file.write_text(json.dumps(spec), encoding="utf-8")
    assert main(["--format", "json", "--jobs", "1", "verify", "appendix", "--grid", str(grid_file)]) == 0
    report = json.loads(capsys.readouterr().out)["report"]
    assert report["passed"]


def test_verify_bad_grid_identity(tmp_path):
    grid_file = tmp_path / "grid.json"
    grid_file.write_text(json.dumps({"identity": "nope", "grid": {"E": [1]}}), encoding="utf-8")
    assert main(["verify", "appendix", "--grid", str(grid_file)]) == 2


def test_failed_report_exits_one(monkeypatch, capsys):
    def failing_suite(*args, **kwargs):
        report = VerificationReport("hopf")
        report.add("forced", False)
        return report

    monkeypatch.setattr(cli, "run_suite", failing_suite)
    assert main(["verify", "hopf"]) == 1
    assert "❌" in capsys.readouterr().err


def test_verify_writes_exports(monkeypatch, tmp_path, capsys):
    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: VerificationReport("hopf"))
    out_dir = tmp_path / "reports"
    assert main(["--output-dir", str(out_dir), "verify", "hopf"]) == 0
    assert sorted(p.suffix for p in out_dir.iterdir()) == [".html", ".json", ".md"]
    assert "📄" in capsys.readouterr().err


def test_package_metadata_matches_cli():
    package = importlib.import_module("__init__")
    assert package.__version__ == cli.ENGINE_VERSION
    assert package.SUITES == SUITES
    assert package.SECTION_KINDS == SECTION_KINDS
    assert package.OUTPUT_FORMATS == cli.OUTPUT_FORMATS
    assert cli.PACKAGE_DEFAULTS is package.DEFAULT_CONFIG
    assert cli.DEFAULT_CONFIG == {**package.DEFAULT_CONFIG, "jobs": cli.DEFAULT_CONFIG["jobs"]}
    assert cli.DEFAULT_CONFIG["jobs"] >= 1


@pytest.mark.parametrize("flag", ["--paper-check", "--acceptance-check"])
def test_paper_check_flag(monkeypatch, flag):
    calls = []

    def checklist(order, jobs, log):
        calls.append(order)
        return VerificationReport("acceptance-check")

    monkeypatch.setattr(cli, "acceptance_check", checklist)
    assert main(["--quiet", flag]) == 0
    assert calls == [3]


def test_engine_error_in_suite_exits_one(monkeypatch, capsys):
    def broken(self, order):
        raise StarConsistencyError("tuple disagrees")

    monkeypatch.setattr(UDFEngine, "extract_R", broken)
    assert main(["--format", "json", "verify", "udf", "--order", "1"]) == 1
    report = json.loads(capsys.readouterr().out)["report"]
    assert not report["passed"]


def test_engine_error_outside_suites_exits_one(monkeypatch, capsys):
    def broken(self, order):
        raise ExtractionError("no solution")

    monkeypatch.setattr(UDFEngine, "extract_R", broken)
    assert main(["--cache", "", "compute-r", "--order", "1"]) == 1
    assert "ExtractionError" in capsys.readouterr().err


def test_verify_appendix_identity_flag(monkeypatch):
    seen = {}

    def record(name, **kwargs):
        seen.update(kwargs, name=name)
        return VerificationReport(name)

    monkeypatch.setattr(cli, "run_suite", record)
    assert main(["--quiet", "verify", "appendix", "--identity", "assoc", "--n-max", "8"]) == 0
    assert seen["name"] == "appendix"
    assert seen["identities"] == ["assoc"]
    assert seen["n_max"] == 8
