import csv
import io
import json
from pathlib import Path

import pytest

from divext.cli import DivextCli, parse_distribution
from divext.errors import SpecError
from divext.main import main


@pytest.fixture
def workdir(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps({"SOLVER_ITERATIONS": 0, "SOLVER_RESTARTS": 1, "TEST_FUNCTIONS": 10})
    )
    return tmp_path


PAIRWISE_SPEC = {"kind": "pairwise_sampler", "m": 4, "delta": 0.5, "eps": 1.0}


def run(workdir, *argv):
    base = [
        "--config",
        str(workdir / "config.json"),
        "--log-path",
        str(workdir / "divext.log"),
    ]
    return DivextCli().run(base + list(argv))


def write_spec(workdir, name, payload):
    path = workdir / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestDivergence:
    def test_identical_uniform(self, workdir, capsys):
        assert run(workdir, "--seed", "7", "divergence", "kl", "U_2", "U_2") == 0
        result = json.loads(capsys.readouterr().out)
        expected = {"exact": True, "kind": "kl", "lower": 0.0, "seed": 7, "upper": 0.0}
        assert result == expected

    def test_point_masses(self, workdir, capsys):
        assert run(workdir, "divergence", "tv", "point:1:0", "point:1:1") == 0
        assert json.loads(capsys.readouterr().out)["upper"] == pytest.approx(1.0)

    def test_flat_source_file(self, workdir):
        path = write_spec(workdir, "flat.json", {"width": 2, "support": [0, 3]})
        P = parse_distribution(path)
        assert list(P.probs) == [0.5, 0.0, 0.0, 0.5]

    def test_bad_token(self):
        with pytest.raises(SpecError):
            parse_distribution("U_x")
        with pytest.raises(SpecError):
            parse_distribution("missing.json")


class TestExitCodes:
    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            DivextCli().run(["frobnicate"])
        assert exc.value.code == 2

    def test_spec_error_maps_to_two(self, workdir):
        with pytest.raises(SystemExit) as exc:
            log_path = str(workdir / "divext.log")
            main(["--log-path", log_path, "divergence", "kl", "U_x", "U_1"])
        assert exc.value.code == 2

    def test_invalid_spec_maps_to_two(self, workdir):
        spec = write_spec(workdir, "bad.json", {"kind": "lhl", "n": 0, "m": 1})
        with pytest.raises(SystemExit) as exc:
            main(["--log-path", str(workdir / "divext.log"), "build", spec])
        assert exc.value.code == 2


class TestBuildAndVerify:
    def test_build_lhl(self, workdir, capsys):
        spec = write_spec(workdir, "lhl.json", {"kind": "lhl", "n": 4, "m": 1})
        assert run(workdir, "build", spec) == 0
        report = json.loads(capsys.readouterr().out)
        assert (report["n"], report["d"], report["m"]) == (4, 8, 1)
        assert report["claims"]

    def test_build_is_deterministic(self, workdir, capsys):
        payload = {"kind": "lhl", "n": 4, "m": 2, "family": "linear"}
        spec = write_spec(workdir, "lhl.json", payload)
        run(workdir, "build", spec)
        first = capsys.readouterr().out
        run(workdir, "build", spec)
        assert capsys.readouterr().out == first

    def test_verify_extractor(self, workdir, capsys):
        spec = write_spec(workdir, "lhl.json", {"kind": "lhl", "n": 4, "m": 1})
        assert run(workdir, "verify", spec) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["all_pass"]
        assert all(entry["pass"] for entry in report["entries"])

    def test_verify_request_with_filter(self, workdir, capsys):
        request = {
            "extractor": {
                "kind": "expander",
                "n": 3,
                "delta_log": 1.0,
                "eps": 0.5,
                "graph": "xor",
            },
            "kind": "renyi:2",
            "k": 2.0,
        }
        spec = write_spec(workdir, "request.json", request)
        assert run(workdir, "verify", spec) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["entries"]
        assert {entry["claim"]["k"] for entry in report["entries"]} == {2.0}

    def test_verify_sampler(self, workdir, capsys):
        spec = write_spec(workdir, "sampler.json", PAIRWISE_SPEC)
        assert run(workdir, "verify", spec) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["all_pass"] and report["entries"][0]["functions"] == 10

    def test_high_entropy_defaults_to_xor_graph(self, workdir, capsys):
        payload = {"kind": "high_entropy", "m": 2, "delta": 0.5, "eps": 1.0}
        spec = write_spec(workdir, "high.json", payload)
        assert run(workdir, "build", spec) == 0
        report = json.loads(capsys.readouterr().out)
        assert (report["n"], report["d"], report["m"]) == (6, 16, 2)

    def test_subgaussian_sampler_defaults_to_xor_graph(self, workdir, capsys):
        spec = write_spec(
            workdir,
            "sub.json",
            {"kind": "subgaussian_sampler", "m": 2, "delta": 1.0, "eps": 2.0},
        )
        assert run(workdir, "build", spec) == 0
        report = json.loads(capsys.readouterr().out)
        assert (report["n"], report["m"], report["sample_count"]) == (3, 2, 128)

    def test_output_file(self, workdir):
        spec = write_spec(workdir, "lhl.json", {"kind": "lhl", "n": 3, "m": 1})
        target = workdir / "out" / "report.json"
        assert run(workdir, "--output", str(target), "build", spec) == 0
        assert json.loads(target.read_text())["n"] == 3


class TestSample:
    def test_given_coins_and_function(self, workdir, capsys):
        spec = write_spec(workdir, "sampler.json", PAIRWISE_SPEC)
        values = [1.0] * 8 + [0.0] * 8
        function = write_spec(workdir, "f.json", {"width": 4, "values": values})
        argv = ["sample", spec, "--coins", "ff", "--function", function]
        assert run(workdir, *argv) == 0
        report = json.loads(capsys.readouterr().out)
        assert len(report["points"]) == 8
        assert report["true_mean"] == pytest.approx(0.5)
        assert report["error"] == pytest.approx(report["estimate"] - 0.5)
        classes = [claim["function_class"] for claim in report["claims"]]
        assert classes == ["bounded_variance"]
        assert report["claims"][0]["delta"] == 0.5

    def test_rejects_wrong_table(self, workdir):
        spec = write_spec(workdir, "sampler.json", PAIRWISE_SPEC)
        function = write_spec(workdir, "f.json", {"width": 2, "values": [0.0] * 4})
        with pytest.raises(SpecError):
            run(workdir, "sample", spec, "--function", function)


class TestGraphAndBench:
    def test_graph_check(self, workdir, capsys):
        assert run(workdir, "graph-check", "--graph", "xor", "--n", "3") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["regular"] and report["consistently_labelled"]

    def test_graph_check_walk(self, workdir, capsys):
        assert run(workdir, "graph-check", "--n", "4", "--walk", "2") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["degree"] == 256

    def test_bench_tail(self, workdir, capsys):
        assert run(workdir, "bench", "--suite", "tail", "--trials", "20") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("K,eps,rate,bound")
        assert lines[0].endswith(",seed")
        assert len(lines) == 1 + 9

    def test_bench_dpi_rows_carry_seed(self, workdir, capsys):
        argv = ["--seed", "11", "bench", "--suite", "dpi", "--m", "1", "2"]
        assert run(workdir, *argv) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 2
        assert {row["seed"] for row in rows} == {"11"}

    def test_bench_samplers(self, workdir, capsys):
        assert run(workdir, "--seed", "5", "bench", "--suite", "samplers") == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert {row["seed"] for row in rows} == {"5"}
        assert {row["sampler"] for row in rows} == {
            "pairwise_sampler",
            "expander_sampler",
            "subgaussian_sampler",
        }
        pairwise = [row for row in rows if row["sampler"] == "pairwise_sampler"]
        assert len(pairwise) == 9
        assert all(row["status"] == "ok" and row["pass"] == "True" for row in pairwise)
        assert all(row["strong"] == "True" for row in pairwise)
        assert all(row["functions"] == "10" for row in pairwise)
        checked = [row for row in rows if row["status"] == "ok"]
        assert all(row["pass"] == "True" for row in checked)
        statuses = {"ok", "infeasible", "too_large", "no_claims"}
        assert {row["status"] for row in rows} <= statuses

    def test_bench_claims_requires_spec(self, workdir):
        with pytest.raises(SpecError):
            run(workdir, "bench", "--suite", "claims")


SPEC_DIR = Path(__file__).resolve().parents[1] / "specs"


@pytest.mark.parametrize(
    "spec",
    sorted(p.name for p in SPEC_DIR.glob("*.json") if not p.name.startswith("verify_")),
)
def test_bundled_specs_build(workdir, capsys, spec):
    assert run(workdir, "build", str(SPEC_DIR / spec)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["claims"]


def test_bundled_verify_expander(workdir, capsys):
    assert run(workdir, "verify", str(SPEC_DIR / "verify_expander.json")) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["entries"] and report["all_pass"]


@pytest.mark.slow
def test_bundled_lhl_pairwise_verifies(workdir, capsys):
    config = workdir / "config.json"
    config.write_text(json.dumps({"ENUMERATION_CAP": 1000, "STRUCTURED_SAMPLES": 20}))
    assert run(workdir, "verify", str(SPEC_DIR / "lhl_pairwise.json")) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["entries"] and report["all_pass"]


@pytest.mark.slow
@pytest.mark.parametrize("spec", ["expander_sampler.json", "subgaussian_sampler.json"])
def test_bundled_samplers_hold_on_many_functions(workdir, capsys, spec):
    config = workdir / "config.json"
    config.write_text(json.dumps({"TEST_FUNCTIONS": 200}))
    assert run(workdir, "verify", str(SPEC_DIR / spec)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["all_pass"]
    assert all(entry["functions"] == 200 for entry in report["entries"])
