"""
End-to-end tests of the smoothcert command line.

Each test drives app.main.main with an argument list, a throwaway
settings file and temporary inputs, and inspects stdout, written files
and the exit code.
"""

import json

import numpy as np
import pytest

from app.main import main
from app.runner.jsonl_parser import CertificateParser
from app.utils.score_files import save_scores


@pytest.fixture
def run(config_path, capsys):
    """Run the CLI with an isolated settings file; returns (exit code, stdout, stderr)."""
    def _run(*argv):
        code = main(list(argv) + ["--config", str(config_path)])
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run


@pytest.fixture
def weights_file(temp_dir):
    path = temp_dir / "weights.csv"
    path.write_text("2.0,0.0,0.1\n0.0,2.0,0.0\n-1.0,-1.0,0.2\n", encoding="utf-8")
    return path


@pytest.fixture
def inputs_file(temp_dir):
    path = temp_dir / "inputs.csv"
    path.write_text("1.0,-1.0\n-1.0,1.0\n0.05,0.0\n", encoding="utf-8")
    return path


def parse_key_values(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


MODEL_ARGS = ["--sigma", "0.25", "--n0", "200", "--n", "2000", "--t-count", "4", "--seed", "13"]


@pytest.mark.integration
class TestCertifyCommand:
    """Test the certify subcommand end to end."""

    def test_linear_model_certificates(self, run, weights_file, inputs_file):
        code, out, _ = run("certify", "--model", "linear_multiclass", "--weights", str(weights_file),
                           "--inputs", str(inputs_file), *MODEL_ARGS)

        assert code == 0
        records = list(CertificateParser().parse_lines(out.splitlines()))
        assert [r.input_id for r in records] == [0, 1, 2]
        assert records[0].prediction == 0
        assert records[1].prediction == 1
        assert records[0].radius > 0.0
        assert all(r.sigma == 0.25 and r.n0 == 200 and r.n == 2000 and r.seed == 13 for r in records)

    def test_replay_is_byte_identical(self, run, temp_dir, weights_file, inputs_file):
        outputs = []
        for name, jobs in (("first.jsonl", "1"), ("second.jsonl", "3")):
            path = temp_dir / name
            code, _, _ = run("certify", "--model", "linear_multiclass", "--weights", str(weights_file),
                             "--inputs", str(inputs_file), "--jobs", jobs, "--out", str(path), *MODEL_ARGS)
            assert code == 0
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]

    def test_out_file_matches_stdout(self, run, temp_dir, weights_file, inputs_file):
        path = temp_dir / "certs.jsonl"
        args = ["certify", "--model", "linear_multiclass", "--weights", str(weights_file),
                "--inputs", str(inputs_file), *MODEL_ARGS]

        code, out, _ = run(*args)
        assert code == 0
        code, file_out, _ = run(*args, "--out", str(path))
        assert code == 0

        assert file_out == ""
        assert CertificateParser().parse_file(path) == list(CertificateParser().parse_lines(out.splitlines()))

    def test_symmetric_threshold_abstains(self, run):
        code, out, _ = run("certify", "--model", "threshold_1d", "--x", "0", "--sigma", "1",
                           "--n0", "200", "--n", "20000", "--t-count", "3")

        assert code == 0
        record = json.loads(out)
        assert record["prediction"] == "abstain"
        assert record["radius"] == 0.0

    def test_abstention_reported_as_warning_event(self, run):
        code, _, err = run("certify", "--model", "threshold_1d", "--x", "0", "--x", "2.0", "--sigma", "1",
                           "--n0", "200", "--n", "20000", "--t-count", "3", "--jsonl")

        assert code == 0
        events = [json.loads(line) for line in err.splitlines() if line.startswith("{")]
        warnings = [event for event in events if event["type"] == "warning"]
        assert len(warnings) == 1
        assert warnings[0]["data"] == {"abstained": 1}
        assert events[-1]["data"]["abstained"] == 1

    def test_threshold_input_certified(self, run):
        code, out, _ = run("certify", "--model", "threshold_1d", "--x", "1.0", "--x", "-1.0",
                           "--sigma", "0.5", "--n0", "200", "--n", "5000", "--t-count", "3", "--rule", "R3")

        assert code == 0
        first, second = (json.loads(line) for line in out.splitlines())
        assert first["prediction"] == 1
        assert second["prediction"] == 0
        assert first["rule"] == "R3"
        assert 0.0 < first["radius"] < 1.0

    def test_score_file_formats_agree(self, run, temp_dir, sample_score_file):
        binary_path = temp_dir / "scores.bin"
        csv_path = temp_dir / "scores.csv"
        save_scores(sample_score_file, binary_path)
        save_scores(sample_score_file, csv_path, binary=False)

        results = []
        for path in (binary_path, csv_path):
            code, out, _ = run("certify", "--scores", str(path), "--t-count", "5", "--n0", "100")
            assert code == 0
            results.append(out)

        assert results[0] == results[1]
        records = list(CertificateParser().parse_lines(results[0].splitlines()))
        assert [r.prediction for r in records] == [0, 1, 2]
        assert all(r.n == 200 and r.sigma == 0.25 for r in records)

    def test_labels_are_recorded(self, run, temp_dir, sample_score_file):
        scores_path = temp_dir / "scores.bin"
        labels_path = temp_dir / "labels.csv"
        save_scores(sample_score_file, scores_path)
        labels_path.write_text("input_id,label\n0,0\n1,1\n2,0\n", encoding="utf-8")

        code, out, _ = run("certify", "--scores", str(scores_path), "--labels", str(labels_path),
                           "--t-count", "3", "--n0", "100")

        assert code == 0
        assert [json.loads(line)["label"] for line in out.splitlines()] == [0, 1, 0]

    def test_settings_file_supplies_defaults(self, run, config_path, sample_settings):
        sample_settings["certification"].update({"n0": 100, "n": 1000})
        sample_settings["grid"].update({"t_count": 2})
        config_path.write_text(json.dumps(sample_settings), encoding="utf-8")

        code, out, _ = run("certify", "--model", "threshold_1d", "--x", "1.0")

        assert code == 0
        record = json.loads(out)
        assert record["sigma"] == 0.5
        assert record["method"] == "hoeffding"
        assert record["seed"] == 42
        assert record["map"] in ("hardmax", "sparsemax")

    def test_risk_split_modes(self, run):
        args = ["certify", "--model", "threshold_1d", "--x", "1.0", "--x", "0.4", "--sigma", "0.5",
                "--n0", "200", "--n", "2000", "--maps", "hardmax"]
        outputs = {}
        for split in ("paper-literal", "per-class", "bonferroni"):
            code, out, _ = run(*args, "--risk-split", split)
            assert code == 0
            outputs[split] = [json.loads(line)["radius"] for line in out.splitlines()]

        assert outputs["paper-literal"] == outputs["per-class"]
        assert all(b <= p for b, p in zip(outputs["bonferroni"], outputs["paper-literal"]))
        assert outputs["bonferroni"][0] < outputs["paper-literal"][0]

    def test_jsonl_events_on_stderr(self, run):
        code, _, err = run("certify", "--model", "threshold_1d", "--x", "1.0", "--sigma", "0.5",
                           "--n0", "100", "--n", "500", "--t-count", "2", "--jsonl")

        assert code == 0
        events = [json.loads(line) for line in err.splitlines() if line.startswith("{")]
        assert events[0]["stage"] == "certify"
        assert events[-1]["type"] == "result"
        assert events[-1]["data"]["count"] == 1


@pytest.mark.integration
class TestBoundsCommand:

    def test_optimal_vector_bound(self, run):
        code, out, _ = run("bounds", "--lipschitz", "5", "--mass", "3", "--optimal", "--case", "vector")

        assert code == 0
        values = parse_key_values(out)
        assert float(values["sigma"]) == pytest.approx(0.33851, abs=1e-5)
        assert float(values["bound"]) == pytest.approx(3.95, abs=0.02)
        assert 0.78 <= float(values["ratio"]) <= 0.80

    def test_elementwise_bound(self, run):
        code, out, _ = run("bounds", "--lipschitz", "5", "--mass", "3", "--sigma", "0.4", "--case", "elementwise")

        assert code == 0
        assert float(parse_key_values(out)["bound"]) == pytest.approx(2.733, abs=5e-3)

    def test_huge_sigma(self, run):
        code, out, _ = run("bounds", "--lipschitz", "1", "--sigma", "1e6")

        assert code == 0
        assert float(parse_key_values(out)["bound"]) < 1e-5

    def test_needs_sigma_or_optimal(self, run):
        code, _, err = run("bounds", "--lipschitz", "1")
        assert code == 2
        assert "--sigma or --optimal" in err

    def test_nonpositive_lipschitz(self, run):
        code, _, _ = run("bounds", "--lipschitz", "-1", "--sigma", "0.5")
        assert code == 2


@pytest.mark.integration
class TestCurveCommand:

    def _write_certificates(self, path, rows):
        base = {"rule": "R2", "map": "softmax", "temperature": 0.5, "mass": 1.0, "alpha": 0.001,
                "sigma": 0.25, "n0": 100, "n": 1000, "seed": 0, "method": "bernstein"}
        with open(path, "w", encoding="utf-8") as f:
            for input_id, (label, prediction, radius) in enumerate(rows):
                f.write(json.dumps(dict(base, input_id=input_id, label=label, prediction=prediction,
                                        radius=radius)) + "\n")

    def test_curve_from_record_labels(self, run, temp_dir):
        certs = temp_dir / "certs.jsonl"
        self._write_certificates(certs, [(1, 1, 0.3), (0, 0, 0.7)])

        code, out, _ = run("curve", "--certificates", str(certs), "--eps", "0,0.5,1")

        assert code == 0
        assert out.splitlines() == ["eps,certified_accuracy", "0.0,1.0", "0.5,0.5", "1.0,0.0"]

    def test_labels_file_overrides(self, run, temp_dir):
        certs = temp_dir / "certs.jsonl"
        labels = temp_dir / "labels.csv"
        out_path = temp_dir / "curve.csv"
        self._write_certificates(certs, [(None, 1, 0.3), (None, "abstain", 0.0)])
        labels.write_text("input_id,label\n0,1\n1,1\n", encoding="utf-8")

        code, _, _ = run("curve", "--certificates", str(certs), "--labels", str(labels), "--eps", "0",
                         "--out", str(out_path))

        assert code == 0
        assert out_path.read_text(encoding="utf-8").splitlines()[1] == "0.0,0.5"

    def test_missing_label(self, run, temp_dir):
        certs = temp_dir / "certs.jsonl"
        self._write_certificates(certs, [(None, 1, 0.3)])

        code, _, err = run("curve", "--certificates", str(certs), "--eps", "0")

        assert code == 3
        assert "No label for input 0" in err


@pytest.mark.integration
class TestSweepCommand:

    def test_sweep_from_scores(self, run, temp_dir, sample_score_file):
        scores_path = temp_dir / "scores.bin"
        save_scores(sample_score_file, scores_path)

        code, out, _ = run("sweep", "--scores", str(scores_path), "--t-count", "3",
                           "--methods", "bernstein,hoeffding,clopper-pearson")

        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "input_id,map,temperature,method,radius"
        # per input: 7 candidates x 2 methods + 1 Clopper-Pearson hardmax row
        assert len(lines) == 1 + 3 * 15
        assert sum(",clopper_pearson," in line for line in lines) == 3

    def test_sweep_from_model(self, run):
        code, out, _ = run("sweep", "--model", "worst_case_hbar", "--x", "0.2", "--sigma", "0.5",
                           "--n", "1000", "--maps", "sparsemax", "--t-count", "2")

        assert code == 0
        rows = [line.split(",") for line in out.splitlines()[1:]]
        assert len(rows) == 2
        assert all(row[1] == "sparsemax" and float(row[4]) >= 0.0 for row in rows)


@pytest.mark.integration
class TestTightnessCommand:

    def test_bound_attained(self, run):
        code, out, _ = run("tightness", "--lipschitz", "1", "--mass", "1", "--sigma", "0.5",
                           "--n-mc", "400000", "--seed", "3")

        assert code == 0
        values = parse_key_values(out)
        assert float(values["bound"]) == pytest.approx(0.68269, abs=1e-5)
        assert float(values["relative_error"]) < 0.02

    def test_tolerance_exceeded(self, run):
        code, out, err = run("tightness", "--n-mc", "100000", "--tolerance", "1e-9")

        assert code == 4
        assert "Error:" in err

    def test_too_few_samples(self, run):
        code, _, err = run("tightness", "--n-mc", "2000")

        assert code == 2
        assert "n_mc must be at least 100000" in err
