import json
import os
import subprocess
from pathlib import Path

import pytest

import langtraj


def test_tokenize_and_ngrams():
    tokens = langtraj.tokenize("We went. We RAN!")
    assert tokens == ["we", "went", "we", "ran"]
    grams = langtraj.extract_ngrams(tokens, max_order=2)
    assert grams["we"] == pytest.approx(0.5)
    assert sum(v for k, v in grams.items() if " " not in k) == pytest.approx(1.0)
    assert langtraj.meta_features(["i", "i", "we"]) == (3, pytest.approx(4 / 3))


def test_statistics():
    assert langtraj.bh_adjust([0.01, 0.02, 0.04, 0.5]) == pytest.approx([0.04, 0.04, 0.04 * 4 / 3, 0.5])
    lo, hi = langtraj.fisher_ci(0.38, 75)
    assert abs(lo - 0.16) <= 0.02 and abs(hi - 0.56) <= 0.02
    z = langtraj.standardize([1.0, 2.0, 3.0])
    assert z == pytest.approx([-1.0, 0.0, 1.0])
    intercept, slope, rss = langtraj.fit_subject_trajectory([(0.5, 40.0), (1.5, 42.0), (3.0, 45.0)])
    assert slope == pytest.approx(2.0)
    assert intercept == pytest.approx(39.0)
    assert rss == pytest.approx(0.0, abs=1e-12)
    assert langtraj.format_estimate(0.38, 0.16, 0.56, True) == "0.38* [0.16, 0.56]"


def test_errors_are_mapped():
    with pytest.raises(langtraj._core.Error):
        langtraj.fit_subject_trajectory([(1.0, 30.0), (1.0, 31.0), (1.0, 32.0)])


def _simulate(tmp_path):
    config = {"seed": 7, "n_subjects": 40, "words_per_subject": 400, "baseline_mean": 45, "baseline_sd": 10}
    cohort = tmp_path / "cohort"
    clip = langtraj.simulate(json.dumps(config), cohort)
    assert 0.0 <= clip < 0.05
    return cohort


def test_simulate_and_run(tmp_path):
    cohort = _simulate(tmp_path)
    run = json.loads((cohort / "run.json").read_text())
    assert run["seed"] == 7
    artifacts = langtraj.run_pipeline(cohort / "run.json")
    assert "trajectory_results.csv" in artifacts
    manifest = json.loads((cohort / "results" / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert (cohort / "results" / "trajectory_results.csv").exists()


CLI = os.environ.get("LANGTRAJ_CLI")


@pytest.mark.skipif(not CLI, reason="command-line tool not built")
def test_cli_simulate_run(tmp_path):
    out = tmp_path / "sim"
    config = tmp_path / "synth.json"
    config.write_text(json.dumps({"n_subjects": 30, "words_per_subject": 300, "baseline_mean": 45, "baseline_sd": 10}))
    subprocess.run([CLI, "simulate", "--config", str(config), "--out", str(out), "--seed", "3"], check=True)
    done = subprocess.run([CLI, "run", "--config", str(out / "run.json")], check=True, capture_output=True, text=True)
    assert Path(done.stdout.strip()).name == "manifest.json"

    bad = subprocess.run([CLI, "run", "--config", str(out / "run.json"), "--alpha", "0.5", "--bundle", str(tmp_path / "nope")],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    assert "error:" in bad.stderr
