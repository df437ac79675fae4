import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pathloss.cli import main
from pathloss.export import parse_columns
from pathloss.models import fspl_db

FSPL = fspl_db(28e9, 1.0)


def run(argv, capsys):
    status = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return status, out, err


def generate(tmp_path, name, capsys, *extra):
    path = tmp_path / name
    status, _, err = run(["generate", "-o", path, *extra], capsys)
    assert status == 0, err
    return path


def test_generate_is_byte_identical(tmp_path, capsys):
    a = generate(tmp_path, "a.csv", capsys, "--n", 2, "--sigma", 0, "--count", 10, "--seed", 7)
    b = generate(tmp_path, "b.csv", capsys, "--n", 2, "--sigma", 0, "--count", 10, "--seed", 7)
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 11


def test_generate_seed_from_environment(tmp_path, capsys, monkeypatch):
    explicit = generate(tmp_path, "a.csv", capsys, "--n", 3, "--sigma", 4, "--seed", 42)
    monkeypatch.setenv("PATHLOSS_SEED", "42")
    from_env = generate(tmp_path, "b.csv", capsys, "--n", 3, "--sigma", 4)
    assert explicit.read_bytes() == from_env.read_bytes()
    monkeypatch.setenv("PATHLOSS_SEED", "x")
    status, _, err = run(["generate", "--n", 3], capsys)
    assert status == 2 and err.startswith("invalid:")


def test_fit_ci_noiseless(tmp_path, capsys):
    csv = generate(tmp_path, "los_vv.csv", capsys, "--n", 2, "--sigma", 0, "--count", 25, "--seed", 7)
    out = tmp_path / "ci.json"
    status, stdout, _ = run(["fit", "--model", "ci", "--input", csv, "-o", out], capsys)
    assert status == 0
    doc = json.loads(out.read_text())
    assert doc["params"]["n"] == pytest.approx(2.0, abs=1e-9)
    assert doc["sigma_db"] == pytest.approx(0.0, abs=1e-9)
    assert "CI" in stdout and "RMSE" in stdout


def test_fit_json_to_stdout(tmp_path, capsys):
    csv = generate(tmp_path, "s.csv", capsys, "--n", 3, "--sigma", 2, "--count", 25)
    status, stdout, _ = run(["fit", "--model", "fi", "--input", csv], capsys)
    assert status == 0
    assert json.loads(stdout)["model"] == "FI"


def test_fit_fi_single_distance_is_degenerate(tmp_path, capsys):
    csv = tmp_path / "single_distance.csv"
    csv.write_text("distance_m,path_loss_db,frequency_ghz,polarization,scenario\n"
                   "5,80,28,VV,LOS\n5,81,28,VV,LOS\n5,79,28,VV,LOS\n")
    status, _, err = run(["fit", "--model", "fi", "--input", csv], capsys)
    assert status == 3
    assert err.strip() == "degenerate: all samples at one distance"
    assert len(err.strip().splitlines()) == 1


def test_fit_zms_with_reference_and_oracle(tmp_path, capsys):
    vh = generate(tmp_path, "nlos_vh.csv", capsys, "--n", 4.54, "--sigma", 9.25, "--count", 300,
                  "--polarization", "VH", "--scenario", "NLOS", "--seed", 1)
    vv = generate(tmp_path, "nlos_vv.csv", capsys, "--n", 5.29, "--sigma", 7.56, "--count", 300,
                  "--polarization", "VV", "--scenario", "NLOS", "--seed", 2)
    out = tmp_path / "zms.json"
    status, stdout, err = run(["fit", "--model", "zms", "--input", vh, "--reference", vv, "--oracle",
                               "-o", out], capsys)
    assert status == 0, err
    doc = json.loads(out.read_text())
    assert abs(doc["params"]["n"] - doc["oracle"]["n"]) <= 1.1e-4
    assert doc["params"]["zms_correction"] >= 0
    assert "oracle" in stdout


def test_fit_zms_refuses_to_guess_pairing(tmp_path, capsys):
    vh = generate(tmp_path, "nlos_vh.csv", capsys, "--n", 4.5, "--count", 30,
                  "--polarization", "VH", "--scenario", "NLOS")
    status, _, err = run(["fit", "--model", "zms", "--input", vh], capsys)
    assert status == 2 and err.startswith("missing-reference:")
    wrong = generate(tmp_path, "nlos_omni.csv", capsys, "--n", 4.5, "--count", 30,
                     "--polarization", "VOMNI", "--scenario", "NLOS")
    status, _, err = run(["fit", "--model", "zms", "--input", vh, "--reference", wrong], capsys)
    assert status == 2 and "V-V" in err


def test_fit_zms_explicit_correction(tmp_path, capsys):
    csv = generate(tmp_path, "s.csv", capsys, "--n", 3, "--sigma", 1, "--count", 30, "--polarization", "VH")
    status, stdout, _ = run(["fit", "--model", "zms", "--input", csv, "--correction", 2.5], capsys)
    assert status == 0
    assert json.loads(stdout)["params"]["zms_correction"] == 2.5


def test_fit_missing_input_is_io_error(tmp_path, capsys):
    status, _, err = run(["fit", "--model", "ci", "--input", tmp_path / "nope.csv"], capsys)
    assert status == 4 and err.startswith("io:")


def test_bad_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--model", "abg", "--input", "x.csv"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert len(err.strip().splitlines()) == 1 and err.startswith("usage:")


def write_params(tmp_path, text):
    path = tmp_path / "params.txt"
    path.write_text(text)
    return path


def test_predict_ci_sweep(tmp_path, capsys):
    params = write_params(tmp_path, "model = CI\nn = 1.81\nsigma = 2.75\nfrequency_hz = 28e9\nd0 = 1\n")
    out = tmp_path / "curve.txt"
    status, _, _ = run(["predict", "--params", params, "--d-min", 1.9, "--d-max", 45.7, "--step", 1,
                        "-o", out], capsys)
    assert status == 0
    rows = parse_columns(out.read_text())
    assert rows.shape == (45, 2)
    assert rows[0, 0] == pytest.approx(1.9)
    assert rows[-1, 0] == pytest.approx(45.7)
    assert rows[0, 1] == pytest.approx(FSPL + 18.1 * math.log10(1.9), abs=1e-6)
    assert np.all(np.diff(rows[:, 0]) > 0) and np.all(np.diff(rows[:, 1]) > 0)
    assert out.read_text().startswith("# model=CI")


def test_predict_single_point(tmp_path, capsys):
    params = write_params(tmp_path, "model = CI\nn = 3\nsigma = 1\nfrequency_hz = 28e9\n")
    status, stdout, _ = run(["predict", "--params", params, "--d-min", 1, "--d-max", 1], capsys)
    assert status == 0
    rows = parse_columns(stdout)
    assert rows.shape == (1, 2)
    assert rows[0, 1] == pytest.approx(FSPL, abs=1e-6)


def test_predict_fi_at_one_metre(tmp_path, capsys):
    params = write_params(tmp_path, "model = FI\nalpha = 58.23\nbeta = 1.62\nsigma = 1.81\n")
    status, stdout, _ = run(["predict", "--params", params, "--d-min", 1, "--d-max", 1], capsys)
    assert status == 0
    assert parse_columns(stdout)[0, 1] == pytest.approx(58.23, abs=1e-9)


def test_predict_below_d0_rejected(tmp_path, capsys):
    params = write_params(tmp_path, "model = ZMS\nn = 3\nzms_correction = 1\nsigma = 1\nfrequency_hz = 28e9\n")
    status, _, err = run(["predict", "--params", params, "--d-min", 0.5, "--d-max", 5], capsys)
    assert status == 2 and err.startswith("invalid:")


def _fit(tmp_path, capsys, csv, model, name, *extra):
    out = tmp_path / name
    status, _, err = run(["fit", "--model", model, "--input", csv, "-o", out, *extra], capsys)
    assert status == 0, err
    return out


def test_compare_ci_zms(tmp_path, capsys):
    csv = generate(tmp_path, "s.csv", capsys, "--n", 5.29, "--sigma", 7.56, "--count", 200, "--scenario", "NLOS")
    ci = _fit(tmp_path, capsys, csv, "ci", "ci.json")
    zms = _fit(tmp_path, capsys, csv, "zms", "zms.json", "--correction", 3.0)
    out = tmp_path / "cmp.json"
    table = tmp_path / "cmp.txt"
    status, _, _ = run(["compare", ci, zms, "-o", out, "--table", table], capsys)
    assert status == 0
    doc = json.loads(out.read_text())
    assert len(doc["verdicts"]) == 1
    assert doc["verdicts"][0]["lower"] == "CI"  # the correction only adds bias here
    assert "Verdicts" in table.read_text()


def test_compare_identical_reports_tie(tmp_path, capsys):
    csv = generate(tmp_path, "s.csv", capsys, "--n", 3, "--sigma", 3, "--count", 50)
    ci = _fit(tmp_path, capsys, csv, "ci", "ci.json")
    status, stdout, _ = run(["compare", ci, ci], capsys)
    assert status == 0
    assert [v["outcome"] for v in json.loads(stdout)["verdicts"]] == [0]


def test_compare_three_models(tmp_path, capsys):
    csv = generate(tmp_path, "s.csv", capsys, "--n", 3, "--sigma", 3, "--count", 50)
    reports = [_fit(tmp_path, capsys, csv, m, f"{m}.json", *(("--correction", "1") if m == "zms" else ()))
               for m in ("ci", "fi", "zms")]
    status, stdout, _ = run(["compare", *reports], capsys)
    doc = json.loads(stdout)
    assert status == 0 and [r["model"] for r in doc["rows"]] == ["CI", "FI", "ZMS"]
    assert len(doc["verdicts"]) == 3


def test_compare_errors(tmp_path, capsys):
    csv = generate(tmp_path, "s.csv", capsys, "--n", 3, "--count", 20)
    ci = _fit(tmp_path, capsys, csv, "ci", "ci.json")
    status, _, err = run(["compare", ci], capsys)
    assert status == 2 and err.startswith("need-two-models:")
    bad = tmp_path / "bad.json"
    bad.write_text("[]")
    status, _, err = run(["compare", ci, bad], capsys)
    assert status == 2


def pipeline(tmp_path, capsys, tag):
    work = tmp_path / tag
    work.mkdir()
    csv = generate(work, "s.csv", capsys, "--n", 5.29, "--sigma", 7.56, "--count", 500, "--seed", 2024,
                   "--scenario", "NLOS")
    ci = _fit(work, capsys, csv, "ci", "ci.json", "--oracle")
    fi = _fit(work, capsys, csv, "fi", "fi.json")
    zms = _fit(work, capsys, csv, "zms", "zms.json", "--correction", 1.25, "--oracle")
    run(["compare", ci, fi, zms, "-o", work / "cmp.json", "--table", work / "cmp.txt"], capsys)
    return [work / n for n in ("s.csv", "ci.json", "fi.json", "zms.json", "cmp.json", "cmp.txt")]


def test_pipeline_deterministic(tmp_path, capsys):
    first = pipeline(tmp_path, capsys, "a")
    second = pipeline(tmp_path, capsys, "b")
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes(), a.name


def test_generate_then_fit_recovers_truth(tmp_path, capsys):
    csv = generate(tmp_path, "s.csv", capsys, "--model", "fi", "--alpha", 58.23, "--beta", 1.62, "--sigma", 0,
                   "--count", 40)
    status, stdout, _ = run(["fit", "--model", "fi", "--input", csv], capsys)
    doc = json.loads(stdout)
    assert doc["params"]["alpha"] == pytest.approx(58.23, abs=1e-9)
    assert doc["params"]["beta"] == pytest.approx(1.62, abs=1e-9)


def _six_surveys(tmp_path, capsys):
    truths = {("VV", "LOS"): 1.81, ("VH", "LOS"): 3.59, ("VOMNI", "LOS"): 2.69,
              ("VV", "NLOS"): 5.29, ("VH", "NLOS"): 4.54, ("VOMNI", "NLOS"): 5.56}
    paths = []
    for i, ((pol, scen), n) in enumerate(truths.items()):
        paths.append(generate(tmp_path, f"{pol}_{scen}.csv", capsys, "--n", n, "--sigma", 4, "--count", 47,
                              "--polarization", pol, "--scenario", scen, "--seed", i))
    return paths


def test_report_writes_tables_data_and_figures(tmp_path, capsys):
    out = tmp_path / "out"
    status, stdout, err = run(["report", *_six_surveys(tmp_path, capsys), "--out-dir", out], capsys)
    assert status == 0, err
    doc = json.loads((out / "report.json").read_text())
    assert len(doc["reports"]) == 18
    assert len(doc["comparison"]["verdicts"]) == 18
    for model in ("ci", "fi", "zms"):
        png = out / f"fig_{model}.png"
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert (out / "scatter_vv_los.txt").exists()
    assert parse_columns((out / "curve_zms_vomni_nlos.txt").read_text()).shape[1] == 2
    assert "Verdicts" in stdout and "V-Omni" in stdout


def test_report_skips_zms_without_partners(tmp_path, capsys):
    csv = generate(tmp_path, "vh.csv", capsys, "--n", 3, "--sigma", 2, "--count", 30, "--polarization", "VH")
    out = tmp_path / "out"
    status, _, err = run(["report", csv, "--out-dir", out, "--no-figures"], capsys)
    assert status == 0
    doc = json.loads((out / "report.json").read_text())
    assert sorted(r["model"] for r in doc["reports"]) == ["CI", "FI"]
    assert not list(out.glob("*.png"))


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pathloss", "generate", "--n", "2", "--count", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("distance_m,path_loss_db")
