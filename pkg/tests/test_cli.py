"""End-to-end checks of the command-line interface.

Every test drives ``hillspec.cli.main`` in process and inspects exit
codes, artifacts and the printed summaries.  Artifact documents are
re-validated against the bundled schemas on top of the validation the
CLI itself performs before writing.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from hillspec.cli import main
from hillspec.schemas import load_schema, validate_json


def _read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _csv_rows(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    return lines[0], [ln.split(",") for ln in lines[1:]]


def test_spectra_json_artifact(tmp_path, capsys):
    rc = main(["spectra", "--preset", "zero", "--kmax", "2",
               "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "spectra[zero]" in out
    doc = _read_json(tmp_path / "spectra.json")
    validate_json(doc, load_schema("spectra"))
    dir_vals = sorted(r["value"][0] for r in doc["dirichlet"])
    assert np.allclose(dir_vals, [1.0, 4.0], atol=1e-8)
    per = sorted((round(r["value"][0]), r["multiplicity"]) for r in doc["periodic"])
    assert (0, 1) in per
    assert (4, 2) in per
    assert all(abs(r["value"][1]) < 1e-8 for r in doc["dirichlet"])


def test_spectra_csv_artifact(tmp_path):
    rc = main(["spectra", "--preset", "zero", "--kmax", "2",
               "--format", "csv", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = _csv_rows(tmp_path / "spectra.csv")
    assert header == "family,index,re,im,count"
    families = {r[0] for r in rows}
    assert {"dirichlet", "periodic", "antiperiodic", "critical"} <= families
    for r in rows:
        float(r[2]), float(r[3]), int(r[4])


def test_portrait_artifacts_are_consistent(tmp_path, capsys):
    rc = main(["portrait", "--preset", "mathieu:0.5", "--kmax", "4",
               "--out", str(tmp_path)])
    assert rc == 0
    doc = _read_json(tmp_path / "portrait_summary.json")
    validate_json(doc, load_schema("portrait_summary"))
    assert doc["k_max"] == 4
    assert {a["band"] for a in doc["arcs"]} == {1, 2, 3, 4}
    assert all(a["regular"] for a in doc["arcs"])
    # a real potential: every traced gap of cos(2x)/2 below band 4 is open
    assert doc["open_gaps"] == 3
    widths = [g["width"] for g in doc["gaps"] if g["open"]]
    assert widths == sorted(widths, reverse=True)
    assert all(not sp["spectral_singularity"] for sp in doc["singular_points"])

    header, rows = _csv_rows(tmp_path / "portrait_arcs.csv")
    assert header.startswith("arc,band,t,lambda_re,lambda_im")
    assert len(rows) == sum(a["samples"] for a in doc["arcs"])
    # samples of the first arc march monotonically in t
    t0 = [float(r[2]) for r in rows if r[0] == "0"]
    assert all(b > a for a, b in zip(t0, t0[1:]))
    out = capsys.readouterr().out
    assert "portrait[mathieu(0.5)]" in out


def test_criterion_inconclusive_exit_code(tmp_path, capsys):
    rc = main(["criterion", "--preset", "zero", "--kmax", "2",
               "--out", str(tmp_path)])
    assert rc == 2
    doc = _read_json(tmp_path / "criterion_report.json")
    validate_json(doc, load_schema("criterion_report"))
    assert doc["verdict"] == "INCONCLUSIVE"
    out = capsys.readouterr().out
    assert "verdict: INCONCLUSIVE" in out


def test_criterion_fail_exit_code_and_witnesses(tmp_path, capsys):
    rc = main(["criterion", "--preset", "gasymov:1", "--kmax", "4",
               "--out", str(tmp_path)])
    assert rc == 1
    doc = _read_json(tmp_path / "criterion_report.json")
    validate_json(doc, load_schema("criterion_report"))
    assert doc["verdict"] == "FAIL"
    assert doc["witnesses"]
    sings = doc["singularities"]
    assert sings
    assert min(abs(complex(*s["lambda0"]) - 1.0) for s in sings) <= 1e-6
    out = capsys.readouterr().out
    assert "verdict: FAIL" in out
    assert "suspected spectral singularities:" in out


def test_validate_suite_passes(tmp_path, capsys):
    rc = main(["validate", "--preset", "zero", "--kmax", "2", "--seed", "3",
               "--out", str(tmp_path)])
    assert rc == 0
    doc = _read_json(tmp_path / "validate_table.json")
    validate_json(doc, load_schema("validate_table"))
    assert doc["status"] == "PASS"
    assert doc["seed"] == 3
    assert all(row["status"] == "PASS" for row in doc["checks"])
    assert all(row["max_error"] <= row["tolerance"] for row in doc["checks"])
    names = {row["check"] for row in doc["checks"]}
    assert "monodromy-determinant" in names
    assert "gelfand-roundtrip" in names
    out = capsys.readouterr().out
    assert out.strip().splitlines()[-1].startswith("overall: PASS -> ")


def test_project_band_artifacts(tmp_path):
    rc = main(["project", "--preset", "zero", "--kmax", "2", "--band", "1",
               "--cells", "1", "--points-per-cell", "16", "--out", str(tmp_path)])
    assert rc == 0
    doc = _read_json(tmp_path / "project_diagnostics.json")
    validate_json(doc, load_schema("project_diagnostics"))
    assert doc["band"] == 1
    assert doc["arcs_used"] >= 1
    # --cells counts period cells on each side of the origin
    assert doc["grid"]["n_cells"] == 2
    assert doc["grid"]["points_per_cell"] == 16
    assert 0.0 < doc["norm_output"] < 2.0 * doc["norm_input"]
    header, rows = _csv_rows(tmp_path / "project_result.csv")
    assert header == "x,re,im"
    assert len(rows) == 32


def test_project_refuses_a_singular_band(tmp_path, capsys):
    rc = main(["project", "--preset", "gasymov:1", "--kmax", "2", "--band", "1",
               "--cells", "1", "--points-per-cell", "16", "--out", str(tmp_path)])
    assert rc == 65
    err = capsys.readouterr().err
    assert err.startswith("numerical failure:")


def test_expand_writes_per_band_norms(tmp_path, capsys):
    rc = main(["expand", "--preset", "zero", "--kmax", "2", "--band-max", "2",
               "--cells", "1", "--points-per-cell", "16", "--out", str(tmp_path)])
    assert rc == 0
    doc = _read_json(tmp_path / "expand_diagnostics.json")
    validate_json(doc, load_schema("expand_diagnostics"))
    assert doc["band_max"] == 2
    assert not doc["forced"]
    assert [row["band"] for row in doc["per_band"]] == [1, 2]
    assert doc["residual"] >= 0.0
    header, rows = _csv_rows(tmp_path / "expand_result.csv")
    assert header == "x,re,im"
    assert len(rows) == 32


def test_expand_refuses_failed_verdict(tmp_path, capsys):
    rc = main(["expand", "--preset", "gasymov:1", "--kmax", "2", "--band-max", "1",
               "--cells", "1", "--points-per-cell", "8", "--out", str(tmp_path)])
    assert rc == 64
    err = capsys.readouterr().err
    assert "expansion refused" in err
    assert not (tmp_path / "expand_diagnostics.json").exists()


def test_greens_free_kernel_values(tmp_path):
    rc = main(["greens", "--preset", "zero", "--z", "-1",
               "--cells", "1", "--points-per-cell", "16", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = _csv_rows(tmp_path / "greens_kernel.csv")
    assert header == "x,y,re,im"
    assert len(rows) == 32 * 32
    worst = 0.0
    for x_s, y_s, re_s, im_s in rows:
        x, y = float(x_s), float(y_s)
        ref = 0.5 * math.exp(-abs(x - y))
        worst = max(worst, abs(complex(float(re_s), float(im_s)) - ref))
    assert worst <= 1e-6


def test_greens_accepts_comma_complex(tmp_path):
    rc = main(["greens", "--preset", "zero", "--z", "2.5,1",
               "--cells", "1", "--points-per-cell", "8", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = _csv_rows(tmp_path / "greens_kernel.csv")
    assert len(rows) == 16 * 16


def test_potential_file_matches_preset(tmp_path):
    doc = {"fourier": {"1": [0.5, 0.0], "-1": [0.5, 0.0]}}
    pot_path = tmp_path / "pot.json"
    pot_path.write_text(json.dumps(doc), encoding="utf-8")
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["spectra", "--potential-file", str(pot_path), "--kmax", "2",
                 "--out", str(out_a)]) == 0
    assert main(["spectra", "--preset", "mathieu:0.5", "--kmax", "2",
                 "--out", str(out_b)]) == 0
    doc_a = _read_json(out_a / "spectra.json")
    doc_b = _read_json(out_b / "spectra.json")
    for family in ("dirichlet", "periodic", "antiperiodic"):
        va = sorted(complex(*r["value"]).real for r in doc_a[family])
        vb = sorted(complex(*r["value"]).real for r in doc_b[family])
        assert np.allclose(va, vb, atol=1e-9)


@pytest.mark.parametrize(
    "argv",
    [
        ["spectra", "--preset", "bogus"],
        ["spectra"],
        ["spectra", "--preset", "zero", "--no-such-flag"],
        ["spectra", "--preset", "zero", "--potential-file", "x.json"],
        ["greens", "--preset", "zero"],
        ["project", "--preset", "zero", "--kmax", "2", "--band", "5"],
        ["expand", "--preset", "zero", "--kmax", "2", "--band-max", "3"],
        ["criterion", "--preset", "constant:not-a-number"],
    ],
)
def test_usage_errors_exit_64(tmp_path, capsys, argv):
    rc = main(argv + ["--out", str(tmp_path)])
    assert rc == 64
    err = capsys.readouterr().err
    assert err.startswith("error:")
