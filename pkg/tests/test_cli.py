"""Document schema, command pipelines, exit codes, and report stability."""

import json
import math
from pathlib import Path

import pytest

from qproots import SchemaError, parse_document, serialize_document
from qproots.cli import main

SAMPLES = Path(__file__).resolve().parent.parent / "sample_inputs"

SINGLE = SAMPLES / "single_scalar.json"
RAW = SAMPLES / "raw_decaying.json"
MULTI = SAMPLES / "two_delays.json"
DIST_FLAT = SAMPLES / "distributed_flat.json"
DIST_POINT = SAMPLES / "distributed_point.json"


def write_doc(tmp_path, payload, name="doc.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


# ---------------------------------------------------------------------------
# parsing and round trips

def test_round_trip_all_sample_documents():
    for sample in (SINGLE, RAW, MULTI, DIST_FLAT, DIST_POINT):
        doc = parse_document(sample.read_text())
        ser = serialize_document(doc)
        again = parse_document(json.loads(json.dumps(ser)))
        assert doc == again, sample.name
        assert serialize_document(again) == ser, sample.name


def test_complex_entries_accept_bare_reals_and_pairs():
    doc = parse_document(
        json.dumps(
            {
                "schema_version": 1,
                "mode": "raw_quasipolynomial",
                "system": {"terms": [{"sigma": 0, "coeffs": [1, [0, 2]]}]},
            }
        )
    )
    coeffs = doc.system.terms[0].poly.coeffs
    assert coeffs == (1 + 0j, 2j)


def test_rational_sigma_forms():
    doc = parse_document(
        json.dumps(
            {
                "schema_version": 1,
                "mode": "raw_quasipolynomial",
                "system": {
                    "terms": [
                        {"sigma": "1/2", "coeffs": [1]},
                        {"sigma": [3, 4], "coeffs": [1]},
                        {"sigma": 1.25, "coeffs": [1]},
                    ]
                },
            }
        )
    )
    from fractions import Fraction

    sigmas = [t.sigma for t in doc.system.terms]
    assert Fraction(1, 2) in sigmas
    assert Fraction(3, 4) in sigmas
    assert 1.25 in sigmas


def schema_error_path(payload):
    with pytest.raises(SchemaError) as err:
        parse_document(json.dumps(payload))
    return err.value.path


def test_schema_diagnostics_carry_field_paths():
    assert schema_error_path({"schema_version": 2, "mode": "x", "system": {}}) == "$.schema_version"
    assert schema_error_path({"schema_version": 1, "mode": "x", "system": {}}) == "$.mode"
    assert (
        schema_error_path(
            {"schema_version": 1, "mode": "single_delay", "system": {"A": [[0, 1]], "B": [[1]], "tau": 1}}
        )
        == "$.system.A[0]"
    )
    assert (
        schema_error_path(
            {"schema_version": 1, "mode": "single_delay", "system": {"A": [[0]], "B": [[1]], "tau": 0}}
        )
        == "$.system.tau"
    )
    assert (
        schema_error_path(
            {
                "schema_version": 1,
                "mode": "multi_delay",
                "system": {
                    "A": [[0]],
                    "B": [[[1]]],
                    "delays": {"basis": [{"label": "u", "value": 1}], "coords": [[0.5]]},
                },
            }
        )
        == "$.system.delays.coords[0][0]"
    )
    assert (
        schema_error_path(
            {
                "schema_version": 1,
                "mode": "distributed",
                "system": {
                    "a": 0,
                    "tau": 1,
                    "kernel": {"thetas": [0, 2], "values": [1, 1]},
                },
            }
        )
        == "$.system.kernel.thetas"
    )


def test_oversized_matrix_rejected_at_parse_time():
    n = 9
    payload = {
        "schema_version": 1,
        "mode": "single_delay",
        "system": {
            "A": [[0] * n for _ in range(n)],
            "B": [[0] * n for _ in range(n)],
            "tau": 1,
        },
    }
    assert schema_error_path(payload) == "$.system.A"


# ---------------------------------------------------------------------------
# commands and exit codes

def test_analyze_reports_are_byte_identical(tmp_path, capsys):
    out1 = tmp_path / "a1.json"
    out2 = tmp_path / "a2.json"
    assert main(["analyze", str(MULTI), "--out", str(out1)]) == 0
    assert main(["analyze", str(MULTI), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_analyze_single_delay_content(tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", str(SINGLE), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["admissible"] is True
    assert rep["infinitely_many_roots"] is True
    assert rep["trace_conditions"][0]["holds"] is True
    assert rep["expansion"]["matches_trace"] is True
    assert rep["characteristic"]["variable"] == "mu"
    assert 0.8 <= rep["growth"]["fitted_order"] <= 1.1


def test_analyze_raw_non_admissible(tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", str(RAW), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["admissible"] is False
    assert rep["infinitely_many_roots"] is False
    assert rep["reduced_polynomial"]["degree"] == 2


def test_analyze_multi_delay_independence(tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", str(MULTI), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["independence"]["status"] == "dependent"
    assert rep["independence"]["witness"] == [2, -1]


def test_analyze_distributed_zero_kernel(tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", str(DIST_POINT), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["kernel_nonzero"] is False
    assert rep["infinitely_many_roots"] is False
    assert rep["unique_root"] == [3.0, 4.0]


def test_roots_finds_conjugate_pair(tmp_path):
    out = tmp_path / "roots.json"
    csv = tmp_path / "roots.csv"
    code = main(
        ["roots", str(SINGLE), "--re", "-2", "2", "--im", "-3", "3",
         "--out", str(out), "--csv", str(csv)]
    )
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["count"] == 2
    ims = sorted(r["im"] for r in rep["roots"])
    assert abs(ims[0] + math.pi / 2) <= 1e-10
    assert abs(ims[1] - math.pi / 2) <= 1e-10
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "re,im,residual,multiplicity"
    assert len(lines) == 3
    for line in lines[1:]:
        re_s, im_s, res_s, mult_s = line.split(",")
        float(re_s), float(im_s), float(res_s)
        assert int(mult_s) == 1


def test_roots_empty_region(tmp_path):
    out = tmp_path / "roots.json"
    code = main(
        ["roots", str(SINGLE), "--re", "10", "11", "--im", "10", "11", "--out", str(out)]
    )
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["count"] == 0
    assert rep["roots"] == []


def test_roots_region_falls_back_to_document(tmp_path):
    out = tmp_path / "roots.json"
    assert main(["roots", str(DIST_POINT), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["count"] == 1
    assert abs(rep["roots"][0]["re"] - 3.0) <= 1e-9
    assert abs(rep["roots"][0]["im"] - 4.0) <= 1e-9


def test_roots_without_any_region_is_schema_error(tmp_path, capsys):
    doc = {
        "schema_version": 1,
        "mode": "raw_quasipolynomial",
        "system": {"terms": [{"sigma": 0, "coeffs": [0, 1]}]},
    }
    path = write_doc(tmp_path, doc)
    assert main(["roots", path]) == 2
    assert "--re/--im" in capsys.readouterr().err


def test_scan_verdicts(tmp_path):
    out = tmp_path / "scan.json"
    assert main(["scan", str(RAW), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["counts"] == [2, 2, 2]
    assert rep["verdict"] == "stabilized"

    assert main(["scan", str(MULTI), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["counts"] == [3, 7, 13]
    assert rep["verdict"] == "strictly_increasing"


def test_scan_factor_flag_overrides_document(tmp_path):
    out = tmp_path / "scan.json"
    assert main(["scan", str(RAW), "--factors", "1,2", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["factors"] == [1.0, 2.0]
    assert len(rep["counts"]) == 2


def test_scan_invalid_factors(tmp_path, capsys):
    assert main(["scan", str(RAW), "--factors", "2,4"]) == 2
    assert main(["scan", str(RAW), "--factors", "1,3,2"]) == 2
    assert main(["scan", str(RAW), "--factors", "1,two"]) == 2


def test_exit_code_two_on_malformed_json(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{"schema_version": 1,,}')
    assert main(["analyze", str(p)]) == 2
    err = capsys.readouterr().err
    assert "line 1" in err


def test_exit_code_two_on_missing_file(capsys):
    assert main(["analyze", "/nonexistent/nope.json"]) == 2


def test_exit_code_three_on_numeric_failure(tmp_path, capsys):
    doc = {
        "schema_version": 1,
        "mode": "distributed",
        "system": {
            "a": 0,
            "tau": 1,
            "kernel": {
                "thetas": [0, 0.2, 0.4, 0.6, 0.8, 1.0],
                "values": [1, -1, 1, -1, 1, -1],
            },
        },
        "analysis": {
            "quadrature": {"rel_tol": 1e-15, "max_panels": 1, "nodes_per_panel": 2}
        },
    }
    path = write_doc(tmp_path, doc)
    assert main(["roots", path, "--re", "-40", "40", "--im", "-40", "40"]) == 3
    err = capsys.readouterr().err
    assert "numeric failure" in err
    assert "root counting" in err


def test_plots_are_written_and_do_not_affect_exit(tmp_path):
    svg = tmp_path / "roots.svg"
    code = main(
        ["roots", str(SINGLE), "--re", "-2", "2", "--im", "-3", "3",
         "--out", str(tmp_path / "r.json"), "--plot", str(svg)]
    )
    assert code == 0
    assert svg.exists()
    assert b"<svg" in svg.read_bytes()

    # an unwritable plot path must not change the exit code
    bad = tmp_path / "no_such_dir" / "plot.svg"
    code = main(
        ["roots", str(SINGLE), "--re", "-2", "2", "--im", "-3", "3",
         "--out", str(tmp_path / "r2.json"), "--plot", str(bad)]
    )
    assert code == 0
    assert not bad.exists()


def test_scan_plot(tmp_path):
    svg = tmp_path / "scan.svg"
    assert main(["scan", str(RAW), "--out", str(tmp_path / "s.json"), "--plot", str(svg)]) == 0
    assert svg.exists()


def test_single_delay_roots_carry_lambda_mapping(tmp_path):
    # with tau = 2 the report variable is mu and each root carries lambda = mu / tau
    doc = {
        "schema_version": 1,
        "mode": "single_delay",
        "system": {"A": [[0]], "B": [[-1.5707963267948966]], "tau": 2},
    }
    path = write_doc(tmp_path, doc)
    out = tmp_path / "roots.json"
    assert main(["roots", path, "--re", "-2", "2", "--im", "-3", "3", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["variable"] == "mu"
    assert rep["tau"] == [2.0, 0.0]
    for row in rep["roots"]:
        lam = complex(*row["lambda"])
        mu = complex(row["re"], row["im"])
        assert abs(lam - mu / 2.0) <= 1e-12
