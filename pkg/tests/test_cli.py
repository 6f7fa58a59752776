import json

import jsonschema
import pytest

from hassewitt.cli import main

SCHEMA_DIR = None


def _schema(name):
    global SCHEMA_DIR
    if SCHEMA_DIR is None:
        import hassewitt
        import os
        SCHEMA_DIR = os.path.join(os.path.dirname(hassewitt.__file__),
                                  "schemas")
    import os
    with open(os.path.join(SCHEMA_DIR, name)) as fh:
        return json.load(fh)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, argv):
    code, out = run(capsys, argv)
    doc = json.loads(out)
    jsonschema.validate(doc, _schema("cli_output.json"))
    report_schema = _schema("report.json")
    for rep in doc.get("reports", []):
        jsonschema.validate(rep, report_schema)
    return code, doc


def test_hw_beta_exact_cubic(capsys):
    code, out = run(capsys, ["hw", "--f", "1 + a*x + b*x^2 + x^3",
                             "--params", "a,b", "--beta", "2"])
    assert code == 0
    assert "a" in out and "b" in out


def test_hw_alpha_exact_torus(capsys):
    code, out = run(capsys, ["hw", "--f", "x + y + x^-1*y^-1", "--p", "7",
                             "--alpha", "1"])
    assert code == 0
    # single interior point (0,0); the entry is the coefficient of x^0*y^0 in
    # f^6, i.e. the multinomial 6!/(2!2!2!) = 90
    assert "90" in out


def test_hw_empty_interior_exit_code(capsys):
    code, out = run(capsys, ["hw", "--f", "1 + x", "--interior"])
    assert code == 2
    err = capsys.readouterr()
    assert code == 2


def test_hw_describe_default(capsys):
    code, out = run(capsys, ["hw", "--f", "y^2 - x^5 - 2*x^2 - x - 1"])
    assert code == 0
    assert "(1, 1)" in out and "(2, 1)" in out


def test_hw_singular_reports_not_invertible(capsys):
    # describing the unit matrix never needs the inverse, so this succeeds
    # but reports non-invertibility
    code, out = run(capsys, ["hw", "--f", "1 + 2*x + x^2", "--p", "2",
                             "--K", "1", "--hasse-witt"])
    assert code == 0
    assert "invertible mod 2: False" in out


def test_singular_exit_code(capsys):
    # the ratio congruence needs the inverse, so the same input exits 3
    code = main(["verify", "--congruence", "ratio",
                 "--f", "1 + 2*x + x^2", "--p", "2", "--smax", "1"])
    captured = capsys.readouterr()
    assert code == 3
    assert "singular" in (captured.out + captured.err)


def test_budget_exit_code(capsys):
    code, _ = run(capsys, ["verify", "--congruence", "product",
                           "--f", "y^2 - x^5 - 2*x^2 - x - 1",
                           "--p", "11", "--smax", "2", "--budget", "100"])
    assert code == 4


def test_usage_error_exit_code(capsys):
    code, _ = run(capsys, ["verify", "--f", "1 + x + x^3"])
    assert code == 2
    code2, _ = run(capsys, ["verify", "--congruence", "product",
                            "--decomposition", "--f", "1 + x + x^3",
                            "--p", "5"])
    assert code2 == 2


def test_verify_product_congruence_json(capsys):
    code, doc = run_json(capsys, ["verify", "--congruence", "product",
                                  "--f", "1 + x + x^3", "--p", "5",
                                  "--smax", "2", "--json"])
    assert code == 0
    assert doc["command"] == "verify"
    assert len(doc["reports"]) == 2
    assert all(r["passed"] for r in doc["reports"])


def test_verify_ratio_congruence_genus2(capsys):
    code, doc = run_json(capsys, ["verify", "--congruence", "ratio",
                                  "--f", "y^2 - x^5 - 2*x^2 - x - 1",
                                  "--p", "11", "--smax", "1", "--json"])
    assert code == 0
    assert all(r["passed"] for r in doc["reports"])


def test_verify_logderiv_congruence(capsys):
    code, doc = run_json(capsys, [
        "verify", "--congruence", "logderiv",
        "--f", "1 + (1+t)*x + x^2 + x^3", "--params", "t",
        "--p", "3", "--smax", "1", "--m", "1", "--N", "3",
        "--D", "d/dt", "--json"])
    assert code == 0
    assert all(r["passed"] for r in doc["reports"])


def test_verify_decomposition_and_delta(capsys):
    code, doc = run_json(capsys, ["verify", "--decomposition",
                                  "--f", "1 + x + x^3", "--p", "3",
                                  "--m-list", "2,4", "--smax", "2",
                                  "--json"])
    assert code == 0
    assert all(r["passed"] for r in doc["reports"])
    code2, doc2 = run_json(capsys, ["verify", "--delta",
                                    "--f", "1 + x + x^3", "--p", "3",
                                    "--smax", "2", "--json"])
    assert code2 == 0
    assert all(r["passed"] for r in doc2["reports"])


def test_verify_frame_both_primes(capsys):
    for p in ("7", "5"):
        code, doc = run_json(capsys, ["verify", "--frame", "--p", p,
                                      "--s", "1", "--N", "4", "--json"])
        assert code == 0
        assert all(r["passed"] for r in doc["reports"])
        assert all(r["soft"] for r in doc["reports"])


def test_verify_asd_minimal_shift(capsys):
    code, doc = run_json(capsys, ["verify", "--asd",
                                  "--curve", "y^2 - x^5 - 2*x^2 - x - 1",
                                  "--p", "11", "--m-list", "11,22,121",
                                  "--json"])
    assert code == 0
    assert doc["results"]["minimal_c"] == 1


def test_limits_frobenius_digits(capsys):
    code, out = run(capsys, ["limits", "--limit", "frobenius",
                             "--f", "y^2 - x^5 - 2*x^2 - x - 1",
                             "--p", "11", "--e", "2"])
    assert code == 0
    assert "8 + 1*11" in out


def test_limits_connection_matches_catalog(capsys):
    code, doc = run_json(capsys, ["limits", "--limit", "connection",
                                  "--f", "1 + a*x + b*x^2 + x^3",
                                  "--params", "a,b", "--p", "5", "--e", "2",
                                  "--N", "6", "--D", "d/da", "--json"])
    assert code == 0
    assert doc["results"]["matrix"]["entries"]


def test_fgl_commands(capsys):
    code, doc = run_json(capsys, ["fgl", "--f", "x + y + x^-1*y^-1",
                                  "--N", "6", "--check-integrality",
                                  "2,3,5,7", "--json"])
    assert code == 0
    assert all(r["passed"] for r in doc["reports"])
    code2, doc2 = run_json(capsys, ["fgl", "--f", "1 + x + x^3",
                                    "--N", "6", "--witness", "--p", "2",
                                    "--json"])
    assert code2 == 0
    assert all(r["passed"] for r in doc2["reports"])
    code3, doc3 = run_json(capsys, ["fgl", "--f", "1 + x + x^3",
                                    "--N", "5", "--axioms", "--json"])
    assert code3 == 0


def test_zeta_pipeline_json(capsys):
    code, doc = run_json(capsys, ["zeta", "--json"])
    assert code == 0
    res = doc["results"]
    assert res["counts"]["1"] == 15
    assert res["counts"]["2"] == 149
    assert res["numerator"]["coeffs"] == [1, 3, 18, 33, 121]
    assert res["numerator"]["q"] == 11
    assert sorted(res["factors"]) == [[1, -1, 11], [1, 4, 11]]


def test_zeta_unit_roots_digits(capsys):
    code, out = run(capsys, ["zeta", "--unit-roots", "--K", "3"])
    assert code == 0
    assert "7 + 2*11 + 2*11^2" in out
    assert "1 + 10*11 + 9*11^2" in out


def test_zeta_charpoly_and_match(capsys):
    code, doc = run_json(capsys, ["zeta", "--charpoly", "--json"])
    assert code == 0
    assert all(r["passed"] for r in doc["reports"])
    code2, out = run(capsys, ["zeta", "--match-limits"])
    assert code2 == 0
    assert "8 + 1*11" in out and "7 + 6*11" in out


def test_corpus_listing_deterministic(capsys):
    code, out1 = run(capsys, ["corpus", "--count", "5"])
    code2, out2 = run(capsys, ["corpus", "--count", "5"])
    assert code == code2 == 0
    assert out1 == out2


def test_json_output_is_byte_stable(capsys):
    _, out1 = run(capsys, ["verify", "--congruence", "product",
                           "--f", "1 + x + x^3", "--p", "5", "--smax", "2",
                           "--json"])
    _, out2 = run(capsys, ["verify", "--congruence", "product",
                           "--f", "1 + x + x^3", "--p", "5", "--smax", "2",
                           "--json"])
    assert out1 == out2


def test_matrix_schema_validates(capsys):
    code, doc = run_json(capsys, ["hw", "--f", "y^2 - x^5 - 2*x^2 - x - 1",
                                  "--p", "11", "--K", "1", "--hasse-witt",
                                  "--json"])
    assert code == 0
    jsonschema.validate(doc["results"]["hasse_witt"], _schema("matrix.json"))


def test_unknown_command_usage(capsys):
    assert main(["bogus"]) == 2


def test_strict_flag_only_escalates_soft_failures():
    from hassewitt.cli import _exit_from_reports
    from hassewitt.hwmatrix import _make_report
    ok_soft = _make_report("c", {}, 5, 1, 2, 2, soft=True)
    bad_soft = _make_report("c", {}, 5, 1, 0, 2, soft=True)
    bad_hard = _make_report("c", {}, 5, 1, 0, 2)
    assert _exit_from_reports([ok_soft], False) == 0
    assert _exit_from_reports([ok_soft], True) == 0
    assert _exit_from_reports([bad_soft], False) == 0
    assert _exit_from_reports([bad_soft], True) == 1
    assert _exit_from_reports([bad_hard], False) == 1
