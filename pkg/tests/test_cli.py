import json

import pytest

from haarlimits.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_wg_text_round_trips(capsys):
    from haarlimits.algebra import parse_ratfn
    from haarlimits.weingarten import wg_table

    code, out, _ = run(capsys, "wg", "--group", "O", "--n", "3")
    assert code == 0
    table = wg_table("O", 3)
    lines = [l for l in out.splitlines() if l.startswith("C[")]
    assert len(lines) == len(table.entries)
    for line in lines:
        text = line.split(" = ", 1)[1]
        assert parse_ratfn(text) in table.entries.values()


def test_wg_at_integer_N_json(capsys):
    code, data = run_json(capsys, "wg", "--group", "U", "--n", "2", "--at-N", "3")
    assert code == 0
    assert data["config"]["flags"]["at_N"] == 3
    assert "version" in data
    text = json.dumps(data)
    assert "1/8" in text and "-1/24" in text


def test_json_is_stable(capsys):
    a = run_json(capsys, "wg", "--group", "O", "--n", "2")[1]
    b = run_json(capsys, "wg", "--group", "O", "--n", "2")[1]
    assert a == b


def test_moment_entries(capsys):
    code, out, _ = run(capsys, "moment", "--group", "O", "--i", "1,1", "--j", "1,1", "--at-N", "4")
    assert code == 0 and out.strip().endswith("= 1/4")


def test_moment_trace(capsys):
    code, out, _ = run(capsys, "moment", "--group", "U", "--trace", "Tr(A U B Ud)")
    assert code == 0
    assert "Tr(A) Tr(B)" in out


def test_cumulant_eval(capsys):
    # semicircle moments 0, 1, 0, 2: psi_4 = 2 - 2 = 0
    code, data = run_json(capsys, "cumulant", "--q", "4", "--eval", "phi1=0,phi2=1,phi3=0,phi4=2")
    assert code == 0
    assert float(data["value"]) == 0


def test_universality_claims_pass(capsys):
    for claim in ("1", "2", "3"):
        code, out, _ = run(capsys, "universality", "--claim", claim, "--order", "3")
        assert code == 0, out
        assert "PASS" in out


def test_hciz_json_has_provenance(capsys):
    code, data = run_json(capsys, "hciz", "--group", "O", "--a", "0.5", "--b", "1.0", "--kappa", "0.3")
    assert code == 0
    assert "exact" in json.dumps(data)


def test_dpcheck(capsys):
    code, out, _ = run(capsys, "dpcheck", "--beta", "1", "--p", "2", "--N", "2")
    assert code == 0 and "PASS" in out


def test_mc_is_reproducible(capsys):
    argv = ["mc", "--group", "O", "--N", "3", "--target", "moment:i=1,1;j=1,1", "--samples", "2000", "--seed", "4"]
    a = run_json(capsys, *argv)[1]
    b = run_json(capsys, *argv)[1]
    assert a == b
    assert "monte-carlo" in json.dumps(a)


def test_verify_all_reports_failure_with_exit_1(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify-all", "--only", "7", "--report", str(report))
    assert code == 1
    assert "criterion 7: FAIL" in out
    data = json.loads(report.read_text())
    assert data["pass"] is False


def test_verify_all_pass_exit_0(capsys):
    code, out, _ = run(capsys, "verify-all", "--only", "2")
    assert code == 0 and "criterion 2: PASS" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["wg", "--group", "Q", "--n", "2"],
        ["wg", "--group", "O"],
        ["moment", "--group", "O", "--i", "1", "--j", "1,2"],
        ["cumulant", "--polarized", "9z"],
        ["hciz", "--group", "U", "--a", "1,1", "--b", "0,1", "--kappa", "0.1"],
        ["mc", "--group", "O", "--N", "2", "--target", "nonsense"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as e:
        code = main(argv)
        raise SystemExit(code)
    assert e.value.code == 2
