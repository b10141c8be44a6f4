import json

import pytest

from ddeacs import cli
from ddeacs.classify import UniversalityClass
from ddeacs.errors import NoConvergence

SCALAR = '{"A": [[-0.5]], "B": [[-1.0]]}'


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_stdout(capsys):
    code, out, _ = run(capsys, "classify", "--system", SCALAR)
    assert code == cli.EXIT_OK
    assert json.loads(out)["class"] == "I"


def test_classify_roundtrip(capsys):
    _, out, _ = run(capsys, "classify", "--system", SCALAR)
    assert UniversalityClass.from_json(out).to_json() + "\n" == out


def test_input_file_and_out_dir(tmp_path, capsys):
    src = tmp_path / "sys.json"
    src.write_text(SCALAR)
    code, _, _ = run(capsys, "acs", "--input", str(src), "--out", str(tmp_path / "o"), "--samples", "128")
    assert code == cli.EXIT_OK
    assert (tmp_path / "o" / "acs_branches.csv").exists()
    crossings = json.loads((tmp_path / "o" / "crossings.json").read_text())
    assert any(abs(c["omega_H"] - 0.8660254) < 1e-6 for c in crossings)


def test_delays_with_tau(capsys):
    code, out, _ = run(capsys, "delays", "--system", SCALAR, "--kmax", "3", "--tau", "5.0")
    assert code == cli.EXIT_OK
    doc = json.loads(out)
    assert doc["unstable_dimension"]["D_u"] == 2
    assert len(doc["sequences"][0]["taus"]) == 4


def test_on_bifurcation_exit(capsys):
    code, _, err = run(capsys, "delays", "--system", SCALAR, "--tau", "2.418399152")
    assert code == cli.EXIT_INCONCLUSIVE
    assert "tau" in err


def test_spectrum_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--system", SCALAR, "--tau", "2.0", "--format", "csv")
    assert code == cli.EXIT_OK
    assert out.splitlines()[0] == "re,im,residual"


def test_sl_json(capsys):
    code, out, _ = run(capsys, "sl", "--alpha", "0.8", "--beta", "2", "--kmax", "6")
    assert code == cli.EXIT_OK
    doc = json.loads(out)
    assert len(doc["sequences"]) == 2


@pytest.mark.parametrize("argv", [
    ["classify"],
    ["classify", "--system", "{not json"],
    ["classify", "--system", SCALAR, "--samples", "8"],
    ["classify", "--system", SCALAR, "--omega-max", "-1"],
    ["spectrum", "--system", SCALAR],
    ["nonsense"],
])
def test_input_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == cli.EXIT_INPUT


def test_numerical_failure_exit(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise NoConvergence("forced")

    monkeypatch.setattr(cli, "compute_spectrum", boom)
    code, _, err = run(capsys, "spectrum", "--system", SCALAR, "--tau", "1.0")
    assert code == cli.EXIT_NUMERICAL
    assert "numerical failure" in err


def test_verify_single_system_reproducible(capsys):
    code1, out1, _ = run(capsys, "verify", "--system", SCALAR, "--seed", "4")
    code2, out2, _ = run(capsys, "verify", "--system", SCALAR, "--seed", "4")
    assert code1 == code2 == cli.EXIT_OK
    assert out1 == out2
    assert out1.strip().endswith("checks passed")


def test_verify_catalog(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == cli.EXIT_OK, out
    assert "FAIL" not in out
