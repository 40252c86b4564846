import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cavity_w import verify
from cavity_w.cli import main
from cavity_w.subspace import SubspaceState


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_simulate_rabi_quarter_period(capsys):
    code, out, _ = run(capsys, "simulate", "--couplings", "1", "--initial", "excite:1", "--times", "pi/2")
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["t", "c1_re", "c1_im", "c2_re", "c2_im", "norm", "photon_prob"]
    vals = [float(v) for v in rows[1]]
    assert vals[0] == pytest.approx(math.pi / 2)
    np.testing.assert_allclose(vals[1:5], [0, 0, 0, -1], atol=1e-15)
    assert vals[5] == pytest.approx(1.0)
    assert vals[6] == pytest.approx(1.0)


def test_simulate_empty_times_gives_header_only(capsys):
    code, out, _ = run(capsys, "simulate", "--couplings", "1,2", "--times", "")
    assert code == 0
    assert read_csv(out) == [["t", "c1_re", "c1_im", "c2_re", "c2_im", "c3_re", "c3_im", "norm", "photon_prob"]]


@pytest.mark.parametrize("propagator", ["analytic", "oracle", "full"])
def test_simulate_propagators_agree(capsys, propagator):
    args = ["simulate", "--couplings", "0.5,1.5,2", "--initial", "w-minus:2", "--t-max", "3", "--steps", "7"]
    code, out, _ = run(capsys, *args, "--propagator", propagator)
    assert code == 0
    code, ref, _ = run(capsys, *args)
    a = np.array([[float(v) for v in r] for r in read_csv(out)[1:]])
    b = np.array([[float(v) for v in r] for r in read_csv(ref)[1:]])
    assert a.shape == (7, 11)
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_simulate_text_format_and_explicit_state(capsys):
    code, out, _ = run(
        capsys, "simulate", "--couplings", "1,1", "--initial", "0.6,0.8j,0", "--times", "0,1", "--format", "text"
    )
    assert code == 0
    assert "n_records: 2" in out
    assert "record_1:" in out
    assert "  c2_im: 0.80000000000000004" in out


@pytest.mark.parametrize(
    "args, field",
    [
        (["--couplings", "1,0", "--times", "1"], "couplings"),
        (["--couplings", "1,-2", "--times", "1"], "couplings"),
        (["--couplings", "1", "--times", "abc"], "times"),
        (["--couplings", "1", "--times", "1", "--initial", "excite:3"], "initial"),
        (["--couplings", "1", "--times", "1", "--initial", "1,1"], "initial"),
        (["--couplings", "1"], "times"),
        (["--times", "1"], "couplings"),
        (["--couplings", "1,1,1,1,1,1,1", "--times", "1", "--propagator", "full"], "propagator"),
    ],
)
def test_simulate_validation(capsys, tmp_path, args, field):
    out_file = tmp_path / "traj.csv"
    code, out, err = run(capsys, "simulate", *args, "--out", str(out_file))
    assert code == 1
    assert field in err
    assert not out_file.exists()
    assert list(tmp_path.iterdir()) == []


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"couplings": [1.0, 2.0], "initial": "photon", "times": [0, 1, 2]}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg))
    assert code == 0 and len(read_csv(out)) == 4
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--times", "0.5")
    assert code == 0 and len(read_csv(out)) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "simulate", "--config", str(bad))
    assert code == 1 and "config" in err


def parse_text(text):
    """Read the nested key: value format back into dicts."""
    root = {}
    stack = [(-1, root)]
    for line in text.splitlines():
        indent = (len(line) - len(line.lstrip())) // 2
        key, _, value = line.strip().partition(":")
        while stack[-1][0] >= indent:
            stack.pop()
        if value.strip() == "":
            child = {}
            stack[-1][1][key] = child
            stack.append((indent, child))
        else:
            stack[-1][1][key] = value.strip()
    return root


def test_protocol_one_one(capsys):
    code, out, _ = run(capsys, "protocol", "1", "1")
    assert code == 0
    doc = parse_text(out)
    assert float(doc["plan"]["ratio"]) == pytest.approx(2.4142136, abs=1e-7)
    assert float(doc["fidelity_final"]) == pytest.approx(1.0, abs=1e-10)
    assert doc["step1"]["cavity_reset"] == "true"
    assert doc["step2"]["cavity_reset"] == "true"
    for key in ("f_aux", "tau", "theta"):
        assert key in doc["plan"]


def test_protocol_strategy_and_flags(capsys):
    code, out, _ = run(capsys, "protocol", "2", "5")
    assert code == 0 and parse_text(out)["plan"]["strategy"] == "PREP_GROUP_2"
    code, out, _ = run(capsys, "protocol", "--m1", "2", "--m2", "5", "--strategy", "group1", "--propagator", "oracle")
    assert code == 0 and parse_text(out)["plan"]["strategy"] == "PREP_GROUP_1"
    code, out, _ = run(capsys, "protocol", "2", "2", "--format", "csv", "--propagator", "full")
    rows = dict(read_csv(out)[1:])
    assert rows["plan.strategy"] == "PREP_GROUP_1"
    assert float(rows["fidelity_final"]) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("args", [["0", "3"], ["3", "0"], [], ["4", "4", "--propagator", "full"]])
def test_protocol_rejected(capsys, args):
    code, _, err = run(capsys, "protocol", *args)
    assert code == 1
    assert err


def test_figure1_single_cell(capsys, tmp_path):
    out_file = tmp_path / "fig.csv"
    code, _, _ = run(capsys, "figure1", "1", "1", "--out", str(out_file))
    assert code == 0
    rows = read_csv(out_file.read_text())
    assert rows[0] == ["m1", "m2", "tau_tilde", "theta_tilde", "total"]
    assert len(rows) == 2
    assert float(rows[1][4]) == pytest.approx(1.6309863, abs=1e-7)


def test_figure1_full_grid(capsys):
    code, out, _ = run(capsys, "figure1", "--grid", "25x25")
    rows = read_csv(out)[1:]
    assert code == 0 and len(rows) == 625
    total = {(int(r[0]), int(r[1])): float(r[4]) for r in rows}
    assert all(total[(a + 1, b)] < total[(a, b)] for a in range(1, 25) for b in range(1, 26))
    assert all(total[(a, b + 1)] < total[(a, b)] for a in range(1, 26) for b in range(1, 25))
    # 17 significant digits round-trip the doubles exactly
    assert all(len(r[4].replace(".", "").lstrip("0")) <= 17 for r in rows)


def test_figure1_rejects_zero(capsys):
    code, _, err = run(capsys, "figure1", "0", "3")
    assert code == 1 and "m1_max" in err


def test_figure1_unwritable_path(capsys, tmp_path):
    code, _, err = run(capsys, "figure1", "2", "2", "--out", str(tmp_path / "missing" / "f.csv"))
    assert code == 1 and "out" in err


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--seed", "42", "--trials", "100", "--n-max", "8")
    assert code == 0
    assert "overall: PASS" in out


def test_verify_rejects_zero_trials(capsys):
    code, _, err = run(capsys, "verify", "--trials", "0")
    assert code == 1 and "trials" in err


def test_verify_detects_corrupted_propagator(capsys, monkeypatch):
    original = verify.propagate_general

    def corrupted(config, state, t):
        out = original(config, state, t)
        return SubspaceState(out.amplitudes * np.exp(0.01j))

    monkeypatch.setattr(verify, "propagate_general", corrupted)
    code, out, _ = run(capsys, "verify", "--trials", "5")
    assert code == 2
    assert "overall: FAIL" in out


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--trials", "3", "--format", "csv")
    rows = read_csv(out)
    assert code == 0 and rows[0] == ["battery", "checks", "max_deviation", "tolerance", "status"]
    assert all(r[4] == "PASS" for r in rows[1:])


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cavity_w", "figure1", "1", "2"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.count("\n") == 3


def test_usage_error_exit_code():
    proc = subprocess.run([sys.executable, "-m", "cavity_w", "nope"], capture_output=True, text=True)
    assert proc.returncode == 1
