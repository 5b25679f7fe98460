import csv
import io
import json
import subprocess
import sys

import pytest

from ecdouble.circuit import import_circuit
from ecdouble.cli import main
from ecdouble.gf2m import CurveParams, point, point_double

E4 = CurveParams.reference(4)
BASE = ["--m", "4", "--poly", "0x13", "--a", "1", "--b", "0x1"]


def run(capsys, *argv) -> tuple[int, str, str]:
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_build_balanced(tmp_path, capsys):
    path = tmp_path / "c.json"
    rc, out, _ = run(capsys, "build", "--scheme", "pd-balanced", *BASE, "-o", str(path))
    assert rc == 0
    assert "arch_width=17" in out
    c = import_circuit(path.read_text())
    assert c.arch_width == 17


def test_build_pa_needs_constant_point(capsys):
    rc, _, err = run(capsys, "build", "--scheme", "pa", *BASE)
    assert rc == 2 and "x2" in err


def test_build_pa_off_curve_point(capsys):
    rc, _, err = run(capsys, "build", "--scheme", "pa", *BASE, "--x2", "0x1", "--y2", "0x1")
    assert rc == 2 and "not on the curve" in err


def test_build_lowered(tmp_path, capsys):
    path = tmp_path / "c.json"
    rc, _, _ = run(capsys, "build", "--scheme", "pd-min", *BASE, "--lower", "-o", str(path))
    assert rc == 0
    c = import_circuit(path.read_text())
    assert all(g.n_controls <= 2 and not g.nctrls for g in c.gates)


def test_bad_poly_and_unknown_scheme(capsys):
    assert run(capsys, "build", "--m", "4", "--poly", "0x11")[0] == 2
    assert run(capsys, "build", "--scheme", "pd-max")[0] == 2
    assert run(capsys, "build", "--m", "4", "--poly", "17")[0] == 2


def test_simulate_q0_echoes(capsys):
    rc, out, _ = run(capsys, "simulate", *BASE, "--x1", "0x6", "--y1", "0x1", "--q", "0")
    assert rc == 0
    assert "x = 0x6" in out and "y = 0x1" in out


def test_simulate_q1_doubles(capsys):
    p3 = point_double(point(E4, 6, 1), E4)
    rc, out, _ = run(capsys, "simulate", *BASE, "--x1", "0x6", "--y1", "0x1", "--q", "1", "--format", "json")
    assert rc == 0
    regs = json.loads(out)["output"]
    assert (int(regs["x"], 16), int(regs["y"], 16)) == (p3.x.bits, p3.y.bits)
    assert regs["anc2"] == "0x0"


def test_simulate_trace_row6(capsys):
    p3 = point_double(point(E4, 6, 1), E4)
    rc, out, _ = run(capsys, "simulate", *BASE, "--x1", "0x6", "--y1", "0x1", "--q", "1", "--trace")
    assert rc == 0
    (row6,) = [ln for ln in out.splitlines() if ln.startswith("step  6")]
    assert f"y={p3.x.bits:#x}" in row6.split()


def test_simulate_bad_register(capsys):
    rc, _, err = run(capsys, "simulate", *BASE, "--reg", "zz=0x1")
    assert rc == 2
    rc, _, _ = run(capsys, "simulate", *BASE, "--x1", "0x1f")
    assert rc == 2


@pytest.mark.parametrize("scheme", ["pd-balanced", "pd-min", "pd-full-unc"])
def test_verify_m4(capsys, scheme):
    rc, out, err = run(capsys, "verify", "--scheme", scheme, *BASE)
    assert rc == 0 and "OK" in err
    assert json.loads(out)["mismatches"] == []


def test_verify_pa(capsys):
    rc, _, _ = run(capsys, "verify", "--scheme", "pa", *BASE, "--x2", "0xa", "--y2", "0x5")
    assert rc == 0


def test_verify_sampled_m8(capsys):
    rc, out, _ = run(capsys, "verify", "--m", "8", "--samples", "100")
    assert rc == 0 and json.loads(out)["tested"] == 200


def test_verify_corrupted_circuit(tmp_path, capsys):
    path = tmp_path / "c.json"
    run(capsys, "build", *BASE, "-o", str(path))
    doc = json.loads(path.read_text())
    doc["gates"][len(doc["gates"]) // 3] = {"kind": "x", "targets": [0]}
    path.write_text(json.dumps(doc))
    rc, out, err = run(capsys, "verify", *BASE, "--circuit", str(path))
    assert rc == 1 and "MISMATCH" in err
    assert json.loads(out)["mismatches"]


def test_verify_truncated_circuit_is_config_error(tmp_path, capsys):
    path = tmp_path / "c.json"
    run(capsys, "build", *BASE, "-o", str(path))
    doc = json.loads(path.read_text())
    del doc["gates"][-1]
    path.write_text(json.dumps(doc))
    rc, _, err = run(capsys, "verify", *BASE, "--circuit", str(path))
    assert rc == 2 and "error" in err


def test_verify_exhaustive_needs_small_m(capsys):
    rc, _, _ = run(capsys, "verify", "--m", "9")
    assert rc == 2


def test_resources_csv(capsys):
    rc, out, _ = run(capsys, "resources", "--ms", "4,8", "--schemes", "pd-balanced,pd-min,pd-full-unc")
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 6
    bal = [r for r in rows if r["scheme"] == "pd-balanced"]
    for r in bal:
        assert (r["census_DIV"], r["census_MUL"], r["census_SQR"]) == ("1", "3", "2")
    by = {(r["scheme"], r["m"]): int(r["total_gates"]) for r in rows}
    for m in ("4", "8"):
        assert by[("pd-min", m)] < by[("pd-balanced", m)]
    numeric = [k for k in rows[0] if k not in ("scheme", "m")]
    for s in ("pd-balanced", "pd-min", "pd-full-unc"):
        small, big = (next(r for r in rows if r["scheme"] == s and r["m"] == m) for m in ("4", "8"))
        assert all(int(big[k]) >= int(small[k]) for k in numeric)


def test_resources_deterministic(capsys):
    first = run(capsys, "resources", "--ms", "4", "--format", "json")
    second = run(capsys, "resources", "--ms", "4", "--format", "json")
    assert first == second and first[0] == 0


def test_build_output_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "build", "--scheme", "pd-full-unc", *BASE, "-o", str(a))
    run(capsys, "build", "--scheme", "pd-full-unc", *BASE, "-o", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_export_round_trip(tmp_path, capsys):
    path = tmp_path / "c.qasm"
    rc, _, _ = run(capsys, "export", *BASE, "--lower", "-o", str(path))
    assert rc == 0
    text = path.read_text()
    assert text.startswith("qubits ")
    from ecdouble.circuit import export_circuit

    assert export_circuit(import_circuit(text), "qasm_like") == text


def test_export_unlowered_fails(capsys):
    rc, _, err = run(capsys, "export", *BASE)
    assert rc == 2 and "lower" in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# doubling at m=4\nm = 4\npoly = 0x13\nscheme = pd-min\nx1 = 0x6\ny1 = 0x1\nq = 1\n")
    rc, out, _ = run(capsys, "simulate", "--config", str(cfg))
    p3 = point_double(point(E4, 6, 1), E4)
    assert rc == 0 and f"x = {p3.x.bits:#x}" in out
    rc, out, _ = run(capsys, "simulate", "--config", str(cfg), "--q", "0")
    assert "x = 0x6" in out
    cfg.write_text("bogus = 1\n")
    assert run(capsys, "build", "--config", str(cfg))[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ecdouble", "build", "--m", "2"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["width"] > 0
