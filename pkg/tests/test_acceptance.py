"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed at the end of the session (see conftest.py), or run this file as a
script.
"""

import functools
import math
import random
import time

from ecdouble.circuit import Circuit, inverse, lower_mcx
from ecdouble.ecops import PD_SCHEMES, Scheme, build, census, is_valid_input, sample_points, verify
from ecdouble.gf2m import CurveParams, FieldParams, enumerate_points, point, point_double
from ecdouble.gfcircuits import DIV_POOL, emit_div, emit_mul, emit_sqr_inplace
from ecdouble.sim import SparseState, check_bijectivity, pack, run_batch, run_sparse, unpack
from helpers import trace_mismatches
from oracles import brute_div, brute_sqr, chord_add, curve_points, peasant_mul, step_rows

RESULTS: dict[int, str] = {}

E4 = CurveParams.reference(4)
E8 = CurveParams.reference(8)
POINTS4 = [(x, y) for x, y in curve_points(1, 1, 0x13, 4) if x]


def criterion(n: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            try:
                detail = fn()
            except Exception as exc:
                RESULTS[n] = f"criterion {n:>2} FAIL  {title}: {type(exc).__name__}: {exc}"
                raise
            RESULTS[n] = f"criterion {n:>2} PASS  {title}" + (f" ({detail})" if detail else "")

        return run

    return wrap


def _run_points(c, pts, q):
    states = [pack(c, {"x": x, "y": y, "q": q}) for x, y in pts]
    return [unpack(c, s) for s in run_batch(c, states)]


@criterion(1, "exhaustive oracle equivalence at m=4")
def test_c1_exhaustive_m4():
    t0 = time.perf_counter()
    tested = 0
    for scheme in PD_SCHEMES:
        c = build(E4, scheme)
        for q in (0, 1):
            for (x, y), out in zip(POINTS4, _run_points(c, POINTS4, q)):
                row = step_rows(x, y, q, 1, 0x13, 4)[12]
                assert (out["x"], out["y"]) == (row["x"], row["y"]), (scheme, x, y, q)
                tested += 1
        rep = verify(E4, scheme, circuit=c)
        assert rep.ok and rep.tested == 2 * len(POINTS4)
    for x2, y2 in POINTS4 + [(x, y) for x, y in curve_points(1, 1, 0x13, 4) if not x]:
        p2 = point(E4, x2, y2)
        c = build(E4, Scheme.PA, p2)
        valid = [(x, y) for x, y in POINTS4 if is_valid_input(Scheme.PA, point(E4, x, y), E4, p2)]
        for q in (0, 1):
            for (x, y), out in zip(valid, _run_points(c, valid, q)):
                want = chord_add(x, y, x2, y2, 1, 0x13, 4) if q else (x, y)
                assert (out["x"], out["y"], out["anc"]) == (*want, 0), (x2, y2, x, y, q)
                tested += 1
        assert verify(E4, Scheme.PA, p2=p2, circuit=c).ok
    elapsed = time.perf_counter() - t0
    assert elapsed < 60
    return f"{tested} branch runs, {elapsed:.2f}s"


@criterion(2, "step-by-step state trace at m=8, both branches")
def test_c2_trace_m8():
    valid = [p for p in enumerate_points(E8) if not p.is_infinity and p.x.bits]
    pts = random.Random(2024).sample(valid, 100)
    for scheme in PD_SCHEMES:
        c = build(E8, scheme)
        for p in pts:
            for q in (0, 1):
                bad = trace_mismatches(c, scheme.value, p.x.bits, p.y.bits, q, 1, 0x11B, 8)
                assert bad == [], (scheme, p, q, bad[:2])
    return f"{len(set(pts))} distinct points x 2 branches x 3 schemes"


@criterion(3, "block census")
def test_c3_census():
    bal = census(build(E4, Scheme.PD_BALANCED))
    assert bal.count("DIV") == 1 and bal.count("MUL") == 3 and bal.count("CSWAP_REG") == 1
    assert bal.count("SQR") == 2 and bal.count_multi_controlled("SQR") == 1
    mn = census(build(E4, Scheme.PD_MIN))
    assert mn.count("MUL") == bal.count("MUL") - 1
    assert bal.multiset() - mn.multiset() == {("MUL", ""): 1} and not mn.multiset() - bal.multiset()
    full = census(build(E4, Scheme.PD_FULL_UNC))
    extra = full.multiset() - bal.multiset()
    assert extra == {("DIV", "-"): 1, ("REG_ADD", "-"): 1, ("CONST_ADD", ""): 1}
    assert not bal.multiset() - full.multiset()
    return "balanced " + ", ".join(f"{k}={v}" for k, v in bal.as_dict().items() if v)


@criterion(4, "ancilla contracts over the full m=4 input set")
def test_c4_ancillas():
    for scheme in PD_SCHEMES:
        c = build(E4, scheme)
        for q in (0, 1):
            for (x, y), out in zip(POINTS4, _run_points(c, POINTS4, q)):
                lam = brute_div(y, x, 0x13, 4) ^ x
                assert out[DIV_POOL] == 0
                if scheme is not Scheme.PD_MIN:
                    assert out["anc2"] == 0
                if scheme is Scheme.PD_FULL_UNC and q == 0:
                    assert out["anc1"] == 0
                if scheme is not Scheme.PD_FULL_UNC:
                    assert out["anc1"] == lam ^ 1


@criterion(5, "architectural width 4n+1 (doubling) and 3n+1 (addition)")
def test_c5_width():
    seen = []
    for m in (4, 8, 16):
        curve = CurveParams.reference(m)
        for s in PD_SCHEMES:
            assert build(curve, s).arch_width == 4 * m + 1
        p2 = point(curve, *next((x, y) for x in range(1, 1 << m) for y in _lift(curve, x)))
        assert build(curve, Scheme.PA, p2).arch_width == 3 * m + 1
        seen.append(f"m={m}:{4 * m + 1}/{3 * m + 1}")
    return " ".join(seen)


def _lift(curve, x):
    from ecdouble.gf2m import lift_x

    return [y.bits for y in lift_x(curve.field(x), curve)]


@criterion(6, "reversibility")
def test_c6_reversibility():
    p2 = sample_points(E8, 1, seed=9)[0]
    for scheme in list(PD_SCHEMES) + [Scheme.PA]:
        c = build(E8, scheme, p2 if scheme is Scheme.PA else None)
        rng = random.Random(scheme.value)
        states = [rng.getrandbits(c.width) for _ in range(1000)]
        assert run_batch(inverse(c), run_batch(c, states)) == states
    toy = build(CurveParams.reference(2), Scheme.PD_BALANCED)
    assert check_bijectivity(toy, 100, exhaustive=True)
    return f"m=2 toy width {toy.width}, all {1 << toy.width} images distinct"


@criterion(7, "lowered circuits match high-level circuits at m=4")
def test_c7_lowering():
    rng = random.Random(7)
    p2 = point(E4, 0xA, 0x5)
    for scheme in list(PD_SCHEMES) + [Scheme.PA]:
        c = build(E4, scheme, p2 if scheme is Scheme.PA else None)
        low = lower_mcx(c)
        assert all(len(g.ctrls) <= 2 and not g.nctrls and g.kind == "x" for g in low.gates)
        valid = [(x, y) for x, y in POINTS4 if is_valid_input(scheme, point(E4, x, y), E4, p2)]
        inputs = [(rng.choice(valid), rng.randrange(2)) for _ in range(200)]
        hi = run_batch(c, [pack(c, {"x": x, "y": y, "q": q}) for (x, y), q in inputs])
        lo = run_batch(low, [pack(low, {"x": x, "y": y, "q": q}) for (x, y), q in inputs])
        for h, lw in zip(hi, lo):
            got = unpack(low, lw)
            assert all(v == 0 for k, v in got.items() if k.startswith("pool"))
            assert lw == h
        assert verify(E4, scheme, p2=p2, circuit=low).ok


@criterion(8, "twisted output without the final swap")
def test_c8_twisted():
    for scheme in PD_SCHEMES:
        c = build(E4, scheme, include_final_swap=False)
        for (x, y), out in zip(POINTS4, _run_points(c, POINTS4, 1)):
            row = step_rows(x, y, 1, 1, 0x13, 4)[12]
            assert (out["x"], out["y"]) == (row["y"], row["x"])


@criterion(9, "arithmetic blocks against the field oracle")
def test_c9_blocks():
    f = FieldParams(4, 0x13)
    c = Circuit()
    a, b, z = (c.alloc_register(n, 4) for n in "abz")
    emit_mul(c, f, a, b, z)
    rows = [(u, v) for u in range(16) for v in range(16)]
    outs = run_batch(c, [pack(c, {"a": u, "b": v}) for u, v in rows])
    assert [unpack(c, s)["z"] for s in outs] == [peasant_mul(u, v, 0x13, 4) for u, v in rows]
    d = Circuit()
    a, b, z = (d.alloc_register(n, 4) for n in "abz")
    emit_div(d, f, a, b, z)
    rows = [(u, v) for u in range(1, 16) for v in range(16)]
    outs = [unpack(d, s) for s in run_batch(d, [pack(d, {"a": u, "b": v}) for u, v in rows])]
    assert [o["z"] for o in outs] == [brute_div(v, u, 0x13, 4) for u, v in rows]
    assert all(o[DIV_POOL] == 0 for o in outs)
    for m in (4, 8, 16):
        fm = FieldParams.default(m)
        s = Circuit()
        reg = s.alloc_register("a", m)
        emit_sqr_inplace(s, fm, reg)
        got = [unpack(s, v)["a"] for v in run_batch(s, [1 << i for i in range(m)])]
        assert got == [brute_sqr(1 << i, fm.reduction_poly, m) for i in range(m)]
    return "MUL 256 pairs, DIV 240 pairs, SQR_INPLACE m=4,8,16"


@criterion(10, "superposed control gives two equal-weight branches")
def test_c10_superposition():
    c = build(E4, Scheme.PD_BALANCED)
    x, y = 0x6, 0x1
    qbit = c.registers["q"][0]
    out = run_sparse(c, SparseState.basis(pack(c, {"x": x, "y": y})), [qbit])
    assert len(out) == 2
    err = abs(out.norm() - 1.0)
    assert err < 1e-12
    p3 = point_double(point(E4, x, y), E4)
    seen = {}
    for s, amp in out.items():
        r = unpack(c, s)
        seen[r["q"]] = (r["x"], r["y"])
        assert abs(amp - 1 / math.sqrt(2)) < 1e-12
    assert seen == {0: (x, y), 1: (p3.x.bits, p3.y.bits)}
    return f"norm error {err:.1e}"


def test_point_count_sanity():
    # guards the test inputs themselves: brute-force enumeration agrees with the package
    assert len(curve_points(1, 1, 0x13, 4)) + 1 == len(enumerate_points(E4))


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except Exception:
                failed += 1
    for n in sorted(RESULTS):
        print(RESULTS[n])
    sys.exit(1 if failed else 0)
