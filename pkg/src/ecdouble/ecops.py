"""Point addition and point doubling circuits for binary curves.

Four builders:

* ``pa``          controlled addition of a classical constant point
* ``pd-balanced`` doubling that clears ``anc2`` and leaves ``anc1 = lambda + 1``
* ``pd-min``      doubling without any ancilla uncomputation
* ``pd-full-unc`` balanced doubling plus a q=0 uncompute of ``anc1``

Doubling circuits naturally land in a twisted layout (``x`` holds ``y3`` and
``y`` holds ``x3``); a final controlled swap realigns them unless disabled.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .circuit import Block, Circuit, CircuitError
from .gf2m import (
    AffinePoint,
    CurveParams,
    FieldElement,
    enumerate_points,
    lift_x,
    on_curve,
    point_add,
    point_double,
)
from .gfcircuits import (
    LABELS,
    OPERAND_REGS,
    SQR_INPLACE,
    SQR_OUT,
    emit_const_add,
    emit_cswap_reg,
    emit_div,
    emit_mul,
    emit_reg_add,
    emit_sqr_inplace,
    emit_sqr_out,
    neg,
    pos,
)
from .sim import pack, run_basis, run_batch, unpack


class Scheme(str, Enum):
    PA = "pa"
    PD_BALANCED = "pd-balanced"
    PD_MIN = "pd-min"
    PD_FULL_UNC = "pd-full-unc"

    @property
    def is_doubling(self) -> bool:
        return self is not Scheme.PA


PD_SCHEMES = (Scheme.PD_BALANCED, Scheme.PD_MIN, Scheme.PD_FULL_UNC)


@dataclass(frozen=True)
class PdLayout:
    include_final_swap: bool = True


def build_point_double(
    curve: CurveParams, scheme: Union[Scheme, str], layout: PdLayout = PdLayout()
) -> Circuit:
    """Controlled doubling on registers x, y, anc1, anc2, q (plus the division pool).

    Census tags are the state-change step numbers 1..15.
    """
    scheme = Scheme(scheme)
    if not scheme.is_doubling:
        raise ValueError(f"{scheme.value} is not a doubling scheme")
    f = curve.field
    n = f.m
    c = Circuit()
    x = c.alloc_register("x", n)
    y = c.alloc_register("y", n)
    anc1 = c.alloc_register("anc1", n)
    anc2 = c.alloc_register("anc2", n)
    (q,) = c.alloc_register("q", 1)
    on = [pos(q)]

    emit_div(c, f, x, y, anc1, tag="1")
    emit_mul(c, f, x, anc1, y, on, tag="2")
    emit_reg_add(c, x, anc1, tag="3")
    emit_sqr_out(c, f, anc1, y, on, tag="4")
    emit_reg_add(c, anc1, y, on, tag="5")
    emit_const_add(c, y, curve.a_elem, on, tag="6")
    emit_const_add(c, anc1, FieldElement(f, 1), tag="7")
    emit_mul(c, f, anc1, y, anc2, tag="8")
    emit_sqr_inplace(c, f, x, on, tag="9")
    emit_reg_add(c, anc2, x, on, tag="10")
    if scheme is not Scheme.PD_MIN:
        emit_mul(c, f, anc1, y, anc2, tag="11")
    if layout.include_final_swap:
        emit_cswap_reg(c, q, x, y, tag="12")
    if scheme is Scheme.PD_FULL_UNC:
        emit_const_add(c, anc1, FieldElement(f, 1), tag="13")
        emit_reg_add(c, x, anc1, [neg(q)], tag="14")
        emit_div(c, f, x, y, anc1, [neg(q)], tag="15")
    return c


def build_point_add(curve: CurveParams, p2: AffinePoint) -> Circuit:
    """Controlled addition of the constant point ``p2`` on registers x, y, anc, q.

    Gate order follows the standard binary-curve addition layout column by
    column; tags ``c1``..``c11`` name the columns. Correct for inputs with
    ``P1 != +-P2`` and ``P1 != -2 P2`` (the last makes ``x3 = x2`` and the
    ancilla clean-up divides by zero).
    """
    if p2.is_infinity or not on_curve(p2, curve):
        raise ValueError("constant point must be a finite curve point")
    f = curve.field
    n = f.m
    x2, y2 = p2.x, p2.y
    c = Circuit()
    x = c.alloc_register("x", n)
    y = c.alloc_register("y", n)
    anc = c.alloc_register("anc", n)
    (q,) = c.alloc_register("q", 1)
    on = [pos(q)]

    emit_const_add(c, x, x2, tag="c1")
    emit_const_add(c, y, y2, on, tag="c1")
    emit_div(c, f, x, y, anc, tag="c2")  # anc = lambda
    emit_mul(c, f, x, anc, y, tag="c3")  # y = 0
    emit_const_add(c, x, curve.a_elem + x2, on, tag="c4")
    emit_sqr_out(c, f, anc, y, tag="c4")
    emit_reg_add(c, y, x, on, tag="c5")
    emit_reg_add(c, anc, x, on, tag="c6")  # x = x3 + x2
    emit_sqr_out(c, f, anc, y, tag="c7")  # y = 0
    emit_mul(c, f, x, anc, y, tag="c8")  # y = lambda (x3 + x2)
    emit_div(c, f, x, y, anc, tag="c9")  # anc = 0
    emit_const_add(c, x, x2, tag="c10")
    emit_const_add(c, y, y2, on, tag="c10")  # y = x3 + y3
    emit_reg_add(c, x, y, on, tag="c11")
    return c


def build(curve: CurveParams, scheme: Union[Scheme, str], p2: Optional[AffinePoint] = None,
          include_final_swap: bool = True) -> Circuit:
    scheme = Scheme(scheme)
    if scheme is Scheme.PA:
        if p2 is None:
            raise ValueError("point addition needs the constant point (x2, y2)")
        return build_point_add(curve, p2)
    return build_point_double(curve, scheme, PdLayout(include_final_swap))


# ---------------------------------------------------------------------------
# census


@dataclass(frozen=True)
class Census:
    """Top-level blocks of a built circuit as ``(label, control signature)`` pairs."""

    entries: tuple[tuple[str, str], ...]

    def count(self, label: str, ctl: Optional[str] = None) -> int:
        labels = (SQR_INPLACE, SQR_OUT) if label == "SQR" else (label,)
        return sum(1 for lb, c in self.entries if lb in labels and (ctl is None or c == ctl))

    def count_negative(self, label: str) -> int:
        return sum(1 for lb, c in self.entries if lb == label and "-" in c)

    def count_multi_controlled(self, label: str) -> int:
        """Blocks fed by two or more control wires, counting operand registers as controls."""
        labels = (SQR_INPLACE, SQR_OUT) if label == "SQR" else (label,)
        return sum(
            1 for lb, c in self.entries if lb in labels and len(c) + OPERAND_REGS[lb] >= 2
        )

    def multiset(self) -> Counter:
        return Counter(self.entries)

    def as_dict(self) -> dict[str, int]:
        out = {lb: self.count(lb) for lb in LABELS}
        out["SQR"] = self.count("SQR")
        for lb in LABELS:
            out[f"{lb}_neg"] = self.count_negative(lb)
        out["SQR_multi"] = self.count_multi_controlled("SQR")
        return out


def census(c: Circuit) -> Census:
    if not c.census:
        raise CircuitError("circuit carries no census trace")
    return Census(tuple((b.label, b.ctl) for b in c.blocks() if b.depth == 0))


# ---------------------------------------------------------------------------
# expected outputs and verification


def expected_registers(
    curve: CurveParams,
    scheme: Union[Scheme, str],
    p1: AffinePoint,
    q: int,
    p2: Optional[AffinePoint] = None,
    include_final_swap: bool = True,
) -> dict[str, int]:
    """Architectural register contents after the circuit, from the classical group law."""
    scheme = Scheme(scheme)
    x1, y1 = p1.x, p1.y
    if scheme is Scheme.PA:
        if q:
            p3 = point_add(p1, p2, curve)
            return {"x": p3.x.bits, "y": p3.y.bits, "anc": 0, "q": 1}
        return {"x": x1.bits, "y": y1.bits, "anc": 0, "q": 0}
    one = FieldElement(curve.field, 1)
    lam = x1 + y1 / x1
    out = {"q": q}
    if q:
        p3 = point_double(p1, curve)
        if include_final_swap:
            out["x"], out["y"] = p3.x.bits, p3.y.bits
        else:
            out["x"], out["y"] = p3.y.bits, p3.x.bits
        mixed = p3.x
    else:
        out["x"], out["y"] = x1.bits, y1.bits
        mixed = y1
    if scheme is Scheme.PD_FULL_UNC:
        out["anc1"] = lam.bits if q else 0
    else:
        out["anc1"] = (lam + one).bits
    out["anc2"] = ((lam + one) * mixed).bits if scheme is Scheme.PD_MIN else 0
    return out


def is_valid_input(scheme: Union[Scheme, str], p1: AffinePoint, curve: CurveParams,
                   p2: Optional[AffinePoint] = None) -> bool:
    """Whether ``p1`` lies inside the circuit's contract (generic case only)."""
    scheme = Scheme(scheme)
    if p1.is_infinity or not p1.x.bits:
        return False
    if scheme is Scheme.PA:
        excluded = {p2, -p2, -point_double(p2, curve)}
        return p1 not in excluded
    return True


@dataclass
class VerifyReport:
    scheme: str
    m: int
    tested: int = 0
    skipped: int = 0
    mismatches: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "m": self.m,
            "tested": self.tested,
            "skipped": self.skipped,
            "mismatches": self.mismatches,
        }

    def merge(self, other: "VerifyReport") -> "VerifyReport":
        return VerifyReport(
            self.scheme,
            self.m,
            self.tested + other.tested,
            self.skipped + other.skipped,
            self.mismatches + other.mismatches,
        )


def sample_points(curve: CurveParams, k: int, seed: int = 0) -> list[AffinePoint]:
    """``k`` random finite points with x != 0 (with repetition), deterministic in ``seed``."""
    rng = random.Random(seed)
    f = curve.field
    out: list[AffinePoint] = []
    while len(out) < k:
        xv = rng.randrange(1, f.order)
        ys = lift_x(FieldElement(f, xv), curve)
        if ys:
            out.append(AffinePoint(FieldElement(f, xv), rng.choice(ys)))
    return out


def verify(
    curve: CurveParams,
    scheme: Union[Scheme, str],
    mode: Union[str, int] = "exhaustive",
    p2: Optional[AffinePoint] = None,
    circuit: Optional[Circuit] = None,
    include_final_swap: bool = True,
    seed: int = 0,
) -> VerifyReport:
    """Simulate every (or ``mode`` sampled) valid input in both q branches against the oracle.

    Besides x and y, the ancilla contracts of each scheme are compared, and
    every pool register must come back zero.
    """
    scheme = Scheme(scheme)
    if circuit is None:
        circuit = build(curve, scheme, p2, include_final_swap)
    if scheme is Scheme.PA and p2 is None:
        raise ValueError("point addition needs the constant point (x2, y2)")
    report = VerifyReport(scheme.value, curve.field.m)
    if mode == "exhaustive":
        if curve.field.m > 8:
            raise ValueError("exhaustive verification limited to m <= 8")
        candidates = [p for p in enumerate_points(curve) if not p.is_infinity]
    else:
        candidates = sample_points(curve, int(mode), seed)
    inputs: list[tuple[AffinePoint, int]] = []
    for p1 in candidates:
        if not is_valid_input(scheme, p1, curve, p2):
            report.skipped += 1
            continue
        inputs.extend((p1, q) for q in (0, 1))
    states = [pack(circuit, {"x": p.x.bits, "y": p.y.bits, "q": q}) for p, q in inputs]
    outs = run_batch(circuit, states)
    for (p1, q), s_out in zip(inputs, outs):
        want = {name: 0 for name in circuit.registers}
        want.update(expected_registers(curve, scheme, p1, q, p2, include_final_swap))
        got = unpack(circuit, s_out)
        report.tested += 1
        if got != want:
            report.mismatches.append(
                {
                    "x1": hex(p1.x.bits),
                    "y1": hex(p1.y.bits),
                    "q": q,
                    "expected": {k: hex(v) for k, v in want.items()},
                    "got": {k: hex(v) for k, v in got.items()},
                }
            )
    return report


def verify_exhaustive(curve: CurveParams, scheme: Union[Scheme, str], mode: Union[str, int] = "exhaustive",
                      **kwargs) -> VerifyReport:
    return verify(curve, scheme, mode, **kwargs)


def trace(c: Circuit, state: int) -> list[tuple[Block, dict[str, int]]]:
    """Register snapshot after each top-level census block."""
    snaps = []
    s = state
    at = 0
    for b in c.blocks():
        if b.depth:
            continue
        s = run_basis(c, s, at, b.end)
        at = b.end
        snaps.append((b, unpack(c, s)))
    return snaps


def default_constant_point(curve: CurveParams) -> AffinePoint:
    """First finite point with nonzero x, scanning x upwards."""
    f = curve.field
    for xv in range(1, f.order):
        ys = lift_x(FieldElement(f, xv), curve)
        if ys:
            return AffinePoint(FieldElement(f, xv), ys[0])
    raise ValueError("curve has no finite point with x != 0")  # pragma: no cover


__all__ = [
    "Census",
    "PD_SCHEMES",
    "PdLayout",
    "Scheme",
    "VerifyReport",
    "build",
    "build_point_add",
    "build_point_double",
    "census",
    "default_constant_point",
    "expected_registers",
    "is_valid_input",
    "sample_points",
    "trace",
    "verify",
    "verify_exhaustive",
]
