"""Reversible GF(2^m) arithmetic blocks.

Every emitter appends gates to a circuit inside one census block. ``ctl`` is
a sequence of ``(qubit, positive)`` pairs; each emitted gate gains those
controls. Accumulating blocks XOR their result into the target register, so
applying one twice restores the target.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence, Union

from .circuit import CensusMark, Circuit, CircuitError
from .gf2m import FieldElement, FieldParams, Gf2Matrix, mul_table_bits, sqr_matrix

CONST_ADD = "CONST_ADD"
REG_ADD = "REG_ADD"
SQR_INPLACE = "SQR_INPLACE"
SQR_OUT = "SQR_OUT"
MUL = "MUL"
DIV = "DIV"
CSWAP_REG = "CSWAP_REG"
LABELS = (CONST_ADD, REG_ADD, SQR_INPLACE, SQR_OUT, MUL, DIV, CSWAP_REG)

# number of operand registers feeding each block; used for "multi-controlled" accounting
OPERAND_REGS = {CONST_ADD: 0, REG_ADD: 1, SQR_INPLACE: 0, SQR_OUT: 1, MUL: 2, DIV: 2, CSWAP_REG: 0}

DIV_POOL = "pool_div"

Controls = Sequence[tuple[int, bool]]
Register = Sequence[int]


def pos(q: int) -> tuple[int, bool]:
    return (q, True)


def neg(q: int) -> tuple[int, bool]:
    return (q, False)


def _split(ctl: Controls) -> tuple[tuple[int, ...], tuple[int, ...], str]:
    qs = [q for q, _ in ctl]
    if len(set(qs)) != len(qs):
        raise CircuitError(f"duplicate control qubits in {ctl}")
    p = tuple(q for q, positive in ctl if positive)
    n = tuple(q for q, positive in ctl if not positive)
    sig = "".join("+" if positive else "-" for _, positive in ctl)
    return p, n, sig


def _disjoint(ctl: Controls, *regs: Register) -> None:
    seen: set[int] = set()
    for r in regs:
        if seen & set(r) or len(set(r)) != len(r):
            raise CircuitError("operand registers overlap")
        seen |= set(r)
    if seen & {q for q, _ in ctl}:
        raise CircuitError("control qubit overlaps an operand register")


def _width(f: FieldParams, *regs: Register) -> None:
    for r in regs:
        if len(r) != f.m:
            raise CircuitError(f"register of {len(r)} qubits, field needs {f.m}")


def emit_const_add(
    c: Circuit, reg: Register, k: Union[FieldElement, int], ctl: Controls = (), tag: str = ""
) -> None:
    """reg ^= k (X on every set bit of k)."""
    if isinstance(k, FieldElement):
        _width(k.field, reg)
        k = k.bits
    elif k < 0 or k >> len(reg):
        raise CircuitError(f"constant {k:#x} does not fit a {len(reg)}-qubit register")
    _disjoint(ctl, reg)
    p, n, sig = _split(ctl)
    with c.block(CONST_ADD, sig, tag):
        for i, q in enumerate(reg):
            if (k >> i) & 1:
                c.x(q, p, n)


def emit_reg_add(c: Circuit, src: Register, dst: Register, ctl: Controls = (), tag: str = "") -> None:
    """dst ^= src, one CNOT per bit."""
    if len(src) != len(dst):
        raise CircuitError("register widths differ")
    _disjoint(ctl, src, dst)
    p, n, sig = _split(ctl)
    with c.block(REG_ADD, sig, tag):
        for s, d in zip(src, dst):
            c.x(d, (s,) + p, n)


@lru_cache(maxsize=None)
def sqr_network(f: FieldParams) -> tuple[tuple[tuple[str, int, int], ...], Gf2Matrix]:
    """In-place squaring as ("cx", ctrl_bit, tgt_bit) / ("swap", i, j) steps.

    Built from the PLU factorization of the squaring matrix: U then L as
    CNOT sweeps, then the row permutation as explicit swaps.
    """
    sq = sqr_matrix(f)
    perm, L, U = sq.plu()
    m = f.m
    steps: list[tuple[str, int, int]] = []
    for i in range(m):
        for j in range(i + 1, m):
            if U[i, j]:
                steps.append(("cx", j, i))
    for i in reversed(range(m)):
        for j in range(i):
            if L[i, j]:
                steps.append(("cx", j, i))
    arr = list(range(m))  # arr[pos] = index of the value currently on wire pos
    for i in range(m):
        jpos = arr.index(perm[i])
        if jpos != i:
            steps.append(("swap", i, jpos))
            arr[i], arr[jpos] = arr[jpos], arr[i]
    return tuple(steps), sq


def emit_sqr_inplace(c: Circuit, f: FieldParams, reg: Register, ctl: Controls = (), tag: str = "") -> None:
    """reg <- reg^2 in place."""
    _width(f, reg)
    _disjoint(ctl, reg)
    p, n, sig = _split(ctl)
    steps, _ = sqr_network(f)
    with c.block(SQR_INPLACE, sig, tag):
        for kind, a, b in steps:
            if kind == "cx":
                c.x(reg[b], (reg[a],) + p, n)
            else:
                c.swap(reg[a], reg[b], p, n)


def emit_sqr_out(
    c: Circuit, f: FieldParams, src: Register, dst: Register, ctl: Controls = (), tag: str = ""
) -> None:
    """dst ^= src^2."""
    _width(f, src, dst)
    _disjoint(ctl, src, dst)
    p, n, sig = _split(ctl)
    sq = sqr_matrix(f)
    with c.block(SQR_OUT, sig, tag):
        for i in range(f.m):
            for j in range(f.m):
                if sq[i, j]:
                    c.x(dst[i], (src[j],) + p, n)


def emit_mul(
    c: Circuit,
    f: FieldParams,
    xreg: Register,
    yreg: Register,
    zreg: Register,
    ctl: Controls = (),
    tag: str = "",
) -> None:
    """zreg ^= xreg * yreg, schoolbook with the reduction folded in.

    One Toffoli (x_i, y_j -> z_k) per set bit k of t^(i+j) mod p.
    """
    _width(f, xreg, yreg, zreg)
    _disjoint(ctl, xreg, yreg, zreg)
    p, n, sig = _split(ctl)
    table = mul_table_bits(f)
    with c.block(MUL, sig, tag):
        for i in range(f.m):
            for j in range(f.m):
                r = table[i][j]
                for k in range(f.m):
                    if (r >> k) & 1:
                        c.x(zreg[k], (xreg[i], yreg[j]) + p, n)


def div_pool_size(f: FieldParams) -> int:
    return (f.m - 1) * f.m


def emit_div(
    c: Circuit,
    f: FieldParams,
    xreg: Register,
    yreg: Register,
    zreg: Register,
    ctl: Controls = (),
    tag: str = "",
) -> None:
    """zreg ^= yreg / xreg via x^(2^m - 2).

    Uses the chain b_1 = x, b_{k+1} = b_k^2 * x, so b_{m-1}^2 = x^(2^m - 2).
    Each b_k lives in its own slice of the shared ``pool_div`` register. Only
    the final multiplication into ``zreg`` carries ``ctl``; the chain is then
    run backwards, which clears the pool whatever the controls were. Inputs
    with x = 0 are outside the contract (they produce z ^= 0).
    """
    _width(f, xreg, yreg, zreg)
    _disjoint(ctl, xreg, yreg, zreg)
    _, _, sig = _split(ctl)
    m = f.m
    pool = c.grow_register(DIV_POOL, div_pool_size(f))
    chain = [pool[k * m : (k + 1) * m] for k in range(m - 1)]
    if set(pool) & (set(xreg) | set(yreg) | set(zreg) | {q for q, _ in ctl}):
        raise CircuitError("division operands overlap the division pool")
    with c.block(DIV, sig, tag):
        g0, m0 = len(c.gates), len(c.census)
        emit_reg_add(c, xreg, chain[0])
        for k in range(m - 2):
            emit_sqr_inplace(c, f, chain[k])
            emit_mul(c, f, chain[k], xreg, chain[k + 1])
        emit_sqr_inplace(c, f, chain[-1])
        g1, m1 = len(c.gates), len(c.census)
        emit_mul(c, f, chain[-1], yreg, zreg, ctl)
        # mirror only the chain, not the payload multiplication
        body = c.gates[g0:g1]
        marks = c.census[m0:m1]
        end = len(c.gates)
        c.extend(reversed(body))
        flip = {"open": "close", "close": "open"}
        for mk in reversed(marks):
            c.census.append(CensusMark(flip[mk.kind], mk.label, end + (g1 - mk.pos), mk.ctl, mk.tag))


def emit_cswap_reg(
    c: Circuit, ctl: int, areg: Register, breg: Register, positive: bool = True, tag: str = ""
) -> None:
    """Swap two registers when ``ctl`` is set (one Fredkin per bit)."""
    if len(areg) != len(breg):
        raise CircuitError("register widths differ")
    _disjoint([(ctl, positive)], areg, breg)
    p, n, sig = _split([(ctl, positive)])
    with c.block(CSWAP_REG, sig, tag):
        for a, b in zip(areg, breg):
            c.swap(a, b, p, n)
