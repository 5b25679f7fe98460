"""Reversible-gate IR: X-family gates and swaps over named registers.

A gate is an X (or SWAP) with any number of positive and negative controls.
``X`` with one control is a CNOT, two is a Toffoli, three or more an MCX.
Builders also record a *census*: balanced open/close marks around each
high-level arithmetic block, so subroutine counts can be read back without
pattern-matching gates.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Iterator, Sequence

POOL_PREFIX = "pool"
MCX_POOL = "pool_mcx"


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    ctrls: tuple[int, ...] = ()
    nctrls: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "ctrls", tuple(self.ctrls))
        object.__setattr__(self, "nctrls", tuple(self.nctrls))
        if self.kind not in ("x", "swap"):
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        want = 1 if self.kind == "x" else 2
        if len(self.targets) != want:
            raise CircuitError(f"{self.kind} gate needs {want} target(s), got {self.targets}")
        qs = self.qubits
        if any(not isinstance(q, int) or q < 0 for q in qs):
            raise CircuitError(f"invalid qubit index in {self}")
        if len(set(qs)) != len(qs):
            raise CircuitError(f"gate references a qubit twice: {self}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.ctrls + self.nctrls

    @property
    def n_controls(self) -> int:
        return len(self.ctrls) + len(self.nctrls)

    def with_control(self, q: int, positive: bool = True) -> "Gate":
        if positive:
            return replace(self, ctrls=self.ctrls + (q,))
        return replace(self, nctrls=self.nctrls + (q,))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "targets": list(self.targets),
            "ctrls": list(self.ctrls),
            "nctrls": list(self.nctrls),
        }


def X(t: int, ctrls: Sequence[int] = (), nctrls: Sequence[int] = ()) -> Gate:
    return Gate("x", (t,), tuple(ctrls), tuple(nctrls))


def SWAP(a: int, b: int, ctrls: Sequence[int] = (), nctrls: Sequence[int] = ()) -> Gate:
    return Gate("swap", (a, b), tuple(ctrls), tuple(nctrls))


@dataclass(frozen=True)
class CensusMark:
    """One end of a census block; ``pos`` is the gate index boundary."""

    kind: str  # "open" | "close"
    label: str
    pos: int
    ctl: str = ""  # one '+' or '-' per control qubit of the block
    tag: str = ""

    def __str__(self) -> str:
        return f"{self.kind} {self.label} ctl={self.ctl or '.'} tag={self.tag or '.'} at={self.pos}"

    @classmethod
    def parse(cls, text: str) -> "CensusMark":
        try:
            kind, label, ctl, tag, at = text.split()
            if kind not in ("open", "close"):
                raise ValueError(kind)
            ctl = ctl.removeprefix("ctl=")
            tag = tag.removeprefix("tag=")
            pos = int(at.removeprefix("at="))
        except ValueError as exc:
            raise CircuitError(f"malformed census entry {text!r}") from exc
        return cls(kind, label, pos, "" if ctl == "." else ctl, "" if tag == "." else tag)


@dataclass(frozen=True)
class Block:
    label: str
    ctl: str
    tag: str
    start: int
    end: int
    depth: int


class Circuit:
    def __init__(self):
        self.width = 0
        self.registers: dict[str, tuple[int, ...]] = {}
        self.gates: list[Gate] = []
        self.census: list[CensusMark] = []
        self._ops = None

    # -- construction -----------------------------------------------------

    def alloc_register(self, name: str, n: int) -> tuple[int, ...]:
        if name in self.registers:
            raise CircuitError(f"register {name!r} already allocated")
        if n < 0:
            raise CircuitError("register size must be non-negative")
        reg = tuple(range(self.width, self.width + n))
        self.registers[name] = reg
        self.width += n
        self._ops = None
        return reg

    def grow_register(self, name: str, n: int) -> tuple[int, ...]:
        """Allocate ``name`` or extend it to at least ``n`` qubits (pool registers)."""
        if name not in self.registers:
            return self.alloc_register(name, n)
        reg = self.registers[name]
        if len(reg) < n:
            extra = tuple(range(self.width, self.width + n - len(reg)))
            self.width += len(extra)
            reg = reg + extra
            self.registers[name] = reg
            self._ops = None
        return reg

    def append(self, g: Gate) -> "Circuit":
        if any(q >= self.width for q in g.qubits):
            raise CircuitError(f"gate {g} out of range for width {self.width}")
        self.gates.append(g)
        self._ops = None
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def x(self, t: int, ctrls: Sequence[int] = (), nctrls: Sequence[int] = ()) -> "Circuit":
        return self.append(X(t, ctrls, nctrls))

    def swap(self, a: int, b: int, ctrls: Sequence[int] = (), nctrls: Sequence[int] = ()):
        return self.append(SWAP(a, b, ctrls, nctrls))

    @contextmanager
    def block(self, label: str, ctl: str = "", tag: str = "") -> Iterator[None]:
        self.census.append(CensusMark("open", label, len(self.gates), ctl, tag))
        yield
        self.census.append(CensusMark("close", label, len(self.gates), ctl, tag))

    # -- queries ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.gates)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.width == other.width
            and self.registers == other.registers
            and self.gates == other.gates
            and self.census == other.census
        )

    def __repr__(self) -> str:
        regs = ", ".join(f"{k}:{len(v)}" for k, v in self.registers.items())
        return f"Circuit(width={self.width}, gates={len(self.gates)}, registers=[{regs}])"

    @property
    def arch_width(self) -> int:
        pool = sum(len(v) for k, v in self.registers.items() if k.startswith(POOL_PREFIX))
        return self.width - pool

    def copy(self) -> "Circuit":
        c = Circuit()
        c.width = self.width
        c.registers = dict(self.registers)
        c.gates = list(self.gates)
        c.census = list(self.census)
        return c

    def blocks(self) -> list[Block]:
        """Census blocks in open order, with nesting depth (0 = top level)."""
        out: list[Block | None] = []
        stack: list[tuple[int, CensusMark]] = []
        for mark in self.census:
            if mark.kind == "open":
                stack.append((len(out), mark))
                out.append(None)
                continue
            if not stack or stack[-1][1].label != mark.label:
                raise CircuitError("census marks are not balanced")
            slot, op = stack.pop()
            out[slot] = Block(op.label, op.ctl, op.tag, op.pos, mark.pos, len(stack))
        if stack:
            raise CircuitError("census marks are not balanced")
        return out

    def validate(self) -> None:
        seen: set[int] = set()
        for name, reg in self.registers.items():
            if seen & set(reg):
                raise CircuitError(f"register {name!r} overlaps another register")
            seen |= set(reg)
        if seen != set(range(self.width)):
            raise CircuitError("registers do not cover the circuit width")
        for g in self.gates:
            if any(q >= self.width for q in g.qubits):
                raise CircuitError(f"gate {g} out of range for width {self.width}")
        for mark in self.census:
            if not 0 <= mark.pos <= len(self.gates):
                raise CircuitError(f"census mark {mark} outside the gate list")
        self.blocks()


def new_circuit() -> Circuit:
    return Circuit()


def alloc_register(c: Circuit, name: str, n: int) -> tuple[int, ...]:
    return c.alloc_register(name, n)


def append_gate(c: Circuit, g: Gate) -> Circuit:
    return c.append(g)


# ---------------------------------------------------------------------------
# transforms


def inverse(c: Circuit) -> Circuit:
    """Reverse the gate order. Every gate in the IR is its own inverse."""
    out = c.copy()
    n = len(c.gates)
    out.gates = list(reversed(c.gates))
    flip = {"open": "close", "close": "open"}
    out.census = [replace(m, kind=flip[m.kind], pos=n - m.pos) for m in reversed(c.census)]
    return out


def elevate(c: Circuit, ctl: int, polarity: str = "positive") -> Circuit:
    """Add ``ctl`` as an extra control to every gate."""
    if polarity not in ("positive", "negative"):
        raise CircuitError(f"polarity must be 'positive' or 'negative', got {polarity!r}")
    if not 0 <= ctl < c.width:
        raise CircuitError(f"control qubit {ctl} outside width {c.width}")
    positive = polarity == "positive"
    for g in c.gates:
        if ctl in g.qubits:
            raise CircuitError(f"control qubit {ctl} already used by {g}")
    out = c.copy()
    out.gates = [g.with_control(ctl, positive) for g in c.gates]
    sign = "+" if positive else "-"
    out.census = [replace(m, ctl=m.ctl + sign) for m in c.census]
    return out


def _and_chain(ctrls: list[int], pool: tuple[int, ...]) -> list[Gate]:
    # pool[i] <- ctrls[0] & ... & ctrls[i+1]
    gates = [X(pool[0], (ctrls[0], ctrls[1]))]
    for i in range(2, len(ctrls)):
        gates.append(X(pool[i - 1], (pool[i - 2], ctrls[i])))
    return gates


def _lower_x(target: int, ctrls: list[int], pool: tuple[int, ...]) -> list[Gate]:
    k = len(ctrls)
    if k <= 2:
        return [X(target, ctrls)]
    chain = _and_chain(ctrls[:-1], pool)
    return chain + [X(target, (pool[k - 3], ctrls[-1]))] + chain[::-1]


def _lower_gate(g: Gate, pool: tuple[int, ...]) -> list[Gate]:
    flips = [X(q) for q in g.nctrls]
    ctrls = list(g.ctrls) + list(g.nctrls)
    if g.kind == "x":
        core = _lower_x(g.targets[0], ctrls, pool)
    else:
        a, b = g.targets
        core = [X(a, (b,))] + _lower_x(b, ctrls + [a], pool) + [X(a, (b,))]
    return flips + core + flips


def _pool_need(g: Gate) -> int:
    k = g.n_controls + (1 if g.kind == "swap" else 0)
    if g.kind == "swap" and g.n_controls == 0:
        return 0
    return max(0, k - 2)


def lower_mcx(c: Circuit) -> Circuit:
    """Rewrite into X gates with at most two positive controls.

    Negative controls are conjugated with X. A k-control X uses a clean
    AND-chain on a shared ``pool_mcx`` register: 2(k-2)+1 Toffolis.
    Controlled swaps become CNOT / MCX / CNOT before the same lowering.
    """
    need = max((_pool_need(g) for g in c.gates), default=0)
    out = c.copy()
    out.gates = []
    pool = out.grow_register(MCX_POOL, need) if need else ()
    new_pos = [0] * (len(c.gates) + 1)
    for i, g in enumerate(c.gates):
        new_pos[i] = len(out.gates)
        out.gates.extend(_lower_gate(g, pool))
    new_pos[len(c.gates)] = len(out.gates)
    out.census = [replace(m, pos=new_pos[m.pos]) for m in c.census]
    out._ops = None
    return out


def is_lowered(c: Circuit) -> bool:
    return all(g.kind == "x" and not g.nctrls and len(g.ctrls) <= 2 for g in c.gates)


# ---------------------------------------------------------------------------
# resources


@dataclass(frozen=True)
class ResourceReport:
    width: int
    arch_width: int
    x_count: int = 0
    cnot_count: int = 0
    toffoli_count: int = 0
    mcx_count: int = 0
    swap_count: int = 0
    cswap_count: int = 0
    total_gates: int = 0
    depth: int = 0
    toffoli_depth: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def resources(c: Circuit) -> ResourceReport:
    counts = dict(x_count=0, cnot_count=0, toffoli_count=0, mcx_count=0, swap_count=0, cswap_count=0)
    busy = [0] * c.width
    toffoli_layers: set[int] = set()
    depth = 0
    for g in c.gates:
        k = g.n_controls
        if g.kind == "swap":
            counts["cswap_count" if k else "swap_count"] += 1
        else:
            key = ("x_count", "cnot_count", "toffoli_count")[k] if k < 3 else "mcx_count"
            counts[key] += 1
        qs = g.qubits
        level = 1 + max(busy[q] for q in qs)
        for q in qs:
            busy[q] = level
        depth = max(depth, level)
        if g.kind == "x" and k >= 2:
            toffoli_layers.add(level)
    return ResourceReport(
        width=c.width,
        arch_width=c.arch_width,
        total_gates=len(c.gates),
        depth=depth,
        toffoli_depth=len(toffoli_layers),
        **counts,
    )


# ---------------------------------------------------------------------------
# serialization


def to_json_obj(c: Circuit) -> dict:
    return {
        "width": c.width,
        "registers": {k: list(v) for k, v in c.registers.items()},
        "gates": [g.to_dict() for g in c.gates],
        "census": [str(m) for m in c.census],
    }


def _qasm_line(g: Gate) -> str:
    if g.nctrls or (g.kind == "x" and len(g.ctrls) > 2) or (g.kind == "swap" and g.ctrls):
        raise CircuitError("qasm_like export needs a lowered circuit (run lower_mcx first)")
    if g.kind == "swap":
        a, b = g.targets
        return f"swap q[{a}],q[{b}];"
    name = ("x", "cx", "ccx")[len(g.ctrls)]
    args = ",".join(f"q[{q}]" for q in g.ctrls + g.targets)
    return f"{name} {args};"


def export_circuit(c: Circuit, format: str = "json") -> str:
    if format == "json":
        return json.dumps(to_json_obj(c), separators=(",", ":")) + "\n"
    if format == "qasm_like":
        lines = [f"qubits {c.width};"] + [_qasm_line(g) for g in c.gates]
        return "\n".join(lines) + "\n"
    raise CircuitError(f"unknown export format {format!r}")


def _from_json(obj: dict) -> Circuit:
    c = Circuit()
    try:
        c.width = int(obj["width"])
        c.registers = {str(k): tuple(int(q) for q in v) for k, v in obj["registers"].items()}
        gates = [
            Gate(
                str(g["kind"]),
                tuple(g["targets"]),
                tuple(g.get("ctrls", ())),
                tuple(g.get("nctrls", ())),
            )
            for g in obj["gates"]
        ]
        census = [CensusMark.parse(s) for s in obj.get("census", [])]
    except (KeyError, TypeError, AttributeError) as exc:
        raise CircuitError(f"malformed circuit JSON: {exc}") from exc
    c.extend(gates)
    c.census = census
    c.validate()
    return c


def _from_qasm(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("qubits ") or not lines[0].endswith(";"):
        raise CircuitError("qasm_like text must start with 'qubits <width>;'")
    try:
        width = int(lines[0][len("qubits ") : -1])
    except ValueError as exc:
        raise CircuitError(f"bad header {lines[0]!r}") from exc
    c = Circuit()
    c.alloc_register("q", width)
    for ln in lines[1:]:
        try:
            name, args = ln.rstrip(";").split(None, 1)
            qs = [int(a.strip()[2:-1]) for a in args.split(",")]
        except ValueError as exc:
            raise CircuitError(f"malformed line {ln!r}") from exc
        if name == "swap" and len(qs) == 2:
            c.swap(*qs)
        elif name in ("x", "cx", "ccx") and len(qs) == ("x", "cx", "ccx").index(name) + 1:
            c.x(qs[-1], qs[:-1])
        else:
            raise CircuitError(f"unknown instruction {ln!r}")
    return c


def import_circuit(text: str) -> Circuit:
    """Parse either the JSON form or the qasm-like form (detected from the first character)."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise CircuitError(f"malformed circuit JSON: {exc}") from exc
        return _from_json(obj)
    return _from_qasm(text)
