"""Exact simulation of the gate IR.

Basis states are Python ints (bit ``q`` = qubit ``q``). :func:`run_batch`
bit-slices many basis states into one int per qubit, which is what the
verification harness uses for bulk runs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .circuit import Circuit, CircuitError, inverse

PRUNE = 1e-12


class SimulationError(ValueError):
    pass


def _compile(c: Circuit):
    if c._ops is not None and c._ops[0] == len(c.gates):
        return c._ops[1]
    ops = []
    for g in c.gates:
        cmask = 0
        cval = 0
        for q in g.ctrls:
            cmask |= 1 << q
            cval |= 1 << q
        for q in g.nctrls:
            cmask |= 1 << q
        if g.kind == "x":
            ops.append((False, cmask, cval, g.targets[0], -1, g.ctrls, g.nctrls))
        else:
            ops.append((True, cmask, cval, g.targets[0], g.targets[1], g.ctrls, g.nctrls))
    c._ops = (len(c.gates), ops)
    return ops


def _check_state(c: Circuit, s: int) -> None:
    if s < 0 or s >> c.width:
        raise SimulationError(f"basis state {s:#x} does not fit width {c.width}")


def run_basis(c: Circuit, s: int, start: int = 0, stop: Optional[int] = None) -> int:
    """Apply gates ``start:stop`` to basis state ``s``."""
    _check_state(c, s)
    for is_swap, cmask, cval, a, b, _, _ in _compile(c)[start:stop]:
        if s & cmask != cval:
            continue
        if not is_swap:
            s ^= 1 << a
        elif ((s >> a) ^ (s >> b)) & 1:
            s ^= (1 << a) | (1 << b)
    return s


def run_batch(c: Circuit, states: Sequence[int], start: int = 0, stop: Optional[int] = None) -> list[int]:
    """Bit-sliced :func:`run_basis` over many states at once."""
    n = len(states)
    if not n:
        return []
    for s in states:
        _check_state(c, s)
    full = (1 << n) - 1
    rows = [0] * c.width
    for j, s in enumerate(states):
        q = 0
        while s:
            if s & 1:
                rows[q] |= 1 << j
            s >>= 1
            q += 1
    for is_swap, _, _, a, b, ctrls, nctrls in _compile(c)[start:stop]:
        cond = full
        for q in ctrls:
            cond &= rows[q]
        for q in nctrls:
            cond &= ~rows[q]
        if not cond:
            continue
        if not is_swap:
            rows[a] ^= cond
        else:
            diff = (rows[a] ^ rows[b]) & cond
            rows[a] ^= diff
            rows[b] ^= diff
    out = [0] * n
    for q, row in enumerate(rows):
        bit = 1 << q
        j = 0
        while row:
            if row & 1:
                out[j] |= bit
            row >>= 1
            j += 1
    return out


def pack(c: Circuit, values: Mapping[str, int]) -> int:
    """Basis state from per-register integer values; missing registers are 0."""
    s = 0
    for name, v in values.items():
        if name not in c.registers:
            raise SimulationError(f"unknown register {name!r}")
        reg = c.registers[name]
        if v < 0 or v >> len(reg):
            raise SimulationError(f"value {v:#x} does not fit register {name!r} ({len(reg)} qubits)")
        for i, q in enumerate(reg):
            if (v >> i) & 1:
                s |= 1 << q
    return s


def unpack(c: Circuit, s: int) -> dict[str, int]:
    out = {}
    for name, reg in c.registers.items():
        v = 0
        for i, q in enumerate(reg):
            v |= ((s >> q) & 1) << i
        out[name] = v
    return out


# ---------------------------------------------------------------------------
# sparse superpositions


@dataclass
class SparseState:
    """Real amplitudes keyed by basis state."""

    amps: dict[int, float] = field(default_factory=dict)

    @classmethod
    def basis(cls, s: int) -> "SparseState":
        return cls({s: 1.0})

    def norm(self) -> float:
        return math.sqrt(sum(a * a for a in self.amps.values()))

    def __len__(self) -> int:
        return len(self.amps)

    def items(self):
        return self.amps.items()


def _hadamard(state: dict[int, float], q: int) -> dict[int, float]:
    out: dict[int, float] = {}
    r = 1 / math.sqrt(2)
    bit = 1 << q
    for s, a in state.items():
        s0 = s & ~bit
        out[s0] = out.get(s0, 0.0) + a * r
        out[s0 | bit] = out.get(s0 | bit, 0.0) + (-a if s & bit else a) * r
    return {s: a for s, a in out.items() if abs(a) > PRUNE}


def run_sparse(
    c: Circuit,
    state: SparseState,
    h_qubits_pre: Iterable[int] = (),
    h_qubits_post: Iterable[int] = (),
) -> SparseState:
    amps = dict(state.amps)
    for s in amps:
        _check_state(c, s)
    for q in h_qubits_pre:
        if not 0 <= q < c.width:
            raise SimulationError(f"qubit {q} outside width {c.width}")
        amps = _hadamard(amps, q)
    keys = list(amps)
    images = run_batch(c, keys)
    permuted: dict[int, float] = {}
    for s, t in zip(keys, images):
        permuted[t] = permuted.get(t, 0.0) + amps[s]
    amps = {s: a for s, a in permuted.items() if abs(a) > PRUNE}
    for q in h_qubits_post:
        if not 0 <= q < c.width:
            raise SimulationError(f"qubit {q} outside width {c.width}")
        amps = _hadamard(amps, q)
    return SparseState(amps)


def check_bijectivity(c: Circuit, samples: int, seed: int = 0, exhaustive: bool = False) -> bool:
    """Inverse round-trip on ``samples`` random states; optionally check all images are distinct."""
    rng = random.Random(seed)
    states = [rng.getrandbits(c.width) if c.width else 0 for _ in range(samples)]
    if states and run_batch(inverse(c), run_batch(c, states)) != states:
        return False
    if exhaustive:
        if c.width > 12:
            raise CircuitError("exhaustive bijectivity check limited to width <= 12")
        images = run_batch(c, list(range(1 << c.width)))
        if len(set(images)) != 1 << c.width:
            return False
    return True
