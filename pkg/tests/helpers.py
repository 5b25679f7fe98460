"""Shared test utilities."""

import random

from ecdouble.circuit import Circuit, new_circuit


def random_circuit(width: int, n: int, seed: int, max_ctrls: int = 3) -> Circuit:
    rng = random.Random(seed)
    c = new_circuit()
    c.alloc_register("w", width)
    for _ in range(n):
        qs = rng.sample(range(width), rng.randint(1, min(width, max_ctrls + 2)))
        if rng.random() < 0.2 and len(qs) >= 2:
            rest = qs[2:]
            cut = rng.randint(0, len(rest))
            c.swap(qs[0], qs[1], rest[:cut], rest[cut:])
        else:
            rest = qs[1:]
            cut = rng.randint(0, len(rest))
            c.x(qs[0], rest[:cut], rest[cut:])
    return c


def trace_mismatches(c: Circuit, scheme: str, x1: int, y1: int, q: int, a: int, poly: int, m: int) -> list:
    """Compare per-block snapshots (tagged by step number) with the oracle rows."""
    from ecdouble.ecops import trace
    from ecdouble.sim import pack
    from oracles import expected_trace

    snaps = {int(b.tag): snap for b, snap in trace(c, pack(c, {"x": x1, "y": y1, "q": q}))}
    bad = []
    expected = expected_trace(scheme, x1, y1, q, a, poly, m)
    if sorted(snaps) != [k for k, _ in expected]:
        bad.append(("steps", sorted(snaps)))
    for k, row in expected:
        got = {r: snaps.get(k, {}).get(r) for r in row}
        if got != row:
            bad.append((k, row, got))
    return bad
