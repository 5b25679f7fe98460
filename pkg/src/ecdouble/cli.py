"""Command-line front end: build, simulate, verify, resources, export.

Exit codes: 0 success, 1 verification mismatch, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

from .circuit import Circuit, CircuitError, export_circuit, import_circuit, is_lowered, lower_mcx, resources
from .ecops import Scheme, build, census, default_constant_point, trace, verify
from .gf2m import AffinePoint, CurveParams, FieldElement, FieldError, FieldParams, default_poly, on_curve, parse_hex
from .sim import SimulationError, pack, run_basis, unpack

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    m: int = 4
    poly: Optional[str] = None
    a: int = 1
    b: str = "0x1"
    scheme: str = "pd-balanced"
    x2: Optional[str] = None
    y2: Optional[str] = None
    x1: Optional[str] = None
    y1: Optional[str] = None
    q: int = 0
    reg: tuple = ()
    circuit: Optional[str] = None
    format: Optional[str] = None
    output: Optional[str] = None
    no_final_swap: bool = False
    lower: bool = False
    exhaustive: bool = False
    samples: Optional[int] = None
    seed: int = 0
    trace: bool = False
    ms: str = "4,8,16"
    schemes: str = "pa,pd-balanced,pd-min,pd-full-unc"

    # -- derived ---------------------------------------------------------

    def curve(self, m: Optional[int] = None) -> CurveParams:
        m = self.m if m is None else m
        poly = parse_hex(self.poly) if self.poly and m == self.m else default_poly(m)
        f = FieldParams(m, poly)
        return CurveParams(f, int(self.a), FieldElement(f, parse_hex(self.b)))

    def constant_point(self, curve: CurveParams) -> Optional[AffinePoint]:
        if self.x2 is None or self.y2 is None:
            return None
        f = curve.field
        p = AffinePoint(FieldElement(f, parse_hex(self.x2)), FieldElement(f, parse_hex(self.y2)))
        if not on_curve(p, curve):
            raise ConfigError(f"constant point ({self.x2}, {self.y2}) is not on the curve")
        return p


_BOOL_KEYS = {f.name for f in fields(RunConfig) if f.type == "bool"}
_INT_KEYS = {"m", "a", "q", "samples", "seed"}


def read_config_file(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in {f.name for f in fields(RunConfig)} or key == "command":
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in _BOOL_KEYS:
            out[key] = value.lower() in ("1", "true", "yes", "on")
        elif key in _INT_KEYS:
            out[key] = int(value, 0)
        else:
            out[key] = value
    return out


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--m", type=int)
    common.add_argument("--poly", help="reduction polynomial, e.g. 0x13")
    common.add_argument("--a", type=int, choices=(0, 1))
    common.add_argument("--b", help="curve coefficient b, e.g. 0x1")
    common.add_argument("--scheme", choices=[s.value for s in Scheme])
    common.add_argument("--x2", help="constant point x (pa)")
    common.add_argument("--y2", help="constant point y (pa)")
    common.add_argument("--no-final-swap", action="store_true", default=None)
    common.add_argument("--lower", action="store_true", default=None,
                        help="lower multi-controlled gates to Toffolis")
    common.add_argument("--circuit", help="circuit JSON file instead of building one")
    common.add_argument("--format", choices=("json", "csv", "text"))
    common.add_argument("-o", "--output")
    common.add_argument("--seed", type=int)

    p = argparse.ArgumentParser(prog="ecdouble", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="write circuit JSON")
    sp = sub.add_parser("simulate", parents=[common], help="run one basis input")
    sp.add_argument("--x1")
    sp.add_argument("--y1")
    sp.add_argument("--q", type=int, choices=(0, 1))
    sp.add_argument("--reg", action="append", metavar="NAME=HEX", help="set any other register")
    sp.add_argument("--trace", action="store_true", default=None)
    vp = sub.add_parser("verify", parents=[common], help="compare against the classical group law")
    vp.add_argument("--exhaustive", action="store_true", default=None)
    vp.add_argument("--samples", type=int)
    rp = sub.add_parser("resources", parents=[common], help="resource table over schemes and m")
    rp.add_argument("--ms", help="comma-separated field degrees")
    rp.add_argument("--schemes", help="comma-separated scheme names")
    sub.add_parser("export", parents=[common], help="write the qasm-like text form")
    return p


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ns = _parser().parse_args(argv)
    merged: dict = {}
    if ns.config:
        merged.update(read_config_file(ns.config))
    for k, v in vars(ns).items():
        if k == "config" or v is None:
            continue
        merged[k] = tuple(v) if k == "reg" else v
    return RunConfig(**merged)


# ---------------------------------------------------------------------------


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _load_or_build(cfg: RunConfig, curve: CurveParams) -> Circuit:
    if cfg.circuit:
        c = import_circuit(Path(cfg.circuit).read_text())
    else:
        scheme = Scheme(cfg.scheme)
        p2 = cfg.constant_point(curve)
        if scheme is Scheme.PA and p2 is None:
            raise ConfigError("scheme pa needs --x2 and --y2")
        c = build(curve, scheme, p2, include_final_swap=not cfg.no_final_swap)
    if cfg.lower:
        c = lower_mcx(c)
    return c


def cmd_build(cfg: RunConfig) -> int:
    curve = cfg.curve()
    c = _load_or_build(cfg, curve)
    _emit(cfg, export_circuit(c, "json"))
    summary = f"scheme={cfg.scheme} m={curve.field.m} arch_width={c.arch_width} width={c.width} gates={len(c)}"
    print(summary, file=sys.stdout if cfg.output else sys.stderr)
    return EXIT_OK


def _step_label(cfg: RunConfig, tag: str, label: str) -> str:
    if Scheme(cfg.scheme).is_doubling and tag.isdigit():
        return f"step {tag:>2} {label}"
    return f"{tag or '-'} {label}"


def cmd_simulate(cfg: RunConfig) -> int:
    curve = cfg.curve()
    c = _load_or_build(cfg, curve)
    values: dict[str, int] = {}
    if cfg.x1 is not None:
        values["x"] = parse_hex(cfg.x1)
    if cfg.y1 is not None:
        values["y"] = parse_hex(cfg.y1)
    values["q"] = int(cfg.q)
    for item in cfg.reg:
        name, _, v = item.partition("=")
        if not v:
            raise ConfigError(f"--reg expects NAME=HEX, got {item!r}")
        values[name.strip()] = parse_hex(v)
    s_in = pack(c, values)
    s_out = run_basis(c, s_in)
    out = unpack(c, s_out)
    fmt = cfg.format or "text"
    if fmt == "json":
        doc = {"output": {k: hex(v) for k, v in out.items()}}
        if cfg.trace:
            doc["trace"] = [
                {"tag": b.tag, "label": b.label, "registers": {k: hex(v) for k, v in snap.items()}}
                for b, snap in trace(c, s_in)
            ]
        _emit(cfg, json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    lines = []
    if cfg.trace:
        shown = [r for r in c.registers if not r.startswith("pool")]
        for b, snap in trace(c, s_in):
            regs = " ".join(f"{r}={snap[r]:#x}" for r in shown)
            lines.append(f"{_step_label(cfg, b.tag, b.label):<22} {regs}")
        lines.append("")
    lines += [f"{k} = {v:#x}" for k, v in out.items()]
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    curve = cfg.curve()
    scheme = Scheme(cfg.scheme)
    p2 = cfg.constant_point(curve)
    if scheme is Scheme.PA and p2 is None:
        raise ConfigError("scheme pa needs --x2 and --y2")
    circuit = _load_or_build(cfg, curve)
    if cfg.samples is not None and not cfg.exhaustive:
        mode = cfg.samples
    elif curve.field.m <= 8:
        mode = "exhaustive"
    else:
        raise ConfigError("exhaustive verification needs m <= 8; pass --samples K")
    report = verify(curve, scheme, mode, p2=p2, circuit=circuit,
                    include_final_swap=not cfg.no_final_swap, seed=cfg.seed)
    _emit(cfg, json.dumps(report.as_dict(), indent=2) + "\n")
    status = "OK" if report.ok else "MISMATCH"
    print(f"{status} scheme={report.scheme} m={report.m} tested={report.tested} "
          f"skipped={report.skipped} mismatches={len(report.mismatches)}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_MISMATCH


RESOURCE_COLUMNS = (
    "scheme", "m", "arch_width", "width", "x_count", "cnot_count", "toffoli_count", "mcx_count",
    "swap_count", "cswap_count", "total_gates", "depth", "toffoli_depth",
    "census_DIV", "census_MUL", "census_SQR", "census_SQR_multi", "census_CSWAP_REG",
    "census_CONST_ADD", "census_REG_ADD", "census_DIV_neg", "census_REG_ADD_neg",
)


def resource_rows(cfg: RunConfig) -> list[dict]:
    rows = []
    ms = [int(v) for v in str(cfg.ms).split(",") if v.strip()]
    schemes = [Scheme(s.strip()) for s in str(cfg.schemes).split(",") if s.strip()]
    for scheme in schemes:
        for m in ms:
            curve = cfg.curve(m)
            p2 = None
            if scheme is Scheme.PA:
                p2 = cfg.constant_point(curve) if len(ms) == 1 else None
                p2 = p2 or default_constant_point(curve)
            c = build(curve, scheme, p2, include_final_swap=not cfg.no_final_swap)
            cen = census(c).as_dict()
            if cfg.lower:
                c = lower_mcx(c)
            row = {"scheme": scheme.value, "m": m}
            row.update(resources(c).as_dict())
            row.update({f"census_{k}": v for k, v in cen.items()})
            rows.append({k: row[k] for k in RESOURCE_COLUMNS})
    return rows


def cmd_resources(cfg: RunConfig) -> int:
    rows = resource_rows(cfg)
    fmt = cfg.format or "csv"
    if fmt == "json":
        _emit(cfg, json.dumps(rows, indent=2) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=RESOURCE_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        _emit(cfg, buf.getvalue())
    else:
        lines = [" ".join(f"{k}={r[k]}" for k in RESOURCE_COLUMNS) for r in rows]
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_export(cfg: RunConfig) -> int:
    curve = cfg.curve()
    c = _load_or_build(cfg, curve)
    if not is_lowered(c):
        raise ConfigError("export needs a lowered circuit; pass --lower or a lowered circuit file")
    _emit(cfg, export_circuit(c, "qasm_like"))
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "resources": cmd_resources,
    "export": cmd_export,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, FieldError, CircuitError, SimulationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
