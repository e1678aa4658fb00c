"""Command-line front end: tube geometry info, sweeps, netlist export.

Every behaviour is a thin wrapper over library calls.  Exit codes:
0 success, 1 validation/usage error, 2 simulation error, 3 trend-check
failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import cnt
from .characterizer import (
    CharacterizationError,
    MetricsRecord,
    TrendDataError,
    build_netlist,
    records_of,
    sweep,
    to_csv,
    trend_check,
)
from .cla import NetworkError
from .mapper import MappingError, export_netlist
from .sim import SimulationError
from .tech import (
    ConfigError,
    Flavor,
    ParamFileError,
    TechnologyConfig,
    cnfet_threshold,
    load_flavor_params,
)

PARAMS_DIR_ENV = "CLACHAR_PARAMS_DIR"

_DEFAULTS = {
    "bits": "8,16,32,64",
    "style": "domino,np",
    "tech": "si,cnt,hybrid",
    "clock_hz": "1e9",
    "vdd": "0.9",
    "vectors": "64",
    "seed": "0xC1A",
    "out": "metrics.csv",
    "params_dir": "",
    "check_trends": "false",
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="clachar", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    info = sub.add_parser("cnt-info", help="print tube geometry and derived threshold")
    info.add_argument("--chirality", default="17,0", help="roll-up pair, e.g. 17,0")
    info.add_argument("--a-cc", type=float, default=cnt.A_CC_NM,
                      help="C-C bond length in nm")
    info.add_argument("--gate-width", type=float, default=32.0)
    info.add_argument("--tube-count", type=int, default=9)
    info.set_defaults(func=cmd_cnt_info)

    run = sub.add_parser("run", help="characterize a sweep and emit CSV + tables")
    run.add_argument("--bits", help="comma-separated widths (8,16,32,64)")
    run.add_argument("--style", help="comma-separated styles (domino,np)")
    run.add_argument("--tech", help="comma-separated technologies (si,cnt,hybrid)")
    run.add_argument("--clock-hz", dest="clock_hz")
    run.add_argument("--vdd")
    run.add_argument("--vectors", help="random vectors per cell")
    run.add_argument("--seed")
    run.add_argument("--out", help="CSV output path")
    run.add_argument("--params-dir", dest="params_dir")
    run.add_argument("--check-trends", action="store_true", default=None)
    run.add_argument("--config", help="key=value config file (CLI flags win)")
    run.set_defaults(func=cmd_run)

    export = sub.add_parser("export-netlist", help="emit one netlist as text")
    export.add_argument("--bits", type=int, required=True, choices=(8, 16, 32, 64))
    export.add_argument("--style", required=True, choices=("domino", "np"))
    export.add_argument("--tech", required=True, choices=("si", "cnt", "hybrid"))
    export.add_argument("--clock-hz", dest="clock_hz", type=float, default=1e9)
    export.add_argument("--vdd", type=float, default=0.9)
    export.add_argument("--out", default="netlist.txt")
    export.add_argument("--params-dir", dest="params_dir")
    export.set_defaults(func=cmd_export_netlist)
    return parser


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: bad config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _DEFAULTS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        values[key] = value
    return values


def _merge_run_config(args) -> dict[str, str]:
    merged = dict(_DEFAULTS)
    if args.config:
        merged.update(_load_config_file(args.config))
    cli = {
        "bits": args.bits,
        "style": args.style,
        "tech": args.tech,
        "clock_hz": args.clock_hz,
        "vdd": args.vdd,
        "vectors": args.vectors,
        "seed": args.seed,
        "out": args.out,
        "params_dir": args.params_dir,
        "check_trends": "true" if args.check_trends else None,
    }
    merged.update({k: v for k, v in cli.items() if v is not None})
    return merged


def _parse_list(raw: str, label: str, allowed) -> list[str]:
    items = [item.strip() for item in raw.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"{label} must not be empty")
    for item in items:
        if item not in allowed:
            raise ConfigError(f"bad {label} value {item!r}; expected one of {allowed}")
    return items


def _params_dir_or_env(value: str | None):
    if value:
        return value
    env = os.environ.get(PARAMS_DIR_ENV)
    return env if env else None


def render_comparison(records: list[MetricsRecord]) -> str:
    """Per-(bits, style) tables with one technology per column."""
    groups: dict[tuple[int, str], dict[str, MetricsRecord]] = {}
    for rec in records:
        groups.setdefault((rec.bits, rec.style), {})[rec.tech] = rec
    blocks = []
    tech_order = [f.value for f in Flavor]
    metrics = (
        ("total_power_w", lambda r: r.total_power_w),
        ("avg_power_w", lambda r: r.avg_power_w),
        ("tpd_s", lambda r: r.tpd_s),
        ("pdp_j", lambda r: r.pdp_j),
    )
    for (bits, style), cells in sorted(groups.items()):
        techs = [t for t in tech_order if t in cells]
        lines = [f"== {bits}-bit {style} =="]
        lines.append("  ".join([f"{'metric':<14}"] + [f"{t:<12}" for t in techs]))
        for name, getter in metrics:
            row = [f"{name:<14}"]
            for t in techs:
                row.append(f"{getter(cells[t]):<12.5e}")
            lines.append("  ".join(row).rstrip())
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def cmd_cnt_info(args) -> int:
    try:
        n_str, m_str = args.chirality.split(",")
        ch = cnt.Chirality(int(n_str), int(m_str))
    except (ValueError, cnt.ChiralityError) as exc:
        print(f"error: bad chirality {args.chirality!r}: {exc}", file=sys.stderr)
        return 1
    geo = cnt.geometry(ch, args.a_cc)
    rows = [
        ("chirality", str(ch)),
        ("diameter_nm", f"{geo.diameter_nm:.4f}"),
        ("chiral_angle_deg", f"{geo.chiral_angle_deg:.4f}"),
        ("circumference_nm", f"{geo.circumference_nm:.4f}"),
        ("class", geo.electronic_class.value),
        ("structure", geo.structure_class.value),
    ]
    status = 0
    try:
        p = cnt.pitch(args.gate_width, geo.diameter_nm, args.tube_count)
        rows.append(("pitch_nm", f"{p:.4f}"))
    except cnt.GeometryError as exc:
        rows.append(("pitch_nm", f"error: {exc}"))
        status = 1
    rows.append(("v_th_v", f"{cnfet_threshold(geo.diameter_nm):.4f}"))
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value}")
    if geo.electronic_class is cnt.ElectronicClass.METALLIC:
        print("warning: Metallic tube is not usable as FET channel")
    return status


def cmd_run(args) -> int:
    merged = _merge_run_config(args)
    bits = [int(b) for b in _parse_list(merged["bits"], "bits",
                                        ("8", "16", "32", "64"))]
    styles = _parse_list(merged["style"], "style", ("domino", "np"))
    flavors = _parse_list(merged["tech"], "tech", ("si", "cnt", "hybrid"))
    clock_hz = float(merged["clock_hz"])
    vdd = float(merged["vdd"])
    vectors = int(merged["vectors"])
    seed = int(merged["seed"], 0)
    check_trends = merged["check_trends"].lower() in ("true", "1", "yes")
    params_dir = _params_dir_or_env(merged["params_dir"] or None)
    techs = [
        TechnologyConfig(flavor=Flavor(f), vdd_v=vdd, clock_hz=clock_hz)
        for f in flavors
    ]

    cells = sweep(bits, styles, techs, vector_count=vectors, seed=seed,
                  params_dir=params_dir)
    csv_text = to_csv(cells)
    out_path = Path(merged["out"])
    out_path.write_text(csv_text)
    records = records_of(cells)
    if records:
        print(render_comparison(records), end="")
    print(f"wrote {sum(1 for c in cells if c.record)} row(s) to {out_path}")

    failed = [c for c in cells if c.error]
    if failed:
        for cell in failed:
            print(f"error: {cell.bits}-bit {cell.style} {cell.tech}: {cell.error}",
                  file=sys.stderr)
        return 2
    if check_trends:
        violations = trend_check(records)
        if violations:
            for v in violations:
                print(f"trend violation: {v}", file=sys.stderr)
            return 3
        print("trend check: ok")
    return 0


def cmd_export_netlist(args) -> int:
    tech = TechnologyConfig(flavor=Flavor(args.tech), vdd_v=args.vdd,
                            clock_hz=args.clock_hz)
    params_dir = _params_dir_or_env(args.params_dir)
    params = load_flavor_params(tech.flavor, params_dir) if params_dir else None
    netlist = build_netlist(args.bits, args.style, tech, params=params)
    Path(args.out).write_text(export_netlist(netlist))
    print(f"wrote netlist to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    if not getattr(args, "func", None):
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ParamFileError, cnt.GeometryError, NetworkError,
            MappingError, TrendDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SimulationError, CharacterizationError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
