"""Power/delay characterization across bit width, logic style, and technology."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from itertools import product
from typing import Sequence

from . import cla
from .mapper import DynamicNetlist, map_domino, map_np_dynamic
from .sim import SimConfig, SimulationError, simulate
from .tech import FlavorParams, TechnologyConfig, load_flavor_params

STYLES = ("domino", "np")
DEFAULT_VECTOR_COUNT = 64
DEFAULT_SEED = 0xC1A

CSV_HEADER = "bits,style,tech,total_power_w,avg_power_w,tpd_s,pdp_j"


class CharacterizationError(RuntimeError):
    pass


class TrendDataError(ValueError):
    """Trend checking was asked for orderings its records cannot support."""


@dataclass(frozen=True)
class MetricsRecord:
    """One characterization row.

    ``total_power_w`` is supply-delivered power over the steady window;
    ``avg_power_w`` additionally includes leakage.  The power-delay product
    is always derived, never stored.
    """

    bits: int
    style: str
    tech: str
    total_power_w: float
    avg_power_w: float
    tpd_s: float

    def __post_init__(self):
        for name in ("total_power_w", "avg_power_w", "tpd_s"):
            if getattr(self, name) <= 0:
                raise CharacterizationError(f"{name} must be positive")

    @property
    def pdp_j(self) -> float:
        return self.avg_power_w * self.tpd_s


@dataclass
class SweepCell:
    bits: int
    style: str
    tech: str
    record: MetricsRecord | None
    error: str | None = None


def default_vectors(bits: int, count: int = DEFAULT_VECTOR_COUNT,
                    seed: int = DEFAULT_SEED) -> list[tuple[int, int, int]]:
    """Worst-case carry-propagate vector plus seeded random activity."""
    return [cla.critical_vector(bits)] + cla.random_vectors(bits, count, seed)


def build_netlist(bits: int, style: str, tech: TechnologyConfig,
                  params: FlavorParams | None = None,
                  group_size: int = 4) -> DynamicNetlist:
    network = cla.build_cla(bits, group_size)
    if style == "domino":
        return map_domino(network, tech, params)
    if style == "np":
        return map_np_dynamic(network, tech, params)
    raise CharacterizationError(f"unknown style {style!r}; expected one of {STYLES}")


def _default_sim_config(tech: TechnologyConfig) -> SimConfig:
    return SimConfig(
        clock_period_s=1.0 / tech.clock_hz,
        cycles=2,
        stimulus=None,
        vdd_v=tech.vdd_v,
        record_events=False,
    )


def characterize(bits: int, style: str, tech: TechnologyConfig,
                 vectors: Sequence[tuple[int, int, int]] | None = None,
                 sim_cfg: SimConfig | None = None,
                 params: FlavorParams | None = None) -> MetricsRecord:
    """Simulate one (bits, style, tech) cell over a vector set.

    Delay is the worst output settle time from evaluate-phase start across
    all vectors; powers average over the steady cycles of every run.
    """
    if vectors is None:
        vectors = default_vectors(bits)
    if not vectors:
        raise CharacterizationError("vector set must not be empty")
    if sim_cfg is None:
        sim_cfg = _default_sim_config(tech)
    netlist = build_netlist(bits, style, tech, params)

    supply = 0.0
    leakage = 0.0
    window = 0.0
    tpd = None
    check = True
    for a, b, c_in in vectors:
        stim = cla.pack_inputs(bits, a, b, c_in)
        run_cfg = dataclasses.replace(sim_cfg, stimulus=(stim,))
        result = simulate(netlist, run_cfg, check_discipline=check)
        check = False
        supply += result.supply_energy_j
        leakage += result.leakage_energy_j
        window += result.measured_window_s
        for settle in result.settle_times_s.values():
            if settle is not None and (tpd is None or settle > tpd):
                tpd = settle
    if tpd is None:
        raise CharacterizationError("no output transition")
    return MetricsRecord(
        bits=bits,
        style=style,
        tech=tech.flavor.value,
        total_power_w=supply / window,
        avg_power_w=(supply + leakage) / window,
        tpd_s=tpd,
    )


def sweep(bit_widths: Sequence[int], styles: Sequence[str],
          techs: Sequence[TechnologyConfig],
          sim_cfg: SimConfig | None = None,
          vector_count: int = DEFAULT_VECTOR_COUNT,
          seed: int = DEFAULT_SEED,
          params_dir=None) -> list[SweepCell]:
    """Full cross product, one independent cell per combination.

    Cells are emitted in axis order regardless of how long each run takes;
    per-cell failures land in the cell's `error` field and the sweep
    continues.
    """
    if not bit_widths or not styles or not techs:
        raise CharacterizationError("sweep axes must be non-empty")
    params_cache = {
        tech.flavor: load_flavor_params(tech.flavor, params_dir) for tech in techs
    }
    cells = []
    for bits, style, tech in product(bit_widths, styles, techs):
        vectors = default_vectors(bits, vector_count, seed)
        try:
            record = characterize(
                bits, style, tech,
                vectors=vectors,
                sim_cfg=sim_cfg if sim_cfg is not None else _default_sim_config(tech),
                params=params_cache[tech.flavor],
            )
            cells.append(SweepCell(bits, style, tech.flavor.value, record))
        except (CharacterizationError, SimulationError) as exc:
            cells.append(SweepCell(bits, style, tech.flavor.value, None, str(exc)))
    return cells


def records_of(cells: Sequence[SweepCell]) -> list[MetricsRecord]:
    return [cell.record for cell in cells if cell.record is not None]


def to_csv(cells: Sequence[SweepCell | MetricsRecord]) -> str:
    """Six significant digits, scientific notation; error cells are omitted."""
    lines = [CSV_HEADER]
    for cell in cells:
        record = cell if isinstance(cell, MetricsRecord) else cell.record
        if record is None:
            continue
        lines.append(
            f"{record.bits},{record.style},{record.tech},"
            f"{record.total_power_w:.5e},{record.avg_power_w:.5e},"
            f"{record.tpd_s:.5e},{record.pdp_j:.5e}"
        )
    return "\n".join(lines) + "\n"


def trend_check(records: Sequence[MetricsRecord]) -> list[str]:
    """Cross-technology and cross-width orderings; returns violations.

    Within each (bits, style) group: silicon must burn more average power
    than nanotube and hybrid, and delay must order si > hybrid > cnt.
    Delay must be non-decreasing in bit width per (style, tech), and for
    the nanotube flavour the np style must not exceed domino's power-delay
    product.  Raises `TrendDataError` when comparison cells are missing.
    """
    by_cell = {}
    for rec in records:
        by_cell[(rec.bits, rec.style, rec.tech)] = rec

    groups: dict[tuple[int, str], set[str]] = {}
    for bits, style, tech in by_cell:
        groups.setdefault((bits, style), set()).add(tech)

    missing = []
    for (bits, style), techs in sorted(groups.items()):
        required = set()
        if "cnt" in techs or "hybrid" in techs:
            required.add("si")
        if "hybrid" in techs:
            required.add("cnt")
        for tech in sorted(required - techs):
            missing.append((bits, style, tech))
    if missing:
        cells = ", ".join(f"({b}, {s}, {t})" for b, s, t in missing)
        raise TrendDataError(f"missing comparison cell(s): {cells}")

    violations = []

    def rec(bits, style, tech):
        return by_cell.get((bits, style, tech))

    for (bits, style), techs in sorted(groups.items()):
        si = rec(bits, style, "si")
        cnt = rec(bits, style, "cnt")
        hybrid = rec(bits, style, "hybrid")
        label = f"{bits}-bit {style}"
        if si and cnt and si.avg_power_w <= cnt.avg_power_w:
            violations.append(
                f"{label}: avg_power si ({si.avg_power_w:.3e}) <= cnt "
                f"({cnt.avg_power_w:.3e})"
            )
        if si and hybrid and si.avg_power_w <= hybrid.avg_power_w:
            violations.append(
                f"{label}: avg_power si ({si.avg_power_w:.3e}) <= hybrid "
                f"({hybrid.avg_power_w:.3e})"
            )
        if si and hybrid and si.tpd_s <= hybrid.tpd_s:
            violations.append(
                f"{label}: tpd si ({si.tpd_s:.3e}) <= hybrid ({hybrid.tpd_s:.3e})"
            )
        if hybrid and cnt and hybrid.tpd_s <= cnt.tpd_s:
            violations.append(
                f"{label}: tpd hybrid ({hybrid.tpd_s:.3e}) <= cnt ({cnt.tpd_s:.3e})"
            )
        if si and cnt and si.tpd_s <= cnt.tpd_s:
            violations.append(
                f"{label}: tpd si ({si.tpd_s:.3e}) <= cnt ({cnt.tpd_s:.3e})"
            )

    series: dict[tuple[str, str], list[MetricsRecord]] = {}
    for rec_ in records:
        series.setdefault((rec_.style, rec_.tech), []).append(rec_)
    for (style, tech), recs in sorted(series.items()):
        recs.sort(key=lambda r: r.bits)
        for prev, cur in zip(recs, recs[1:]):
            if cur.tpd_s < prev.tpd_s:
                violations.append(
                    f"{style}/{tech}: tpd decreases from {prev.bits}-bit "
                    f"({prev.tpd_s:.3e}) to {cur.bits}-bit ({cur.tpd_s:.3e})"
                )

    for (bits, style, tech), np_rec in sorted(by_cell.items()):
        if style != "np" or tech != "cnt":
            continue
        domino = by_cell.get((bits, "domino", "cnt"))
        if domino and np_rec.pdp_j > domino.pdp_j:
            violations.append(
                f"{bits}-bit cnt: pdp np ({np_rec.pdp_j:.3e}) > domino "
                f"({domino.pdp_j:.3e})"
            )
    return violations
