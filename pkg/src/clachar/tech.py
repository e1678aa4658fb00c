"""Technology flavours and per-device electrical parameters.

Device behaviour is reduced to four numbers per kind: threshold voltage,
on-resistance, gate capacitance, and off-state leakage.  Baseline values
live in one parameter file per flavour (``si.params``, ``cnt.params``,
``hybrid.params``); tube-count and gate-dielectric scaling is applied on
top for the nanotube kinds.  The bundled files hold engineering defaults,
tuned so the cross-technology orderings of the characterization suite
hold; they are not measurements.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .cnt import (
    Chirality,
    ElectronicClass,
    GeometryError,
    classify_electronic,
    diameter,
    pitch,
)


class ConfigError(ValueError):
    """A technology configuration violates its invariants."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParamFileError(ValueError):
    """A parameter file is missing, malformed, or contains unknown entries."""


class Flavor(Enum):
    SI = "si"
    CNT = "cnt"
    HYBRID = "hybrid"


class DeviceKind(Enum):
    SI_N = "SiN"
    SI_P = "SiP"
    CNT_N = "CntN"
    CNT_P = "CntP"

    @property
    def is_cnt(self) -> bool:
        return self in (DeviceKind.CNT_N, DeviceKind.CNT_P)

    @property
    def is_pull_up(self) -> bool:
        return self in (DeviceKind.SI_P, DeviceKind.CNT_P)


# (n-kind, p-kind) available in each flavour; the hybrid pairs a silicon
# pull-down with a nanotube pull-up and has no other devices.
FLAVOR_KINDS = {
    Flavor.SI: (DeviceKind.SI_N, DeviceKind.SI_P),
    Flavor.CNT: (DeviceKind.CNT_N, DeviceKind.CNT_P),
    Flavor.HYBRID: (DeviceKind.SI_N, DeviceKind.CNT_P),
}

# Threshold model for nanotube channels: half the band gap, which scales
# inversely with diameter.
GRAPHENE_LATTICE_NM = 0.249
PI_BOND_ENERGY_EV = 3.033

# Gate-dielectric derating of nanotube gate capacitance.  Sign constraint:
# raising k_ox must lower switching energy; the linear slope keeps the
# scale positive for k_ox < 48.
K_OX_REFERENCE = 16.0
K_OX_CAP_SLOPE = 0.5
K_OX_MAX = K_OX_REFERENCE * (1.0 + 1.0 / K_OX_CAP_SLOPE)

# Off-current must stay well below on-current within a flavour.
MAX_OFF_TO_ON_RATIO = 0.01


def cnfet_threshold(diameter_nm: float) -> float:
    """First-order nanotube threshold voltage, ~0.436 V / d(nm)."""
    if diameter_nm <= 0:
        raise GeometryError(f"diameter must be positive, got {diameter_nm}")
    return _SQRT3_THIRD * GRAPHENE_LATTICE_NM * PI_BOND_ENERGY_EV / diameter_nm


_SQRT3_THIRD = math.sqrt(3.0) / 3.0


@dataclass(frozen=True)
class TechnologyConfig:
    """Process and device parameters for one technology flavour."""

    flavor: Flavor
    vdd_v: float = 0.9
    channel_length_nm: float = 32.0
    t_ox_nm: float = 4.0
    k_ox: float = 16.0
    gate_width_nm: float = 32.0
    tube_count: int = 9
    chirality: Chirality = Chirality(17, 0)
    l_ss_nm: float = 32.0
    l_ds_nm: float = 32.0
    clock_hz: float = 1e9


@dataclass(frozen=True)
class DeviceParams:
    """Switch-level electrical parameters for one device kind.

    ``v_th_v`` is informational in the switch abstraction; conduction is
    ideal once a gate is driven to a full rail.
    """

    kind: DeviceKind
    v_th_v: float
    r_on_ohm: float
    c_gate_f: float
    i_off_a: float

    def __post_init__(self):
        if self.r_on_ohm <= 0:
            raise ConfigError(f"{self.kind.value}: r_on must be positive")
        if self.c_gate_f <= 0:
            raise ConfigError(f"{self.kind.value}: c_gate must be positive")
        if self.i_off_a < 0:
            raise ConfigError(f"{self.kind.value}: i_off must be non-negative")


@dataclass(frozen=True)
class BaseDeviceValues:
    r_on_ohm: float
    c_gate_f: float
    i_off_a: float
    v_th_v: float | None  # silicon kinds only; nanotube kinds derive theirs


@dataclass(frozen=True)
class FlavorParams:
    """Contents of one flavour's parameter file."""

    flavor: Flavor
    devices: dict[DeviceKind, BaseDeviceValues]
    wire_cap_per_fanout_f: float


_DEVICE_KEYS = ("r_on_ohm", "c_gate_f", "i_off_a")
_WIRE_SECTION = "wire"
_WIRE_KEY = "c_per_fanout_f"
_KIND_BY_NAME = {k.value: k for k in DeviceKind}


def params_path(flavor: Flavor, params_dir: str | Path | None = None) -> Path:
    """Path of the parameter file for `flavor`, bundled unless a dir is given."""
    if params_dir is not None:
        return Path(params_dir) / f"{flavor.value}.params"
    return Path(str(resources.files(__package__) / "params" / f"{flavor.value}.params"))


def load_flavor_params(flavor: Flavor, params_dir: str | Path | None = None) -> FlavorParams:
    """Parse and validate the parameter file for one flavour."""
    path = params_path(flavor, params_dir)
    if not path.is_file():
        raise ParamFileError(f"parameter file not found: {path}")
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ParamFileError(f"{path}: {exc}") from exc

    expected_kinds = set(FLAVOR_KINDS[flavor])
    devices: dict[DeviceKind, BaseDeviceValues] = {}
    wire_cap = None
    for section in parser.sections():
        if section == _WIRE_SECTION:
            wire_cap = _read_wire_section(parser[section], path)
            continue
        kind = _KIND_BY_NAME.get(section)
        if kind is None or kind not in expected_kinds:
            raise ParamFileError(f"{path}: unknown section [{section}]")
        devices[kind] = _read_device_section(parser[section], kind, path)

    missing = expected_kinds - set(devices)
    if missing:
        names = ", ".join(sorted(k.value for k in missing))
        raise ParamFileError(f"{path}: missing device section(s): {names}")
    if wire_cap is None:
        raise ParamFileError(f"{path}: missing [wire] section")
    return FlavorParams(flavor=flavor, devices=devices, wire_cap_per_fanout_f=wire_cap)


def _read_device_section(section, kind: DeviceKind, path) -> BaseDeviceValues:
    allowed = set(_DEVICE_KEYS)
    if not kind.is_cnt:
        allowed.add("v_th_v")
    for key in section:
        if key not in allowed:
            raise ParamFileError(f"{path}: unknown key '{key}' in [{kind.value}]")
    values = {}
    for key in _DEVICE_KEYS:
        if key not in section:
            raise ParamFileError(f"{path}: missing key '{key}' in [{kind.value}]")
        values[key] = _parse_float(section[key], key, path)
    if kind.is_cnt:
        v_th = None
    else:
        if "v_th_v" not in section:
            raise ParamFileError(f"{path}: missing key 'v_th_v' in [{kind.value}]")
        v_th = _parse_float(section["v_th_v"], "v_th_v", path)
    return BaseDeviceValues(
        r_on_ohm=values["r_on_ohm"],
        c_gate_f=values["c_gate_f"],
        i_off_a=values["i_off_a"],
        v_th_v=v_th,
    )


def _read_wire_section(section, path) -> float:
    for key in section:
        if key != _WIRE_KEY:
            raise ParamFileError(f"{path}: unknown key '{key}' in [wire]")
    if _WIRE_KEY not in section:
        raise ParamFileError(f"{path}: missing key '{_WIRE_KEY}' in [wire]")
    value = _parse_float(section[_WIRE_KEY], _WIRE_KEY, path)
    if value <= 0:
        raise ParamFileError(f"{path}: wire capacitance must be positive")
    return value


def _parse_float(raw: str, key: str, path) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ParamFileError(f"{path}: key '{key}' is not a number: {raw!r}") from exc


def validate_config(cfg: TechnologyConfig) -> list[str]:
    """Every violated configuration invariant, as human-readable messages."""
    violations = []
    for name, value in (
        ("vdd_v", cfg.vdd_v),
        ("channel_length_nm", cfg.channel_length_nm),
        ("t_ox_nm", cfg.t_ox_nm),
        ("gate_width_nm", cfg.gate_width_nm),
        ("l_ss_nm", cfg.l_ss_nm),
        ("l_ds_nm", cfg.l_ds_nm),
        ("clock_hz", cfg.clock_hz),
    ):
        if value <= 0:
            violations.append(f"{name} must be positive, got {value}")
    if cfg.tube_count < 1:
        violations.append(f"tube_count must be at least 1, got {cfg.tube_count}")
    else:
        try:
            pitch(cfg.gate_width_nm, diameter(cfg.chirality), cfg.tube_count)
        except GeometryError as exc:
            violations.append(f"pitch: {exc}")
    if cfg.flavor in (Flavor.CNT, Flavor.HYBRID):
        cls = classify_electronic(cfg.chirality)
        if cls is not ElectronicClass.SEMICONDUCTING:
            violations.append(
                f"chirality {cfg.chirality} is {cls.value}, not "
                f"{ElectronicClass.SEMICONDUCTING.value}"
            )
        if not 0 < cfg.k_ox < K_OX_MAX:
            violations.append(
                f"k_ox must be in (0, {K_OX_MAX:g}) for nanotube flavours, got {cfg.k_ox}"
            )
    return violations


def require_valid(cfg: TechnologyConfig) -> None:
    violations = validate_config(cfg)
    if violations:
        raise ConfigError(violations)


def _kox_cap_scale(k_ox: float) -> float:
    return 1.0 + K_OX_CAP_SLOPE * (K_OX_REFERENCE - k_ox) / K_OX_REFERENCE


def derive_device_params(
    cfg: TechnologyConfig,
    kind: DeviceKind,
    params: FlavorParams | None = None,
    params_dir: str | Path | None = None,
) -> DeviceParams:
    """Electrical parameters of one device kind under `cfg`.

    Nanotube kinds are per-tube in the parameter file: on-resistance
    divides by the tube count, gate capacitance multiplies by it and by
    the dielectric derating.  Silicon kinds come straight from the file.
    """
    require_valid(cfg)
    if kind not in FLAVOR_KINDS[cfg.flavor]:
        raise ConfigError(
            f"kind {kind.value} not available in {cfg.flavor.value} flavor"
        )
    if params is None:
        params = load_flavor_params(cfg.flavor, params_dir)
    elif params.flavor is not cfg.flavor:
        raise ConfigError(
            f"parameter set is for {params.flavor.value}, config is {cfg.flavor.value}"
        )
    base = params.devices[kind]
    if kind.is_cnt:
        r_on = base.r_on_ohm / cfg.tube_count
        c_gate = base.c_gate_f * cfg.tube_count * _kox_cap_scale(cfg.k_ox)
        v_th = cnfet_threshold(diameter(cfg.chirality))
        i_off = base.i_off_a
    else:
        r_on = base.r_on_ohm
        c_gate = base.c_gate_f
        v_th = base.v_th_v
        i_off = base.i_off_a
    derived = DeviceParams(
        kind=kind, v_th_v=v_th, r_on_ohm=r_on, c_gate_f=c_gate, i_off_a=i_off
    )
    if derived.v_th_v >= cfg.vdd_v:
        raise ParamFileError(
            f"{kind.value}: threshold {derived.v_th_v:.3f} V not below vdd {cfg.vdd_v} V"
        )
    if derived.i_off_a > MAX_OFF_TO_ON_RATIO * cfg.vdd_v / derived.r_on_ohm:
        raise ParamFileError(
            f"{kind.value}: off-current {derived.i_off_a:g} A exceeds "
            f"{MAX_OFF_TO_ON_RATIO:.0%} of on-current"
        )
    return derived


def derive_flavor_devices(
    cfg: TechnologyConfig,
    params: FlavorParams | None = None,
    params_dir: str | Path | None = None,
) -> dict[DeviceKind, DeviceParams]:
    """Derived parameters for every kind the flavour provides."""
    if params is None:
        params = load_flavor_params(cfg.flavor, params_dir)
    return {
        kind: derive_device_params(cfg, kind, params=params)
        for kind in FLAVOR_KINDS[cfg.flavor]
    }
