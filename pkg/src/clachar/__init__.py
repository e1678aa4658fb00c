"""Switch-level power/delay characterization of dynamic-logic carry-lookahead adders."""

from .cla import LogicNetwork, build_cla, critical_vector, evaluate
from .cnt import Chirality, CntGeometry, chiral_angle, classify_electronic, diameter, geometry, pitch
from .characterizer import MetricsRecord, characterize, sweep, to_csv, trend_check
from .mapper import (
    DynamicNetlist,
    check_monotonicity,
    export_netlist,
    map_domino,
    map_np_dynamic,
    parse_netlist,
)
from .sim import SimConfig, SimResult, functional_mode, simulate
from .tech import (
    DeviceKind,
    DeviceParams,
    Flavor,
    TechnologyConfig,
    cnfet_threshold,
    derive_device_params,
    validate_config,
)

__version__ = "0.1.0"
