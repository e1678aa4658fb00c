"""Lowering Boolean networks into clocked switch-level netlists.

Two lowering styles are supported:

* ``domino``: every AND/OR becomes a footed n-type dynamic stage followed
  by a static inverter, so all logic signals rise monotonically during
  evaluation.
* ``np``: n-type stages (precharged high on the clock) alternate with
  p-type stages (predischarged low on the inverted clock).  An n-stage
  output carries the complement of its logic value and may only feed
  p-stages; a p-stage output carries the true value and may only feed
  n-stages.  Stable signals (primary inputs, or static gates fed only by
  primary inputs) may feed either polarity, inverted through a shared
  static inverter where a p-stage needs the complement.

XOR and NOT are realized as static CMOS gates in both styles; input
complements they need are absorbed into switch polarities.  Single-fanout
AND/OR feeding another AND/OR is inlined into its consumer, producing the
usual complex series-parallel gates.

Netlists serialize to a line-oriented text format (see `export_netlist`)
that parses back to an identical netlist.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .cla import GateOp, LogicNetwork
from .tech import (
    FLAVOR_KINDS,
    DeviceKind,
    DeviceParams,
    Flavor,
    FlavorParams,
    TechnologyConfig,
    derive_flavor_devices,
    load_flavor_params,
    require_valid,
)

STYLES = ("domino", "np")


class MappingError(ValueError):
    pass


class ParityError(MappingError):
    """A stage would have to consume both dynamic polarities."""


class NetlistFormatError(ValueError):
    pass


class StageType(Enum):
    DYN_N = "dyn_n"
    DYN_P = "dyn_p"
    STATIC_INV = "static_inv"
    STATIC_XOR = "static_xor"


class ClockPhase(Enum):
    CLK = "clk"
    CLK_BAR = "clkbar"
    NONE = "-"


@dataclass(frozen=True)
class Switch:
    """One transistor: conducts when its gate node sits at the active level."""

    kind: DeviceKind
    gate: str
    active_high: bool


@dataclass(frozen=True)
class Series:
    parts: tuple


@dataclass(frozen=True)
class Parallel:
    parts: tuple


def iter_switches(graph):
    if isinstance(graph, Switch):
        yield graph
    else:
        for part in graph.parts:
            yield from iter_switches(part)


def conduction(graph, level_of) -> bool:
    """Whether the graph conducts under `level_of(gate_node)`."""
    if isinstance(graph, Switch):
        return level_of(graph.gate) == (1 if graph.active_high else 0)
    if isinstance(graph, Series):
        return all(conduction(p, level_of) for p in graph.parts)
    return any(conduction(p, level_of) for p in graph.parts)


def path_resistance(graph, level_of, r_of) -> float | None:
    """Conducting-path resistance, or None when the graph is off.

    Series resistances add; conducting parallel branches combine
    reciprocally.
    """
    if isinstance(graph, Switch):
        active = level_of(graph.gate) == (1 if graph.active_high else 0)
        return r_of(graph.kind) if active else None
    if isinstance(graph, Series):
        total = 0.0
        for part in graph.parts:
            r = path_resistance(part, level_of, r_of)
            if r is None:
                return None
            total += r
        return total
    inv_sum = 0.0
    conducting = False
    for part in graph.parts:
        r = path_resistance(part, level_of, r_of)
        if r is not None:
            conducting = True
            inv_sum += 1.0 / r
    return 1.0 / inv_sum if conducting else None


@dataclass(frozen=True)
class DynamicStage:
    stage_type: StageType
    out: str
    eval_network: object  # pull-down network for static stages
    pull_up_network: object | None
    clock_phase: ClockPhase
    footed: bool
    precharge_kind: DeviceKind | None
    foot_kind: DeviceKind | None

    def __post_init__(self):
        t = self.stage_type
        if t is StageType.DYN_N:
            self._check_dynamic(ClockPhase.CLK, want_pull_up=False)
        elif t is StageType.DYN_P:
            self._check_dynamic(ClockPhase.CLK_BAR, want_pull_up=True)
        else:
            if self.clock_phase is not ClockPhase.NONE:
                raise MappingError(f"{self.out}: static stage must not bind a clock")
            if self.pull_up_network is None:
                raise MappingError(f"{self.out}: static stage needs a pull-up network")
            for sw in iter_switches(self.eval_network):
                if sw.kind.is_pull_up:
                    raise MappingError(f"{self.out}: p-kind device in pull-down network")
            for sw in iter_switches(self.pull_up_network):
                if not sw.kind.is_pull_up:
                    raise MappingError(f"{self.out}: n-kind device in pull-up network")

    def _check_dynamic(self, phase, want_pull_up):
        if self.clock_phase is not phase:
            raise MappingError(f"{self.out}: wrong clock phase {self.clock_phase.value}")
        if self.pull_up_network is not None:
            raise MappingError(f"{self.out}: dynamic stage has a single network")
        if self.precharge_kind is None or self.precharge_kind.is_pull_up == want_pull_up:
            raise MappingError(f"{self.out}: bad precharge device")
        if self.footed:
            if self.foot_kind is None or self.foot_kind.is_pull_up != want_pull_up:
                raise MappingError(f"{self.out}: bad foot device")
        elif self.foot_kind is not None:
            raise MappingError(f"{self.out}: foot device on unfooted stage")
        for sw in iter_switches(self.eval_network):
            if sw.kind.is_pull_up != want_pull_up:
                raise MappingError(f"{self.out}: wrong device kind in evaluation network")
            if sw.active_high == want_pull_up:
                raise MappingError(f"{self.out}: evaluation switch polarity must match kind")

    @property
    def is_dynamic(self) -> bool:
        return self.stage_type in (StageType.DYN_N, StageType.DYN_P)

    def input_node(self) -> str:
        """Gate node of a static inverter's single switch."""
        if self.stage_type is not StageType.STATIC_INV:
            raise MappingError(f"{self.out}: not an inverter")
        return next(iter_switches(self.eval_network)).gate

    def networks(self):
        yield self.eval_network
        if self.pull_up_network is not None:
            yield self.pull_up_network


@dataclass
class DynamicNetlist:
    bits: int
    style: str
    flavor: Flavor
    vdd_v: float
    clock_period_s: float
    clock_duty: float
    inputs: tuple[str, ...]
    outputs: dict[str, str]
    stages: tuple[DynamicStage, ...]
    node_caps: dict[str, float]
    device_params: dict[DeviceKind, DeviceParams]
    wire_cap_per_fanout_f: float

    def driver_map(self) -> dict[str, DynamicStage]:
        drivers = {}
        for stage in self.stages:
            if stage.out in drivers:
                raise MappingError(f"node {stage.out} driven by more than one stage")
            if stage.out in self.inputs:
                raise MappingError(f"node {stage.out} collides with a primary input")
            drivers[stage.out] = stage
        return drivers

    def all_nodes(self) -> list[str]:
        return list(self.inputs) + [s.out for s in self.stages]


def count_stage_types(netlist: DynamicNetlist) -> Counter:
    return Counter(stage.stage_type for stage in netlist.stages)


def count_device_kinds(netlist: DynamicNetlist) -> Counter:
    """Every device in the netlist, including precharge and foot transistors."""
    counts: Counter = Counter()
    for stage in netlist.stages:
        for graph in stage.networks():
            for sw in iter_switches(graph):
                counts[sw.kind] += 1
        if stage.precharge_kind is not None:
            counts[stage.precharge_kind] += 1
        if stage.foot_kind is not None:
            counts[stage.foot_kind] += 1
    return counts


# ---------------------------------------------------------------------------
# Lowering


class _SignalForm(Enum):
    STABLE = "stable"     # true value, fixed during evaluation
    N_COMP = "ncomp"      # complement value on an n-stage dynamic node (falls)
    P_TRUE = "ptrue"      # true value on a p-stage dynamic node (rises)
    STATIC = "static"     # true value from a static gate fed by dynamic signals
    RISING = "rising"     # true value behind a domino inverter (rises)


class _Lowering:
    def __init__(self, network: LogicNetwork, tech: TechnologyConfig,
                 params: FlavorParams | None):
        require_valid(tech)
        if params is None:
            params = load_flavor_params(tech.flavor)
        self.network = network
        self.tech = tech
        self.params = params
        self.devices = derive_flavor_devices(tech, params=params)
        self.n_kind, self.p_kind = FLAVOR_KINDS[tech.flavor]
        self.stages: list[DynamicStage] = []
        self.sig: dict[int, str] = {}
        self.form: dict[int, _SignalForm] = {}
        self._comp_alias: dict[int, str] = {}
        self._true_alias: dict[int, str] = {}
        self._inlined = self._find_inlined()
        self._outputs_by_nid: dict[int, list[str]] = {}
        for name, nid in network.outputs.items():
            self._outputs_by_nid.setdefault(nid, []).append(name)

    def _find_inlined(self) -> set[int]:
        uses: dict[int, list] = {node.id: [] for node in self.network.nodes}
        for node in self.network.nodes:
            for f in node.fanins:
                uses[f].append(node.id)
        for nid in self.network.outputs.values():
            uses[nid].append(None)  # network output pins count as consumers
        inlined = set()
        for node in self.network.nodes:
            if node.op not in (GateOp.AND, GateOp.OR):
                continue
            consumers = uses[node.id]
            if len(consumers) != 1 or consumers[0] is None:
                continue
            if self.network.nodes[consumers[0]].op in (GateOp.AND, GateOp.OR):
                inlined.add(node.id)
        return inlined

    def _sp_template(self, nid: int):
        """('s'|'p', parts) with ('leaf', id) leaves; same-type nesting flattened."""
        node = self.network.nodes[nid]
        tag = "s" if node.op is GateOp.AND else "p"
        parts = []
        for f in node.fanins:
            if f in self._inlined:
                sub = self._sp_template(f)
                if sub[0] == tag:
                    parts.extend(sub[1])
                else:
                    parts.append(sub)
            else:
                parts.append(("leaf", f))
        return (tag, parts)

    def _template_leaves(self, template, acc):
        tag, parts = template
        for part in parts:
            if part[0] == "leaf":
                acc.append(part[1])
            else:
                self._template_leaves(part, acc)
        return acc

    def _build_graph(self, template, switch_for_leaf):
        tag, parts = template
        built = []
        for part in parts:
            if part[0] == "leaf":
                built.append(switch_for_leaf(part[1]))
            else:
                built.append(self._build_graph(part, switch_for_leaf))
        if len(built) == 1:
            return built[0]
        return Series(tuple(built)) if tag == "s" else Parallel(tuple(built))

    def _stage_out_name(self, nid: int, final_form: _SignalForm) -> str:
        """Primary outputs take their output name when the stage already
        presents the true value; complemented stages get an internal name
        and a fix-up inverter later."""
        names = self._outputs_by_nid.get(nid)
        if names and final_form is not _SignalForm.N_COMP:
            return names[0]
        return f"n{nid}"

    def _emit(self, stage: DynamicStage):
        self.stages.append(stage)

    def _static_inverter(self, out: str, src: str):
        return DynamicStage(
            stage_type=StageType.STATIC_INV,
            out=out,
            eval_network=Switch(self.n_kind, src, True),
            pull_up_network=Switch(self.p_kind, src, False),
            clock_phase=ClockPhase.NONE,
            footed=False,
            precharge_kind=None,
            foot_kind=None,
        )

    def _comp_of(self, leaf: int) -> str:
        """Complement rail of a non-dynamic signal, via a shared inverter."""
        alias = self._comp_alias.get(leaf)
        if alias is None:
            alias = f"{self.sig[leaf]}.b"
            self._emit(self._static_inverter(alias, self.sig[leaf]))
            self._comp_alias[leaf] = alias
        return alias

    def _active_for(self, leaf: int, condition_true: bool) -> bool:
        """Physical gate level at which 'leaf's logic value == condition' holds."""
        if self.form[leaf] is _SignalForm.N_COMP:
            return not condition_true
        return condition_true

    def _emit_static_xor(self, nid: int, fanins):
        if len(fanins) != 2:
            raise MappingError(f"node {nid}: only 2-input xor is supported")
        s = [self.sig[f] for f in fanins]
        act = [self._active_for(f, True) for f in fanins]

        def n_sw(i, cond):
            return Switch(self.n_kind, s[i], act[i] if cond else not act[i])

        def p_sw(i, cond):
            return Switch(self.p_kind, s[i], act[i] if cond else not act[i])

        pdn = Parallel((Series((n_sw(0, True), n_sw(1, True))),
                        Series((n_sw(0, False), n_sw(1, False)))))
        pun = Parallel((Series((p_sw(0, True), p_sw(1, False))),
                        Series((p_sw(0, False), p_sw(1, True)))))
        out = self._stage_out_name(nid, _SignalForm.STATIC)
        self._emit(DynamicStage(
            stage_type=StageType.STATIC_XOR,
            out=out,
            eval_network=pdn,
            pull_up_network=pun,
            clock_phase=ClockPhase.NONE,
            footed=False,
            precharge_kind=None,
            foot_kind=None,
        ))
        stable = all(self.form[f] is _SignalForm.STABLE for f in fanins)
        self.sig[nid] = out
        self.form[nid] = _SignalForm.STABLE if stable else _SignalForm.STATIC

    def _emit_static_not(self, nid: int, fanin: int):
        src = self.sig[fanin]
        out = self._stage_out_name(nid, _SignalForm.STATIC)
        active = self._active_for(fanin, True)
        self._emit(DynamicStage(
            stage_type=StageType.STATIC_INV,
            out=out,
            eval_network=Switch(self.n_kind, src, active),
            pull_up_network=Switch(self.p_kind, src, not active),
            clock_phase=ClockPhase.NONE,
            footed=False,
            precharge_kind=None,
            foot_kind=None,
        ))
        stable = self.form[fanin] is _SignalForm.STABLE
        self.sig[nid] = out
        self.form[nid] = _SignalForm.STABLE if stable else _SignalForm.STATIC

    def _fix_outputs(self) -> dict[str, str]:
        outputs = {}
        for name, nid in self.network.outputs.items():
            if self.form[nid] is _SignalForm.N_COMP:
                self._emit(self._static_inverter(name, self.sig[nid]))
                outputs[name] = name
            else:
                outputs[name] = self.sig[nid]
        return outputs

    def _finish(self, style: str, outputs: dict[str, str]) -> DynamicNetlist:
        wire = self.params.wire_cap_per_fanout_f
        caps = {name: 0.0 for name in self.network.inputs}
        for stage in self.stages:
            caps[stage.out] = 0.0
        pair_cap = (self.devices[self.n_kind].c_gate_f
                    + self.devices[self.p_kind].c_gate_f + 2.0 * wire)
        for stage in self.stages:
            if stage.stage_type is StageType.STATIC_XOR:
                # The xor cell regenerates both polarities behind an input
                # inverter, so each input pin presents one n- and one p-gate
                # regardless of how often the networks reference it.
                for gate in {sw.gate for g in stage.networks()
                             for sw in iter_switches(g)}:
                    caps[gate] += pair_cap
                continue
            for graph in stage.networks():
                for sw in iter_switches(graph):
                    caps[sw.gate] += self.devices[sw.kind].c_gate_f + wire
        for node in set(outputs.values()):
            caps[node] += wire  # external measurement load
        netlist = DynamicNetlist(
            bits=self.network.bit_width,
            style=style,
            flavor=self.tech.flavor,
            vdd_v=self.tech.vdd_v,
            clock_period_s=1.0 / self.tech.clock_hz,
            clock_duty=0.5,
            inputs=tuple(self.network.inputs),
            outputs=outputs,
            stages=tuple(self.stages),
            node_caps=caps,
            device_params=self.devices,
            wire_cap_per_fanout_f=wire,
        )
        netlist.driver_map()  # raises on duplicate drivers
        return netlist

    # -- domino ------------------------------------------------------------

    def lower_domino(self) -> DynamicNetlist:
        for node in self.network.nodes:
            nid = node.id
            if node.op is GateOp.INPUT:
                self.sig[nid] = node.name
                self.form[nid] = _SignalForm.STABLE
            elif node.op is GateOp.CONST:
                raise MappingError("constant nodes are not supported")
            elif node.op in (GateOp.AND, GateOp.OR):
                if nid in self._inlined:
                    continue
                template = self._sp_template(nid)
                dyn = f"n{nid}.d"
                eval_net = self._build_graph(
                    template, lambda f: Switch(self.n_kind, self.sig[f], True)
                )
                self._emit(DynamicStage(
                    stage_type=StageType.DYN_N,
                    out=dyn,
                    eval_network=eval_net,
                    pull_up_network=None,
                    clock_phase=ClockPhase.CLK,
                    footed=True,
                    precharge_kind=self.p_kind,
                    foot_kind=self.n_kind,
                ))
                out = self._stage_out_name(nid, _SignalForm.RISING)
                self._emit(self._static_inverter(out, dyn))
                self.sig[nid] = out
                self.form[nid] = _SignalForm.RISING
            elif node.op is GateOp.XOR:
                self._emit_static_xor(nid, node.fanins)
            else:  # NOT
                self._emit_static_not(nid, node.fanins[0])
        return self._finish("domino", self._fix_outputs())

    # -- np ---------------------------------------------------------------
    #
    # Stage polarity follows what a stage consumes: p-stage outputs and
    # stable signals switch an n-network directly; n-stage outputs switch
    # a p-network.  Each AND/OR resolves in topological order: polarity is
    # the majority demand of its inputs, and a single-fanout AND/OR child
    # is fused into its consumer when its own polarity matches.  A leaf
    # arriving in the minority polarity goes through a shared static
    # inverter, which is safe on either side: an inverter behind an
    # n-stage rises monotonically and may feed n-networks, one behind a
    # p-stage falls and may feed p-networks.

    def lower_np(self) -> DynamicNetlist:
        uses: dict[int, list] = {node.id: [] for node in self.network.nodes}
        for node in self.network.nodes:
            for f in node.fanins:
                uses[f].append(node.id)
        for nid in self.network.outputs.values():
            uses[nid].append(None)

        stage_type: dict[int, StageType] = {}
        template: dict[int, tuple] = {}
        fused: set[int] = set()

        def is_candidate(f: int) -> bool:
            node = self.network.nodes[f]
            return (
                node.op in (GateOp.AND, GateOp.OR)
                and len(uses[f]) == 1
                and uses[f][0] is not None
                and self.network.nodes[uses[f][0]].op in (GateOp.AND, GateOp.OR)
            )

        def resolve(nid: int, fanins):
            p_votes = 0
            n_votes = 0
            candidates = []
            for f in fanins:
                if is_candidate(f):
                    candidates.append(f)
                    # fusing keeps the child's own polarity
                    if stage_type[f] is StageType.DYN_P:
                        p_votes += 1
                    else:
                        n_votes += 1
                elif self.network.nodes[f].op in (GateOp.AND, GateOp.OR):
                    # consuming a standalone dynamic output flips polarity
                    if stage_type[f] is StageType.DYN_N:
                        p_votes += 1
                    else:
                        n_votes += 1
            if p_votes > n_votes:
                chosen = StageType.DYN_P
            elif n_votes > p_votes:
                chosen = StageType.DYN_N
            else:
                chosen = StageType.DYN_P if p_votes else StageType.DYN_N
            stage_type[nid] = chosen
            tag = "s" if self.network.nodes[nid].op is GateOp.AND else "p"
            parts = []
            candidate_set = set(candidates)
            for f in fanins:
                if f in candidate_set and stage_type[f] is chosen:
                    fused.add(f)
                    sub = template[f]
                    if sub[0] == tag:
                        parts.extend(sub[1])
                    else:
                        parts.append(sub)
                else:
                    parts.append(("leaf", f))
            template[nid] = (tag, parts)

        for node in self.network.nodes:
            if node.op in (GateOp.AND, GateOp.OR):
                resolve(node.id, node.fanins)

        for node in self.network.nodes:
            nid = node.id
            if node.op is GateOp.INPUT:
                self.sig[nid] = node.name
                self.form[nid] = _SignalForm.STABLE
            elif node.op is GateOp.CONST:
                raise MappingError("constant nodes are not supported")
            elif node.op in (GateOp.AND, GateOp.OR):
                if nid in fused:
                    continue
                self._emit_np_stage(nid, stage_type[nid], template[nid])
            elif node.op is GateOp.XOR:
                self._emit_static_xor(nid, node.fanins)
            else:  # NOT
                self._emit_static_not(nid, node.fanins[0])
        return self._finish("np", self._fix_outputs())

    def _true_of(self, leaf: int) -> str:
        """True rail of a complemented dynamic signal, via a shared inverter."""
        alias = self._true_alias.get(leaf)
        if alias is None:
            alias = f"{self.sig[leaf]}.t"
            self._emit(self._static_inverter(alias, self.sig[leaf]))
            self._true_alias[leaf] = alias
        return alias

    def _emit_np_stage(self, nid: int, kind: StageType, template: tuple):
        if kind is StageType.DYN_P:
            def leaf_switch(f):
                if self.form[f] is _SignalForm.N_COMP:
                    return Switch(self.p_kind, self.sig[f], False)
                return Switch(self.p_kind, self._comp_of(f), False)

            out = self._stage_out_name(nid, _SignalForm.P_TRUE)
            self._emit(DynamicStage(
                stage_type=StageType.DYN_P,
                out=out,
                eval_network=self._build_graph(template, leaf_switch),
                pull_up_network=None,
                clock_phase=ClockPhase.CLK_BAR,
                footed=True,
                precharge_kind=self.n_kind,
                foot_kind=self.p_kind,
            ))
            self.form[nid] = _SignalForm.P_TRUE
        else:
            def leaf_switch(f):
                if self.form[f] is _SignalForm.N_COMP:
                    return Switch(self.n_kind, self._true_of(f), True)
                return Switch(self.n_kind, self.sig[f], True)

            out = self._stage_out_name(nid, _SignalForm.N_COMP)
            self._emit(DynamicStage(
                stage_type=StageType.DYN_N,
                out=out,
                eval_network=self._build_graph(template, leaf_switch),
                pull_up_network=None,
                clock_phase=ClockPhase.CLK,
                footed=True,
                precharge_kind=self.p_kind,
                foot_kind=self.n_kind,
            ))
            self.form[nid] = _SignalForm.N_COMP
        self.sig[nid] = out


def map_domino(network: LogicNetwork, tech: TechnologyConfig,
               params: FlavorParams | None = None) -> DynamicNetlist:
    """Domino lowering: DynN stage plus static inverter per AND/OR."""
    return _Lowering(network, tech, params).lower_domino()


def map_np_dynamic(network: LogicNetwork, tech: TechnologyConfig,
                   params: FlavorParams | None = None) -> DynamicNetlist:
    """Alternating n/p dynamic lowering without interposed inverters."""
    return _Lowering(network, tech, params).lower_np()


# ---------------------------------------------------------------------------
# Static discipline check


def stable_nodes(netlist: DynamicNetlist) -> set[str]:
    """Signals fixed during evaluation: inputs, plus static gates fed only
    by such signals (iterated to closure)."""
    stable = set(netlist.inputs)
    changed = True
    while changed:
        changed = False
        for stage in netlist.stages:
            if stage.is_dynamic or stage.out in stable:
                continue
            gates = {sw.gate for g in stage.networks() for sw in iter_switches(g)}
            if gates <= stable:
                stable.add(stage.out)
                changed = True
    return stable


def check_monotonicity(netlist: DynamicNetlist) -> list[str]:
    """Offending stage inputs under the dynamic-cascade discipline.

    An n-stage may take stable signals, inverter outputs that follow an
    n-stage, or p-stage outputs; a p-stage takes the symmetric set.
    Violations are returned as messages, not raised.
    """
    drivers = netlist.driver_map()
    stable = stable_nodes(netlist)

    def inverter_after(node: str, dyn_type: StageType) -> bool:
        stage = drivers.get(node)
        if stage is None or stage.stage_type is not StageType.STATIC_INV:
            return False
        src = drivers.get(stage.input_node())
        return src is not None and src.stage_type is dyn_type

    violations = []
    for stage in netlist.stages:
        if not stage.is_dynamic:
            continue
        if stage.stage_type is StageType.DYN_N:
            opposite, own = StageType.DYN_P, StageType.DYN_N
        else:
            opposite, own = StageType.DYN_N, StageType.DYN_P
        for sw in iter_switches(stage.eval_network):
            node = sw.gate
            if node in stable:
                continue
            driver = drivers.get(node)
            if driver is not None and driver.stage_type is opposite:
                continue
            if inverter_after(node, own):
                continue
            violations.append(
                f"{stage.stage_type.value} stage {stage.out}: input {node} is not "
                f"a stable signal, a {opposite.value} output, or an inverter "
                f"following a {own.value} stage"
            )
    return violations


# ---------------------------------------------------------------------------
# Text format


def _format_graph(graph) -> str:
    if isinstance(graph, Switch):
        sign = "+" if graph.active_high else "-"
        return f"{graph.kind.value}{sign}{graph.gate}"
    tag = "s" if isinstance(graph, Series) else "p"
    inner = " ".join(_format_graph(p) for p in graph.parts)
    return f"({tag} {inner})"


def export_netlist(netlist: DynamicNetlist) -> str:
    """Serialize to the stable text form.

    Header lines carry scalars (`bits`, `style`, `tech`, `vdd`,
    `clock_period`, `clock_duty`, `wire_cap`), followed by one line per
    device kind, input, output, node capacitance, and stage.  A stage line
    reads ``stage <type> <out> <clk|clkbar|-> <footed|unfooted|->`` then
    ``pre=<kind> foot=<kind|->`` and one switch graph for dynamic stages,
    or two graphs (pull-down, pull-up) for static stages.  Switch tokens
    are ``<Kind><+|-><gate-node>``; graphs nest as ``(s ...)``/``(p ...)``.
    """
    lines = [
        "clachar-netlist 1",
        f"bits {netlist.bits}",
        f"style {netlist.style}",
        f"tech {netlist.flavor.value}",
        f"vdd {netlist.vdd_v!r}",
        f"clock_period {netlist.clock_period_s!r}",
        f"clock_duty {netlist.clock_duty!r}",
        f"wire_cap {netlist.wire_cap_per_fanout_f!r}",
    ]
    for kind in sorted(netlist.device_params, key=lambda k: k.value):
        p = netlist.device_params[kind]
        lines.append(
            f"device {kind.value} {p.v_th_v!r} {p.r_on_ohm!r} {p.c_gate_f!r} {p.i_off_a!r}"
        )
    for name in netlist.inputs:
        lines.append(f"input {name}")
    for name, node in netlist.outputs.items():
        lines.append(f"output {name} {node}")
    for node, cap in netlist.node_caps.items():
        lines.append(f"node {node} {cap!r}")
    for stage in netlist.stages:
        footed = "footed" if stage.footed else ("unfooted" if stage.is_dynamic else "-")
        parts = [
            "stage",
            stage.stage_type.value,
            stage.out,
            stage.clock_phase.value,
            footed,
            f"pre={stage.precharge_kind.value if stage.precharge_kind else '-'}",
            f"foot={stage.foot_kind.value if stage.foot_kind else '-'}",
            _format_graph(stage.eval_network),
        ]
        if stage.pull_up_network is not None:
            parts.append(_format_graph(stage.pull_up_network))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _parse_switch(token: str) -> Switch:
    for kind in DeviceKind:
        prefix = kind.value
        if token.startswith(prefix) and len(token) > len(prefix) + 1 \
                and token[len(prefix)] in "+-":
            return Switch(kind, token[len(prefix) + 1:], token[len(prefix)] == "+")
    raise NetlistFormatError(f"bad switch token: {token!r}")


def _lex_graph_tokens(raw_tokens):
    """Split trailing close-parens off whitespace-separated tokens."""
    tokens = []
    for tok in raw_tokens:
        closers = 0
        while tok.endswith(")") and tok != ")":
            tok = tok[:-1]
            closers += 1
        if tok:
            tokens.append(tok)
        tokens.extend(")" * closers)
    return tokens


class _TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        token = self.peek()
        if token is None:
            raise NetlistFormatError("unexpected end of stage line")
        self.pos += 1
        return token


def _parse_graph(stream: _TokenStream):
    token = stream.next()
    if token in ("(s", "(p"):
        parts = []
        while stream.peek() != ")":
            parts.append(_parse_graph(stream))
        stream.next()
        cls = Series if token == "(s" else Parallel
        return cls(tuple(parts))
    return _parse_switch(token)


def parse_netlist(text: str) -> DynamicNetlist:
    """Inverse of `export_netlist`."""
    scalars: dict[str, str] = {}
    devices: dict[DeviceKind, DeviceParams] = {}
    inputs: list[str] = []
    outputs: dict[str, str] = {}
    caps: dict[str, float] = {}
    stages: list[DynamicStage] = []
    kind_by_name = {k.value: k for k in DeviceKind}

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split() != ["clachar-netlist", "1"]:
        raise NetlistFormatError("missing or unsupported netlist header")
    for line in lines[1:]:
        fields = line.split()
        tag = fields[0]
        if tag in ("bits", "style", "tech", "vdd", "clock_period", "clock_duty",
                   "wire_cap"):
            scalars[tag] = fields[1]
        elif tag == "device":
            kind = kind_by_name.get(fields[1])
            if kind is None:
                raise NetlistFormatError(f"unknown device kind {fields[1]!r}")
            devices[kind] = DeviceParams(
                kind=kind,
                v_th_v=float(fields[2]),
                r_on_ohm=float(fields[3]),
                c_gate_f=float(fields[4]),
                i_off_a=float(fields[5]),
            )
        elif tag == "input":
            inputs.append(fields[1])
        elif tag == "output":
            outputs[fields[1]] = fields[2]
        elif tag == "node":
            caps[fields[1]] = float(fields[2])
        elif tag == "stage":
            stages.append(_parse_stage(fields))
        else:
            raise NetlistFormatError(f"unknown line tag {tag!r}")

    missing = [k for k in ("bits", "style", "tech", "vdd", "clock_period",
                           "clock_duty", "wire_cap") if k not in scalars]
    if missing:
        raise NetlistFormatError(f"missing header line(s): {', '.join(missing)}")
    try:
        flavor = Flavor(scalars["tech"])
    except ValueError as exc:
        raise NetlistFormatError(f"unknown tech {scalars['tech']!r}") from exc
    netlist = DynamicNetlist(
        bits=int(scalars["bits"]),
        style=scalars["style"],
        flavor=flavor,
        vdd_v=float(scalars["vdd"]),
        clock_period_s=float(scalars["clock_period"]),
        clock_duty=float(scalars["clock_duty"]),
        inputs=tuple(inputs),
        outputs=outputs,
        stages=tuple(stages),
        node_caps=caps,
        device_params=devices,
        wire_cap_per_fanout_f=float(scalars["wire_cap"]),
    )
    netlist.driver_map()
    return netlist


def _parse_stage(fields: list[str]) -> DynamicStage:
    if len(fields) < 8:
        raise NetlistFormatError(f"short stage line: {' '.join(fields)}")
    try:
        stage_type = StageType(fields[1])
        phase = ClockPhase(fields[3])
    except ValueError as exc:
        raise NetlistFormatError(f"bad stage line: {' '.join(fields)}") from exc
    footed = fields[4] == "footed"
    kind_by_name = {k.value: k for k in DeviceKind}

    def opt_kind(token, label):
        value = token.split("=", 1)[1]
        if value == "-":
            return None
        kind = kind_by_name.get(value)
        if kind is None:
            raise NetlistFormatError(f"bad {label} device {value!r}")
        return kind

    stream = _TokenStream(_lex_graph_tokens(fields[7:]))
    eval_network = _parse_graph(stream)
    pull_up = None
    if stage_type in (StageType.STATIC_INV, StageType.STATIC_XOR):
        pull_up = _parse_graph(stream)
    if stream.peek() is not None:
        raise NetlistFormatError(f"trailing tokens on stage line: {stream.peek()!r}")
    return DynamicStage(
        stage_type=stage_type,
        out=fields[2],
        eval_network=eval_network,
        pull_up_network=pull_up,
        clock_phase=phase,
        footed=footed,
        precharge_kind=opt_kind(fields[5], "precharge"),
        foot_kind=opt_kind(fields[6], "foot"),
    )
