"""Event-driven switch-level simulation of clocked dynamic netlists.

The clock splits every cycle into a precharge phase (clock low) followed
by an evaluate phase (clock high).  Primary inputs are applied at the
start of each cycle, during precharge, and held for the whole cycle.
Each node transition is scheduled one step-response delay after its cause:
``ln(2) * R_path * C_node``, where the path resistance adds in series and
combines reciprocally across conducting parallel branches.  Times are
quantized to the configured resolution, which makes runs exactly
reproducible: simultaneous events commit in ascending node order.

Supply energy accumulates ``C * Vdd^2`` for every low-to-high transition
of a stage-driven node (all pull-ups lead to the rail); leakage is the
summed device off-current drawn across the measured window.  The first
cycle is excluded from all metrics as settling.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .mapper import (
    DynamicNetlist,
    Parallel,
    Series,
    StageType,
    Switch,
    check_monotonicity,
    iter_switches,
)

# 50% step-response crossing of a first-order RC charge/discharge.
RC_DELAY_FACTOR = math.log(2.0)


class SimulationError(RuntimeError):
    pass


class ContentionError(SimulationError):
    pass


class FixedPointError(SimulationError):
    """Zero-delay evaluation failed to settle; indicates a lowering bug."""


@dataclass(frozen=True)
class SimConfig:
    """One transient run: clock, cycle count, and per-cycle stimulus."""

    clock_period_s: float
    cycles: int
    stimulus: tuple[Mapping[str, int], ...] | None
    time_resolution_s: float = 1e-15
    vdd_v: float = 0.9
    record_events: bool = True

    def __post_init__(self):
        if self.clock_period_s <= 0:
            raise SimulationError(f"clock period must be positive: {self.clock_period_s}")
        if self.cycles < 2:
            raise SimulationError("need at least 2 cycles; the first is settling")
        if self.time_resolution_s <= 0:
            raise SimulationError("time resolution must be positive")
        if self.time_resolution_s > self.clock_period_s / 1e4:
            raise SimulationError(
                "time resolution too coarse: must be <= clock_period / 1e4"
            )

    def cycle_stimulus(self, inputs: Sequence[str]) -> list[dict[str, int]]:
        if self.stimulus is None:
            raise SimulationError("config has no stimulus")
        vectors = list(self.stimulus)
        if len(vectors) == 1:
            vectors = vectors * self.cycles
        if len(vectors) != self.cycles:
            raise SimulationError(
                f"stimulus covers {len(vectors)} cycles, config runs {self.cycles}"
            )
        for i, vec in enumerate(vectors):
            missing = [name for name in inputs if name not in vec]
            if missing:
                raise SimulationError(
                    f"cycle {i} stimulus missing input(s): {', '.join(sorted(missing))}"
                )
        return [dict(v) for v in vectors]


@dataclass
class SimResult:
    events: list[tuple[float, str, int]]
    supply_energy_j: float
    leakage_energy_j: float
    settle_times_s: dict[str, float | None]
    monotonicity_violations: list[str]
    measured_window_s: float


def dump_trace(result: SimResult) -> str:
    """One event per line: time, node, new level, tab-separated."""
    return "".join(f"{t!r}\t{node}\t{level}\n" for t, node, level in result.events)


def _compile_tree(graph, idx, r_of):
    if isinstance(graph, Switch):
        return (0, idx[graph.gate], 1 if graph.active_high else 0, r_of(graph.kind))
    tag = 1 if isinstance(graph, Series) else 2
    return (tag, tuple(_compile_tree(p, idx, r_of) for p in graph.parts))


def _tree_resistance(tree, levels):
    tag = tree[0]
    if tag == 0:
        return tree[3] if levels[tree[1]] == tree[2] else None
    if tag == 1:
        total = 0.0
        for part in tree[1]:
            r = _tree_resistance(part, levels)
            if r is None:
                return None
            total += r
        return total
    inv_sum = 0.0
    conducting = False
    for part in tree[1]:
        r = _tree_resistance(part, levels)
        if r is not None:
            conducting = True
            inv_sum += 1.0 / r
    return 1.0 / inv_sum if conducting else None


class _CompiledStage:
    __slots__ = ("code", "out", "name", "eval_tree", "pun_tree", "r_pre", "r_foot",
                 "footed")

    def __init__(self, code, out, name, eval_tree, pun_tree, r_pre, r_foot, footed):
        self.code = code  # 0 dyn-n, 1 dyn-p, 2 static
        self.out = out
        self.name = name
        self.eval_tree = eval_tree
        self.pun_tree = pun_tree
        self.r_pre = r_pre
        self.r_foot = r_foot
        self.footed = footed


class _Engine:
    def __init__(self, netlist: DynamicNetlist, cfg: SimConfig):
        self.cfg = cfg
        names = netlist.all_nodes()
        idx = {name: i for i, name in enumerate(names)}
        self.names = names
        self.idx = idx
        self.caps = [netlist.node_caps.get(name, 0.0) for name in names]
        self.levels = [0] * len(names)
        r_of = lambda kind: netlist.device_params[kind].r_on_ohm

        self.stages: list[_CompiledStage] = []
        self.driver_code = [-1] * len(names)
        self.readers: list[list[int]] = [[] for _ in names]
        total_ioff = 0.0
        for stage in netlist.stages:
            if stage.stage_type is StageType.DYN_N:
                code = 0
            elif stage.stage_type is StageType.DYN_P:
                code = 1
            else:
                code = 2
            eval_tree = _compile_tree(stage.eval_network, idx, r_of)
            pun_tree = (
                _compile_tree(stage.pull_up_network, idx, r_of)
                if stage.pull_up_network is not None else None
            )
            r_pre = (
                netlist.device_params[stage.precharge_kind].r_on_ohm
                if stage.precharge_kind else 0.0
            )
            r_foot = (
                netlist.device_params[stage.foot_kind].r_on_ohm
                if stage.foot_kind else 0.0
            )
            si = len(self.stages)
            out = idx[stage.out]
            self.stages.append(_CompiledStage(
                code, out, stage.out, eval_tree, pun_tree, r_pre, r_foot, stage.footed
            ))
            self.driver_code[out] = code
            for graph in stage.networks():
                for sw in iter_switches(graph):
                    if si not in self.readers[idx[sw.gate]]:
                        self.readers[idx[sw.gate]].append(si)
                    total_ioff += netlist.device_params[sw.kind].i_off_a
            if stage.precharge_kind:
                total_ioff += netlist.device_params[stage.precharge_kind].i_off_a
            if stage.foot_kind:
                total_ioff += netlist.device_params[stage.foot_kind].i_off_a
        self.total_ioff = total_ioff
        self.dyn_stage_ids = [i for i, s in enumerate(self.stages) if s.code != 2]
        self.input_idx = {name: idx[name] for name in netlist.inputs}
        self.output_nodes = {idx[node]: None for node in netlist.outputs.values()}
        self.outputs = dict(netlist.outputs)

        res = cfg.time_resolution_s
        self.res = res
        self.delay_scale = RC_DELAY_FACTOR / res
        self.period_ticks = round(cfg.clock_period_s / res)
        self.eval_offset = round(cfg.clock_period_s * (1.0 - netlist.clock_duty) / res)
        self.steady_tick = self.period_ticks  # metrics start at cycle 1
        self.vdd_sq = cfg.vdd_v * cfg.vdd_v

        n = len(names)
        self.serial = [0] * n
        self.pending_active = [False] * n
        self.pending_target = [0] * n
        self.pending_tick = [0] * n
        self.pending_count = 0
        self.heap: list[tuple[int, int, int]] = []
        self.now = 0
        self.in_eval = False

        self.events: list[tuple[float, str, int]] = []
        self.supply_energy = 0.0
        self.violations: list[str] = []
        self.settle_max: dict[int, int | None] = {n: None for n in self.output_nodes}
        self.last_eval_commit: dict[int, int | None] = dict(self.settle_max)

    # -- scheduling -------------------------------------------------------

    def _cancel(self, node: int):
        if self.pending_active[node]:
            self.pending_active[node] = False
            self.serial[node] += 1
            self.pending_count -= 1

    def _schedule(self, node: int, target: int, tick: int):
        if self.pending_active[node] and self.pending_target[node] == target:
            if tick >= self.pending_tick[node]:
                return  # transition already under way; do not restart the timer
        else:
            if self.pending_active[node]:
                self.pending_count -= 1
            self.pending_count += 1
        self.serial[node] += 1
        self.pending_active[node] = True
        self.pending_target[node] = target
        self.pending_tick[node] = tick
        heapq.heappush(self.heap, (tick, node, self.serial[node]))

    def _drive(self, st: _CompiledStage):
        levels = self.levels
        if st.code == 2:
            r_down = _tree_resistance(st.eval_tree, levels)
            r_up = _tree_resistance(st.pun_tree, levels)
            if r_down is not None and r_up is not None:
                raise ContentionError(f"contention on node {st.name}")
            if r_down is not None:
                return 0, r_down
            if r_up is not None:
                return 1, r_up
            return None
        if st.code == 0:  # dyn-n: precharged high, conditionally discharges
            if self.in_eval:
                r = _tree_resistance(st.eval_tree, levels)
                return None if r is None else (0, r + st.r_foot)
            if not st.footed:
                if _tree_resistance(st.eval_tree, levels) is not None:
                    raise ContentionError(f"contention on node {st.name}")
            return 1, st.r_pre
        # dyn-p: predischarged low, conditionally charges
        if self.in_eval:
            r = _tree_resistance(st.eval_tree, levels)
            return None if r is None else (1, r + st.r_foot)
        if not st.footed:
            if _tree_resistance(st.eval_tree, levels) is not None:
                raise ContentionError(f"contention on node {st.name}")
        return 0, st.r_pre

    def _update_stage(self, si: int):
        st = self.stages[si]
        drive = self._drive(st)
        node = st.out
        if drive is None:
            self._cancel(node)
            return
        target, r = drive
        if target == self.levels[node]:
            self._cancel(node)
            return
        delay = round(r * self.caps[node] * self.delay_scale)
        self._schedule(node, target, self.now + (delay if delay > 0 else 1))

    def _commit(self, node: int, target: int, tick: int):
        self.levels[node] = target
        if self.cfg.record_events:
            self.events.append((tick * self.res, self.names[node], target))
        if target == 1 and tick >= self.steady_tick:
            self.supply_energy += self.caps[node] * self.vdd_sq
        if self.in_eval:
            code = self.driver_code[node]
            if (code == 0 and target == 1) or (code == 1 and target == 0):
                kind = "rise on dyn_n" if code == 0 else "fall on dyn_p"
                self.violations.append(
                    f"{kind} node {self.names[node]} at {tick * self.res!r} s"
                )
            if tick >= self.steady_tick and node in self.last_eval_commit:
                self.last_eval_commit[node] = tick
        for si in self.readers[node]:
            self._update_stage(si)

    def _process_until(self, end_tick: int, phase: str):
        heap = self.heap
        while heap and heap[0][0] < end_tick:
            tick, node, serial = heapq.heappop(heap)
            if not self.pending_active[node] or self.serial[node] != serial:
                continue
            self.pending_active[node] = False
            self.pending_count -= 1
            self.now = tick
            self._commit(node, self.pending_target[node], tick)
        self.now = end_tick
        if self.pending_count:
            unsettled = sorted(
                self.names[n] for n in range(len(self.names)) if self.pending_active[n]
            )
            raise SimulationError(
                f"clock period too short: {len(unsettled)} node(s) unsettled at end "
                f"of {phase}: {', '.join(unsettled[:8])}"
            )

    # -- main loop ----------------------------------------------------------

    def run(self, stimulus: list[dict[str, int]]) -> SimResult:
        for cycle, vector in enumerate(stimulus):
            t0 = cycle * self.period_ticks
            t_eval = t0 + self.eval_offset
            t_end = t0 + self.period_ticks
            self.now = t0
            self.in_eval = False
            dirty: set[int] = set()
            for name, node in self.input_idx.items():
                value = vector[name] & 1
                if self.levels[node] != value:
                    self.levels[node] = value
                    if self.cfg.record_events:
                        self.events.append((t0 * self.res, name, value))
                    dirty.update(self.readers[node])
            if cycle == 0:
                for si in range(len(self.stages)):
                    self._update_stage(si)
            else:
                for si in sorted(dirty.union(self.dyn_stage_ids)):
                    self._update_stage(si)
            self._process_until(t_eval, "precharge")

            self.in_eval = True
            for si in self.dyn_stage_ids:
                self._update_stage(si)
            self._process_until(t_end, "evaluate")
            if cycle >= 1:
                for node, last in self.last_eval_commit.items():
                    if last is not None:
                        prev = self.settle_max[node]
                        settle = last - t_eval
                        if prev is None or settle > prev:
                            self.settle_max[node] = settle
                        self.last_eval_commit[node] = None

        window = (self.cfg.cycles - 1) * self.period_ticks * self.res
        settle_times: dict[str, float | None] = {}
        for name, node in self.outputs.items():
            ticks = self.settle_max[self.idx[node]]
            settle_times[name] = None if ticks is None else ticks * self.res
        return SimResult(
            events=self.events,
            supply_energy_j=self.supply_energy,
            leakage_energy_j=self.total_ioff * self.cfg.vdd_v * window,
            settle_times_s=settle_times,
            monotonicity_violations=self.violations,
            measured_window_s=window,
        )


def simulate(netlist: DynamicNetlist, cfg: SimConfig,
             check_discipline: bool = True) -> SimResult:
    """Transient run of `netlist` under `cfg`.

    The netlist must satisfy the dynamic-cascade discipline; pass
    ``check_discipline=False`` only when the same netlist was already
    checked (e.g. across repeated runs).
    """
    if check_discipline:
        problems = check_monotonicity(netlist)
        if problems:
            raise SimulationError(
                "netlist violates the dynamic discipline: " + "; ".join(problems[:4])
            )
    stimulus = cfg.cycle_stimulus(netlist.inputs)
    return _Engine(netlist, cfg).run(stimulus)


# ---------------------------------------------------------------------------
# Zero-delay functional evaluation


def functional_mode(netlist: DynamicNetlist, inputs: Mapping[str, int],
                    mask: int = 1) -> dict[str, int]:
    """Settled logical outputs of one precharge+evaluate cycle.

    Levels may be multi-bit integers evaluated bitwise in parallel; `mask`
    is the all-ones word of that width.  Used as the lowering-correctness
    oracle against plain network evaluation.
    """
    missing = [name for name in netlist.inputs if name not in inputs]
    if missing:
        raise SimulationError(f"missing input(s): {', '.join(sorted(missing))}")
    levels = {name: 0 for name in netlist.all_nodes()}
    for name in netlist.inputs:
        levels[name] = inputs[name] & mask

    def conduct(graph) -> int:
        if isinstance(graph, Switch):
            v = levels[graph.gate]
            return v if graph.active_high else v ^ mask
        if isinstance(graph, Series):
            out = mask
            for part in graph.parts:
                out &= conduct(part)
            return out
        out = 0
        for part in graph.parts:
            out |= conduct(part)
        return out

    def settle(phase_eval: bool):
        limit = len(netlist.stages) + 2
        for _ in range(limit):
            changed = False
            for stage in netlist.stages:
                if stage.stage_type is StageType.DYN_N:
                    new = levels[stage.out] & ~conduct(stage.eval_network) & mask \
                        if phase_eval else mask
                elif stage.stage_type is StageType.DYN_P:
                    new = levels[stage.out] | conduct(stage.eval_network) \
                        if phase_eval else 0
                else:
                    new = ~conduct(stage.eval_network) & mask
                if new != levels[stage.out]:
                    levels[stage.out] = new
                    changed = True
            if not changed:
                return
        raise FixedPointError("no fixed point; the netlist is not a sound lowering")

    settle(phase_eval=False)
    settle(phase_eval=True)
    return {name: levels[node] for name, node in netlist.outputs.items()}
