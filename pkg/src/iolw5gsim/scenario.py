"""Scenario composition and execution.

A Scenario chains link segments into a forward path (sensor -> PLC) and a
return path (PLC -> actuator). A boolean signal source toggles periodically;
each toggle is traced through the chain and its per-segment and end-to-end
latencies are recorded. The poll wait is inserted immediately before the
first network segment of the forward path (the point where the process-image
change sits at the W-Master waiting to be queried).
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import plc as plcmod
from .fiveg import LatencyModel, LinkBudgetMeta
from .iolw import IolwCellConfig, IolwTransferModel, transfer_latency
from .kernel import Duration, SimTime, Simulator, rng_stream
from .plc import PlcConfig
from .stats import LatencyStats, SafetyParams

SEGMENT_KINDS = ("iol-wire", "iolw-air", "ethernet", "fiveg", "plc")
NETWORK_KINDS = ("ethernet", "fiveg")
POLL_WAIT = "poll_wait"

_PHASE_STREAM = 0
_SEGMENT_STREAM_BASE = 1


@dataclass
class SegmentSpec:
    id: str
    kind: str
    model: LatencyModel | None = None  # iol-wire / ethernet / fiveg
    transfer: IolwTransferModel | None = None  # iolw-air
    role: str = "both"  # forward | return | both
    link_meta: LinkBudgetMeta | None = None


@dataclass
class SignalSource:
    toggle_period_us: int = 200_000
    sequences: int = 540
    sequence_length_us: int = 5_000_000
    # Per-toggle uniform time dither standing in for free-running clock
    # drift: the toggle period is an exact multiple of the query and task
    # cycles, so without dither the grids phase-lock and structural waits
    # stop averaging out. Default one query cycle.
    dither_us: int = 10_000

    def validate(self) -> list[str]:
        v = []
        if self.toggle_period_us <= 0:
            v.append("toggle_period must be > 0")
        if self.sequences < 1:
            v.append("sequences must be >= 1")
        if self.sequence_length_us < self.toggle_period_us:
            v.append("sequence_length must be >= toggle_period")
        if not 0 <= self.dither_us < self.toggle_period_us:
            v.append("dither must lie in [0, toggle_period)")
        return v

    def toggle_times(self) -> list[SimTime]:
        per_seq = self.sequence_length_us // self.toggle_period_us
        return [
            s * self.sequence_length_us + i * self.toggle_period_us
            for s in range(self.sequences)
            for i in range(per_seq)
        ]


@dataclass
class Scenario:
    cell: IolwCellConfig
    segments: dict[str, SegmentSpec]
    forward: list[str]
    ret: list[str]
    source: SignalSource
    plc: PlcConfig
    safety: SafetyParams
    bin_width_us: int = 100
    randomize_phases: bool = True  # testbed clocks are unsynchronized

    def components(self) -> list[str]:
        """Ordered component names a toggle traverses (stats keys)."""
        names: list[str] = []
        polled = False
        for sid in self.forward:
            if not polled and self.segments[sid].kind in NETWORK_KINDS:
                names.append(POLL_WAIT)
                polled = True
            names.append(sid)
        names.extend(self.ret)
        return names


@dataclass
class RunResult:
    seeds: tuple[int, ...]
    toggles: int
    losses: int
    segment_stats: dict[str, LatencyStats]
    end_to_end: LatencyStats
    components: tuple[str, ...]

    def merge(self, other: "RunResult") -> "RunResult":
        if self.components != other.components:
            raise ValueError("cannot merge results from different scenarios")
        merged = {
            name: self.segment_stats[name].merge(other.segment_stats[name])
            for name in self.segment_stats
        }
        return RunResult(
            seeds=tuple(sorted(set(self.seeds) | set(other.seeds))),
            toggles=self.toggles + other.toggles,
            losses=self.losses + other.losses,
            segment_stats=merged,
            end_to_end=self.end_to_end.merge(other.end_to_end),
            components=self.components,
        )

    def observed_worst_case_us(self) -> Duration:
        """Sum of per-component maxima over one full traversal."""
        total = 0
        for name in self.components:
            s = self.segment_stats[name]
            if s.max_us is not None:
                total += s.max_us
        return total


def _segment_rngs(scenario: Scenario, seed: int) -> dict[str, np.random.Generator]:
    ids = sorted(scenario.segments)
    return {
        sid: rng_stream(seed, _SEGMENT_STREAM_BASE + i) for i, sid in enumerate(ids)
    }


def _trace_toggle(
    t0: SimTime,
    scenario: Scenario,
    plc_cfg: PlcConfig,
    iolw_phase: int,
    rngs: dict[str, np.random.Generator],
) -> tuple[list[tuple[str, Duration]], str | None]:
    """Walk one toggle through both paths.

    Returns (parts, lost_at): parts are (component, duration) pairs summing
    exactly to the end-to-end latency; lost_at names the segment where the
    transfer was lost, or None on success.
    """
    cell = scenario.cell
    parts: list[tuple[str, Duration]] = []
    t = t0
    polled = False

    def step(sid: str, in_forward: bool) -> bool:
        nonlocal t, polled
        seg = scenario.segments[sid]
        if in_forward and not polled and seg.kind in NETWORK_KINDS:
            poll = plcmod.next_poll(t, plc_cfg)
            parts.append((POLL_WAIT, poll - t))
            t = poll
            polled = True
        if seg.kind == "plc":
            done = plcmod.align_to_task_cycle(t, plc_cfg, rngs[sid])
            parts.append((sid, done - t))
            t = done
        elif seg.kind == "iolw-air":
            # shift into the cell's cycle grid; +cycle keeps the argument
            # non-negative for phases larger than t
            rel = t - iolw_phase + cell.cycle_us
            d = transfer_latency(rel, seg.transfer, cell, rngs[sid])
            if d is None:
                return False
            parts.append((sid, d))
            t += d
        else:
            d = seg.model.sample(rngs[sid])
            parts.append((sid, d))
            t += d
        return True

    for sid in scenario.forward:
        if not step(sid, in_forward=True):
            return parts, sid
    for sid in scenario.ret:
        if not step(sid, in_forward=False):
            return parts, sid
    return parts, None


def run(scenario: Scenario, seed: int) -> RunResult:
    """Execute every source sequence on a fresh kernel; fully deterministic."""
    phase_rng = rng_stream(seed, _PHASE_STREAM)
    if scenario.randomize_phases:
        iolw_phase = int(phase_rng.integers(0, scenario.cell.cycle_us))
        plc_phase = int(phase_rng.integers(0, scenario.plc.task_cycle_us))
    else:
        iolw_phase = 0
        plc_phase = scenario.plc.phase_us
    plc_cfg = dataclasses.replace(scenario.plc, phase_us=plc_phase)
    rngs = _segment_rngs(scenario, seed)

    components = tuple(scenario.components())
    seg_stats = {name: LatencyStats(scenario.bin_width_us) for name in components}
    e2e = LatencyStats(scenario.bin_width_us)
    losses = 0

    sim = Simulator()
    toggle_times = scenario.source.toggle_times()
    dither = scenario.source.dither_us
    if scenario.randomize_phases and dither > 0:
        offsets = phase_rng.integers(0, dither, size=len(toggle_times))
        toggle_times = [t + int(o) for t, o in zip(toggle_times, offsets)]

    def on_toggle(t: SimTime) -> None:
        parts, lost_at = _trace_toggle(t, scenario, plc_cfg, iolw_phase, rngs)

        def record(_t: SimTime) -> None:
            nonlocal losses
            if lost_at is not None:
                losses += 1
                seg_stats[lost_at].add_loss()
                e2e.add_loss()
                return
            for name, dur in parts:
                seg_stats[name].add(dur)
            e2e.add(sum(dur for _, dur in parts))

        sim.schedule(t + sum(dur for _, dur in parts), record)

    for t in toggle_times:
        sim.schedule(t, on_toggle)
    while (due := sim.next_due()) is not None:
        sim.run_until(due)

    return RunResult(
        seeds=(seed,),
        toggles=len(toggle_times),
        losses=losses,
        segment_stats=seg_stats,
        end_to_end=e2e,
        components=components,
    )


def sweep(scenario: Scenario, seeds: list[int], parallel: int = 1) -> RunResult:
    """Run once per seed and merge; the merge is order-independent."""
    if not seeds:
        raise ValueError("sweep needs at least one seed")
    if parallel > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(partial(run, scenario), seeds))
    else:
        results = [run(scenario, s) for s in seeds]
    results.sort(key=lambda r: r.seeds)
    merged = results[0]
    for r in results[1:]:
        merged = merged.merge(r)
    return merged
