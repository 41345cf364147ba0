"""Software-PLC timing model.

The PLC executes its program every task_cycle (default 5 ms) and polls the
W-Master process image every query_cycle (default 10 ms, an integer multiple
of the task cycle). Inputs are sampled at cycle start: a value arriving
mid-cycle is processed in the following cycle, and outputs publish at the
end of the processing cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fiveg import Constant, LatencyModel
from .kernel import SimTime

DEFAULT_TASK_CYCLE_US = 5000
DEFAULT_QUERY_CYCLE_US = 10000


@dataclass
class PlcConfig:
    task_cycle_us: int = DEFAULT_TASK_CYCLE_US
    query_cycle_us: int = DEFAULT_QUERY_CYCLE_US
    phase_us: int = 0  # offset of the first cycle start; polls share the grid
    jitter: LatencyModel = field(default_factory=lambda: Constant(0))

    def validate(self) -> list[str]:
        v = []
        if self.task_cycle_us <= 0:
            v.append("task_cycle must be > 0")
        if self.query_cycle_us <= 0:
            v.append("query_cycle must be > 0")
        if (
            self.task_cycle_us > 0
            and self.query_cycle_us > 0
            and self.query_cycle_us % self.task_cycle_us != 0
        ):
            v.append(
                f"query_cycle {self.query_cycle_us} us must be an integer "
                f"multiple of task_cycle {self.task_cycle_us} us"
            )
        if self.phase_us < 0:
            v.append("phase must be >= 0")
        return v


def align_to_task_cycle(
    arrival: SimTime, cfg: PlcConfig, rng: np.random.Generator | None = None
) -> SimTime:
    """Output publication time for an input arriving at `arrival`.

    An arrival exactly on a cycle start is processed in that cycle and
    publishes one task cycle later; any later arrival waits for the next
    cycle start and publishes at its end (two task cycles after the
    preceding start). Adds a jitter draw when an RNG is supplied.
    """
    task = cfg.task_cycle_us
    start = cfg.phase_us + ((arrival - cfg.phase_us) // task) * task
    if arrival == start:
        completion = start + task
    else:
        completion = start + 2 * task
    if rng is not None:
        completion += cfg.jitter.sample(rng)
    return completion


def next_poll(t: SimTime, cfg: PlcConfig) -> SimTime:
    """First poll time >= t; polls occur at phase + k*query_cycle, k >= 0."""
    if t <= cfg.phase_us:
        return cfg.phase_us
    query = cfg.query_cycle_us
    k = -((cfg.phase_us - t) // query)
    return cfg.phase_us + k * query


def poll_schedule(cfg: PlcConfig, t_end: SimTime) -> list[SimTime]:
    """All poll times up to and including t_end."""
    if t_end < cfg.phase_us:
        return []
    n = (t_end - cfg.phase_us) // cfg.query_cycle_us
    return [cfg.phase_us + k * cfg.query_cycle_us for k in range(n + 1)]
