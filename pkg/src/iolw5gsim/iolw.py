"""IO-Link Wireless cell model.

Capacity validation, cycle/sub-cycle timing, frequency-hop plan generation
with channel block listing, and the per-transfer latency / retransmission
model. A W-Master cell runs a fixed cycle (default 5 ms) containing three
1.664 ms sub-cycles placed contiguously from the cycle start; a process-data
change is transmitted with the next sub-cycle and retried on subsequent
sub-cycle boundaries (continuing across the cycle boundary) up to
max_attempts times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import Duration, SimTime

MAX_MASTERS = 3
MAX_TRACKS_PER_MASTER = 5
MAX_SLOTS_PER_TRACK = 8
MAX_DEVICES = 120

DEFAULT_CYCLE_US = 5000
DEFAULT_SUBCYCLE_US = 1664
DEFAULT_SUBCYCLES_PER_CYCLE = 3

# 2.4 GHz ISM grid: 40 channels of 2 MHz (BLE-like). Configurable; a
# min hop distance of 12 channels (~24 MHz) exceeds typical indoor
# coherence bandwidth.
DEFAULT_CHANNEL_COUNT = 40
DEFAULT_MIN_HOP_DISTANCE = 12

_HOP_STREAM_SALT = 0x484F50  # fixed salt so hop streams never collide with segment streams


class HopPlanError(ValueError):
    """Blocklist / min-hop-distance combination cannot produce a valid plan."""


@dataclass(frozen=True)
class IolwCellConfig:
    masters: int = 1
    tracks_per_master: int = 2
    slots_per_track: int = MAX_SLOTS_PER_TRACK
    cycle_us: int = DEFAULT_CYCLE_US
    subcycles_per_cycle: int = DEFAULT_SUBCYCLES_PER_CYCLE
    subcycle_us: int = DEFAULT_SUBCYCLE_US
    devices: int | None = None  # None: capacity implied by topology
    channel_count: int = DEFAULT_CHANNEL_COUNT
    blocklist: frozenset[int] = frozenset()
    min_hop_distance: int = DEFAULT_MIN_HOP_DISTANCE

    @property
    def capacity(self) -> int:
        return self.masters * self.tracks_per_master * self.slots_per_track


def validate_cell(config: IolwCellConfig) -> list[str]:
    """Return all violated capacity/timing constraints; empty list means ok.

    Violations are data, not exceptions: the scenario loader aggregates
    them into diagnostics.
    """
    v: list[str] = []
    if not 1 <= config.masters <= MAX_MASTERS:
        v.append(f"masters must be 1..{MAX_MASTERS}, got {config.masters}")
    if not 1 <= config.tracks_per_master <= MAX_TRACKS_PER_MASTER:
        v.append(
            f"tracks_per_master must be 1..{MAX_TRACKS_PER_MASTER}, "
            f"got {config.tracks_per_master}"
        )
    if not 1 <= config.slots_per_track <= MAX_SLOTS_PER_TRACK:
        v.append(
            f"slots_per_track must be 1..{MAX_SLOTS_PER_TRACK}, "
            f"got {config.slots_per_track}"
        )
    if not v and config.capacity > MAX_DEVICES:
        v.append(f"cell capacity {config.capacity} exceeds {MAX_DEVICES} devices")
    if config.devices is not None:
        if config.devices < 1:
            v.append("devices must be >= 1")
        elif not v and config.devices > config.capacity:
            v.append(
                f"devices {config.devices} exceed cell capacity {config.capacity}"
            )
        if config.devices > MAX_DEVICES:
            v.append(f"devices must be <= {MAX_DEVICES}, got {config.devices}")
    if config.cycle_us <= 0:
        v.append("cycle must be > 0")
    if config.subcycle_us <= 0:
        v.append("subcycle must be > 0")
    if config.subcycles_per_cycle < 1:
        v.append("subcycles_per_cycle must be >= 1")
    if (
        config.cycle_us > 0
        and config.subcycle_us > 0
        and config.subcycles_per_cycle * config.subcycle_us > config.cycle_us
    ):
        v.append(
            f"{config.subcycles_per_cycle} sub-cycles of {config.subcycle_us} us "
            f"do not fit in a {config.cycle_us} us cycle"
        )
    return v


def next_subcycle_start(t: SimTime, config: IolwCellConfig) -> SimTime:
    """Earliest sub-cycle boundary >= t.

    Boundaries sit at k*cycle + j*subcycle for j in 0..subcycles_per_cycle-1.
    If t is itself a boundary it is returned unchanged.
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    cycle_index, offset = divmod(t, config.cycle_us)
    j, rem = divmod(offset, config.subcycle_us)
    if rem == 0 and j < config.subcycles_per_cycle:
        return t
    if j + 1 < config.subcycles_per_cycle:
        return cycle_index * config.cycle_us + (j + 1) * config.subcycle_us
    return (cycle_index + 1) * config.cycle_us


@dataclass
class IolwTransferModel:
    """Latency model for one W-Device <-> W-Master process-data transfer.

    completion_offset_us is a calibration parameter: time from the start of
    the successful sub-cycle until the value is available at the far end.
    Each attempt fails independently with per_subcycle_error_prob; after
    max_attempts failures the transfer is lost (reported distinctly, feeding
    residual-error accounting).
    """

    completion_offset_us: Duration
    per_subcycle_error_prob: float = 0.0
    max_attempts: int = DEFAULT_SUBCYCLES_PER_CYCLE

    def validate(self, cell: IolwCellConfig) -> list[str]:
        v = []
        if not 0 <= self.completion_offset_us < cell.subcycle_us:
            v.append(
                f"completion_offset {self.completion_offset_us} us must lie in "
                f"[0, {cell.subcycle_us})"
            )
        if not 0.0 <= self.per_subcycle_error_prob <= 1.0:
            v.append("error_prob must be within [0, 1]")
        if self.max_attempts < 1:
            v.append("max_attempts must be >= 1")
        return v


def transfer_latency(
    t_change: SimTime,
    model: IolwTransferModel,
    cell: IolwCellConfig,
    rng: np.random.Generator,
) -> Duration | None:
    """Latency of one transfer starting at t_change, or None on loss.

    Attempt k (1-based) rides the k-th sub-cycle boundary at or after
    t_change; on success the latency is boundary - t_change plus the
    completion offset. Returns None after max_attempts failed attempts.
    """
    p = model.per_subcycle_error_prob
    boundary = next_subcycle_start(t_change, cell)
    for attempt in range(model.max_attempts):
        if attempt > 0:
            boundary = next_subcycle_start(boundary + 1, cell)
        if p <= 0.0 or rng.random() >= p:
            return boundary - t_change + model.completion_offset_us
    return None


def residual_error_prob(per_subcycle_error_prob: float, max_attempts: int) -> float:
    """Probability that all retransmission attempts fail (p^k)."""
    if not 0.0 <= per_subcycle_error_prob <= 1.0:
        raise ValueError("per_subcycle_error_prob must be within [0, 1]")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    return per_subcycle_error_prob**max_attempts


def mean_boundary_wait_us(cell: IolwCellConfig) -> float:
    """Exact mean wait-to-next-sub-cycle-boundary for uniform integer arrivals.

    Brute-force enumeration over one full cycle at 1 us resolution; serves
    as the calibration oracle for completion_offset.
    """
    total = 0
    for t in range(cell.cycle_us):
        total += next_subcycle_start(t, cell) - t
    return total / cell.cycle_us


@dataclass(frozen=True)
class HopPlan:
    channels: tuple[int, ...]
    blocklist: frozenset[int] = frozenset()
    min_hop_distance: int = 0

    def violations(self) -> list[str]:
        v = []
        for ch in self.channels:
            if ch in self.blocklist:
                v.append(f"channel {ch} is block-listed")
        for a, b in zip(self.channels, self.channels[1:]):
            if abs(a - b) < self.min_hop_distance:
                v.append(f"hop {a}->{b} shorter than {self.min_hop_distance}")
        return v


def generate_hop_plan(
    length: int,
    channel_count: int,
    blocklist: frozenset[int] | set[int],
    min_hop_distance: int,
    seed: int,
    track_id: int,
) -> HopPlan:
    """Deterministic hop sequence for one track.

    Every consecutive pair of channels differs by at least min_hop_distance
    and no channel is block-listed. The plan is a pure function of
    (seed, track_id).
    """
    blocklist = frozenset(blocklist)
    allowed = [c for c in range(channel_count) if c not in blocklist]
    # A channel is usable only if some other allowed channel is far enough
    # away; restricting to those prevents dead-ends during generation.
    usable = [
        c
        for c in allowed
        if any(c2 != c and abs(c2 - c) >= min_hop_distance for c2 in allowed)
    ]
    if len(usable) < 2:
        raise HopPlanError(
            f"no valid hop pair among {len(allowed)} allowed channels with "
            f"min hop distance {min_hop_distance}"
        )
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(_HOP_STREAM_SALT, track_id))
    rng = np.random.Generator(np.random.PCG64(ss))
    channels: list[int] = [usable[rng.integers(len(usable))]]
    while len(channels) < length:
        prev = channels[-1]
        candidates = [c for c in usable if abs(c - prev) >= min_hop_distance]
        channels.append(candidates[rng.integers(len(candidates))])
    return HopPlan(
        channels=tuple(channels),
        blocklist=blocklist,
        min_hop_distance=min_hop_distance,
    )
