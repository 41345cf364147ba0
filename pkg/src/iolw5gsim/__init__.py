"""Deterministic latency simulator for an IO-Link Wireless + 5G control loop.

Models a sensor-to-edge pipeline (wireless sensors -> W-Master -> Ethernet/5G
-> software PLC -> actuators), reproduces its latency distributions and
computes the worst-case safety function response time and the resulting
minimum safety distance.
"""

__version__ = "0.1.0"

from .config import Diagnostic, ScenarioError, load_scenario, load_scenario_file
from .fiveg import (
    Constant,
    Empirical,
    LatencyModel,
    NumerologyConfig,
    TruncNormal,
    Uniform,
    sample,
    symbol_bandwidth_khz,
    symbol_duration_scaling,
)
from .iolw import (
    IolwCellConfig,
    IolwTransferModel,
    generate_hop_plan,
    next_subcycle_start,
    residual_error_prob,
    transfer_latency,
    validate_cell,
)
from .kernel import Simulator, rng_stream
from .plc import PlcConfig, align_to_task_cycle, next_poll, poll_schedule
from .scenario import RunResult, Scenario, SegmentSpec, SignalSource, run, sweep
from .stats import (
    LatencyStats,
    SafetyParams,
    safety_distance,
    worst_case_sfrt,
)

__all__ = [
    "Constant",
    "Diagnostic",
    "Empirical",
    "IolwCellConfig",
    "IolwTransferModel",
    "LatencyModel",
    "LatencyStats",
    "NumerologyConfig",
    "PlcConfig",
    "RunResult",
    "SafetyParams",
    "Scenario",
    "ScenarioError",
    "SegmentSpec",
    "SignalSource",
    "Simulator",
    "TruncNormal",
    "Uniform",
    "align_to_task_cycle",
    "generate_hop_plan",
    "load_scenario",
    "load_scenario_file",
    "next_poll",
    "next_subcycle_start",
    "poll_schedule",
    "residual_error_prob",
    "rng_stream",
    "run",
    "safety_distance",
    "sample",
    "sweep",
    "symbol_bandwidth_khz",
    "symbol_duration_scaling",
    "transfer_latency",
    "validate_cell",
    "worst_case_sfrt",
]
