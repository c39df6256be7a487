"""Discrete-event simulator of a single-hop TSCH link with PRIL strategies."""

from .channel import AttemptOutcome, LossModel, cca_observe, draw_attempt
from .engine import (ConfigError, EventRecord, PacketLog, RunConfig, RunResult,
                     expand_grid, run, run_campaign)
from .estimator import (AckLossEstimate, PingLogSummary, estimate_eps_a,
                        parse_ping_log, simulate_ping)
from .metrics import Counters, EnergyModel, LatencyStats, PowerBreakdown, compute_latency, compute_power
from .strategies import SleepCommand, StrategyKind, residual_miss_probability
from .tsch import AppFlow, ScheduleConfig

__version__ = "0.1.0"
