"""Energy and latency accounting.

All power figures are event counts times per-event energies divided by the
simulated duration, so a RunResult's powers can always be rebuilt from its
counters.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence


UJ = 1e-6


@dataclass(frozen=True)
class EnergyModel:
    """Per-event energies in joules.

    ``e_tx_attempt`` covers one sender attempt including the ACK wait, and
    is charged whether or not the ACK arrives. ``e_ack_wait`` only splits
    that lumped figure for reporting: when set, the ACK-wait share of every
    unconfirmed attempt is reported as sender-side listening.
    """

    e_tx_attempt: float = 485.7 * UJ
    e_rx_exchange: float = 651.0 * UJ
    e_idle: float = 303.3 * UJ
    e_cca: Optional[float] = None
    e_ack_wait: Optional[float] = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None and v < 0:
                raise ValueError(f"{f.name} must be >= 0, got {v}")
        if self.e_ack_wait is not None and self.e_ack_wait > self.e_tx_attempt:
            raise ValueError("e_ack_wait cannot exceed e_tx_attempt")

    @property
    def cca(self) -> float:
        return self.e_idle if self.e_cca is None else self.e_cca


@dataclass
class Counters:
    """Event tallies for one run.

    ``tx_attempts`` counts every sender transmission, useless ones included.
    ``rx_idle`` counts every receiver-enabled occurrence without a decoded
    frame; ``rx_cca_only`` is the subset that was enabled solely by a CCA
    extension.
    """

    tx_attempts: int = 0
    useless_attempts: int = 0
    acks_sent: int = 0
    acks_received: int = 0
    rx_frames: int = 0
    rx_idle: int = 0
    rx_cca_only: int = 0
    drops: int = 0
    dup_deliveries: int = 0
    early_failures_phi: int = 0
    max_queue_depth: int = 0
    generated: int = 0
    delivered: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def check(self) -> None:
        """Raise AssertionError if the counter invariants are violated."""
        assert self.useless_attempts <= self.tx_attempts
        assert self.acks_received <= self.acks_sent
        assert self.dup_deliveries <= self.rx_frames
        assert self.rx_cca_only <= self.rx_idle
        assert self.acks_sent == self.rx_frames


@dataclass(frozen=True)
class PowerBreakdown:
    """Average powers in watts."""

    p_total: float
    p_ntx: float
    p_nrx: float
    p_listen_ntx: float
    p_listen_nrx: float
    p_nrx_nonlisten: float

    def in_uw(self) -> dict:
        return {k: v / UJ for k, v in asdict(self).items()}


def compute_power(counters: Counters, energy: EnergyModel,
                  duration: float) -> PowerBreakdown:
    if not duration > 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    c = counters
    p_ntx = c.tx_attempts * energy.e_tx_attempt / duration
    if energy.e_ack_wait is None:
        p_listen_ntx = 0.0
    else:
        p_listen_ntx = (c.tx_attempts - c.acks_received) * energy.e_ack_wait / duration
    listen_nrx = (c.rx_idle - c.rx_cca_only) * energy.e_idle + c.rx_cca_only * energy.cca
    p_listen_nrx = listen_nrx / duration
    p_nrx_nonlisten = c.rx_frames * energy.e_rx_exchange / duration
    p_nrx = p_nrx_nonlisten + p_listen_nrx
    return PowerBreakdown(
        p_total=p_ntx + p_nrx,
        p_ntx=p_ntx,
        p_nrx=p_nrx,
        p_listen_ntx=p_listen_ntx,
        p_listen_nrx=p_listen_nrx,
        p_nrx_nonlisten=p_nrx_nonlisten,
    )


@dataclass(frozen=True)
class LatencyStats:
    count: int
    mean: Optional[float] = None
    std: Optional[float] = None
    p99: Optional[float] = None
    p999: Optional[float] = None
    p9999: Optional[float] = None
    max: Optional[float] = None

    @property
    def available(self) -> bool:
        return self.count > 0


def nearest_rank(sorted_samples: Sequence[float], p: float) -> float:
    """Nearest-rank percentile, p in (0, 1]."""
    n = len(sorted_samples)
    rank = max(1, math.ceil(p * n - 1e-9))
    return float(sorted_samples[min(rank, n) - 1])


def compute_latency(samples: Sequence[float]) -> LatencyStats:
    """Mean, sample std, nearest-rank tail percentiles and max.

    An empty input means nothing was delivered; all statistics are None.
    """
    arr = sorted(float(v) for v in samples)
    n = len(arr)
    if n == 0:
        return LatencyStats(count=0)
    mean = math.fsum(arr) / n
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in arr) / (n - 1)) if n > 1 else 0.0
    return LatencyStats(
        count=n,
        mean=mean,
        std=std,
        p99=nearest_rank(arr, 0.99),
        p999=nearest_rank(arr, 0.999),
        p9999=nearest_rank(arr, 0.9999),
        max=arr[-1],
    )
