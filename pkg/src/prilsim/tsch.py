"""TSCH time base: slotframes, reserved-cell occurrences and the periodic flow.

Times are handled in slot units internally so that occurrence arithmetic
stays integer; conversions to seconds only happen at the boundary.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Optional

# tolerance (in slots) for comparing float instants against slot boundaries
_EPS = 1e-9


@dataclass(frozen=True)
class ScheduleConfig:
    """Slotframe geometry for the single TX -> RX link.

    With ``capacity_c > 1`` the link's cells are spread evenly over the
    slotframe starting at ``slot_offset``.
    """

    t_slot: float = 0.02
    n_slot: int = 101
    slot_offset: int = 0
    capacity_c: int = 1
    n_ch: int = 16

    def __post_init__(self):
        if not self.t_slot > 0:
            raise ValueError(f"t_slot must be > 0, got {self.t_slot}")
        if self.n_slot < 1:
            raise ValueError(f"n_slot must be >= 1, got {self.n_slot}")
        if not 0 <= self.slot_offset < self.n_slot:
            raise ValueError(
                f"slot_offset must lie in [0, {self.n_slot}), got {self.slot_offset}")
        if not 1 <= self.capacity_c <= self.n_slot:
            raise ValueError(
                f"capacity_c must lie in [1, n_slot], got {self.capacity_c}")
        if self.n_ch < 1:
            raise ValueError(f"n_ch must be >= 1, got {self.n_ch}")
        step = self.n_slot // self.capacity_c
        offsets = sorted((self.slot_offset + k * step) % self.n_slot
                         for k in range(self.capacity_c))
        object.__setattr__(self, "_offsets", tuple(offsets))

    @property
    def t_sfr(self) -> float:
        """Slotframe interval in seconds."""
        return self.n_slot * self.t_slot

    @property
    def cell_offsets(self) -> tuple:
        return self._offsets

    def asn_of(self, x: int) -> int:
        frame, idx = divmod(x, self.capacity_c)
        return frame * self.n_slot + self._offsets[idx]

    def time_of(self, x: int) -> float:
        return self.asn_of(x) * self.t_slot

    def occurrence(self, x: int) -> "CellOccurrence":
        asn = self.asn_of(x)
        return CellOccurrence(x=x, asn=asn, time=asn * self.t_slot)

    def first_index_at_or_after_asn(self, asn: int) -> int:
        """Index of the earliest occurrence whose ASN is >= ``asn``."""
        if asn <= 0:
            return 0
        frame, rem = divmod(asn, self.n_slot)
        idx = bisect_left(self._offsets, rem)
        if idx == self.capacity_c:
            frame, idx = frame + 1, 0
        return frame * self.capacity_c + idx

    def n_occurrences(self, duration: float) -> int:
        """Number of occurrences inside the first ceil(duration / t_slot) slots."""
        n_slots = math.ceil(duration / self.t_slot - _EPS)
        return self.first_index_at_or_after_asn(n_slots)


@dataclass(frozen=True)
class CellOccurrence:
    x: int
    asn: int
    time: float


def occurrence_index_for_time(config: ScheduleConfig, t: float) -> int:
    """Index of the earliest occurrence strictly later than ``t`` seconds."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    asn = math.floor(t / config.t_slot + _EPS) + 1
    return config.first_index_at_or_after_asn(asn)


def occurrence_for_time(config: ScheduleConfig, t: float) -> CellOccurrence:
    """First reserved cell a packet generated at ``t`` can be sent in."""
    return config.occurrence(occurrence_index_for_time(config, t))


def cells_until(config: ScheduleConfig, from_x: int, deadline: float) -> int:
    """Count occurrences with index > ``from_x`` and time < ``deadline``."""
    first_excluded_asn = math.ceil(deadline / config.t_slot - _EPS)
    first_excluded = config.first_index_at_or_after_asn(first_excluded_asn)
    return max(0, first_excluded - from_x - 1)


@dataclass
class AppFlow:
    """Periodic packet source: generation instants phase + k * t_app."""

    t_app: float = 60.0
    phase: Optional[float] = None

    def __post_init__(self):
        if not self.t_app > 0:
            raise ValueError(f"t_app must be > 0, got {self.t_app}")
        if self.phase is not None and self.phase < 0:
            raise ValueError(f"phase must be >= 0, got {self.phase}")

    def with_phase(self, rng, config: ScheduleConfig) -> "AppFlow":
        """Return a copy whose phase is resolved, drawing U[0, T_sfr) if unset."""
        if self.phase is not None:
            return self
        return AppFlow(t_app=self.t_app, phase=rng.random() * config.t_sfr)

    def generation_time(self, k: int) -> float:
        return self.phase + k * self.t_app

    def next_generation_after(self, t: float) -> float:
        """Earliest generation instant strictly later than ``t``."""
        k = max(0, math.floor((t - self.phase) / self.t_app) + 1)
        g = self.generation_time(k)
        while k > 0 and self.generation_time(k - 1) > t:
            k -= 1
            g = self.generation_time(k)
        while g <= t:
            k += 1
            g = self.generation_time(k)
        return g


@dataclass(frozen=True)
class Packet:
    id: int
    gen_time: float


@dataclass
class TxQueue:
    """Unbounded FIFO of packets waiting at the sender."""

    items: Deque[Packet] = field(default_factory=deque)
    max_depth: int = 0

    def push(self, packet: Packet) -> None:
        self.items.append(packet)
        if len(self.items) > self.max_depth:
            self.max_depth = len(self.items)

    def pop(self) -> Packet:
        return self.items.popleft()

    def __len__(self) -> int:
        return len(self.items)

    def __bool__(self) -> bool:
        return bool(self.items)
