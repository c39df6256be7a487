"""PRIL strategies: sleep-command bookkeeping on both sides of the link.

Cell states are kept as "everything up to ``disabled_until_x`` is off,
except the indices in ``forced_open``". A sleep command switches off the
range x+1..x+t (overriding earlier ON marks in that range) and then the
strategy re-opens x+1..x+n.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import FrozenSet, Optional

from .tsch import AppFlow, CellOccurrence, ScheduleConfig, TxQueue, cells_until

BASELINE = "tsch-baseline"
CLOSED = "closed"
N_OPEN = "n-open"
A_OPEN = "a-open"

_N_OPEN_RE = re.compile(r"^(\d+)-open$")


@dataclass(frozen=True)
class StrategyKind:
    kind: str
    n: int = 0

    def __post_init__(self):
        if self.kind not in (BASELINE, CLOSED, N_OPEN, A_OPEN):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == N_OPEN and self.n < 1:
            raise ValueError(f"n-open requires n >= 1, got {self.n}")

    @classmethod
    def parse(cls, text: str) -> "StrategyKind":
        """Accepts 'tsch-baseline', 'closed', 'a-open', '<n>-open'."""
        s = text.strip().lower()
        if s in ("tsch-baseline", "tsch", "baseline"):
            return cls(BASELINE)
        if s == CLOSED:
            return cls(CLOSED)
        if s in ("a-open", "aopen"):
            return cls(A_OPEN)
        m = _N_OPEN_RE.match(s)
        if m:
            return cls(N_OPEN, int(m.group(1)))
        raise ValueError(f"unknown strategy {text!r}")

    @property
    def uses_sleep(self) -> bool:
        return self.kind != BASELINE

    @property
    def n_open(self) -> int:
        """Number of cells re-opened right after a sleep command."""
        if self.kind == N_OPEN:
            return self.n
        if self.kind == A_OPEN:
            return 1
        return 0

    @property
    def uses_cca(self) -> bool:
        return self.kind == A_OPEN

    def __str__(self) -> str:
        if self.kind == N_OPEN:
            return f"{self.n}-open"
        return self.kind


def as_strategy(value) -> StrategyKind:
    if isinstance(value, StrategyKind):
        return value
    return StrategyKind.parse(str(value))


@dataclass(frozen=True)
class SleepCommand:
    t: int = 0

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"sleep value must be >= 0, got {self.t}")

    @property
    def present(self) -> bool:
        return self.t > 0


@dataclass(frozen=True)
class RxCellState:
    disabled_until_x: int = -1
    forced_open: FrozenSet[int] = frozenset()

    def is_enabled(self, x: int) -> bool:
        return x > self.disabled_until_x or x in self.forced_open


@dataclass(frozen=True)
class TxCellView:
    """Sender-side belief about which future occurrences the receiver skips."""

    disabled_until_x: int = -1
    forced_open: FrozenSet[int] = frozenset()

    def is_usable(self, x: int) -> bool:
        return x > self.disabled_until_x or x in self.forced_open

    @property
    def open_next(self) -> bool:
        return bool(self.forced_open)


def _apply_sleep(disabled_until: int, forced: FrozenSet[int], x: int, t: int,
                 n_open: int):
    if t > 0:
        end = x + t
        disabled_until = max(disabled_until, end)
        keep = [i for i in forced if i > end]
    else:
        keep = [i for i in forced if i > x]
    keep.extend(range(x + 1, x + n_open + 1))
    return disabled_until, frozenset(keep)


def rx_apply_frame(state: RxCellState, kind: StrategyKind, x: int,
                   cmd: SleepCommand) -> RxCellState:
    """Receiver reaction to a decoded frame carrying ``cmd`` in occurrence x."""
    if not kind.uses_sleep:
        return state
    du, forced = _apply_sleep(state.disabled_until_x, state.forced_open, x,
                              cmd.t, kind.n_open)
    return RxCellState(du, forced)


def rx_apply_cca(state: RxCellState, kind: StrategyKind, x: int,
                 busy: bool) -> RxCellState:
    if not (kind.uses_cca and busy):
        return state
    return RxCellState(state.disabled_until_x, state.forced_open | {x + 1})


def tx_apply_ack(view: TxCellView, kind: StrategyKind, x: int,
                 t: int) -> TxCellView:
    """Sender update after the ACK for the attempt in occurrence x arrived.

    Never called on ACK loss: the sender's view simply stays as it was.
    """
    if not kind.uses_sleep:
        return view
    du, forced = _apply_sleep(view.disabled_until_x, view.forced_open, x,
                              t, kind.n_open)
    return TxCellView(du, forced)


def get_next_t(flow: AppFlow, queue: TxQueue, current: CellOccurrence,
               config: ScheduleConfig,
               next_generation: Optional[float] = None) -> int:
    """Sleep value for the packet just dequeued at ``current``.

    Zero while a backlog remains; otherwise the number of reserved cells
    strictly between ``current`` and the next generation instant.
    ``next_generation`` may be passed when the caller already knows it.
    """
    if len(queue) > 0:
        return 0
    if next_generation is None:
        next_generation = flow.next_generation_after(current.time)
    if next_generation <= current.time:
        return 0
    return cells_until(config, current.x, next_generation)


def residual_miss_probability(eps_f: float, eps_a: float, n: int) -> float:
    """Probability that an ACK loss is followed by n data-frame losses."""
    if not (0.0 <= eps_f <= 1.0 and 0.0 <= eps_a <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return eps_a * eps_f ** n
