"""Discrete-event simulation of one TSCH link running a PRIL strategy.

The loop walks reserved-cell occurrences in order. Stretches where the
sender has nothing to do are skipped in one step, with the receiver's idle
cells counted in bulk; ``skip_idle=False`` walks every occurrence instead
and must give identical results.
"""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .channel import LossModel
from .metrics import (Counters, EnergyModel, LatencyStats, PowerBreakdown,
                      compute_latency, compute_power)
from .strategies import (RxCellState, SleepCommand, StrategyKind, TxCellView,
                         as_strategy, get_next_t, rx_apply_cca, rx_apply_frame,
                         tx_apply_ack)
from .tsch import AppFlow, Packet, ScheduleConfig, TxQueue, occurrence_index_for_time


class ConfigError(ValueError):
    """Invalid run configuration; ``fields`` names the offending entries."""

    def __init__(self, problems: Dict[str, str]):
        self.fields = sorted(problems)
        msg = "; ".join(f"{k}: {v}" for k, v in sorted(problems.items()))
        super().__init__(msg)


@dataclass
class RunConfig:
    strategy: StrategyKind = field(default_factory=lambda: StrategyKind("a-open"))
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    flow: AppFlow = field(default_factory=AppFlow)
    loss: LossModel = field(default_factory=LossModel)
    n_tries: int = 16
    duration: float = 30 * 86400.0
    energy: EnergyModel = field(default_factory=EnergyModel)

    def __post_init__(self):
        self.strategy = as_strategy(self.strategy)

    def validate(self) -> None:
        problems = {}
        if not isinstance(self.n_tries, int) or self.n_tries < 1:
            problems["n_tries"] = f"must be an integer >= 1, got {self.n_tries!r}"
        if not self.duration > 0:
            problems["duration"] = f"must be > 0, got {self.duration}"
        elif self.duration < self.flow.t_app:
            problems["duration"] = (f"must be >= t_app ({self.flow.t_app}), "
                                    f"got {self.duration}")
        if problems:
            raise ConfigError(problems)

    @property
    def seed(self) -> int:
        return self.loss.seed

    def with_overrides(self, **kw) -> "RunConfig":
        """Copy with flat overrides: eps_f, eps_a, seed, t_app, n_tries, ..."""
        cfg = replace(self)
        loss_kw = {k: kw.pop(k) for k in ("eps_f", "eps_a", "seed", "cca_detect_prob")
                   if k in kw}
        if loss_kw:
            cur = cfg.loss
            args = dict(eps_f=cur.eps_f, eps_a=cur.eps_a, seed=cur.seed,
                        cca_detect_prob=cur.cca_detect_prob)
            args.update(loss_kw)
            cfg.loss = LossModel(**args)
        if "t_app" in kw or "phase" in kw:
            cfg.flow = AppFlow(t_app=kw.pop("t_app", cfg.flow.t_app),
                               phase=kw.pop("phase", cfg.flow.phase))
        sched_kw = {k: kw.pop(k) for k in ("t_slot", "n_slot", "slot_offset",
                                           "capacity_c", "n_ch") if k in kw}
        if sched_kw:
            cfg.schedule = replace(cfg.schedule, **sched_kw)
        if "strategy" in kw:
            cfg.strategy = as_strategy(kw.pop("strategy"))
        for k in ("n_tries", "duration", "energy"):
            if k in kw:
                setattr(cfg, k, kw.pop(k))
        if kw:
            raise ConfigError({k: "unknown parameter" for k in kw})
        return cfg


@dataclass(frozen=True)
class EventRecord:
    asn: int
    x: int
    side: str
    kind: str
    packet_id: Optional[int] = None

    def to_line(self) -> str:
        pid = "-" if self.packet_id is None else str(self.packet_id)
        return f"{self.asn}\t{self.x}\t{self.side}\t{self.kind}\t{pid}"


@dataclass
class PacketLog:
    """Per-packet arrays, indexed by packet id.

    ``latency`` is NaN for packets never decoded; ``first_t`` is -1 for
    packets never dequeued. ``outcomes`` (optional) holds one letter per
    attempt: K delivered+ACK, A delivered/ACK lost, L frame lost, U useless.
    """

    gen_time: np.ndarray
    latency: np.ndarray
    copies: np.ndarray
    attempts: np.ndarray
    useless: np.ndarray
    first_t: np.ndarray
    outcomes: Optional[List[str]] = None


@dataclass
class RunResult:
    config: RunConfig
    seed: int
    phase: float
    counters: Counters
    latency: LatencyStats
    power: PowerBreakdown
    pending_at_end: int = 0
    packets: Optional[PacketLog] = None
    trace: Optional[List[EventRecord]] = None

    def trace_lines(self) -> Iterable[str]:
        for ev in self.trace or ():
            yield ev.to_line()


def run(config: RunConfig, *, seed: Optional[int] = None, trace: bool = False,
        record_outcomes: bool = False, keep_packets: bool = True,
        skip_idle: bool = True) -> RunResult:
    """Simulate ``config.duration`` seconds of the link.

    ``seed`` overrides ``config.loss.seed``. The RNG first draws the flow
    phase (when not fixed), then one or two values per heard attempt.
    """
    config.validate()
    sched = config.schedule
    kind = config.strategy
    src = config.loss
    if seed is None:
        seed = src.seed
    rng = random.Random(seed)
    rnd = rng.random
    flow = config.flow.with_phase(rng, sched)
    duration = config.duration
    n_occ = sched.n_occurrences(duration)
    n_tries = config.n_tries
    eps_f, eps_a = src.eps_f, src.eps_a
    cca_p = src.cca_detect_prob
    sleeps = kind.uses_sleep
    use_cca = kind.uses_cca
    t_slot = sched.t_slot
    if trace:
        skip_idle = False

    events: Optional[List[EventRecord]] = [] if trace else None
    rx_events: List[EventRecord] = []

    def emit(x, side, what, pid=None):
        ev = EventRecord(sched.asn_of(x), x, side, what, pid)
        (events if side == "tx" else rx_events).append(ev)

    c = Counters()
    queue = TxQueue()
    rx = RxCellState()
    txv = TxCellView()
    cca_marks = set()

    gen_times: List[float] = []
    lat: List[float] = []
    copies: List[int] = []
    attempts: List[int] = []
    useless: List[int] = []
    first_t: List[int] = []
    outcomes: Optional[List[List[str]]] = [] if record_outcomes else None

    k = 0
    next_gen = flow.generation_time(0)
    next_gen_x = occurrence_index_for_time(sched, next_gen) if next_gen < duration else n_occ

    inflight = -1
    m = 0
    t = 0
    lost_before = 0
    x = 0
    while x < n_occ:
        while next_gen_x <= x:
            pid = k
            queue.push(Packet(pid, next_gen))
            gen_times.append(next_gen)
            lat.append(math.nan)
            copies.append(0)
            attempts.append(0)
            useless.append(0)
            first_t.append(-1)
            if outcomes is not None:
                outcomes.append([])
            k += 1
            next_gen = flow.generation_time(k)
            next_gen_x = (occurrence_index_for_time(sched, next_gen)
                          if next_gen < duration else n_occ)

        pid = inflight
        if pid < 0 and queue.items and (x > txv.disabled_until_x or x in txv.forced_open):
            pid = queue.pop().id
            m = n_tries - 1
            lost_before = 0
            if sleeps:
                t = get_next_t(flow, queue, sched.occurrence(x), sched, next_gen)
            else:
                t = 0
            first_t[pid] = t

        rx_on = x > rx.disabled_until_x or x in rx.forced_open
        if pid >= 0:
            c.tx_attempts += 1
            attempts[pid] += 1
            acked = False
            if not rx_on:
                c.useless_attempts += 1
                useless[pid] += 1
                code = "U"
                if trace:
                    emit(x, "tx", "useless_attempt", pid)
            else:
                if trace:
                    emit(x, "tx", "tx_attempt", pid)
                if rnd() < eps_f:
                    code = "L"
                    lost_before += 1
                    c.rx_idle += 1
                    if x in cca_marks:
                        c.rx_cca_only += 1
                    if trace:
                        emit(x, "rx", "frame_lost", pid)
                        emit(x, "rx", "rx_idle", pid)
                else:
                    c.rx_frames += 1
                    c.acks_sent += 1
                    if trace:
                        emit(x, "rx", "rx_frame", pid)
                    if copies[pid] == 0:
                        lat[pid] = sched.time_of(x) + t_slot - gen_times[pid]
                        c.delivered += 1
                    else:
                        c.dup_deliveries += 1
                        if trace:
                            emit(x, "rx", "dup_delivery", pid)
                    copies[pid] += 1
                    acked = rnd() >= eps_a
                    if acked:
                        code = "K"
                    else:
                        code = "A"
                        c.early_failures_phi += lost_before
                        lost_before = 0
                    if sleeps and t > 0:
                        rx = rx_apply_frame(rx, kind, x, SleepCommand(t))
                        if trace:
                            emit(x, "rx", "sleep_applied", pid)
                if use_cca and (cca_p >= 1.0 or rnd() < cca_p):
                    nx = x + 1
                    if not (nx > rx.disabled_until_x or nx in rx.forced_open):
                        cca_marks.add(nx)
                        rx = rx_apply_cca(rx, kind, x, True)
                        if trace:
                            emit(x, "rx", "rx_cca_extend", pid)
            if outcomes is not None:
                outcomes[pid].append(code)

            if acked:
                c.acks_received += 1
                if trace:
                    emit(x, "tx", "ack_ok", pid)
                if sleeps:
                    txv = tx_apply_ack(txv, kind, x, t)
                inflight = -1
            else:
                if trace and code == "A":
                    emit(x, "tx", "ack_lost", pid)
                if m > 0:
                    m -= 1
                    t -= 1
                    inflight = pid
                else:
                    c.drops += 1
                    inflight = -1
                    if trace:
                        emit(x, "tx", "drop", pid)
        elif rx_on:
            c.rx_idle += 1
            if x in cca_marks:
                c.rx_cca_only += 1
            if trace:
                emit(x, "rx", "rx_idle")
        cca_marks.discard(x)
        if trace and rx_events:
            events.extend(rx_events)
            rx_events.clear()

        if skip_idle and inflight < 0 and not queue.items:
            nxt = next_gen_x if next_gen_x < n_occ else n_occ
            lo, hi = x + 1, nxt - 1
            if hi >= lo:
                idle = hi - lo + 1
                dis_hi = min(rx.disabled_until_x, hi)
                if dis_hi >= lo:
                    idle -= dis_hi - lo + 1
                    idle += sum(1 for i in rx.forced_open if lo <= i <= dis_hi)
                c.rx_idle += idle
                if cca_marks:
                    hit = [i for i in cca_marks if lo <= i <= hi]
                    c.rx_cca_only += len(hit)
                    cca_marks.difference_update(hit)
                x = nxt
                continue
        x += 1

    c.generated = k
    c.max_queue_depth = queue.max_depth
    pending = len(queue) + (1 if inflight >= 0 else 0)
    latency = compute_latency([v for v in lat if v == v])
    power = compute_power(c, config.energy, duration)
    packets = None
    if keep_packets or record_outcomes:
        packets = PacketLog(
            gen_time=np.asarray(gen_times, dtype=float),
            latency=np.asarray(lat, dtype=float),
            copies=np.asarray(copies, dtype=np.int64),
            attempts=np.asarray(attempts, dtype=np.int64),
            useless=np.asarray(useless, dtype=np.int64),
            first_t=np.asarray(first_t, dtype=np.int64),
            outcomes=["".join(o) for o in outcomes] if outcomes is not None else None,
        )
    return RunResult(config=config, seed=seed, phase=flow.phase, counters=c,
                     latency=latency, power=power, pending_at_end=pending,
                     packets=packets, trace=events)


GRID_AXES = ("eps_f", "eps_a", "joint", "n_tries", "t_app", "strategy")


def expand_grid(base: RunConfig, sweep: Dict[str, Sequence]) -> List[tuple]:
    """Cartesian product of the sweep axes, in the given axis order.

    Axis ``joint`` scales the base (eps_f, eps_a) pair by each factor.
    Returns a list of ``(point, config)`` pairs.
    """
    if not sweep or any(len(list(v)) == 0 for v in sweep.values()):
        raise ValueError("empty sweep grid")
    for axis in sweep:
        if axis not in GRID_AXES:
            raise ValueError(f"unknown sweep axis {axis!r}; expected one of {GRID_AXES}")
    axes = list(sweep)
    out = []
    for values in itertools.product(*(list(sweep[a]) for a in axes)):
        point = dict(zip(axes, values))
        kw = {}
        for a, v in point.items():
            if a == "joint":
                kw["eps_f"] = base.loss.eps_f * v
                kw["eps_a"] = base.loss.eps_a * v
            elif a == "n_tries":
                kw[a] = int(v)
            else:
                kw[a] = v
        out.append((point, base.with_overrides(**kw)))
    return out


def _run_quiet(cfg: RunConfig) -> RunResult:
    return run(cfg, keep_packets=False)


def run_campaign(base: RunConfig, sweep: Dict[str, Sequence], seeds: Sequence[int],
                 jobs: int = 1) -> List[RunResult]:
    """One run per grid point per seed, ordered by grid point then seed."""
    if len(seeds) == 0:
        raise ValueError("no seeds given")
    configs = [cfg.with_overrides(seed=s)
               for _, cfg in expand_grid(base, sweep) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_quiet, configs, chunksize=1))
    return [_run_quiet(cfg) for cfg in configs]
