"""Exhaustive small-horizon oracle for the simulator.

A single packet becomes available in occurrence 1 and carries sleep value
``t0``. Every combination of frame/ACK outcomes is enumerated with its
probability, using a plain per-cell ON/OFF table that follows the sender
and receiver procedures line by line. The resulting expectations are
compared with Monte Carlo runs of :func:`prilsim.engine.run` configured
for the same scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .engine import RunConfig, run
from .strategies import as_strategy
from .tsch import ScheduleConfig

MAX_HORIZON = 8
MAX_TRIES = 4

ORACLE_COUNTERS = (
    "tx_attempts",
    "useless_attempts",
    "acks_sent",
    "acks_received",
    "rx_frames",
    "rx_idle",
    "rx_cca_only",
    "drops",
    "dup_deliveries",
    "early_failures_phi",
)


def _check_bounds(horizon: int, n_tries: int) -> None:
    if not 2 <= horizon <= MAX_HORIZON:
        raise ValueError(f"horizon must lie in [2, {MAX_HORIZON}], got {horizon}")
    if not 1 <= n_tries <= MAX_TRIES:
        raise ValueError(f"n_tries must lie in [1, {MAX_TRIES}], got {n_tries}")


def enumerate_outcomes(strategy, horizon: int, n_tries: int, t0: int,
                       eps_f: float, eps_a: float) -> List[Tuple[float, Dict[str, int]]]:
    """All leaves ``(probability, counters)`` of the outcome tree."""
    _check_bounds(horizon, n_tries)
    kind = as_strategy(strategy)
    mode = str(kind)
    n_keep = kind.n_open
    size = horizon + t0 + n_keep + 2
    leaves = []

    def branch(x, rx_on, tx_on, cca_only, sender, m, t, copies, lost_before,
               cnt, prob):
        if prob == 0.0:
            return
        if x == horizon:
            leaves.append((prob, cnt))
            return
        rx_on = list(rx_on)
        tx_on = list(tx_on)
        cca_only = list(cca_only)
        cnt = dict(cnt)

        sending = False
        if sender == "inflight":
            sending = True
        elif sender == "waiting" and x >= 1 and tx_on[x]:
            sending = True
            sender = "inflight"
            m = n_tries - 1
            t = t0 if kind.uses_sleep else 0
            lost_before = 0

        if not sending:
            if rx_on[x]:
                cnt["rx_idle"] += 1
                cnt["rx_cca_only"] += cca_only[x]
            branch(x + 1, rx_on, tx_on, cca_only, sender, m, t, copies,
                   lost_before, cnt, prob)
            return

        cnt["tx_attempts"] += 1
        if not rx_on[x]:
            cnt["useless_attempts"] += 1
            _after(x, rx_on, tx_on, cca_only, m, t, copies, lost_before, cnt,
                   prob, acked=False)
            return

        # heard attempt: frame lost
        lost = dict(cnt)
        lost["rx_idle"] += 1
        lost["rx_cca_only"] += cca_only[x]
        rx_l, cca_l = list(rx_on), list(cca_only)
        if mode == "a-open":
            _cca(x, rx_l, cca_l)
        _after(x, rx_l, tx_on, cca_l, m, t, copies, lost_before + 1, lost,
               prob * eps_f, acked=False)

        # frame decoded, ACK either delivered or lost
        got = dict(cnt)
        got["rx_frames"] += 1
        got["acks_sent"] += 1
        if copies > 0:
            got["dup_deliveries"] += 1
        rx_g, cca_g = list(rx_on), list(cca_only)
        if kind.uses_sleep and t > 0:
            for i in range(x + 1, x + t + 1):
                rx_g[i] = False
            if mode != "closed":
                for i in range(x + 1, x + n_keep + 1):
                    rx_g[i] = True
        if mode == "a-open":
            _cca(x, rx_g, cca_g)
        p_got = prob * (1.0 - eps_f)
        _after(x, rx_g, tx_on, cca_g, m, t, copies + 1, lost_before, dict(got),
               p_got * (1.0 - eps_a), acked=True)
        ack_lost = dict(got)
        ack_lost["early_failures_phi"] += lost_before
        _after(x, rx_g, tx_on, cca_g, m, t, copies + 1, 0, ack_lost,
               p_got * eps_a, acked=False)

    def _cca(x, rx_on, cca_only):
        if not rx_on[x + 1]:
            cca_only[x + 1] = 1
        rx_on[x + 1] = True

    def _after(x, rx_on, tx_on, cca_only, m, t, copies, lost_before, cnt, prob,
               acked):
        if acked:
            cnt["acks_received"] += 1
            tx_on = list(tx_on)
            if kind.uses_sleep:
                for i in range(x + 1, x + t + 1):
                    tx_on[i] = False
                if mode != "closed":
                    for i in range(x + 1, x + n_keep + 1):
                        tx_on[i] = True
            branch(x + 1, rx_on, tx_on, cca_only, "done", 0, 0, copies,
                   lost_before, cnt, prob)
        elif m > 0:
            branch(x + 1, rx_on, tx_on, cca_only, "inflight", m - 1, t - 1,
                   copies, lost_before, cnt, prob)
        else:
            cnt["drops"] += 1
            branch(x + 1, rx_on, tx_on, cca_only, "done", 0, 0, copies,
                   lost_before, cnt, prob)

    zero = {k: 0 for k in ORACLE_COUNTERS}
    branch(0, [True] * size, [True] * size, [0] * size, "waiting", 0, 0, 0, 0,
           zero, 1.0)
    return leaves


@dataclass(frozen=True)
class Moment:
    mean: float
    var: float


def expected_counters(strategy, horizon: int, n_tries: int, t0: int,
                      eps_f: float, eps_a: float) -> Dict[str, Moment]:
    leaves = enumerate_outcomes(strategy, horizon, n_tries, t0, eps_f, eps_a)
    total = sum(p for p, _ in leaves)
    if not math.isclose(total, 1.0, abs_tol=1e-12):
        raise RuntimeError(f"leaf probabilities sum to {total}")
    out = {}
    for name in ORACLE_COUNTERS:
        mean = sum(p * c[name] for p, c in leaves)
        var = sum(p * (c[name] - mean) ** 2 for p, c in leaves)
        out[name] = Moment(mean, max(var, 0.0))
    return out


def scenario_config(strategy, horizon: int, n_tries: int, eps_f: float,
                    eps_a: float, seed: int = 0,
                    schedule: ScheduleConfig = ScheduleConfig()) -> RunConfig:
    """Engine configuration reproducing the oracle scenario.

    The packet is generated half a slot into the run, so its first usable
    cell is occurrence 1; the next generation falls just after the horizon,
    which makes the engine's sleep value equal to ``horizon - 1``.
    """
    span = horizon * schedule.t_sfr
    cfg = RunConfig(strategy=strategy, schedule=schedule, n_tries=n_tries,
                    duration=span)
    return cfg.with_overrides(eps_f=eps_f, eps_a=eps_a, seed=seed, t_app=span,
                              phase=0.5 * schedule.t_slot)


def scenario_sleep_value(horizon: int) -> int:
    return horizon - 1


@dataclass
class CounterCheck:
    name: str
    expected: float
    simulated: float
    sigma: float

    @property
    def passed(self) -> bool:
        if self.sigma == 0.0:
            return math.isclose(self.simulated, self.expected, abs_tol=1e-12)
        return abs(self.simulated - self.expected) <= 3.0 * self.sigma


@dataclass
class OracleReport:
    strategy: str
    horizon: int
    n_tries: int
    eps_f: float
    eps_a: float
    trials: int
    checks: List[CounterCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> List[str]:
        head = (f"strategy = {self.strategy}\nhorizon = {self.horizon}\n"
                f"n_tries = {self.n_tries}\neps_f = {self.eps_f}\n"
                f"eps_a = {self.eps_a}\ntrials = {self.trials}")
        out = head.split("\n")
        for c in self.checks:
            verdict = "PASS" if c.passed else "FAIL"
            out.append(f"{c.name} = expected {c.expected:.6f} simulated "
                       f"{c.simulated:.6f} sigma {c.sigma:.6f} {verdict}")
        out.append(f"verdict = {'PASS' if self.passed else 'FAIL'}")
        return out


def compare_with_simulation(strategy, horizon: int, n_tries: int, eps_f: float,
                            eps_a: float, trials: int = 100_000,
                            seed0: int = 0) -> OracleReport:
    """Monte Carlo over ``trials`` seeded engine runs versus enumeration."""
    _check_bounds(horizon, n_tries)
    kind = as_strategy(strategy)
    expect = expected_counters(kind, horizon, n_tries,
                               scenario_sleep_value(horizon), eps_f, eps_a)
    base = scenario_config(kind, horizon, n_tries, eps_f, eps_a)
    sums = dict.fromkeys(ORACLE_COUNTERS, 0)
    for i in range(trials):
        c = run(base, seed=seed0 + i, keep_packets=False).counters
        for name in ORACLE_COUNTERS:
            sums[name] += getattr(c, name)
    checks = []
    for name in ORACLE_COUNTERS:
        e = expect[name]
        checks.append(CounterCheck(name, e.mean, sums[name] / trials,
                                   math.sqrt(e.var / trials)))
    return OracleReport(str(kind), horizon, n_tries, eps_f, eps_a, trials, checks)
