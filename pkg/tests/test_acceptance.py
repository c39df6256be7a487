"""Acceptance suite: twelve end-to-end criteria.

Every test records a one-line verdict in ``RESULTS``; ``conftest.py``
prints them at the end of the session. Seeds and grids are fixed up front.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import pytest
from scipy.stats import spearmanr

from prilsim import RunConfig, run, run_campaign
from prilsim.cli import main as cli_main
from prilsim.estimator import PingLogSummary, estimate_eps_a, simulate_ping
from prilsim.oracle import compare_with_simulation

RESULTS: dict = {}

STRATEGIES = ("closed", "1-open", "2-open", "a-open")
DAY = 86400.0
SEEDS = list(range(1, 11))

AOPEN_USELESS: list = []  # (label, useless_attempts) of every a-open run


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)


def _collect(results) -> None:
    for r in results:
        if str(r.config.strategy) == "a-open":
            AOPEN_USELESS.append((f"eps=({r.config.loss.eps_f:.4f},{r.config.loss.eps_a:.4f}) "
                                  f"n={r.config.n_tries} t_app={r.config.flow.t_app} seed={r.seed}",
                                  r.counters.useless_attempts))


@lru_cache(maxsize=None)
def campaign(eps_f: float, eps_a: float, strategies: tuple, seeds: tuple,
             t_app: float = 60.0, duration: float = 30 * DAY, n_tries: int = 16):
    """Per-strategy arrays of runs, shape (strategy, seed)."""
    base = RunConfig(strategy=strategies[0], n_tries=n_tries, duration=duration)
    base = base.with_overrides(eps_f=eps_f, eps_a=eps_a, t_app=t_app)
    res = run_campaign(base, {"strategy": list(strategies)}, list(seeds))
    _collect(res)
    k = len(seeds)
    return {s: res[i * k:(i + 1) * k] for i, s in enumerate(strategies)}


def mean_of(runs, attr):
    return float(np.mean([attr(r) for r in runs]))


def p_total(r):
    return r.power.p_total * 1e6


# 1 ------------------------------------------------------------------------

def test_criterion_01_estimator_golden(capsys):
    code = cli_main(["estimate", "--eps-f", "0.126", "--n-dup", "1967",
                     "--n-ping", "10800", "--n-tries", "16"])
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("eps_a ="))
    value = float(line.split("=")[1])
    direct = estimate_eps_a(0.126, PingLogSummary(10800, 1967), 16).eps_a
    ok = code == 0 and abs(value - 0.080255) <= 1e-5 and abs(direct - 0.080255) <= 1e-5
    record(1, ok, f"eps_a={direct:.7f} (cli {value:.6f}), target 0.080255 +- 1e-5")
    assert ok


# 2 ------------------------------------------------------------------------

def test_criterion_02_default_ordering():
    c = campaign(0.126, 0.080, STRATEGIES, tuple(SEEDS))
    P = {s: mean_of(c[s], p_total) for s in STRATEGIES}
    save_closed = 100 * (P["closed"] - P["a-open"]) / P["closed"]
    save_open1 = 100 * (P["1-open"] - P["a-open"]) / P["1-open"]
    order = P["a-open"] < P["1-open"] < P["2-open"] and P["a-open"] < P["closed"]
    ok = order and abs(save_closed - 9.3) <= 3.0 and abs(save_open1 - 3.2) <= 3.0
    record(2, ok, "P[uW] " + " ".join(f"{s}={P[s]:.3f}" for s in STRATEGIES)
           + f"; a-open saves {save_closed:.2f}% vs closed (9.3+-3),"
             f" {save_open1:.2f}% vs 1-open (3.2+-3)")
    assert ok


# 3 ------------------------------------------------------------------------

def test_criterion_03_low_error_closed_best():
    c = campaign(0.063, 0.040, STRATEGIES, tuple(SEEDS))
    P = {s: mean_of(c[s], p_total) for s in STRATEGIES}
    best = min(P, key=P.get)
    ok = best == "closed"
    record(3, ok, "P[uW] " + " ".join(f"{s}={P[s]:.3f}" for s in STRATEGIES)
           + f"; lowest={best}")
    assert ok


# 4 ------------------------------------------------------------------------

JOINT_SCALES = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2]
JOINT_SEEDS = [1, 2, 3, 4, 5]


def test_criterion_04_joint_crossover():
    base = RunConfig(strategy="closed")
    res = run_campaign(base, {"joint": JOINT_SCALES, "strategy": ["closed", "a-open"]},
                       JOINT_SEEDS)
    _collect(res)
    k = len(JOINT_SEEDS)
    P = np.array([r.power.p_total for r in res]).reshape(len(JOINT_SCALES), 2, k).mean(2)
    diff = P[:, 0] - P[:, 1]  # closed minus a-open
    crossings = [i for i in range(len(diff) - 1) if diff[i] <= 0 < diff[i + 1]]
    sign_changes = sum(1 for i in range(len(diff) - 1) if (diff[i] > 0) != (diff[i + 1] > 0))
    if len(crossings) == 1 and sign_changes == 1:
        i = crossings[0]
        s = JOINT_SCALES[i] + (JOINT_SCALES[i + 1] - JOINT_SCALES[i]) * (-diff[i]) / (diff[i + 1] - diff[i])
        eps_star = 0.126 * s
        ok = 0.07 <= eps_star <= 0.11
        detail = f"crossover eps_f={eps_star:.4f} (eps_a={0.080 * s:.4f}), required [0.07, 0.11]"
    else:
        ok = False
        detail = f"no unique crossover; closed - a-open [uW] = {np.round(diff * 1e6, 3).tolist()}"
    record(4, ok, detail)
    assert ok


# 5 ------------------------------------------------------------------------

def test_criterion_05_ntries_peak():
    # The peak comes from sleep commands that never reach the receiver, so it
    # concerns the four sleep-based strategies; plain TSCH listens in every
    # cell regardless and is shown for reference only.
    seeds = (1, 2, 3)
    strategies = ("tsch-baseline",) + STRATEGIES
    c1 = campaign(0.126, 0.080, strategies, seeds, n_tries=1)
    c3 = campaign(0.126, 0.080, strategies, seeds, n_tries=3)
    parts = []
    ok = True
    for s in strategies:
        p1 = mean_of(c1[s], lambda r: r.power.p_nrx * 1e6)
        p3 = mean_of(c3[s], lambda r: r.power.p_nrx * 1e6)
        if s in STRATEGIES:
            ok &= p1 > p3
            parts.append(f"{s} {p1:.2f}>{p3:.2f}")
        else:
            parts.append(f"(reference {s} {p1:.2f} vs {p3:.2f})")
    record(5, ok, "P_NRX[uW] n_tries=1 vs 3: " + ", ".join(parts))
    assert ok


# 6 ------------------------------------------------------------------------

NTRIES_RANGE = list(range(3, 29))
NTRIES_SEEDS = [1, 2, 3]


def test_criterion_06_ntries_saturation():
    base = RunConfig(strategy="closed")
    grid = NTRIES_RANGE + [30, 36]
    res = run_campaign(base, {"n_tries": grid}, NTRIES_SEEDS)
    p = np.array([r.power.p_ntx for r in res]).reshape(len(grid), -1).mean(1) * 1e6
    p30, p36 = p[-2], p[-1]
    change = 100 * abs(p36 - p30) / p30
    rho = spearmanr(NTRIES_RANGE, p[:len(NTRIES_RANGE)]).statistic
    ok = change < 2.0 and rho > 0.95
    record(6, ok, f"closed P_NTX 30->36: {p30:.3f}->{p36:.3f} uW ({change:.2f}% < 2%);"
                  f" Spearman over 3..28 = {rho:.4f} (> 0.95)")
    assert ok


# 7 ------------------------------------------------------------------------

def test_criterion_07_latency():
    strategies = ("tsch-baseline",) + STRATEGIES
    c60 = campaign(0.126, 0.080, strategies, tuple(SEEDS))
    mu60 = {s: mean_of(c60[s], lambda r: r.latency.mean) for s in strategies}
    dev60 = {s: 100 * abs(mu60[s] - mu60["tsch-baseline"]) / mu60["tsch-baseline"]
             for s in STRATEGIES}
    ok60 = all(d < 1.0 for d in dev60.values())

    c5 = campaign(0.126, 0.080, strategies, (1, 2, 3, 4), t_app=5.0, duration=5 * DAY)
    mu5 = {s: mean_of(c5[s], lambda r: r.latency.mean) for s in strategies}
    dev5 = 100 * abs(mu5["a-open"] - mu5["tsch-baseline"]) / mu5["tsch-baseline"]
    ok5 = mu5["closed"] > mu5["1-open"] > mu5["a-open"] and dev5 < 2.0
    ok = ok60 and ok5
    record(7, ok, "T_app=60 max deviation {:.3f}% (<1%); T_app=5 mu_d[s] ".format(max(dev60.values()))
           + " ".join(f"{s}={mu5[s]:.4f}" for s in strategies)
           + f", a-open vs baseline {dev5:.3f}% (<2%)")
    assert ok


# 8 ------------------------------------------------------------------------

def _finished(o: str, n_tries: int) -> bool:
    return o.endswith("K") or len(o) == n_tries


def test_criterion_08_useless_closed_form():
    cases = [(60.0, 16), (10.0, 16), (20.0, 16), (60.0, 40), (5.0, 8)]
    checked = 0
    mismatches = 0
    branches = {"t": 0, "n-1": 0}
    for i, (t_app, n_tries) in enumerate(cases):
        cfg = RunConfig(strategy="closed", n_tries=n_tries, duration=30 * DAY)
        cfg = cfg.with_overrides(t_app=t_app)
        r = run(cfg, seed=100 + i, record_outcomes=True)
        pk = r.packets
        for pid, o in enumerate(pk.outcomes):
            if not o or o[0] != "A" or not _finished(o, n_tries):
                continue
            t0 = int(pk.first_t[pid])
            want = min(n_tries - 1, t0)
            branches["t" if t0 < n_tries - 1 else "n-1"] += 1
            checked += 1
            if int(pk.useless[pid]) != want:
                mismatches += 1
    ok = checked >= 10_000 and mismatches == 0 and min(branches.values()) > 0
    record(8, ok, f"{checked} traces checked, {mismatches} mismatches "
                  f"(t<N-1: {branches['t']}, t>=N-1: {branches['n-1']})")
    assert ok


# 9 ------------------------------------------------------------------------

def test_criterion_09_aopen_never_useless():
    # make sure the sweeps above ran even when this test is selected alone
    campaign(0.126, 0.080, STRATEGIES, tuple(SEEDS))
    campaign(0.063, 0.040, STRATEGIES, tuple(SEEDS))
    extra = [(1.0, 1.0), (0.5, 0.5), (0.3, 0.0), (0.0, 0.3)]
    for eps_f, eps_a in extra:
        campaign(eps_f, eps_a, ("a-open",), (1, 2), t_app=10.0, duration=5 * DAY)
    bad = [(label, u) for label, u in AOPEN_USELESS if u != 0]
    ok = not bad and len(AOPEN_USELESS) > 0
    record(9, ok, f"{len(AOPEN_USELESS)} a-open runs, {len(bad)} with useless attempts")
    assert ok


# 10 -----------------------------------------------------------------------

def _residual_counts(n: int, n_tries: int, outcomes):
    tail = "L" * n
    opps = events = 0
    for o in outcomes:
        if not _finished(o, n_tries):
            continue
        for i, c in enumerate(o):
            if c in "KA" and i + n <= n_tries - 1:
                opps += 1
                if c == "A" and o[i + 1:i + 1 + n] == tail:
                    events += 1
    return opps, events


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_10_residual_rate(n):
    eps_f, eps_a, n_tries = 0.126, 0.080, 16
    opps = events = 0
    seed = 1000 * n
    while opps < 1_000_000:
        cfg = RunConfig(strategy=f"{n}-open", n_tries=n_tries, duration=30 * DAY)
        r = run(cfg, seed=seed, record_outcomes=True)
        o, e = _residual_counts(n, n_tries, r.packets.outcomes)
        opps += o
        events += e
        seed += 1
    p = eps_a * eps_f ** n
    sigma = math.sqrt(p * (1 - p) / opps)
    freq = events / opps
    ok = abs(freq - p) <= 3 * sigma
    line = (f"n={n}: {events}/{opps} = {100 * freq:.4f}% vs {100 * p:.4f}% "
            f"(|z|={abs(freq - p) / sigma:.2f} <= 3)")
    prev = RESULTS.get(10)
    if prev and n == 3:
        ok_prev = "PASS" in prev
        record(10, ok and ok_prev, prev.split("  ", 1)[1] + "; " + line)
    else:
        record(10, ok, line)
    assert ok


# 11 -----------------------------------------------------------------------

ORACLE_CASES = [(s, h, n) for s in ("tsch-baseline",) + STRATEGIES
                for h in (4, 5, 6) for n in (2, 3)]
ORACLE_FAILS: list = []


@pytest.mark.parametrize("strategy,horizon,n_tries", ORACLE_CASES)
def test_criterion_11_oracle(strategy, horizon, n_tries):
    rep = compare_with_simulation(strategy, horizon, n_tries, 0.126, 0.080,
                                  trials=100_000, seed0=0)
    if not rep.passed:
        bad = [c.name for c in rep.checks if not c.passed]
        ORACLE_FAILS.append(f"{strategy}/h{horizon}/n{n_tries}: {','.join(bad)}")
    done = ORACLE_CASES.index((strategy, horizon, n_tries)) + 1
    if done == len(ORACLE_CASES):
        record(11, not ORACLE_FAILS,
               f"{len(ORACLE_CASES)} configurations x 1e5 trials, "
               f"failures: {ORACLE_FAILS or 'none'}")
    assert rep.passed, "\n".join(rep.lines())


# 12 -----------------------------------------------------------------------

def test_criterion_12_estimator_round_trip():
    eps_f, eps_a, n_tries, n_ping = 0.126, 0.080, 16, 10800
    sim = simulate_ping(eps_f, eps_a, n_tries, n_ping, seed=12)
    summary = sim.summary()
    est = estimate_eps_a(eps_f, summary, n_tries).eps_a
    # delta method: sampling error of the mean reply count, mapped through
    # the estimator by a central difference
    se_alpha = float(np.std(sim.replies, ddof=1)) / math.sqrt(n_ping)
    h = 1e-4

    def at(alpha):
        return estimate_eps_a(eps_f, PingLogSummary(10**9, round(alpha * 10**9)), n_tries).eps_a

    a = summary.alpha_dup
    slope = (at(a + h) - at(a - h)) / (2 * h)
    sigma = abs(slope) * se_alpha
    ok = abs(est - eps_a) <= 3 * sigma
    record(12, ok, f"N_ping={n_ping} N_DUP={summary.n_dup} -> eps_a={est:.5f} "
                   f"vs 0.080 (sigma={sigma:.5f}, |z|={abs(est - eps_a) / sigma:.2f})")
    assert ok
