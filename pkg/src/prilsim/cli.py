"""Command-line front end: ``prilsim run|sweep|estimate|oracle``.

Exit status: 0 on success, 1 on configuration errors, 2 when an oracle
comparison fails.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Dict, List, Optional, Sequence

from .config import KEYS, build_run_config, load_config, parse_seeds, resolve
from .engine import GRID_AXES, ConfigError, RunResult, expand_grid, run, run_campaign
from .estimator import PingLogError, PingLogSummary, estimate_eps_a, parse_ping_log
from .metrics import UJ
from .oracle import compare_with_simulation

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CHECK = 2

RUN_COLUMNS = [
    "strategy", "seed", "eps_f", "eps_a", "n_tries", "t_app_s", "duration_s",
    "p_total_uW", "p_ntx_uW", "p_nrx_uW", "p_listen_ntx_uW", "p_listen_nrx_uW",
    "useless_attempts", "rx_idle", "drops", "dup_deliveries", "max_queue_depth",
    "lat_mean_s", "lat_std_s", "lat_p99_s", "lat_p999_s", "lat_p9999_s", "lat_max_s",
]
SWEEP_COLUMNS = ["grid_axis", "grid_value"] + RUN_COLUMNS


def _num(v, digits=6) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return f"{v:.{digits}f}"


def _g(v) -> str:
    return repr(float(v)) if not float(v).is_integer() else f"{float(v):.1f}"


def result_row(res: RunResult) -> Dict[str, str]:
    cfg = res.config
    p = res.power
    c = res.counters
    lat = res.latency
    return {
        "strategy": str(cfg.strategy),
        "seed": str(res.seed),
        "eps_f": _g(cfg.loss.eps_f),
        "eps_a": _g(cfg.loss.eps_a),
        "n_tries": str(cfg.n_tries),
        "t_app_s": _g(cfg.flow.t_app),
        "duration_s": _g(cfg.duration),
        "p_total_uW": _num(p.p_total / UJ),
        "p_ntx_uW": _num(p.p_ntx / UJ),
        "p_nrx_uW": _num(p.p_nrx / UJ),
        "p_listen_ntx_uW": _num(p.p_listen_ntx / UJ),
        "p_listen_nrx_uW": _num(p.p_listen_nrx / UJ),
        "useless_attempts": str(c.useless_attempts),
        "rx_idle": str(c.rx_idle),
        "drops": str(c.drops),
        "dup_deliveries": str(c.dup_deliveries),
        "max_queue_depth": str(c.max_queue_depth),
        "lat_mean_s": _num(lat.mean),
        "lat_std_s": _num(lat.std),
        "lat_p99_s": _num(lat.p99),
        "lat_p999_s": _num(lat.p999),
        "lat_p9999_s": _num(lat.p9999),
        "lat_max_s": _num(lat.max),
    }


def write_csv(rows: List[Dict[str, str]], columns: List[str], out) -> None:
    writer = csv.DictWriter(out, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--out", help="output file (default: stdout)")
    for key, (typ, help_) in KEYS.items():
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ,
                       default=None, help=help_)
    p.add_argument("--seed", dest="seed_single", type=int, default=None,
                   help="single seed (shorthand for --seeds)")


def _overrides(args) -> Dict[str, object]:
    ov = {k: getattr(args, k) for k in KEYS}
    if args.seed_single is not None:
        ov["seeds"] = str(args.seed_single)
    return ov


def _file_values(args) -> Dict[str, object]:
    if not args.config:
        return {}
    try:
        return load_config(args.config)
    except OSError as exc:
        raise ConfigError({"config": str(exc)}) from exc


def _open_out(path):
    return open(path, "w", newline="") if path else None


def cmd_run(args) -> int:
    values = resolve(_file_values(args), _overrides(args))
    base = build_run_config(values)
    seeds = parse_seeds(values["seeds"])
    rows = []
    for seed in seeds:
        res = run(base.with_overrides(seed=seed), trace=bool(args.trace),
                  keep_packets=False)
        rows.append(result_row(res))
        if args.trace:
            path = args.trace if len(seeds) == 1 else f"{args.trace}.{seed}"
            with open(path, "w") as fh:
                fh.write("asn\tx\tside\tkind\tpacket_id\n")
                for line in res.trace_lines():
                    fh.write(line + "\n")
        p = res.power.in_uw()
        print(f"[{res.config.strategy} seed={seed}] P={p['p_total']:.3f} uW "
              f"(N_TX {p['p_ntx']:.3f}, N_RX {p['p_nrx']:.3f}), "
              f"useless={res.counters.useless_attempts}, drops={res.counters.drops}, "
              f"mean latency={_num(res.latency.mean, 4)} s", file=sys.stderr)
    _emit(rows, RUN_COLUMNS, args.out)
    return EXIT_OK


def _emit(rows, columns, path) -> None:
    fh = _open_out(path)
    try:
        write_csv(rows, columns, fh or sys.stdout)
    finally:
        if fh:
            fh.close()


def parse_grid(text: str):
    """``axis=v1,v2,...`` or ``axis=a:b`` (integer range) or ``axis=a:b:step``."""
    if "=" not in text:
        raise ConfigError({"grid": f"expected axis=values, got {text!r}"})
    axis, body = (s.strip() for s in text.split("=", 1))
    axis = axis.replace("-", "_")
    if axis not in GRID_AXES or axis == "strategy":
        raise ConfigError({"grid": f"unknown axis {axis!r}"})
    conv = int if axis == "n_tries" else float
    values = []
    for part in body.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = part.split(":")
            if axis == "n_tries":
                a, b = int(bits[0]), int(bits[1])
                step = int(bits[2]) if len(bits) > 2 else 1
                values.extend(range(a, b + 1, step))
            else:
                a, b, step = (float(v) for v in bits) if len(bits) == 3 else (None,) * 3
                if step is None:
                    raise ConfigError({"grid": "float ranges need a:b:step"})
                n = int(round((b - a) / step))
                values.extend(round(a + i * step, 12) for i in range(n + 1))
        else:
            values.append(conv(part))
    if not values:
        raise ConfigError({"grid": "empty grid"})
    return axis, values


def cmd_sweep(args) -> int:
    overrides = _overrides(args)
    strategies = [s.strip() for s in (args.strategies or "").split(",") if s.strip()]
    values = resolve(_file_values(args), overrides, require_strategy=not strategies)
    if not strategies:
        strategies = [values["strategy"]]
    axis, grid_values = parse_grid(args.grid)
    base = build_run_config(values, strategy=strategies[0])
    seeds = parse_seeds(values["seeds"])
    if not seeds:
        raise ConfigError({"seeds": "empty seed list"})
    sweep = {axis: grid_values, "strategy": strategies}
    expand_grid(base, sweep)  # validates every grid point before running
    results = run_campaign(base, sweep, seeds, jobs=args.jobs)
    rows = []
    i = 0
    for v in grid_values:
        for _ in strategies:
            for _ in seeds:
                row = {"grid_axis": axis, "grid_value": str(v)}
                row.update(result_row(results[i]))
                rows.append(row)
                i += 1
    _emit(rows, SWEEP_COLUMNS, args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    if args.log:
        try:
            with open(args.log) as fh:
                summary = parse_ping_log(fh, n_ping=args.n_ping)
        except OSError as exc:
            raise ConfigError({"log": str(exc)}) from exc
        except PingLogError as exc:
            raise ConfigError({"n_ping": str(exc)}) from exc
        if args.n_dup is not None:
            summary = PingLogSummary(summary.n_ping, args.n_dup)
    else:
        missing = {k: "required without --log" for k in ("n_ping", "n_dup")
                   if getattr(args, k) is None}
        if missing:
            raise ConfigError(missing)
        try:
            summary = PingLogSummary(args.n_ping, args.n_dup)
        except ValueError as exc:
            raise ConfigError({"n_ping/n_dup": str(exc)}) from exc
    est = estimate_eps_a(args.eps_f, summary, args.n_tries, args.iterations)
    lines = [f"eps_f = {args.eps_f}", f"n_tries = {args.n_tries}",
             f"n_ping = {summary.n_ping}", f"n_dup = {summary.n_dup}"]
    lines += est.report_lines()
    text = "\n".join(lines) + "\n"
    fh = _open_out(args.out)
    (fh or sys.stdout).write(text)
    if fh:
        fh.close()
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        report = compare_with_simulation(args.strategy, args.horizon, args.n_tries,
                                         args.eps_f, args.eps_a, trials=args.trials,
                                         seed0=args.seed)
    except ValueError as exc:
        raise ConfigError({"oracle": str(exc)}) from exc
    text = "\n".join(report.lines()) + "\n"
    fh = _open_out(args.out)
    (fh or sys.stdout).write(text)
    if fh:
        fh.close()
    return EXIT_OK if report.passed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prilsim", description="TSCH link simulator with PRIL strategies")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single simulation, one CSV row per seed")
    _add_config_flags(p)
    p.add_argument("--trace", help="write the event trace (TSV) to this path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="parameter sweep, one CSV row per point and seed")
    _add_config_flags(p)
    p.add_argument("--grid", required=True,
                   help="axis=values, axis in eps_f|eps_a|joint|n_tries|t_app")
    p.add_argument("--strategies", help="comma-separated strategies to sweep")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("estimate", help="ACK loss probability from ping duplicates")
    p.add_argument("--eps-f", type=float, default=0.126)
    p.add_argument("--n-tries", type=int, default=16)
    p.add_argument("--n-dup", type=int)
    p.add_argument("--n-ping", type=int)
    p.add_argument("--log", help="ping log file")
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("oracle", help="exhaustive enumeration vs Monte Carlo")
    p.add_argument("--strategy", required=True)
    p.add_argument("--horizon", type=int, default=4)
    p.add_argument("--n-tries", type=int, default=2)
    p.add_argument("--eps-f", type=float, default=0.126)
    p.add_argument("--eps-a", type=float, default=0.080)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error [{', '.join(exc.fields)}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # value errors raised while building configs (bad ranges, seeds, grid points)
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
