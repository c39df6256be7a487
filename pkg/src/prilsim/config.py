"""``key = value`` configuration files and their mapping onto RunConfig.

Blank lines and ``#`` comments are ignored. Every key has a command-line
twin obtained by replacing underscores with dashes (``eps_f`` -> ``--eps-f``).
Energies are given in microjoules.
"""

from __future__ import annotations

import os
from typing import Dict, Iterable, List, Optional

from .engine import ConfigError, RunConfig
from .metrics import UJ, EnergyModel
from .strategies import as_strategy

SEED_ENV = "PRILSIM_SEED"

# key -> (parser, help)
KEYS = {
    "strategy": (str, "tsch-baseline, closed, <n>-open or a-open"),
    "seeds": (str, "comma-separated seed list (ranges a:b allowed)"),
    "eps_f": (float, "data frame loss probability"),
    "eps_a": (float, "ACK frame loss probability"),
    "n_tries": (int, "maximum transmission attempts per frame"),
    "t_app": (float, "packet generation period [s]"),
    "phase": (float, "first generation instant [s]; random in [0, T_sfr) if unset"),
    "duration": (float, "simulated time [s]"),
    "t_slot": (float, "slot duration [s]"),
    "n_slot": (int, "slots per slotframe"),
    "slot_offset": (int, "slot offset of the link's cell"),
    "capacity_c": (int, "reserved cells per slotframe"),
    "n_ch": (int, "number of channels (informational)"),
    "cca_detect_prob": (float, "probability that CCA notices the sender"),
    "e_tx_attempt_uj": (float, "sender energy per attempt [uJ]"),
    "e_rx_exchange_uj": (float, "receiver energy per frame + ACK [uJ]"),
    "e_idle_uj": (float, "idle listening energy per cell [uJ]"),
    "e_cca_uj": (float, "energy of a CCA-only cell [uJ]; defaults to e_idle"),
    "e_ack_wait_uj": (float, "ACK-wait share of an unconfirmed attempt [uJ]"),
}

DEFAULTS = {
    "eps_f": 0.126,
    "eps_a": 0.080,
    "n_tries": 16,
    "t_app": 60.0,
    "duration": 30 * 86400.0,
    "t_slot": 0.02,
    "n_slot": 101,
}


def parse_config_text(lines: Iterable[str]) -> Dict[str, object]:
    out = {}
    problems = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems[f"line {lineno}"] = f"expected key = value, got {raw.strip()!r}"
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            problems[key] = "unknown key"
            continue
        try:
            out[key] = KEYS[key][0](value)
        except ValueError:
            problems[key] = f"cannot parse {value!r}"
    if problems:
        raise ConfigError(problems)
    return out


def load_config(path: str) -> Dict[str, object]:
    with open(path) as fh:
        return parse_config_text(fh)


def parse_seeds(text: str) -> List[int]:
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            a, b = part.split(":", 1)
            seeds.extend(range(int(a), int(b) + 1))
        else:
            seeds.append(int(part))
    return seeds


def resolve(file_values: Dict[str, object], overrides: Dict[str, object],
            require_strategy: bool = True) -> Dict[str, object]:
    """Merge defaults < file < overrides and drop unset entries."""
    merged = dict(DEFAULTS)
    merged.update({k: v for k, v in file_values.items() if v is not None})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if require_strategy and "strategy" not in merged:
        raise ConfigError({"strategy": "required (config file or --strategy)"})
    if "seeds" not in merged:
        merged["seeds"] = os.environ.get(SEED_ENV, "0")
    return merged


def build_run_config(values: Dict[str, object],
                     strategy: Optional[str] = None) -> RunConfig:
    """Turn resolved key/values into a RunConfig (seed left at the first seed)."""
    problems = {}
    try:
        strat = as_strategy(strategy or values["strategy"])
    except ValueError as exc:
        problems["strategy"] = str(exc)
        strat = None
    energy_kw = {}
    for key in ("e_tx_attempt", "e_rx_exchange", "e_idle", "e_cca", "e_ack_wait"):
        v = values.get(key + "_uj")
        if v is not None:
            energy_kw[key] = float(v) * UJ
    try:
        energy = EnergyModel(**energy_kw)
    except ValueError as exc:
        problems["energy"] = str(exc)
    if problems:
        raise ConfigError(problems)
    seeds = parse_seeds(values["seeds"])
    kw = {k: values[k] for k in ("eps_f", "eps_a", "n_tries", "t_app", "phase",
                                 "duration", "t_slot", "n_slot", "slot_offset",
                                 "capacity_c", "n_ch", "cca_detect_prob")
          if values.get(k) is not None}
    kw["seed"] = seeds[0] if seeds else 0
    try:
        cfg = RunConfig(strategy=strat, energy=energy).with_overrides(**kw)
        cfg.validate()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError({"config": str(exc)}) from exc
    return cfg
