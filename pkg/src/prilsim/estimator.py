"""ACK loss probability from ping duplicate statistics.

Without MAC-level deduplication, every copy of an echo request that reaches
the leaf produces its own reply, and the replies go through the same lossy
link on the way back. The mean number of copies per frame, N_rxf, is then
the square root of (replies per request), i.e. sqrt(1 + N_DUP / N_ping),
and eps_a follows from the fixed point

    eps_a = 1 - P_ACK(eps_f, eps_a, N_tries) / N_rxf
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, TextIO, Union

import numpy as np

from .engine import RunConfig, run

_CLAMP_TOL = 1e-6

_HEADER_RE = re.compile(r"^\s*#?\s*requests\s*=\s*(\d+)\s*$", re.IGNORECASE)
_SUMMARY_RE = re.compile(r"(\d+)\s+packets\s+transmitted")
_REQUEST_RE = re.compile(r"^\s*(?:request|sent)\b", re.IGNORECASE)


class PingLogError(ValueError):
    pass


@dataclass(frozen=True)
class PingLogSummary:
    n_ping: int
    n_dup: int

    def __post_init__(self):
        if self.n_ping < 1:
            raise ValueError(f"n_ping must be >= 1, got {self.n_ping}")
        if self.n_dup < 0:
            raise ValueError(f"n_dup must be >= 0, got {self.n_dup}")

    @property
    def alpha_dup(self) -> float:
        return self.n_dup / self.n_ping


def p_ack(eps_f: float, eps_a: float, n_tries: int) -> float:
    """Probability that one of up to ``n_tries`` attempts gets its ACK back."""
    if not (0.0 <= eps_f <= 1.0 and 0.0 <= eps_a <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    if n_tries < 1:
        raise ValueError(f"n_tries must be >= 1, got {n_tries}")
    return 1.0 - (eps_f + (1.0 - eps_f) * eps_a) ** n_tries


def mean_rx_frames(summary: PingLogSummary) -> float:
    return math.sqrt(summary.alpha_dup + 1.0)


@dataclass
class AckLossEstimate:
    eps_a: float
    iterates: List[float] = field(default_factory=list)
    n_rxf: float = 1.0

    @property
    def last_delta(self) -> float:
        if len(self.iterates) < 2:
            return 0.0
        return abs(self.iterates[-1] - self.iterates[-2])

    def report_lines(self) -> List[str]:
        lines = [f"eps_a = {self.eps_a:.6f}",
                 f"n_rxf = {self.n_rxf:.6f}",
                 f"iterations = {len(self.iterates) - 1}",
                 f"last_delta = {self.last_delta:.3e}"]
        lines += [f"iterate_{i} = {v:.10f}" for i, v in enumerate(self.iterates)]
        return lines


def estimate_eps_a(eps_f: float, summary: PingLogSummary, n_tries: int,
                   iterations: int = 10) -> AckLossEstimate:
    """Fixed-point iteration started from eps_a = eps_f.

    Iterates falling outside [0, 1] are clamped (with a warning unless the
    excursion is mere rounding). ``iterates[0]`` is the starting value, ``iterates[-1]`` the estimate.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    n_rxf = mean_rx_frames(summary)
    ea = eps_f
    iterates = [ea]
    for _ in range(iterations):
        ea = 1.0 - p_ack(eps_f, ea, n_tries) / n_rxf
        if ea < 0.0 or ea > 1.0:
            # noisy logs can push the iterate out of range
            if ea < -_CLAMP_TOL or ea > 1.0 + _CLAMP_TOL:
                warnings.warn(f"clamping eps_a iterate {ea} to [0, 1]; "
                              "inputs look inconsistent")
            ea = min(1.0, max(0.0, ea))
        iterates.append(ea)
    return AckLossEstimate(eps_a=ea, iterates=iterates, n_rxf=n_rxf)


def parse_ping_log(stream: Union[TextIO, Iterable[str]],
                   n_ping: Optional[int] = None) -> PingLogSummary:
    """Count ``DUP!`` lines and resolve the number of issued requests.

    The request count comes from, in order of precedence: the ``n_ping``
    argument, a ``requests=<N>`` header line, a ping statistics line
    ``<N> packets transmitted``, or the number of lines starting with
    ``request`` or ``sent``. If none is available a PingLogError is raised.
    """
    n_dup = 0
    header = summary = None
    request_lines = 0
    for line in stream:
        if "DUP!" in line:
            n_dup += 1
            continue
        m = _HEADER_RE.match(line)
        if m:
            header = int(m.group(1))
            continue
        m = _SUMMARY_RE.search(line)
        if m:
            summary = int(m.group(1))
            continue
        if _REQUEST_RE.match(line):
            request_lines += 1
    for candidate in (n_ping, header, summary, request_lines or None):
        if candidate is not None:
            return PingLogSummary(n_ping=candidate, n_dup=n_dup)
    raise PingLogError("cannot determine the number of issued ping requests")


@dataclass
class PingSimulation:
    """Outcome of a simulated ping campaign over a plain TSCH link."""

    n_ping: int
    request_copies: np.ndarray
    replies: np.ndarray

    @property
    def n_dup(self) -> int:
        return int(np.maximum(self.replies - 1, 0).sum())

    def summary(self) -> PingLogSummary:
        return PingLogSummary(self.n_ping, self.n_dup)

    def log_lines(self) -> Iterable[str]:
        yield f"requests={self.n_ping}"
        for seq, r in enumerate(self.replies.tolist()):
            for j in range(r):
                tail = " (DUP!)" if j else ""
                yield f"64 bytes from leaf: icmp_seq={seq} ttl=64{tail}"


def simulate_ping(eps_f: float, eps_a: float, n_tries: int, n_ping: int,
                  seed: int = 0, period: float = 120.0) -> PingSimulation:
    """Echo requests root -> leaf, one reply per delivered request copy.

    Both directions run the simulator with plain TSCH (no sleep commands,
    no MAC deduplication). The reply direction uses seed ``seed + 1000003``.
    Replies are matched to requests in order, which is valid because every
    MAC exchange is independent of its timing on a plain TSCH link.
    """
    base = RunConfig(strategy="tsch-baseline", n_tries=n_tries)
    fwd_cfg = base.with_overrides(eps_f=eps_f, eps_a=eps_a, seed=seed,
                                  t_app=period, phase=0.5 * base.schedule.t_slot,
                                  duration=n_ping * period)
    fwd = run(fwd_cfg)
    if fwd.pending_at_end or fwd.counters.generated != n_ping:
        raise RuntimeError("ping period too short for the retry budget")
    copies = fwd.packets.copies
    n_replies = int(copies.sum())
    back_copies = np.zeros(0, dtype=np.int64)
    if n_replies:
        back_cfg = fwd_cfg.with_overrides(seed=seed + 1000003,
                                          duration=n_replies * period)
        back = run(back_cfg)
        if back.pending_at_end or back.counters.generated != n_replies:
            raise RuntimeError("ping period too short for the retry budget")
        back_copies = back.packets.copies
    owner = np.repeat(np.arange(n_ping), copies)
    replies = np.bincount(owner, weights=back_copies, minlength=n_ping).astype(np.int64)
    return PingSimulation(n_ping=n_ping, request_copies=copies, replies=replies)
