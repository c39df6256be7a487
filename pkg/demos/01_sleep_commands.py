"""
Sleep commands on a single link
===============================

A sender with one reserved cell per slotframe (2.02 s) produces a packet
every 60 s. Each frame carries a sleep value ``t``: the number of cells the
receiver may skip before the next packet can exist. Here we look at how the
four strategies react when an ACK is lost.
"""

from prilsim import RunConfig, run
from prilsim.strategies import RxCellState, SleepCommand, as_strategy, rx_apply_frame

# Receiver view right after decoding a frame in cell 10 with t = 4.
for name in ("closed", "1-open", "2-open", "a-open"):
    s = rx_apply_frame(RxCellState(), as_strategy(name), 10, SleepCommand(4))
    cells = "".join("#" if s.is_enabled(x) else "." for x in range(11, 17))
    print(f"{name:8s} cells 11..16: {cells}")

# A short trace: heavy losses make the interesting cases frequent.
cfg = RunConfig(strategy="closed", n_tries=6, duration=600.0)
cfg = cfg.with_overrides(eps_f=0.3, eps_a=0.5, phase=0.01)
res = run(cfg, seed=4, trace=True)
print("\nasn\tx\tside\tkind\tpacket")
for line in list(res.trace_lines())[:40]:
    print(line)

# Per-packet attempt letters: K acked, A delivered but ACK lost, L lost, U unheard
res = run(cfg.with_overrides(duration=3600.0), seed=4, record_outcomes=True)
for pid, o in enumerate(res.packets.outcomes[:20]):
    print(f"packet {pid:2d}  t={res.packets.first_t[pid]:2d}  {o}")
