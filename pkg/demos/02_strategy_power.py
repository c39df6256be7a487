"""
Average power of the strategies
===============================

Default condition: 12.6 % frame loss, 8 % ACK loss, 16 tries, one packet
per minute. Ten simulated days per seed are enough to see the ordering.
"""

import numpy as np

from prilsim import RunConfig, run_campaign

STRATEGIES = ["tsch-baseline", "closed", "1-open", "2-open", "a-open"]
seeds = [1, 2, 3]
base = RunConfig(strategy="closed", duration=10 * 86400.0)
res = run_campaign(base, {"strategy": STRATEGIES}, seeds)

print(f"{'strategy':14s} {'P':>8s} {'P_NTX':>8s} {'P_NRX':>8s} {'useless/day':>12s}")
rows = {}
for i, name in enumerate(STRATEGIES):
    runs = res[i * len(seeds):(i + 1) * len(seeds)]
    p = np.mean([[r.power.p_total, r.power.p_ntx, r.power.p_nrx] for r in runs], axis=0) * 1e6
    useless = np.mean([r.counters.useless_attempts for r in runs]) / 10
    rows[name] = p[0]
    print(f"{name:14s} {p[0]:8.3f} {p[1]:8.3f} {p[2]:8.3f} {useless:12.1f}")

print("\nsavings of a-open: "
      f"{100 * (1 - rows['a-open'] / rows['closed']):.2f} % vs closed, "
      f"{100 * (1 - rows['a-open'] / rows['1-open']):.2f} % vs 1-open")
