"""
Where closed stops winning
==========================

Scale both loss probabilities together and compare closed with a-open.
At low loss, closed's aggressive shut-off is cheapest. As ACK losses grow,
its useless retries cost more than a-open's extra listening.
"""

import numpy as np

from prilsim import RunConfig, run_campaign

scales = np.round(np.arange(0.4, 1.25, 0.1), 2).tolist()
seeds = [1, 2]
base = RunConfig(strategy="closed", duration=10 * 86400.0)
res = run_campaign(base, {"joint": scales, "strategy": ["closed", "a-open"]}, seeds)
P = np.array([r.power.p_total for r in res]).reshape(len(scales), 2, len(seeds)).mean(2) * 1e6

print(f"{'eps_f':>7s} {'eps_a':>7s} {'closed':>8s} {'a-open':>8s}")
for s, (pc, pa) in zip(scales, P):
    mark = "  <- a-open better" if pa < pc else ""
    print(f"{0.126 * s:7.4f} {0.080 * s:7.4f} {pc:8.3f} {pa:8.3f}{mark}")

d = P[:, 0] - P[:, 1]
i = int(np.argmax(d > 0))
if i > 0:
    s = scales[i - 1] + (scales[i] - scales[i - 1]) * -d[i - 1] / (d[i] - d[i - 1])
    print(f"\ncrossover near eps_f = {0.126 * s:.3f}, eps_a = {0.080 * s:.3f}")
