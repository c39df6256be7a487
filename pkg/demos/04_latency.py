"""
Latency under fast traffic
==========================

With a packet every 60 s the queue is always empty when a frame is sent,
so every strategy inherits plain TSCH latency. At 5 s per packet the sleep
value is small but a lost ACK under closed still costs whole slotframes.
"""

import numpy as np

from prilsim import RunConfig, run_campaign

STRATEGIES = ["tsch-baseline", "closed", "1-open", "2-open", "a-open"]
for t_app, days in ((60.0, 10), (5.0, 2)):
    base = RunConfig(strategy="closed", duration=days * 86400.0).with_overrides(t_app=t_app)
    res = run_campaign(base, {"strategy": STRATEGIES}, [1, 2])
    print(f"T_app = {t_app:g} s")
    print(f"  {'strategy':14s} {'mean':>7s} {'std':>7s} {'p99':>7s} {'max':>7s} {'queue':>6s}")
    for i, name in enumerate(STRATEGIES):
        runs = res[2 * i:2 * i + 2]
        lat = np.mean([[r.latency.mean, r.latency.std, r.latency.p99, r.latency.max]
                       for r in runs], axis=0)
        depth = max(r.counters.max_queue_depth for r in runs)
        print(f"  {name:14s} " + " ".join(f"{v:7.3f}" for v in lat) + f" {depth:6d}")
