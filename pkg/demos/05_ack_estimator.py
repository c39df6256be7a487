"""
Estimating the ACK loss probability from ping duplicates
========================================================

Without MAC deduplication a lost ACK makes the sender repeat a frame the
receiver already got, and each copy triggers its own echo reply. Counting
duplicate replies therefore tells us how often ACKs go missing.
"""

from prilsim.estimator import PingLogSummary, estimate_eps_a, parse_ping_log, simulate_ping

# Counts from a 15-day campaign with one ping every 120 s.
est = estimate_eps_a(0.126, PingLogSummary(n_ping=10800, n_dup=1967), n_tries=16)
for line in est.report_lines()[:4]:
    print(line)

# The same procedure on a simulated link with a known ACK loss.
sim = simulate_ping(eps_f=0.126, eps_a=0.080, n_tries=16, n_ping=10800, seed=7)
summary = parse_ping_log(sim.log_lines())
print(f"\nsimulated log: {summary.n_ping} requests, {summary.n_dup} duplicates")
print(f"recovered eps_a = {estimate_eps_a(0.126, summary, 16).eps_a:.4f} (true 0.080)")
