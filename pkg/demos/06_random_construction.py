"""The randomized construction: one reproducible sample path.

Primes are drawn cell by cell along the inverse-li grid, so the prime
counting function tracks li(x) within 2 by construction.  Exponential-
sum deviations stay far below the constant-8 thresholds, approximation
events are swept and any triggered prime is removed, and the integer
density fits a slope with residuals around sqrt-size.
"""

import time

from beurling.logint import li_float
from beurling.randomsys import (
    a_event_sweep,
    b_event_sweep,
    box_property_certified,
    density_fit,
    exp_sum_deviation,
    pairwise_gap_audit,
    remove_exceptional,
    sample_grid,
    sample_primes,
)
from beurling.systems import enumerate_integers

t0 = time.time()
SEED, COUNT = 42, 60
system = sample_primes(SEED, COUNT)
grid = sample_grid(COUNT)
print(f"sampled {COUNT} primes with seed {SEED} "
      f"(generator: numpy-PCG64) in {time.time()-t0:.1f}s")
print("first five:", [round(q.to_float(), 4) for q in system.primes[:5]])
print("box property li(q_n) in [n, n+1]:", box_property_certified(system))

dev = exp_sum_deviation(system, grid.x(COUNT), 0.0, grid=grid)
print(f"counting deviation |pi - li + 1| at x_{COUNT}: {dev.statistic:.3f}")

records = a_event_sweep(system, grid, k_max=40, m_max=12)
worst = max(r.statistic / r.threshold for r in records)
print(f"exponential-sum sweep k<=40, m<=12: worst statistic/threshold = {worst:.3f}")

b_records = b_event_sweep(system, 1.0, 500, grid=grid)
triggered = [r for r in b_records if r.triggered]
print(f"approximation events: {len(b_records)} checked, {len(triggered)} triggered")
thinned = remove_exceptional(system, b_records)
print("primes after removal:", len(thinned.primes))

snap = enumerate_integers(system, 2000)
audit = pairwise_gap_audit(snap, 1.0)
print(f"pairwise gap audit (A=1): min margin {audit.min_margin.to_float():.3g},"
      f" positive={audit.positive}")

fit = density_fit(snap)
print(f"density fit: N(x) ~ {fit.a:.4f} x,"
      f" residual growth exponent {fit.residual_exponent:.2f}")
