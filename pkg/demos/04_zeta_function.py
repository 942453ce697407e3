"""The zeta function of a prime system, four ways.

Euler product and Dirichlet sum must agree within their tail bounds;
log zeta exponentiates back into the Euler box; and the normalized
remainder Z satisfies zeta(s) = s e^{Z(s)} / (s - 1) by construction.
Tails are rigorous only where the caller supplies envelope constants.
"""

from beurling.systems import PrimeSystem, classical_primes, enumerate_integers
from beurling.zeta import (
    DensityEnvelope,
    PrimeCountEnvelope,
    log_zeta,
    weighted_prime_count,
    z_eval,
    zeta_euler,
    zeta_sum,
)

sys23 = PrimeSystem([2, 3])
print("zeta_{2,3}(2) =", zeta_euler(sys23, 2.0).value.re.to_float(),
      "(exactly 3/2)")

cl = classical_primes(10 ** 4)
ev = zeta_euler(cl, 2.0, prime_cutoff=10 ** 4, envelope=PrimeCountEnvelope(2.0))
print(f"classical Euler product at 2: {ev.value.re.to_float():.8f}"
      f" +- {ev.tail_bound.to_float():.2e} (rigorous={ev.rigorous})")
print("  pi^2/6 =", 1.6449340668482264)

snap = enumerate_integers(sys23, 10 ** 4)
s = complex(2.0, 3.5)
euler = zeta_euler(sys23, s)
direct = zeta_sum(snap, s, envelope=DensityEnvelope(1.0, 1.0))
diff = (euler.value - direct.value).abs().to_float()
print()
print(f"euler vs sum at {s}: |diff| = {diff:.2e}"
      f" <= tail {direct.tail_bound.to_float():.2e}")

lz = log_zeta(sys23, s)
print("exp(log zeta) recovers the product:",
      abs(lz.value.exp().re.to_float() - euler.value.re.to_float()) < 1e-20)

zv = z_eval(sys23, s)
print("Z(s) =", zv.value.to_complex())

print()
print("weighted prime count on classical primes:")
cl50 = classical_primes(50)
for x in (10, 30, 50):
    print(f"  Pi({x}) = {weighted_prime_count(cl50, x)}")
