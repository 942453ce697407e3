"""Margin profiles for the three gap conditions.

Only finite evidence is computable, so each condition is reported as a
margin profile for explicit constants over the truncation: negative
margins falsify, open signs are listed rather than resolved.
"""

from beurling.certreal import CertReal
from beurling.conditions import FrequencyView, bc_margins, lc_margins, nc_profile
from beurling.systems import PrimeSystem, classical_primes, enumerate_integers

snap = enumerate_integers(classical_primes(50), 50)
view = FrequencyView.from_snapshot(snap)

bc = bc_margins(view, 1, 1)
print("classical, exponential-gap condition with c1 = c2 = 1:")
print("  verdict:", bc.verdict_at_truncation,
      " min margin:", min(m.to_float() for m in bc.margins))

lc = lc_margins(view, 1, 0.5)
print("doubly-exponential relaxation with c = 1, delta = 0.5:")
print("  verdict:", lc.verdict_at_truncation)

print()
print("sharp-constant single-prime system: every margin is exactly zero,")
print("so no sign certifies and the report says so instead of guessing:")
s2 = enumerate_integers(PrimeSystem([2]), 2 ** 8)
v2 = FrequencyView.from_snapshot(s2)
sharp = bc_margins(v2, CertReal.from_int(2).log(), 0)
print("  verdict:", sharp.verdict_at_truncation,
      " undecided indices:", sharp.undecided_indices)

print()
print("infimum profile on lambda_n = log n (early stop certified):")
logn = FrequencyView.from_values([CertReal.from_int(k).log()
                                  for k in range(1, 40)])
for n in (1, 2, 5, 10):
    res = nc_profile(logn, n)
    print(f"  n={n:<2d} value={res.value.to_float():.6f} at m={res.argmin_m}")
