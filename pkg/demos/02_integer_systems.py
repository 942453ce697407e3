"""Enumerating the integers of a prime system.

A snapshot holds every product of the primes up to a bound, in certified
increasing order, with exponent vectors.  Classical primes reproduce the
ordinary integers exactly; irrational systems enumerate just as well,
and true collisions (dependent logarithms) abort with a witness.
"""

from beurling.certreal import CertReal
from beurling.exceptions import OrderingUndecided
from beurling.systems import (
    PrimeSystem,
    classical_primes,
    count_functions,
    enumerate_integers,
    min_gap_exponent,
)

snap = enumerate_integers(classical_primes(50), 50)
print("classical <= 50 reproduces 1..50:",
      [int(e.value.to_fraction()) for e in snap.entries] == list(range(1, 51)))
print("counts at 50:", count_functions(snap, 50))

two_three = enumerate_integers(PrimeSystem([2, 3]), 30)
print()
print("3-smooth numbers up to 30:",
      [int(e.value.to_fraction()) for e in two_three.entries])
gap = min_gap_exponent(two_three, 0)
print("smallest gap:", gap.value.to_float(), "at index", gap.index)

print()
irr = PrimeSystem([CertReal.from_decimal("2.25"),
                   CertReal.from_int(2) * CertReal.from_int(3).sqrt()])
snap_irr = enumerate_integers(irr, 60)
print("an irrational system {2.25, 2*sqrt(3)} up to 60:")
print(" ", [round(e.value.to_float(), 4) for e in snap_irr.entries])

print()
try:
    enumerate_integers(PrimeSystem([2, 4]), 20)
except OrderingUndecided as exc:
    print("collision detected as it must be: 2*2 == 4")
    print("  witness exponent vectors:", exc.witness)
