"""The outer-function counterexample, at desk scale.

The candidate function is the reciprocal zeta shifted by 1/2 + epsilon:
its coefficients are the signed squarefree (generalized Moebius) values.
Three trends are demonstrated on a sampled system: the value at the
in-domain zero location (partial Euler products at argument 1) sinks
toward zero, the outer-approximation defect |1 - p_X f_X| shrinks as the
truncation grows, and the truncated series agrees with the reciprocal
Euler product within certified tails right of the critical shift.
"""

import time

from beurling.hardy import helson_demo
from beurling.randomsys import sample_primes
from beurling.systems import enumerate_integers

t0 = time.time()
system = sample_primes(42, 80)
snap = enumerate_integers(system, 2000)
report = helson_demo(snap, 0.25, [20, 200, 2000], s_eval_list=[1.0, 1.5])
print(f"built in {time.time()-t0:.1f}s")

print()
print("partial Euler products at argument 1 (the zero location value):")
for x, v in report.euler_partials:
    print(f"  X = {x:>6g}: {v:.6f}")

print()
print("Moebius partial sums at argument 1 (oscillating toward zero):")
for x, v in report.mobius_partials:
    print(f"  X = {x:>6g}: {v:+.6f}")

print()
print("outer-approximation defect e_X = |1 - p_X f_X|:")
for step in report.defects:
    print(f"  X = {step.X:>6g}: e_X = {step.defect:.6f}"
          f"  ({step.pairs} coefficient pairs, discarded {step.discarded_mass})")

print()
print("certified cross-checks against the reciprocal Euler product:")
for ev in report.evaluations:
    print(f"  s = {ev['s']}: series {ev['series_value']:.8f}"
          f" vs 1/zeta {ev['inverse_zeta']:.8f}"
          f" (diff {ev['difference']:.2e} <= tail {ev['tail_bound']:.2e};"
          f" consistent={ev['consistent']})")
