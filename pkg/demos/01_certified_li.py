"""Tour of the certified numerics layer.

Every real quantity in this library is an enclosure that can be
re-evaluated at higher precision without ever widening.  The modified
logarithmic integral and its inverse are the workhorses: the random
construction places its n-th prime at li_inv(n + u_n).
"""

from beurling import CertReal, Ordering, cmp_certified, li, li_inv

half = CertReal.from_fraction(1, 2)
root2 = CertReal.from_int(2).sqrt()

print("sqrt(2) enclosure width at 128 bits:", root2.refine(128).width_float())
print("sqrt(2)^2 vs 2:", cmp_certified(root2 * root2, 2))
print("  (true equalities stay undecided: the library never pretends",
      "to prove what interval arithmetic cannot)")

print()
print("li(1) =", li(1).to_float(), "(degenerate zero)")
v = li(2, tol=1e-30)
print("li(2) =", v.to_float(), "width", v.width_float())
print("li increasing:", cmp_certified(li(3), li(4)) is Ordering.LESS)

print()
x1 = li_inv(1, tol=1e-24)
print("x_1 = li_inv(1) =", x1.to_float())
print("round trip li(li_inv(7)) =", li(li_inv(7, tol=1e-24)).to_float())

grid = [li_inv(n, tol=1e-18).to_float() for n in range(1, 11)]
print()
print("the sampling grid x_n = li_inv(n):")
for n, x in enumerate(grid, start=1):
    print(f"  x_{n:<2d} = {x:.6f}")
