"""The modified logarithmic integral and its functional inverse.

``li(x)`` here is the weighted integral of ``(1 - 1/u) / log u`` over
``[1, x]`` with the integrand continued by its limit 1 at ``u = 1``
(so ``li(1) = 0``).  Substituting ``u = e**v`` turns the integrand into
the entire function ``phi(v) = (e**v - 1)/v``, giving the everywhere-
convergent series

    li(x) = sum_{m >= 1} (log x)**m / (m * m!)

whose partial sums admit an elementary certified tail bound; that is the
enclosure computed here.  The direct adaptive interval quadrature of the
integrand only converges linearly in the mesh, which cannot reach the
tolerances the rest of the library needs, so the series (the same
integral, evaluated exactly) is used instead; the quadrature survives as
an independent test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from mpmath.libmp import (
    from_int,
    fzero,
    mpf_neg,
    mpi_abs,
    mpi_add,
    mpi_div,
    mpi_mul,
)

from .certreal import (
    DEFAULT_BITS,
    DEFAULT_CAP,
    ONE,
    CertReal,
    CertRealLike,
    Ordering,
    as_certreal,
    cmp_certified,
)
from .exceptions import PrecisionCapExceeded


def _mag2(raw) -> Optional[int]:
    """Upper bound for log2 |raw|, or None for zero."""
    _, man, exp, bc = raw
    if man == 0:
        return None
    return exp + bc


def _iabs_hi(iv, wp):
    return mpi_abs(iv, wp)[1]


def _li_series_raw(liv, prec: int):
    """Enclosure of sum L^m/(m*m!) for a raw interval L, at ~prec bits."""
    wp = prec + 24
    total = (fzero, fzero)
    p = (from_int(1), from_int(1))
    lmax = abs(_to_float_safe(liv[0]))
    lmax = max(lmax, abs(_to_float_safe(liv[1])))
    m = 0
    cap = int(10 * max(lmax, 8.0)) + 4 * wp
    while True:
        m += 1
        if m > cap:
            raise RuntimeError("li series failed to converge (internal)")
        mi = (from_int(m), from_int(m))
        p = mpi_div(mpi_mul(p, liv, wp), mi, wp)
        t = mpi_div(p, mi, wp)
        total = mpi_add(total, t, wp)
        tmag = _mag2(_iabs_hi(t, wp))
        if m < 2 * lmax + 2:
            continue
        if tmag is None:
            break
        smag = _mag2(_iabs_hi(total, wp)) or 0
        if tmag <= max(smag, 0) - prec - 12:
            break
    # ratio of successive terms is <= 1/2 once m >= 2*L, so the tail is
    # bounded by the last included term
    tail = _iabs_hi(t, wp)
    return mpi_add(total, (mpf_neg(tail), tail), wp)


def _to_float_safe(raw) -> float:
    from mpmath.libmp import to_float
    try:
        return to_float(raw, rnd="n")
    except (OverflowError, ValueError):
        return math.inf


def li(x: CertRealLike, tol: Optional[float] = None,
       max_bits: int = DEFAULT_CAP) -> CertReal:
    """Certified value of the modified logarithmic integral at ``x >= 1``.

    Parameters
    ----------
    x : CertReal-like, certified >= 1 (an enclosure grazing 1 from
        below is tolerated; the series remains a valid enclosure).
    tol : optional absolute width target for the returned interval.
    """
    x = as_certreal(x)
    if cmp_certified(x, ONE, max_bits=max_bits) is Ordering.LESS:
        raise ValueError("li requires x >= 1")
    ell = x.log() if not x.is_exact or x.to_fraction() != 1 else None
    if ell is None:
        return CertReal(None, (fzero, fzero))

    value = CertReal(lambda prec: _li_series_raw(ell.enclosure(prec + 8), prec))
    if tol is not None:
        _refine_to_width(value, tol, max_bits, "li")
    return value


def _refine_to_width(value: CertReal, tol: float, max_bits: int, what: str):
    bits = DEFAULT_BITS
    while value.width_float() > tol:
        if bits >= max_bits:
            raise PrecisionCapExceeded(
                f"{what}: width {value.width_float():.3e} > tol {tol:.3e} at cap")
        bits = min(2 * bits, max_bits)
        value.refine(bits)


def li_float(x: float) -> float:
    """Plain float evaluation of li (screening only, no certification)."""
    if x <= 1.0:
        return 0.0
    L = math.log(x)
    total = 0.0
    p = 1.0
    m = 0
    while True:
        m += 1
        p *= L / m
        t = p / m
        total += t
        if m > 2 * L + 2 and t < 1e-17 * total + 1e-300:
            return total


def li_deriv(x: CertReal) -> CertReal:
    """Certified derivative (1 - 1/x)/log x, continued by 1 at x = 1."""
    return phi_at(x.log()) / x


def li_inv(y: CertRealLike, tol: float = 1e-18,
           max_bits: int = DEFAULT_CAP) -> CertReal:
    """Certified inverse of :func:`li` for ``y >= 0``.

    A float Newton iteration locates the root, after which an exact
    dyadic bracket is certified against ``li`` and bisected down to
    ``tol``.  The result carries a compute rule, so later refinement
    re-runs the bracketing at higher precision.
    """
    y = as_certreal(y)
    if cmp_certified(y, 0, max_bits=max_bits) is Ordering.LESS:
        raise ValueError("li_inv requires y >= 0")
    if y.is_exact and y.to_fraction() == 0:
        return ONE

    y_mid = y.to_float()
    x0 = _li_inv_float(y_mid)

    def compute(prec):
        scale = max(1.0, abs(x0))
        target = scale * 2.0 ** (-(prec - 6))
        lo, hi = _certified_bracket(y, x0, max(target, 1e-320), max_bits)
        nlo = CertReal.from_fraction(lo).enclosure(prec + 16)[0]
        nhi = CertReal.from_fraction(hi).enclosure(prec + 16)[1]
        return (nlo, nhi)

    value = CertReal(compute)
    _refine_to_width(value, tol, max_bits, "li_inv")
    return value


def _li_inv_float(y: float) -> float:
    if y <= 0.0:
        return 1.0
    x = max(2.0, y * math.log(y + 2.0))
    for _ in range(100):
        f = li_float(x) - y
        L = math.log(x)
        fp = (1.0 - 1.0 / x) / L if L > 1e-9 else 1.0
        step = f / fp
        nx = x - step
        if nx <= 1.0:
            nx = 0.5 * (x + 1.0)
        if abs(nx - x) < 1e-14 * x:
            return nx
        x = nx
    return x


def _certified_bracket(y: CertReal, x0: float, tol: float, max_bits: int):
    """Exact-rational bracket [lo, hi] with li(lo) < y < li(hi), width <= tol."""
    d = max(4e-13 * max(1.0, x0), 0.25 * tol)
    lo = Fraction(max(x0 - d, 1.0 + (x0 - 1.0) * 0.5))
    hi = Fraction(x0 + d)

    def li_at(fr: Fraction) -> CertReal:
        return li(CertReal.from_fraction(fr), max_bits=max_bits)

    for _ in range(200):
        if cmp_certified(li_at(lo), y, max_bits=max_bits) is Ordering.LESS:
            break
        lo = Fraction(1) + (lo - 1) / 2 if lo > 1 else lo / 2
    else:
        raise PrecisionCapExceeded("li_inv: no certified lower bracket")
    for _ in range(200):
        if cmp_certified(li_at(hi), y, max_bits=max_bits) is Ordering.GREATER:
            break
        hi = hi * 2
    else:
        raise PrecisionCapExceeded("li_inv: no certified upper bracket")

    # Cut points rotate away from the exact midpoint: a cut can land on
    # the exact root (where the comparison is truly undecidable), but
    # three distinct cuts cannot all do so unless y itself is too wide.
    cuts = (Fraction(1, 2), Fraction(27, 64), Fraction(37, 64))
    stalled = 0
    while hi - lo > tol and stalled < len(cuts):
        mid = lo + (hi - lo) * cuts[stalled]
        side = cmp_certified(li_at(mid), y, max_bits=max_bits)
        if side is Ordering.LESS:
            lo = mid
            stalled = 0
        elif side is Ordering.GREATER:
            hi = mid
            stalled = 0
        else:
            stalled += 1
    return lo, hi


@dataclass(frozen=True)
class LiValue:
    """An argument paired with its certified li value."""

    x: CertReal
    value: CertReal


def li_value(x: CertRealLike, tol: Optional[float] = None) -> LiValue:
    x = as_certreal(x)
    return LiValue(x, li(x, tol))


# -- the entire function phi(v) = (e^v - 1)/v and its derivatives ------


def _phi_deriv_raw(viv, j: int, prec: int):
    """Enclosure of phi^(j)(v) = sum_r v^r / (r! (r+j+1)) for raw interval v."""
    wp = prec + 24
    total = (fzero, fzero)
    p = (from_int(1), from_int(1))  # v^r / r!
    vmax = max(abs(_to_float_safe(viv[0])), abs(_to_float_safe(viv[1])))
    r = 0
    cap = int(10 * max(vmax, 8.0)) + 4 * wp
    while True:
        t = mpi_div(p, (from_int(r + j + 1), from_int(r + j + 1)), wp)
        total = mpi_add(total, t, wp)
        r += 1
        if r > cap:
            raise RuntimeError("phi series failed to converge (internal)")
        p = mpi_div(mpi_mul(p, viv, wp), (from_int(r), from_int(r)), wp)
        tmag = _mag2(_iabs_hi(t, wp))
        if r < 2 * vmax + 2:
            continue
        if tmag is None:
            break
        smag = _mag2(_iabs_hi(total, wp)) or 0
        if tmag <= max(smag, 0) - prec - 12:
            break
    tail = _iabs_hi(t, wp)
    return mpi_add(total, (mpf_neg(tail), tail), wp)


def phi_at(v: CertRealLike) -> CertReal:
    """Certified (e^v - 1)/v, continued by 1 at v = 0."""
    v = as_certreal(v)
    return CertReal(lambda prec: _phi_deriv_raw(v.enclosure(prec + 8), 0, prec))


def phi_deriv_at(v: CertRealLike, j: int) -> CertReal:
    """Certified j-th derivative of phi."""
    v = as_certreal(v)
    if j == 0:
        return phi_at(v)
    return CertReal(lambda prec: _phi_deriv_raw(v.enclosure(prec + 8), j, prec))
