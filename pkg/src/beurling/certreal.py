"""Certified real and complex arithmetic on adaptive-precision intervals.

A :class:`CertReal` is an enclosure ``[lo, hi]`` of an exact real number,
together with a recipe for recomputing the enclosure at any working
precision.  Refining never widens an enclosure (new results are
intersected with the old ones), so every interval ever observed contains
the exact value.  Comparisons are three-valued: two values compare
``LESS``/``GREATER`` only once their enclosures are disjoint, and
``UNDECIDED`` when the precision cap is reached first.

The endpoint arithmetic is delegated to mpmath's ``libmp`` interval
kernels, which take the working precision as an explicit argument; all
values here are immutable apart from monotone cache tightening, so
concurrent use is safe.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

from mpmath.libmp import (
    finf,
    fnan,
    fninf,
    fone,
    from_float,
    from_int,
    from_man_exp,
    from_rational,
    from_str,
    fzero,
    mpf_cmp,
    mpf_e,
    mpf_pi,
    mpi_abs,
    mpi_add,
    mpi_atan2,
    mpi_cos,
    mpi_div,
    mpi_exp,
    mpi_log,
    mpi_mul,
    mpi_neg,
    mpi_pow_int,
    mpi_sin,
    mpi_sqrt,
    mpi_sub,
    to_float,
    to_int,
    to_str,
)

from .exceptions import DomainNotCertified, PrecisionCapExceeded

DEFAULT_BITS = 128
DEFAULT_CAP = 4096

_SPECIALS = (finf, fninf, fnan)


class Ordering(enum.Enum):
    """Outcome of a certified comparison."""

    LESS = -1
    GREATER = 1
    UNDECIDED = 0


def _lt(a, b) -> bool:
    return mpf_cmp(a, b) < 0


def _le(a, b) -> bool:
    return mpf_cmp(a, b) <= 0


def _intersect(old, new):
    """Intersect two enclosures of the same real value."""
    lo = old[0] if _lt(new[0], old[0]) else new[0]
    hi = old[1] if _lt(old[1], new[1]) else new[1]
    if _lt(hi, lo):
        raise RuntimeError("refinement produced a disjoint enclosure; "
                           "this indicates an unsound interval operation")
    return (lo, hi)


ComputeFn = Callable[[int], tuple]


class CertReal:
    """An exact real number known through refinable interval enclosures.

    Instances are either *fixed* (the enclosure is all that is known; a
    degenerate fixed enclosure is an exact dyadic rational) or carry a
    compute closure that re-evaluates the defining expression at a
    requested precision.
    """

    __slots__ = ("_compute", "_ival", "_bits")

    def __init__(self, compute: Optional[ComputeFn], ival=None, bits: int = 0):
        self._compute = compute
        self._ival = ival
        self._bits = bits
        if ival is None and compute is None:
            raise ValueError("CertReal needs an enclosure or a compute rule")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_int(cls, n: int) -> "CertReal":
        raw = from_int(n)
        return cls(None, (raw, raw))

    @classmethod
    def from_float(cls, x: float) -> "CertReal":
        """Exact conversion; the binary float is taken at face value."""
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError("non-finite input")
        raw = from_float(x)
        return cls(None, (raw, raw))

    @classmethod
    def from_fraction(cls, value: Union[Fraction, int], den: int = 1) -> "CertReal":
        fr = Fraction(value, den)
        p, q = fr.numerator, fr.denominator
        if q == 1:
            return cls.from_int(p)
        if q & (q - 1) == 0:  # dyadic: exactly representable
            raw = from_man_exp(p, -(q.bit_length() - 1))
            return cls(None, (raw, raw))

        def compute(prec, p=p, q=q):
            return (from_rational(p, q, prec, "f"), from_rational(p, q, prec, "c"))

        return cls(compute)

    @classmethod
    def from_decimal(cls, text: str) -> "CertReal":
        """Exact decimal literal, e.g. ``"2.25"`` or ``"3.1e-2"``."""
        text = text.strip()

        def compute(prec, text=text):
            return (from_str(text, prec, "f"), from_str(text, prec, "c"))

        lo = from_str(text, DEFAULT_BITS, "f")
        hi = from_str(text, DEFAULT_BITS, "c")
        if mpf_cmp(lo, hi) == 0:
            return cls(None, (lo, hi))
        return cls(compute, (lo, hi), DEFAULT_BITS)

    @classmethod
    def from_interval(cls, lo: "CertRealLike", hi: "CertRealLike") -> "CertReal":
        """Fixed enclosure from exact endpoints (no refinement possible)."""
        a = as_certreal(lo)
        b = as_certreal(hi)
        if not (a.is_exact and b.is_exact):
            raise ValueError("interval endpoints must be exact values")
        return cls(None, (a._ival[0], b._ival[1]))

    @classmethod
    def pi(cls) -> "CertReal":
        return cls(lambda prec: (mpf_pi(prec, "f"), mpf_pi(prec, "c")))

    @classmethod
    def e(cls) -> "CertReal":
        return cls(lambda prec: (mpf_e(prec, "f"), mpf_e(prec, "c")))

    # -- enclosure management -----------------------------------------

    def enclosure(self, prec: int = DEFAULT_BITS):
        """Raw endpoint pair at working precision >= ``prec``."""
        if self._compute is None:
            return self._ival
        if self._ival is not None and self._bits >= prec:
            return self._ival
        new = self._compute(prec)
        if new[0] in _SPECIALS or new[1] in _SPECIALS:
            raise DomainNotCertified("operation produced a non-finite endpoint")
        if self._ival is not None:
            new = _intersect(self._ival, new)
        self._ival = new
        self._bits = prec
        return new

    def refine(self, prec: int) -> "CertReal":
        self.enclosure(prec)
        return self

    @property
    def is_exact(self) -> bool:
        iv = self._ival
        return (self._compute is None and iv is not None
                and mpf_cmp(iv[0], iv[1]) == 0)

    @property
    def is_refinable(self) -> bool:
        return self._compute is not None

    @property
    def bits(self) -> int:
        return self._bits

    def lo_fraction(self) -> Fraction:
        s, man, exp, _ = self.enclosure()[0]
        m = int(man) if s == 0 else -int(man)
        return Fraction(m) * Fraction(2) ** exp

    def hi_fraction(self) -> Fraction:
        s, man, exp, _ = self.enclosure()[1]
        m = int(man) if s == 0 else -int(man)
        return Fraction(m) * Fraction(2) ** exp

    def to_fraction(self) -> Fraction:
        if not self.is_exact:
            raise ValueError("value is not exact")
        return self.lo_fraction()

    def to_float(self) -> float:
        lo, hi = self.enclosure()
        return 0.5 * (to_float(lo, rnd="n") + to_float(hi, rnd="n"))

    def width_float(self) -> float:
        lo, hi = self.enclosure()
        from mpmath.libmp import mpf_sub as _sub
        return to_float(_sub(hi, lo, 64, "c"), rnd="n")

    def contains_fraction(self, fr: Fraction) -> bool:
        return self.lo_fraction() <= fr <= self.hi_fraction()

    def serialize(self, dps: int = 36) -> dict:
        lo, hi = self.enclosure()
        return {"lo": to_str(lo, dps), "hi": to_str(hi, dps), "bits": self._bits}

    def __repr__(self):
        lo, hi = self.enclosure()
        if self.is_exact:
            return f"CertReal({to_str(lo, 20)})"
        return f"CertReal([{to_str(lo, 20)}, {to_str(hi, 20)}])"

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        other = as_certreal(other)
        if _is_exact_zero(other):
            return self
        if _is_exact_zero(self):
            return other
        if self._compute is None and other._compute is None:
            return CertReal(None, mpi_add(self._ival, other._ival, 0))
        return _node(mpi_add, self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_certreal(other)
        if _is_exact_zero(other):
            return self
        if self._compute is None and other._compute is None:
            return CertReal(None, mpi_sub(self._ival, other._ival, 0))
        return _node(mpi_sub, self, other)

    def __rsub__(self, other):
        return as_certreal(other).__sub__(self)

    def __mul__(self, other):
        other = as_certreal(other)
        if _is_exact_zero(self) or _is_exact_zero(other):
            return ZERO
        if _is_exact_one(other):
            return self
        if _is_exact_one(self):
            return other
        if self._compute is None and other._compute is None:
            return CertReal(None, mpi_mul(self._ival, other._ival, 0))
        return _node(mpi_mul, self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_certreal(other)
        if _is_exact_one(other):
            return self
        if _is_exact_zero(self):
            return ZERO
        if self.is_exact and other.is_exact:
            fb = other.to_fraction()
            if fb == 0:
                raise DomainNotCertified("division by exact zero")
            fr = self.to_fraction() / fb
            den = fr.denominator
            if den & (den - 1) == 0:  # dyadic quotient: stay exact
                raw = from_man_exp(fr.numerator, -(den.bit_length() - 1))
                return CertReal(None, (raw, raw))

        def compute(prec, a=self, b=other):
            den = b.enclosure(prec)
            if _le(den[0], fzero) and _le(fzero, den[1]):
                raise DomainNotCertified("division by an interval containing zero")
            return mpi_div(a.enclosure(prec), den, prec)

        return CertReal(compute)

    def __rtruediv__(self, other):
        return as_certreal(other).__truediv__(self)

    def __neg__(self):
        if self._compute is None:
            return CertReal(None, mpi_neg(self._ival, 0))
        return CertReal(lambda prec, a=self: mpi_neg(a.enclosure(prec), prec))

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("integer exponent required; use powr for real powers")
        if k == 0:
            return ONE
        if k == 1:
            return self
        if k >= 0 and self.is_exact:
            # mpi_pow_int does not support exact (prec=0) evaluation;
            # power the dyadic endpoint directly
            s, man, exp, _ = self._ival[0]
            raw = from_man_exp((-int(man) if s else int(man)) ** k, exp * k)
            return CertReal(None, (raw, raw))
        if k >= 0 and self._compute is None:
            def compute_fixed(prec, iv=self._ival, k=k):
                return mpi_pow_int(iv, k, prec)
            return CertReal(compute_fixed, None, 0)

        def compute(prec, a=self, k=k):
            base = a.enclosure(prec)
            if k < 0 and _le(base[0], fzero) and _le(fzero, base[1]):
                raise DomainNotCertified("negative power of an interval containing zero")
            return mpi_pow_int(base, k, prec)

        return CertReal(compute)

    def abs(self) -> "CertReal":
        if self._compute is None:
            return CertReal(None, mpi_abs(self._ival, 0))
        return CertReal(lambda prec, a=self: mpi_abs(a.enclosure(prec), prec))

    # -- elementary functions (positivity certified at evaluation) ----

    def log(self) -> "CertReal":
        if _is_exact_one(self):
            return ZERO

        def compute(prec, a=self):
            base = a.enclosure(prec)
            if _le(base[0], fzero):
                raise DomainNotCertified("log of an interval not certified positive")
            return mpi_log(base, prec)

        return CertReal(compute)

    def exp(self) -> "CertReal":
        if _is_exact_zero(self):
            return ONE
        return CertReal(lambda prec, a=self: mpi_exp(a.enclosure(prec), prec))

    def sqrt(self) -> "CertReal":

        def compute(prec, a=self):
            base = a.enclosure(prec)
            if _lt(base[0], fzero):
                raise DomainNotCertified("sqrt of an interval not certified nonnegative")
            return mpi_sqrt(base, prec)

        return CertReal(compute)

    def powr(self, exponent: "CertRealLike") -> "CertReal":
        """Real power ``self ** exponent`` for a base certified positive."""
        e = as_certreal(exponent)
        if _is_exact_zero(e):
            return ONE
        if _is_exact_one(e):
            return self
        return (self.log() * e).exp()

    def root(self, j: int) -> "CertReal":
        if j == 1:
            return self
        return self.powr(CertReal.from_fraction(1, j))

    def cos(self) -> "CertReal":
        return CertReal(lambda prec, a=self: mpi_cos(a.enclosure(prec), prec))

    def sin(self) -> "CertReal":
        return CertReal(lambda prec, a=self: mpi_sin(a.enclosure(prec), prec))

    def floor(self) -> int:
        """Floor, certified unambiguous (raises otherwise)."""
        lo, hi = self.enclosure()
        a, b = to_int(lo, "f"), to_int(hi, "f")
        if a != b:
            raise DomainNotCertified("floor spans an integer boundary")
        return a


CertRealLike = Union[CertReal, int, float, Fraction]


def _node(op, a: CertReal, b: CertReal) -> CertReal:
    return CertReal(lambda prec: op(a.enclosure(prec), b.enclosure(prec), prec))


def _is_exact_zero(x: CertReal) -> bool:
    return x._compute is None and x._ival[0] == fzero and x._ival[1] == fzero


def _is_exact_one(x: CertReal) -> bool:
    return x._compute is None and x._ival[0] == fone and x._ival[1] == fone


def as_certreal(x: CertRealLike) -> CertReal:
    if isinstance(x, CertReal):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a real value")
    if isinstance(x, int):
        return CertReal.from_int(x)
    if isinstance(x, Fraction):
        return CertReal.from_fraction(x)
    if isinstance(x, float):
        return CertReal.from_float(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as CertReal")


ZERO = CertReal.from_int(0)
ONE = CertReal.from_int(1)
TWO = CertReal.from_int(2)


def csum(values: Iterable[CertRealLike]) -> CertReal:
    """Balanced-tree sum (keeps the expression DAG shallow)."""
    items = [as_certreal(v) for v in values]
    if not items:
        return ZERO
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def cprod(values: Iterable[CertRealLike]) -> CertReal:
    """Balanced-tree product."""
    items = [as_certreal(v) for v in values]
    if not items:
        return ONE
    while len(items) > 1:
        nxt = [items[i] * items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


# -- certified comparisons --------------------------------------------


def cmp_certified(a: CertRealLike, b: CertRealLike,
                  start_bits: int = DEFAULT_BITS,
                  max_bits: int = DEFAULT_CAP) -> Ordering:
    """Three-valued comparison with adaptive refinement.

    Returns ``LESS``/``GREATER`` only when the enclosures separate;
    ``UNDECIDED`` means the precision cap was reached (which is the
    honest answer for values that are in fact equal).  Refinement is
    performed through the operands' own compute rules.
    """
    a = as_certreal(a)
    b = as_certreal(b)
    bits = max(start_bits, 8)
    while True:
        alo, ahi = a.enclosure(bits)
        blo, bhi = b.enclosure(bits)
        if _lt(ahi, blo):
            return Ordering.LESS
        if _lt(bhi, alo):
            return Ordering.GREATER
        if not (a.is_refinable or b.is_refinable):
            return Ordering.UNDECIDED
        if bits >= max_bits:
            return Ordering.UNDECIDED
        bits = min(2 * bits, max_bits)


def certify_nonneg(x: CertRealLike,
                   start_bits: int = DEFAULT_BITS,
                   max_bits: int = DEFAULT_CAP) -> Optional[bool]:
    """True if certified ``x >= 0``, False if certified ``x < 0``, else None.

    Unlike :func:`cmp_certified` this decides the closed inequality, so an
    exactly-zero value certifies as nonnegative.
    """
    x = as_certreal(x)
    bits = max(start_bits, 8)
    while True:
        lo, hi = x.enclosure(bits)
        if not _lt(lo, fzero):
            return True
        if _lt(hi, fzero):
            return False
        if not x.is_refinable or bits >= max_bits:
            return None
        bits = min(2 * bits, max_bits)


def exact_equal(a: CertReal, b: CertReal) -> bool:
    """Equality decidable only between exact (degenerate) values."""
    return (a.is_exact and b.is_exact
            and mpf_cmp(a._ival[0], b._ival[0]) == 0)


def require(ordering: Ordering, what: str = "comparison"):
    if ordering is Ordering.UNDECIDED:
        raise PrecisionCapExceeded(f"{what} undecided at precision cap")
    return ordering


def interval_min(values: Sequence[CertReal]) -> CertReal:
    """Enclosure of ``min(values)``: [min of lows, min of highs]."""
    if not values:
        raise ValueError("empty sequence")

    vals = list(values)

    def compute(prec):
        encl = [v.enclosure(prec) for v in vals]
        lo = encl[0][0]
        hi = encl[0][1]
        for e in encl[1:]:
            if _lt(e[0], lo):
                lo = e[0]
            if _lt(e[1], hi):
                hi = e[1]
        return (lo, hi)

    if all(not v.is_refinable for v in vals):
        return CertReal(None, compute(0))
    return CertReal(compute)


# -- complex boxes ------------------------------------------------------


class CertComplex:
    """Rectangular complex enclosure with :class:`CertReal` components."""

    __slots__ = ("re", "im")

    def __init__(self, re: CertRealLike, im: CertRealLike = 0):
        self.re = as_certreal(re)
        self.im = as_certreal(im)

    def __add__(self, other):
        other = as_certcomplex(other)
        return CertComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_certcomplex(other)
        return CertComplex(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_certcomplex(other).__sub__(self)

    def __mul__(self, other):
        other = as_certcomplex(other)
        return CertComplex(self.re * other.re - self.im * other.im,
                           self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __neg__(self):
        return CertComplex(-self.re, -self.im)

    def conj(self) -> "CertComplex":
        return CertComplex(self.re, -self.im)

    def abs2(self) -> CertReal:
        return self.re * self.re + self.im * self.im

    def abs(self) -> CertReal:
        return self.abs2().sqrt()

    def __truediv__(self, other):
        other = as_certcomplex(other)
        den = other.abs2()
        num = self * other.conj()
        return CertComplex(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        return as_certcomplex(other).__truediv__(self)

    def exp(self) -> "CertComplex":
        mod = self.re.exp()
        return CertComplex(mod * self.im.cos(), mod * self.im.sin())

    def log(self) -> "CertComplex":
        """Principal-branch log; requires the box to avoid the origin."""
        mod = self.abs2()
        half = CertReal.from_fraction(1, 2)
        re = mod.log() * half

        def compute(prec, y=self.im, x=self.re):
            return mpi_atan2(y.enclosure(prec), x.enclosure(prec), prec)

        return CertComplex(re, CertReal(compute))

    def to_complex(self) -> complex:
        return complex(self.re.to_float(), self.im.to_float())

    def refine(self, prec: int) -> "CertComplex":
        self.re.refine(prec)
        self.im.refine(prec)
        return self

    def serialize(self, dps: int = 36) -> dict:
        return {"re": self.re.serialize(dps), "im": self.im.serialize(dps)}

    def __repr__(self):
        return f"CertComplex({self.re!r}, {self.im!r})"


def as_certcomplex(z) -> CertComplex:
    if isinstance(z, CertComplex):
        return z
    if isinstance(z, complex):
        return CertComplex(CertReal.from_float(z.real), CertReal.from_float(z.imag))
    return CertComplex(as_certreal(z), ZERO)


def boxes_disjoint(a: CertComplex, b: CertComplex,
                   max_bits: int = DEFAULT_CAP) -> bool:
    """True when the boxes are certified disjoint (hence unequal values)."""
    for (p, q) in ((a.re, b.re), (a.im, b.im)):
        if cmp_certified(p, q, max_bits=max_bits) is not Ordering.UNDECIDED:
            return True
    return False


def power_complex(base: CertReal, sigma: CertRealLike, t: CertRealLike) -> CertComplex:
    """``base ** (-(sigma + i t))`` for a base certified positive."""
    sigma = as_certreal(sigma)
    t = as_certreal(t)
    ell = base.log()
    mod = (-(sigma * ell)).exp()
    if _is_exact_zero(t):
        return CertComplex(mod, ZERO)
    phase = t * ell
    return CertComplex(mod * phase.cos(), -(mod * phase.sin()))
