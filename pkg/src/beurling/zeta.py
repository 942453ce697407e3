"""The Beurling zeta function and its companions.

Evaluation routes: the Euler product over primes up to a cutoff, the
Dirichlet sum over an integer snapshot, the prime-power expansion of
log zeta, and the normalized remainder Z with zeta(s) = s e^{Z(s)}/(s-1).
Every value box certifies the *truncated* object exactly; the tail
beyond the truncation is a separate bound, rigorous only when the
caller supplies the envelope constants it depends on (a prime-count
envelope pi(x) <= li(x) + K, or an integer-density envelope
N(x) <= a x + b).  The asymptotics behind those envelopes carry unknown
constants, so they are explicit inputs rather than assumptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .certreal import (
    DEFAULT_CAP,
    ONE,
    ZERO,
    CertComplex,
    CertReal,
    CertRealLike,
    Ordering,
    as_certreal,
    cmp_certified,
    csum,
    exact_equal,
    power_complex,
)
from .exceptions import DomainNotCertified, OrderingUndecided
from .logint import li
from .systems import BeurlingInteger, IntegerSnapshot, PrimeSystem


@dataclass(frozen=True)
class SPoint:
    """A complex argument s = sigma + i t with certified components."""

    sigma: CertReal
    t: CertReal

    @classmethod
    def make(cls, s: Union["SPoint", complex, float, int, CertReal]) -> "SPoint":
        if isinstance(s, SPoint):
            return s
        if isinstance(s, complex):
            return cls(as_certreal(s.real), as_certreal(s.imag))
        return cls(as_certreal(s), ZERO)

    def to_complex(self) -> complex:
        return complex(self.sigma.to_float(), self.t.to_float())


@dataclass(frozen=True)
class PrimeCountEnvelope:
    """Assertion pi(x) <= li(x) + K for the intended (infinite) system."""

    K: float


@dataclass(frozen=True)
class DensityEnvelope:
    """Assertion N(x) <= a x + b beyond the snapshot bound."""

    a: float
    b: float


@dataclass
class ZetaEval:
    s: SPoint
    value: CertComplex  # certified box for the truncated product/sum
    truncation: Optional[CertReal]  # cutoff actually used (None = entire system)
    tail_bound: Optional[CertReal]  # |full - truncated| bound, or None when zero
    rigorous: bool
    kind: str  # euler | sum | log | Z

    def inflated_box(self) -> CertComplex:
        """Box for the full object: value plus the tail disk."""
        if self.tail_bound is None:
            return self.value
        r = self.tail_bound
        return CertComplex(self.value.re + CertReal.from_interval(-_ceil_exact(r), _ceil_exact(r)),
                           self.value.im + CertReal.from_interval(-_ceil_exact(r), _ceil_exact(r)))

    def to_json(self) -> dict:
        from .serial import certreal_payload
        return {
            "s": {"sigma": certreal_payload(self.s.sigma), "t": certreal_payload(self.s.t)},
            "value": {"re": certreal_payload(self.value.re),
                      "im": certreal_payload(self.value.im)},
            "cutoff": None if self.truncation is None else certreal_payload(self.truncation),
            "tail": None if self.tail_bound is None else self.tail_bound.to_float(),
            "rigorous": self.rigorous,
            "kind": self.kind,
        }


def _ceil_exact(x: CertReal) -> CertReal:
    """Exact dyadic upper bound of a certified real."""
    return CertReal(None, (x.enclosure()[1], x.enclosure()[1]))


def cprod_complex(items) -> CertComplex:
    """Balanced product of complex boxes (keeps the DAG depth logarithmic)."""
    items = list(items)
    if not items:
        return CertComplex(ONE, ZERO)
    while len(items) > 1:
        nxt = [items[i] * items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def _participating(system: PrimeSystem, cutoff: Optional[CertRealLike],
                   max_bits: int):
    if cutoff is None:
        return list(range(len(system.primes))), None
    X = as_certreal(cutoff)
    idx = []
    for i, p in enumerate(system.primes):
        if exact_equal(p, X):
            idx.append(i)
            continue
        c = cmp_certified(p, X, max_bits=max_bits)
        if c is Ordering.LESS:
            idx.append(i)
        elif c is Ordering.UNDECIDED:
            raise OrderingUndecided("prime not separable from cutoff", witness=(i,))
        else:
            break
    return idx, X


def _prime_tail_sum(system: PrimeSystem, n_inside: int, X: CertReal,
                    sigma: CertReal, envelope: PrimeCountEnvelope) -> CertReal:
    """Upper bound for sum_{q > X} q^{-sigma} under pi <= li + K.

    Partial integration of the envelope gives
    (li(X) + K - pi(X)) X^{-sigma} + X^{1-sigma} / ((sigma-1) log X).
    Using the truncated system's count for pi(X) only weakens the bound.
    """
    liX = li(X)
    K = as_certreal(envelope.K)
    front = (liX + K - n_inside) * (-(sigma * X.log())).exp()
    back = ((ONE - sigma) * X.log()).exp() / ((sigma - 1) * X.log())
    return front + back


def zeta_euler(system: PrimeSystem, s, prime_cutoff: Optional[CertRealLike] = None,
               envelope: Optional[PrimeCountEnvelope] = None,
               max_bits: int = DEFAULT_CAP) -> ZetaEval:
    """Euler product over primes <= cutoff, with a multiplicative tail bound.

    The tail is rigorous when the cutoff covers the whole (finite)
    system, or when sigma > 1 is certified and a prime-count envelope is
    supplied; otherwise it is a heuristic estimate and flagged so.
    """
    s = SPoint.make(s)
    if cmp_certified(s.sigma, 0, max_bits=max_bits) is not Ordering.GREATER:
        raise ValueError("zeta_euler requires sigma certified > 0")
    if envelope is not None and prime_cutoff is None:
        raise ValueError("an envelope needs an explicit cutoff to bound the tail from")
    idx, X = _participating(system, prime_cutoff, max_bits)
    # an envelope declares the system to be a prefix of an infinite one,
    # so full participation alone does not close the tail
    covered = len(idx) == len(system.primes) and envelope is None

    factors = []
    for i in idx:
        factor_den = CertComplex(ONE, ZERO) - power_complex(system.primes[i], s.sigma, s.t)
        try:
            factors.append(CertComplex(ONE, ZERO) / factor_den)
        except DomainNotCertified as exc:
            raise DomainNotCertified(
                f"Euler factor at prime #{i} vanishes within certification") from exc
    value = cprod_complex(factors)

    if covered:
        return ZetaEval(s, value, X, None, True, "euler")

    sigma_gt1 = cmp_certified(s.sigma, 1, max_bits=max_bits) is Ordering.GREATER
    env = envelope if envelope is not None else PrimeCountEnvelope(2.0)
    tail_sum = _prime_tail_sum(system, len(idx), X, s.sigma, env)
    # |log tail factor| <= S / (1 - X^{-sigma}); the factor lives in the
    # disk of radius e^T - 1 around 1
    xs = (-(s.sigma * X.log())).exp()
    T = tail_sum / (ONE - xs)
    radius = T.exp() - ONE
    tail_bound = radius * value.abs()
    rigorous = sigma_gt1 and envelope is not None
    return ZetaEval(s, value, X, tail_bound, rigorous, "euler")


def zeta_sum(snapshot: IntegerSnapshot, s,
             envelope: Optional[DensityEnvelope] = None,
             max_bits: int = DEFAULT_CAP) -> ZetaEval:
    """Dirichlet sum over the snapshot with a density-envelope tail."""
    s = SPoint.make(s)
    res, ims = [], []
    for e in snapshot.entries:
        if e.is_unit:
            res.append(ONE)
            ims.append(ZERO)
            continue
        z = power_complex(e.value, s.sigma, s.t)
        res.append(z.re)
        ims.append(z.im)
    value = CertComplex(csum(res), csum(ims))

    X = snapshot.bound
    sigma_gt1 = cmp_certified(s.sigma, 1, max_bits=max_bits) is Ordering.GREATER
    env = envelope if envelope is not None else DensityEnvelope(1.0, 1.0)
    if sigma_gt1:
        a = as_certreal(env.a)
        b = as_certreal(env.b)
        xs = (-(s.sigma * X.log())).exp()          # X^{-sigma}
        x1s = ((ONE - s.sigma) * X.log()).exp()    # X^{1-sigma}
        tail = a * s.sigma * x1s / (s.sigma - 1) + b * xs
        rigorous = envelope is not None
    else:
        # divergent or boundary regime: report the first omitted scale
        tail = (-(s.sigma * X.log())).exp()
        rigorous = False
    return ZetaEval(s, value, X, tail, rigorous, "sum")


def log_zeta(system: PrimeSystem, s, prime_cutoff: Optional[CertRealLike] = None,
             envelope: Optional[PrimeCountEnvelope] = None,
             prec_bits: int = 160, max_bits: int = DEFAULT_CAP) -> ZetaEval:
    """Prime-power expansion sum_{q,k} q^{-ks}/k of log zeta.

    Rigorous for a fully covered finite system once sigma > 0 is
    certified (the k-tails decay geometrically); beyond a cutoff the
    same envelope machinery as the Euler product applies and needs
    sigma > 1.
    """
    s = SPoint.make(s)
    if cmp_certified(s.sigma, 0, max_bits=max_bits) is not Ordering.GREATER:
        raise ValueError("log_zeta requires sigma certified > 0 (divergent otherwise)")
    if envelope is not None and prime_cutoff is None:
        raise ValueError("an envelope needs an explicit cutoff to bound the tail from")
    idx, X = _participating(system, prime_cutoff, max_bits)
    covered = len(idx) == len(system.primes) and envelope is None

    sigma_lo = s.sigma.lo_fraction()
    re_parts, im_parts = [], []
    ktail_total = ZERO
    for i in idx:
        q = system.primes[i]
        q_lo = math.log(max(q.to_float(), 1.0 + 1e-12))
        kmax = max(1, int((prec_bits + 16) * math.log(2) / (float(sigma_lo) * q_lo)) + 1)
        base = power_complex(q, s.sigma, s.t)
        power = base
        for k in range(1, kmax + 1):
            if k > 1:
                power = power * base
            re_parts.append(power.re / k)
            im_parts.append(power.im / k)
        # sum_{k > kmax} q^{-k sigma}/k <= q^{-(kmax+1) sigma} / ((kmax+1)(1 - q^{-sigma}))
        qs = (-(s.sigma * q.log())).exp()
        ktail_total = ktail_total + qs ** (kmax + 1) / ((kmax + 1) * (ONE - qs))
    value = CertComplex(csum(re_parts), csum(im_parts))
    hw = _ceil_exact(ktail_total)
    pad = CertReal.from_interval(-hw, hw)
    value = CertComplex(value.re + pad, value.im + pad)

    if covered:
        return ZetaEval(s, value, X, None, True, "log")
    sigma_gt1 = cmp_certified(s.sigma, 1, max_bits=max_bits) is Ordering.GREATER
    env = envelope if envelope is not None else PrimeCountEnvelope(2.0)
    tail_sum = _prime_tail_sum(system, len(idx), X, s.sigma, env)
    xs = (-(s.sigma * X.log())).exp()
    tail = tail_sum / (ONE - xs)
    return ZetaEval(s, value, X, tail, sigma_gt1 and envelope is not None, "log")


def z_eval(system: PrimeSystem, s, prime_cutoff: Optional[CertRealLike] = None,
           envelope: Optional[PrimeCountEnvelope] = None,
           pole_tolerance: float = 1e-6,
           max_bits: int = DEFAULT_CAP) -> ZetaEval:
    """Z(s) with zeta(s) = s e^{Z(s)} / (s - 1), i.e. log zeta + log((s-1)/s)."""
    s = SPoint.make(s)
    sm1 = CertComplex(s.sigma - 1, s.t)
    if sm1.abs().to_float() < pole_tolerance:
        raise ValueError("s too close to the pole at 1")
    if CertComplex(s.sigma, s.t).abs().to_float() < pole_tolerance:
        raise ValueError("s too close to 0")
    lz = log_zeta(system, s, prime_cutoff, envelope, max_bits=max_bits)
    ratio = sm1 / CertComplex(s.sigma, s.t)
    value = lz.value + ratio.log()
    return ZetaEval(s, value, lz.truncation, lz.tail_bound, lz.rigorous, "Z")


# -- generalized Moebius coefficients ----------------------------------


def mobius_of(entry: BeurlingInteger) -> int:
    """Multiplicative coefficient of 1/zeta: 0 unless squarefree, else parity sign."""
    if any(e >= 2 for _, e in entry.exponents):
        return 0
    return -1 if len(entry.exponents) % 2 else 1


class MobiusTable:
    """Coefficients of 1/zeta over a snapshot, keyed by exponent vector."""

    def __init__(self, snapshot: IntegerSnapshot):
        self.snapshot = snapshot
        self.table = {e.exponents: mobius_of(e) for e in snapshot.entries}

    def of(self, entry: BeurlingInteger) -> int:
        return self.table[entry.exponents]

    def __getitem__(self, exponents) -> int:
        return self.table[exponents]

    def items(self):
        return self.table.items()


def mobius_table(snapshot: IntegerSnapshot) -> MobiusTable:
    return MobiusTable(snapshot)


def divisor_vectors(exponents) -> list:
    """All divisor exponent vectors of a given vector."""
    divs = [()]
    for i, e in exponents:
        divs = [d + ((i, k),) if k else d for d in divs for k in range(e + 1)]
    return divs


def dirichlet_unit_check(table: MobiusTable, entry: BeurlingInteger) -> int:
    """(1 * mu)(nu): sums mu over all divisors present in the table."""
    total = 0
    for d in divisor_vectors(entry.exponents):
        total += table[d]
    return total


# -- weighted prime counting -------------------------------------------


def count_primes_leq(system: PrimeSystem, x: CertReal,
                     max_bits: int = DEFAULT_CAP) -> int:
    count = 0
    for i, p in enumerate(system.primes):
        if exact_equal(p, x):
            count += 1
            continue
        c = cmp_certified(p, x, max_bits=max_bits)
        if c is Ordering.LESS:
            count += 1
        elif c is Ordering.UNDECIDED:
            raise OrderingUndecided("prime not separable from threshold", witness=(i,))
        else:
            break
    return count


def weighted_prime_count(system: PrimeSystem, x: CertRealLike,
                         max_bits: int = DEFAULT_CAP) -> Fraction:
    """Pi(x) = pi(x) + pi(x^{1/2})/2 + pi(x^{1/3})/3 + ... (finite sum).

    Exact systems are counted in exact rational arithmetic (p <= x^{1/k}
    iff p^k <= x), which also decides the prime-power boundary cases an
    interval comparison cannot.
    """
    x = as_certreal(x)
    total = Fraction(0)
    if x.is_exact and all(p.is_exact for p in system.primes):
        xf = x.to_fraction()
        pf = [p.to_fraction() for p in system.primes]
        k = 1
        while True:
            c = sum(1 for p in pf if p ** k <= xf)
            if c == 0:
                return total
            total += Fraction(c, k)
            k += 1
    k = 1
    while True:
        root = x if k == 1 else x.powr(CertReal.from_fraction(1, k))
        c = count_primes_leq(system, root, max_bits)
        if c == 0:
            return total
        total += Fraction(c, k)
        k += 1
