"""Deterministic prime perturbation with certified gap certificates.

Given a target sequence of primes, the builder produces a nearby system
(within the budget |q~_n - q_n| <= q_n^{-A}) whose integers satisfy a
power-type gap lower bound, following the inductive window construction:
around each target prime x a window [x - x^{-s/2}, x + x^{-s/2}] is
searched for a point avoiding every exceptional interval centred at the
j-th roots of ratios of already-built integers.  A certified measure
comparison (truncated cover mass plus an out-of-cutoff tail against the
window length) decides per window whether the constructive search is
backed by an existence argument; windows that cannot be certified fall
back to seeded random shifts that are re-drawn until the finite gap
certificate passes.

All certificates state their enumeration bound: the underlying
quantifiers range over all triples of naturals, which no finite run can
check, so every report is scoped to the cutoff it was verified at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .certreal import (
    DEFAULT_CAP,
    ONE,
    CertReal,
    Ordering,
    as_certreal,
    certify_nonneg,
    cmp_certified,
    interval_min,
)
from .exceptions import CertificateFailure, OrderingUndecided, WindowExhausted
from .systems import (
    BeurlingInteger,
    IntegerSnapshot,
    PrimeSystem,
    Provenance,
    enumerate_integers,
)

_UNIFORM_GENERATOR = "numpy-PCG64"


def _pow_half(v: CertReal, halves: int) -> CertReal:
    """v ** (halves/2) for nonnegative half-integer exponents."""
    k, r = divmod(halves, 2)
    out = v ** k if k else ONE
    return out * v.sqrt() if r else out


@dataclass
class ConstructParams:
    """Knobs of the perturbation builder.

    A: budget exponent, |q~_n - q_n| <= q_n^{-A}.
    epsilon: window-floor parameter in (0, q_1 - 1); auto when None.
    x0: anchor in (1 + epsilon/2, 1 + epsilon); auto when None.
    sigma_inf: avoidance exponent; auto-selected on a half-integer grid
        when None.  Must exceed max(2, A) and 2A (budget chain).
    sigma_c_bound: caller's upper bound for the convergence abscissa of
        the target's zeta (carried into reports; finite desk-scale
        systems always satisfy any positive bound).
    cutoff: enumeration bound for every certificate and exclusion check.
    seed: drives the redraw path for windows without a measure
        certificate.
    """

    A: float = 1.0
    epsilon: Optional[float] = None
    x0: Optional[float] = None
    sigma_inf: Optional[float] = None
    sigma_c_bound: float = 1.0
    cutoff: float = 10_000.0
    seed: int = 0
    max_redraws: int = 1000
    sigma_grid_max: float = 64.0
    max_bits: int = DEFAULT_CAP

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("A must be positive")
        if self.cutoff < 2:
            raise ValueError("cutoff must be >= 2")

    def resolve_window_params(self, q1_float: float) -> Tuple[float, float]:
        """Concrete (epsilon, x0) against the first target prime."""
        if q1_float <= 1.0:
            raise ValueError("target primes must exceed 1")
        eps = self.epsilon
        if eps is None:
            eps = min(0.5, (q1_float - 1.0) / 2.0)
        if not 0.0 < eps < q1_float - 1.0:
            raise ValueError("epsilon outside (0, q1 - 1)")
        x0 = self.x0
        if x0 is None:
            x0 = 1.0 + 0.75 * eps
        if not 1.0 + eps / 2.0 < x0 < 1.0 + eps:
            raise ValueError("x0 outside (1 + epsilon/2, 1 + epsilon)")
        return eps, x0


# -- sigma_inf selection ------------------------------------------------


def _finite_zeta_real(primes: Sequence[CertReal], sigma: CertReal) -> CertReal:
    """Finite Euler product at a real argument (repeats allowed)."""
    factors = [ONE / (ONE - (-(sigma * p.log())).exp()) for p in primes]
    items = list(factors)
    while len(items) > 1:
        nxt = [items[i] * items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0] if items else ONE


def bounded_quantity(primes: Sequence[CertReal], sigma: Fraction) -> CertReal:
    """(zeta(sigma) - 1) * zeta(sigma/4) for a finite prime list."""
    s = CertReal.from_fraction(sigma)
    s4 = CertReal.from_fraction(sigma / 4)
    return (_finite_zeta_real(primes, s) - 1) * _finite_zeta_real(primes, s4)


def sigma_inf_select(system_prefix: PrimeSystem, params: ConstructParams,
                     primes_override: Optional[Sequence[CertReal]] = None) -> float:
    """Least half-integer grid point with (zeta(s)-1) zeta(s/4) <= 1.

    The grid starts strictly above max(2, A) with a whole-unit margin
    (and never below 2A, which the budget chain |q~-q| <= x^{-s/2} <=
    x^{-A} needs).  The tested quantity is nonincreasing in s, so the
    first certified grid point is the selection.
    """
    primes = list(primes_override if primes_override is not None
                  else system_prefix.primes)
    lo = max(2.0, params.A)
    start = Fraction(math.floor(lo) + 1)
    two_a = Fraction(params.A).limit_denominator(10 ** 6) * 2
    if start < two_a:
        start = Fraction(math.ceil(two_a * 2), 2)
    sigma = start
    while float(sigma) <= params.sigma_grid_max:
        val = bounded_quantity(primes, sigma)
        if cmp_certified(val, 1, max_bits=params.max_bits) is Ordering.LESS:
            return float(sigma)
        sigma += Fraction(1, 2)
    raise ValueError("no sigma_inf on the grid satisfies the bound "
                     f"(searched up to {params.sigma_grid_max})")


# -- exceptional intervals ----------------------------------------------


@dataclass(frozen=True)
class OmegaInterval:
    """Exceptional interval around the j-th root of a ratio of integers."""

    center: CertReal
    halfwidth: CertReal
    numerator: BeurlingInteger  # nu_n
    denominator: BeurlingInteger  # nu_m
    j: int


@dataclass
class OmegaCover:
    intervals: List[OmegaInterval]
    total_measure: CertReal  # sum of lengths of returned intervals
    tail_measure: CertReal  # bound on mass from pairs beyond the cutoff
    j_limit: int
    complete_within_cutoff: bool


def window_for(x: CertReal, sigma_inf: float) -> Tuple[CertReal, CertReal]:
    """[x - x^{-s/2}, x + x^{-s/2}]."""
    hw = ONE / x.powr(CertReal.from_fraction(Fraction(sigma_inf) / 2))
    return x - hw, x + hw


def omega_cover(window: Tuple[CertReal, CertReal], snapshot: IntegerSnapshot,
                sigma_exponent: float, x0: float,
                j_max: Optional[int] = None,
                min_integer_index: int = 0,
                max_bits: int = DEFAULT_CAP) -> OmegaCover:
    """Every exceptional interval meeting the window, pairs within cutoff.

    Intervals are centred at (nu_n / nu_m)^{1/j} with halfwidth
    x0^{1-j} (nu_n nu_m)^{-sigma_exponent}; enumeration walks, per j and
    per denominator, the band nu_n in nu_m * [wlo^j, whi^j].  Intervals
    that cannot be certified disjoint from the window are included
    (the cover may only over-include).  ``min_integer_index`` = 1 drops
    unit pairs, matching the family the measure argument sums.
    """
    wlo, whi = window
    wlo_f, whi_f = wlo.to_float(), whi.to_float()
    if wlo_f <= max(x0, 1.0):
        raise ValueError("window must lie strictly above x0 and 1")
    halves = _halves(sigma_exponent)
    x0_cr = CertReal.from_float(x0)
    vals = np.array(snapshot.values_float())
    entries = snapshot.entries
    max_val = vals[-1] if len(vals) else 1.0

    out: List[OmegaInterval] = []
    total_parts: List[CertReal] = []
    j = 0
    j_cap = j_max if j_max is not None else 10 ** 6
    while True:
        j += 1
        if j > j_cap:
            break
        lo_pow, hi_pow = wlo_f ** j, whi_f ** j
        if lo_pow > max_val * (1.0 + 1e-6) + 1.0:
            j -= 1
            break
        for mi in range(min_integer_index, len(entries)):
            den = entries[mi]
            den_f = vals[mi]
            lo_band = den_f * lo_pow * (1.0 - 1e-7) - 1e-9
            hi_band = den_f * hi_pow * (1.0 + 1e-7) + 1e-9
            if lo_band > max_val:
                break
            ni_lo = int(np.searchsorted(vals, lo_band, side="left"))
            ni_hi = int(np.searchsorted(vals, hi_band, side="right"))
            for ni in range(max(ni_lo, min_integer_index), ni_hi):
                num = entries[ni]
                ratio = num.value / den.value
                center = ratio.root(j) if j > 1 else ratio
                hw = (x0_cr ** (1 - j)) / _pow_half(num.value * den.value, halves)
                if _certified_outside(center, hw, wlo, whi, max_bits):
                    continue
                out.append(OmegaInterval(center, hw, num, den, j))
                total_parts.append(hw)
    total = _balanced_sum(total_parts) * 2 if total_parts else as_certreal(0)
    tail = _cover_tail_measure(snapshot, halves, x0_cr)
    window_len = whi - wlo
    complete = certify_nonneg(window_len * CertReal.from_fraction(1, 10 ** 6) - tail,
                              max_bits=max_bits) is True
    return OmegaCover(out, total, tail, j, complete)


def _halves(sigma_exponent: float) -> int:
    halves = int(round(2 * sigma_exponent))
    if abs(2 * sigma_exponent - halves) > 1e-12:
        raise ValueError("exponent must be a half-integer")
    return halves


def _balanced_sum(items: List[CertReal]) -> CertReal:
    items = list(items)
    if not items:
        return as_certreal(0)
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def _certified_outside(center: CertReal, hw: CertReal, wlo: CertReal,
                       whi: CertReal, max_bits: int) -> bool:
    if cmp_certified(center + hw, wlo, max_bits=max_bits) is Ordering.LESS:
        return True
    if cmp_certified(whi, center - hw, max_bits=max_bits) is Ordering.LESS:
        return True
    return False


def _cover_tail_measure(snapshot: IntegerSnapshot, halves: int,
                        x0_cr: CertReal) -> CertReal:
    """Mass bound for intervals whose pair leaves the cutoff.

    Rankin's trick on the finite Euler product: the sum of
    (nu_n nu_m)^{-s} over pairs with a coordinate above X is at most
    2 zeta(s) zeta(s0) X^{-(s - s0)} for any smaller s0, and the j-sum
    contributes the geometric factor x0/(x0-1).  The auxiliary exponent
    s0 is picked by a float pre-pass (the certified value uses only the
    winner, so the choice needs no certification).
    """
    primes = snapshot.system.primes
    s = CertReal.from_fraction(Fraction(halves, 2))
    pf = [p.to_float() for p in primes]
    Xf = snapshot.bound.to_float()

    def est(s0f):
        z = 1.0
        for q in pf:
            z /= (1.0 - q ** -s0f)
        return z * Xf ** (s0f - halves / 2.0)

    candidates = [Fraction(num, 4) for num in range(2, 4 * halves // 2, 1)]
    best = min(candidates, key=lambda fr: est(float(fr)))
    s0 = CertReal.from_fraction(best)
    zs = _finite_zeta_real(primes, s)
    zs0 = _finite_zeta_real(primes, s0)
    X = snapshot.bound
    decay = (-(s - s0) * X.log()).exp()
    geom = x0_cr / (x0_cr - 1)
    return 2 * geom * 2 * zs * zs0 * decay


def omega_family_measure(snapshot: IntegerSnapshot, sigma_exponent: float,
                         x0: float, j_max: int) -> CertReal:
    """Total length of all exceptional intervals with pairs in the snapshot."""
    halves = _halves(sigma_exponent)
    x0_cr = CertReal.from_float(x0)
    parts = []
    powers = {}
    for e in snapshot.entries:
        powers[e.exponents] = _pow_half(e.value, halves)
    for j in range(1, j_max + 1):
        scale = (x0_cr ** (1 - j)) * 2
        for a in snapshot.entries:
            for b in snapshot.entries:
                parts.append(scale / (powers[a.exponents] * powers[b.exponents]))
    return _balanced_sum(parts)


# -- measure certificate and admissible points --------------------------


@dataclass
class MeasureReport:
    window: Tuple[CertReal, CertReal]
    cover_measure: CertReal
    tail_measure: CertReal
    window_length: CertReal
    certified: bool
    empirical_constant: float  # C with |I_x ∩ N| <= C x^{-s/4} |I_x|

    def to_json(self) -> dict:
        return {"cover_measure": self.cover_measure.to_float(),
                "tail_measure": self.tail_measure.to_float(),
                "window_length": self.window_length.to_float(),
                "certified": self.certified,
                "empirical_constant": self.empirical_constant}


def window_measure_certificate(x: CertReal, snapshot: IntegerSnapshot,
                               params: ConstructParams, sigma_inf: float,
                               x0: float) -> MeasureReport:
    """Certified comparison of exceptional mass against the window length.

    Uses the measure family (unit pairs excluded, as in the summed
    bound); certification means the window cannot be swallowed by the
    truncated cover plus its out-of-cutoff tail.
    """
    wlo, whi = window_for(x, sigma_inf)
    cover = omega_cover((wlo, whi), snapshot, sigma_inf, x0,
                        min_integer_index=1, max_bits=params.max_bits)
    length = whi - wlo
    mass = cover.total_measure + cover.tail_measure
    certified = certify_nonneg(length - mass * 2, max_bits=params.max_bits) is True
    xf = x.to_float()
    denom = xf ** (-sigma_inf / 4.0) * length.to_float()
    emp = mass.to_float() / denom if denom > 0 else math.inf
    return MeasureReport((wlo, whi), cover.total_measure, cover.tail_measure,
                         length, certified, emp)


@dataclass
class AdmissibleResult:
    point: CertReal
    tries: int
    measure: MeasureReport
    avoided: int  # number of exceptional intervals in the avoid set


def find_admissible(x: CertReal, current: PrimeSystem, params: ConstructParams,
                    sigma_inf: float, x0: float,
                    snapshot: Optional[IntegerSnapshot] = None,
                    lower_barrier: Optional[CertReal] = None) -> AdmissibleResult:
    """A point of the window around x clear of every exceptional interval.

    The avoid set uses the tripled exponent so that products involving
    the unit are covered as well.  The search tries x itself first, then
    a symmetric outward grid of step halfwidth/8, halving the step when
    a sweep is exhausted.  The measure certificate is checked first and
    reported; a failed certificate raises :class:`WindowExhausted`.
    """
    if len(current) == 0:
        report = MeasureReport(window_for(x, sigma_inf), as_certreal(0),
                               as_certreal(0), as_certreal(0), True, 0.0)
        return AdmissibleResult(x, 1, report, 0)
    if snapshot is None:
        snapshot = enumerate_integers(current, params.cutoff,
                                      max_bits=params.max_bits)
    wlo_probe, _ = window_for(x, sigma_inf)
    if wlo_probe.to_float() <= max(x0, 1.0) or \
            (lower_barrier is not None
             and wlo_probe.to_float() <= lower_barrier.to_float()):
        raise WindowExhausted("window extends below the admissible region")
    measure = window_measure_certificate(x, snapshot, params, sigma_inf, x0)
    if not measure.certified:
        raise WindowExhausted("window measure certificate failed")
    wlo, whi = measure.window
    avoid = omega_cover((wlo, whi), snapshot, 3.0 * sigma_inf, x0,
                        min_integer_index=0, max_bits=params.max_bits)

    hw_f = (whi - wlo).to_float() / 2.0
    step = hw_f / 8.0
    tries = 0
    for _ in range(14):  # step-halving rounds
        offsets = [0.0]
        k = 1
        while k * step <= hw_f:
            offsets.extend((k * step, -k * step))
            k += 1
        for off in offsets:
            cand = x if off == 0.0 else x + CertReal.from_float(off)
            tries += 1
            if not _candidate_ok(cand, wlo, whi, avoid.intervals,
                                 lower_barrier, params.max_bits):
                continue
            return AdmissibleResult(cand, tries, measure, len(avoid.intervals))
        step /= 2.0
    raise WindowExhausted(
        f"no admissible point after {tries} candidates (certified measure "
        "comparison says one exists; raise the precision cap)")


def _candidate_ok(cand: CertReal, wlo: CertReal, whi: CertReal,
                  intervals: Sequence[OmegaInterval],
                  lower_barrier: Optional[CertReal], max_bits: int) -> bool:
    if cmp_certified(wlo, cand, max_bits=max_bits) is not Ordering.LESS:
        return False
    if cmp_certified(cand, whi, max_bits=max_bits) is not Ordering.LESS:
        return False
    if lower_barrier is not None and \
            cmp_certified(lower_barrier, cand, max_bits=max_bits) is not Ordering.LESS:
        return False
    for om in intervals:
        if cmp_certified(cand, om.center - om.halfwidth,
                         max_bits=max_bits) is Ordering.LESS:
            continue
        if cmp_certified(om.center + om.halfwidth, cand,
                         max_bits=max_bits) is Ordering.LESS:
            continue
        return False
    return True


# -- gap certificates ----------------------------------------------------


@dataclass
class GapCertificate:
    """Machine-checked statement: every consecutive integer gap up to the
    verified range is at least nu_{n+1}^{-exponent}."""

    exponent: float
    min_margin: CertReal
    verified_range: CertReal
    colliding_pairs: List[tuple] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.colliding_pairs

    def to_json(self) -> dict:
        return {"exponent": self.exponent,
                "min_margin": self.min_margin.to_float(),
                "verified_range": self.verified_range.to_float(),
                "colliding_pairs": [list(map(list, pair)) for pair in self.colliding_pairs],
                "valid": self.valid}


def verify_gap_certificate(snapshot: IntegerSnapshot, exponent: float,
                           max_bits: int = DEFAULT_CAP) -> GapCertificate:
    """Audit margins (nu_{n+1} - nu_n) - nu_{n+1}^{-exponent} over a snapshot.

    Independent of how the system was built; a certified-negative margin
    lands the offending pair in ``colliding_pairs``, and a margin whose
    sign cannot be decided raises :class:`OrderingUndecided`.
    """
    if len(snapshot.entries) < 2:
        raise ValueError("snapshot needs at least two entries")
    halves = _halves(exponent)
    margins = []
    colliding = []
    for i, gap in enumerate(snapshot.gaps()):
        nxt = snapshot.entries[i + 1]
        margin = gap - ONE / _pow_half(nxt.value, halves)
        margins.append(margin)
        sign = certify_nonneg(margin, max_bits=max_bits)
        if sign is False:
            colliding.append((snapshot.entries[i].exponents, nxt.exponents))
        elif sign is None:
            raise OrderingUndecided(
                "gap margin sign undecided at precision cap",
                witness=(snapshot.entries[i].exponents, nxt.exponents))
    return GapCertificate(exponent, interval_min(margins), snapshot.bound, colliding)


# -- exclusion audit ------------------------------------------------------


@dataclass
class ExclusionAudit:
    prime_index: int
    checked: int
    min_ratio: float  # min over checked triples of |q^j - ratio| / required
    violations: List[tuple] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def audit_exclusion(q_new: CertReal, snapshot: IntegerSnapshot, sigma_inf: float,
                    prime_index: int = -1,
                    max_bits: int = DEFAULT_CAP) -> ExclusionAudit:
    """Re-check |q^j - nu_n/nu_m| >= (nu_n nu_m)^{-3 sigma_inf} directly.

    For each denominator and power only integers within distance ~1 of
    nu_m q^j need individual checks: farther numerators give
    |q^j - nu_n/nu_m| >= 1/nu_m >= (nu_n nu_m)^{-3 sigma_inf} for free.
    """
    halves = _halves(3.0 * sigma_inf)
    vals = np.array(snapshot.values_float())
    entries = snapshot.entries
    max_val = float(vals[-1])
    qf = q_new.to_float()
    checked = 0
    min_ratio = math.inf
    violations = []
    for mi, den in enumerate(entries):
        den_f = float(vals[mi])
        power = ONE
        pf = 1.0
        j = 0
        while True:
            j += 1
            power = power * q_new
            pf *= qf
            c_f = den_f * pf
            if c_f > max_val + 2.0:
                break
            lo = int(np.searchsorted(vals, c_f - 1.5, side="left"))
            hi = int(np.searchsorted(vals, c_f + 1.5, side="right"))
            for ni in range(lo, hi):
                num = entries[ni]
                lhs = (power - num.value / den.value).abs()
                rhs = ONE / _pow_half(num.value * den.value, halves)
                checked += 1
                ratio = lhs.to_float() / max(rhs.to_float(), 5e-324)
                min_ratio = min(min_ratio, ratio)
                if certify_nonneg(lhs - rhs, max_bits=max_bits) is not True:
                    violations.append((num.exponents, den.exponents, j))
    return ExclusionAudit(prime_index, checked, min_ratio, violations)


# -- the inductive builder ------------------------------------------------


@dataclass
class StepRecord:
    index: int
    target: CertReal
    chosen: CertReal
    path: str  # first | grid | redraw
    tries: int
    budget_ok: bool
    certificate_margin: float
    exclusion: Optional[ExclusionAudit]
    measure: Optional[MeasureReport]

    def to_json(self) -> dict:
        from .serial import certreal_payload
        return {"index": self.index,
                "target": certreal_payload(self.target),
                "chosen": certreal_payload(self.chosen),
                "path": self.path,
                "tries": self.tries,
                "budget_ok": self.budget_ok,
                "certificate_margin": self.certificate_margin,
                "exclusion_min_ratio": None if self.exclusion is None
                    else self.exclusion.min_ratio,
                "measure": None if self.measure is None else self.measure.to_json()}


@dataclass
class PerturbationResult:
    system: PrimeSystem
    certificate: GapCertificate
    steps: List[StepRecord]
    sigma_inf: float
    epsilon: float
    x0: float
    final_snapshot: IntegerSnapshot

    def __iter__(self):
        return iter((self.system, self.certificate))


def perturb_system(target: PrimeSystem, params: ConstructParams) -> PerturbationResult:
    """Perturb a target system into one with a certified gap bound.

    The returned certificate has exponent 6 sigma_inf, verified on the
    enumeration up to ``params.cutoff``.  Each emitted prime is audited
    against the exclusion inequality (tripled exponent) on its prefix.
    """
    if len(target) == 0:
        raise ValueError("empty target")
    q1f = target.primes[0].to_float()
    eps, x0 = params.resolve_window_params(q1f)
    env = _envelope_primes(target, params.A, q1f)
    sigma_inf = params.sigma_inf
    if sigma_inf is None:
        sigma_inf = sigma_inf_select(target, params, primes_override=env)
    else:
        if sigma_inf <= max(2.0, params.A) or sigma_inf < 2 * params.A:
            raise ValueError("sigma_inf must exceed max(2, A) and 2A")
    _halves(sigma_inf)  # validates half-integrality

    rng = np.random.default_rng(np.random.PCG64(params.seed))
    floor_val = 1.0 + (q1f - 1.0) / 4.0
    chosen: List[CertReal] = []
    steps: List[StepRecord] = []
    snapshot = None
    for k, qk in enumerate(target.primes):
        if k == 0:
            cand, path, tries, measure = qk, "first", 1, None
            snapshot_next, cert = _try_extend(chosen, cand, params, sigma_inf)
            if cert.colliding_pairs:
                raise CertificateFailure(
                    "base certificate failed for the first prime",
                    witness=cert.colliding_pairs[0])
        else:
            try:
                res = find_admissible(qk, PrimeSystem(chosen), params, sigma_inf,
                                      x0, snapshot=snapshot,
                                      lower_barrier=chosen[-1])
                cand, path, tries, measure = res.point, "grid", res.tries, res.measure
                snapshot_next, cert = _try_extend(chosen, cand, params, sigma_inf)
                if cert.colliding_pairs:
                    raise CertificateFailure(
                        f"gap certificate failed after admissible pick at step {k}",
                        witness=cert.colliding_pairs[0])
            except WindowExhausted:
                cand, tries, snapshot_next, cert = _redraw_prime(
                    qk, chosen, params, sigma_inf, rng, floor_val)
                path, measure = "redraw", None
        budget_ok = _within_budget(cand, qk, params.A, params.max_bits)
        if not budget_ok:
            raise CertificateFailure(
                f"perturbation budget exceeded at step {k}")
        audit = None
        if path == "grid" and snapshot is not None:
            # the exclusion inequality is what the windowed search
            # guarantees; redraw steps only carry the gap certificate
            audit = audit_exclusion(cand, snapshot, sigma_inf, prime_index=k,
                                    max_bits=params.max_bits)
            if not audit.passed:
                raise CertificateFailure(
                    f"exclusion audit failed at step {k}",
                    witness=audit.violations[0])
        chosen.append(cand)
        snapshot = snapshot_next
        steps.append(StepRecord(k, qk, cand, path, tries, budget_ok,
                                cert.min_margin.to_float(), audit, measure))

    system = PrimeSystem(
        chosen,
        provenance=Provenance("perturbed", {
            "A": params.A, "sigma_inf": sigma_inf, "epsilon": eps, "x0": x0,
            "cutoff": params.cutoff, "seed": params.seed,
            "generator": _UNIFORM_GENERATOR}))
    final_cert = verify_gap_certificate(snapshot, 6.0 * sigma_inf,
                                        max_bits=params.max_bits)
    return PerturbationResult(system, final_cert, steps, sigma_inf, eps, x0,
                              snapshot)


def _envelope_primes(target: PrimeSystem, A: float, q1f: float) -> List[CertReal]:
    """Dominating lower envelope l_j <= any admissible q~_j, all > 1.

    Lower primes only increase the finite zeta values, so selecting
    sigma_inf against this envelope keeps the bounded quantity valid at
    every induction step.
    """
    floor_val = CertReal.from_float(1.0 + (q1f - 1.0) / 4.0)
    out = []
    for q in target.primes:
        qa = q.powr(CertReal.from_float(-A)) if A != 1.0 else ONE / q
        drop = qa if qa.to_float() < 1.0 else ONE
        cand = q - drop
        out.append(cand if cmp_certified(floor_val, cand) is Ordering.LESS
                   else floor_val)
    return out


def _within_budget(cand: CertReal, qk: CertReal, A: float, max_bits: int) -> bool:
    budget = qk.powr(CertReal.from_float(-A)) if A != 1.0 else ONE / qk
    diff = (cand - qk).abs()
    if cand.is_exact and qk.is_exact and cand.to_fraction() == qk.to_fraction():
        return True
    return certify_nonneg(budget - diff, max_bits=max_bits) is True


def _try_extend(chosen: List[CertReal], cand: CertReal, params: ConstructParams,
                sigma_inf: float):
    trial = PrimeSystem(chosen + [cand])
    snap = enumerate_integers(trial, params.cutoff, max_bits=params.max_bits)
    cert = verify_gap_certificate(snap, 6.0 * sigma_inf, max_bits=params.max_bits)
    return snap, cert


def _redraw_prime(qk: CertReal, chosen: List[CertReal], params: ConstructParams,
                  sigma_inf: float, rng, floor_val: float):
    """Seeded uniform shifts in [-q^{-A}, q^{-A}], re-drawn until the
    extended gap certificate passes."""
    qf = qk.to_float()
    budget = qf ** (-params.A)
    last = chosen[-1].to_float() if chosen else 1.0
    for attempt in range(1, params.max_redraws + 1):
        shift = float(rng.uniform(-budget, budget))
        cand_f = qf + shift
        if cand_f <= max(floor_val, last * (1 + 1e-12)):
            continue
        cand = qk + CertReal.from_float(shift) if shift != 0.0 else qk
        try:
            snap, cert = _try_extend(chosen, cand, params, sigma_inf)
        except OrderingUndecided:
            continue
        if cert.valid:
            return cand, attempt, snap, cert
    raise CertificateFailure(
        f"no admissible redraw within {params.max_redraws} attempts")
