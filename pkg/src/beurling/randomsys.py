"""Randomized construction of a prime system along the inverse-li grid.

The n-th prime is drawn from the n-th cell [x_n, x_{n+1}] of the grid
x_n = li_inv(n), via q_n = li_inv(n + u_n) for uniform draws u_n from a
named, seeded, platform-independent generator (numpy's PCG64).  The
probability space of the underlying argument is realized as one
reproducible sample path: the seed and generator name ride along in the
provenance and every downstream report.

Two event families are checked at finite truncation: exponential-sum
deviations against the counting measure d li (with the stated constant-8
threshold), and approximation events where a prime lands too close to a
j-th root of a ratio of integers of its prefix system.  Primes at
triggered approximation indices are removed; the zeta relation between
the thinned and original systems is asserted numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from mpmath.libmp import fzero, mpi_add, mpi_mul, mpi_sqrt, mpi_sub

from .certreal import (
    DEFAULT_CAP,
    ONE,
    ZERO,
    CertComplex,
    CertReal,
    CertRealLike,
    Ordering,
    as_certreal,
    boxes_disjoint,
    certify_nonneg,
    cmp_certified,
    interval_min,
    power_complex,
)
from .exceptions import OrderingUndecided, PrecisionCapExceeded
from .logint import li, li_inv
from .oscillatory import accumulate_boxes, box_integral_table, li_oscillatory
from .systems import IntegerSnapshot, PrimeSystem, Provenance, enumerate_integers
from .zeta import zeta_euler

GENERATOR_NAME = "numpy-PCG64"


def uniform_draws(seed: int, count: int) -> np.ndarray:
    """The canonical uniform stream: PCG64(seed), ``count`` doubles."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.random(count)


@dataclass(frozen=True)
class SampleGrid:
    """Certified grid x_n = li_inv(n), n = 1..n_max (+1 for the last cell)."""

    n_max: int
    points: tuple  # CertReal, points[i] = x_{i+1}
    tol: float

    def x(self, n: int) -> CertReal:
        return self.points[n - 1]


def sample_grid(n_max: int, tol: float = 1e-18) -> SampleGrid:
    pts = tuple(li_inv(n, tol=tol) for n in range(1, n_max + 2))
    return SampleGrid(n_max, pts, tol)


def sample_primes(seed: int, n_max: int, tol: float = 1e-18,
                  uniforms: Optional[Sequence[float]] = None) -> PrimeSystem:
    """q_n = li_inv(n + u_n) for the seeded uniform stream.

    ``uniforms`` overrides the stream (e.g. all zeros collapses the
    primes onto the grid); the provenance then marks the system as
    explicitly driven rather than seeded.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if uniforms is None:
        us = uniform_draws(seed, n_max)
        detail = {"seed": int(seed), "generator": GENERATOR_NAME,
                  "count": int(n_max), "tol": tol}
    else:
        us = np.asarray(uniforms, dtype=float)
        if len(us) != n_max:
            raise ValueError("uniforms length mismatch")
        detail = {"generator": "explicit-uniforms", "count": int(n_max),
                  "tol": tol}
    primes = []
    for n, u in enumerate(us, start=1):
        u = float(u)
        if not 0.0 <= u < 1.0:
            raise ValueError("uniform draw outside [0, 1)")
        primes.append(li_inv(CertReal.from_int(n) + CertReal.from_float(u), tol=tol))
    return PrimeSystem(primes, provenance=Provenance("sampled", detail))


def box_property_certified(system: PrimeSystem, max_bits: int = DEFAULT_CAP) -> bool:
    """li(q_n) in [n, n+1] for every prime, certified."""
    for n, q in enumerate(system.primes, start=1):
        v = li(q)
        if cmp_certified(v, n, max_bits=max_bits) is Ordering.LESS:
            return False
        if cmp_certified(v, n + 1, max_bits=max_bits) is Ordering.GREATER:
            return False
    return True


# -- events ---------------------------------------------------------------


@dataclass
class EventRecord:
    kind: str  # "A" | "B"
    k: int
    index: int  # m for A-events, j for B-events
    triggered: bool
    statistic: Optional[float] = None
    threshold: Optional[float] = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "k": self.k, "index": self.index,
                "triggered": self.triggered, "statistic": self.statistic,
                "threshold": self.threshold, "detail": self.detail}


def a_event_threshold(x_k: CertReal, m: int) -> CertReal:
    """8 sqrt(x_k / log x_k) (sqrt(log x_k) + sqrt(log m))."""
    lx = x_k.log()
    root = (x_k / lx).sqrt()
    logm = as_certreal(0) if m == 1 else as_certreal(m).log()
    return 8 * root * (lx.sqrt() + logm.sqrt())


def _complex_abs_raw(box, prec=128):
    wp = prec + 16
    re2 = mpi_mul(box[0], box[0], wp)
    im2 = mpi_mul(box[1], box[1], wp)
    s = mpi_add(re2, im2, wp)
    s = (max(s[0], fzero, key=_raw_key), s[1])
    return mpi_sqrt(s, wp)


def _raw_key(raw):
    from mpmath.libmp import to_float
    return to_float(raw, rnd="n")


def _prime_power_boxes(system: PrimeSystem, t_values: Sequence[float],
                       prec: int = 128):
    """q_n^{-i t} boxes for each prime and frequency, as raw pairs."""
    out = []
    for q in system.primes:
        row = []
        for t in t_values:
            z = power_complex(q, ZERO, as_certreal(t))
            row.append((z.re.enclosure(prec), z.im.enclosure(prec)))
        out.append(row)
    return out


def a_event_sweep(system: PrimeSystem, grid: SampleGrid, k_max: int,
                  m_max: int, prec: int = 128) -> List[EventRecord]:
    """All A-events for k <= k_max, m <= m_max on shared certified tables."""
    if k_max > len(system.primes) or k_max > grid.n_max:
        raise ValueError("k_max exceeds the sampled range")
    ms = list(range(1, m_max + 1))
    xs = [grid.x(n) for n in range(1, k_max + 1)]
    table = box_integral_table(xs, ms, prec=prec)
    powers = _prime_power_boxes(system, ms, prec=prec)

    records = []
    wp = prec + 16
    for mi, m in enumerate(ms):
        prefix_int = accumulate_boxes([row[mi] for row in table], prec=prec)
        s_re, s_im = (fzero, fzero), (fzero, fzero)
        for k in range(1, k_max + 1):
            s_re = mpi_add(s_re, powers[k - 1][mi][0], wp)
            s_im = mpi_add(s_im, powers[k - 1][mi][1], wp)
            integral = prefix_int[k - 1]
            diff = (mpi_sub(s_re, integral[0], wp), mpi_sub(s_im, integral[1], wp))
            stat = CertReal(None, _complex_abs_raw(diff, prec))
            thr = a_event_threshold(grid.x(k), m)
            trig = _decide_trigger(stat, thr)
            records.append(EventRecord("A", k, m, trig,
                                       statistic=stat.to_float(),
                                       threshold=thr.to_float()))
    return records


def _decide_trigger(stat: CertReal, thr: CertReal,
                    max_bits: int = DEFAULT_CAP) -> bool:
    c = cmp_certified(stat, thr, max_bits=max_bits)
    if c is Ordering.LESS:
        return False
    if c is Ordering.GREATER:
        return True
    raise PrecisionCapExceeded("event statistic not separable from threshold")


def check_A_event(system: PrimeSystem, k: int, m: int,
                  grid: Optional[SampleGrid] = None,
                  prec: int = 128) -> EventRecord:
    """Single A-event: deviation of the k-prefix power sum from d li."""
    if grid is None:
        grid = sample_grid(k)
    terms_re, terms_im = (fzero, fzero), (fzero, fzero)
    wp = prec + 16
    for n in range(1, k + 1):
        z = power_complex(system.primes[n - 1], ZERO, as_certreal(m))
        terms_re = mpi_add(terms_re, z.re.enclosure(prec), wp)
        terms_im = mpi_add(terms_im, z.im.enclosure(prec), wp)
    integral = li_oscillatory(grid.x(1), grid.x(k), as_certreal(m), prec=prec)
    diff = (mpi_sub(terms_re, integral.re.enclosure(prec), wp),
            mpi_sub(terms_im, integral.im.enclosure(prec), wp))
    stat = CertReal(None, _complex_abs_raw(diff, prec))
    thr = a_event_threshold(grid.x(k), m)
    return EventRecord("A", k, m, _decide_trigger(stat, thr),
                       statistic=stat.to_float(), threshold=thr.to_float())


@dataclass
class DeviationRecord:
    x: float
    t: float
    statistic: float
    bound: float
    bound_ratio: float

    def to_json(self) -> dict:
        return {"x": self.x, "t": self.t, "statistic": self.statistic,
                "bound": self.bound, "bound_ratio": self.bound_ratio}


def exp_sum_deviation(system: PrimeSystem, x: CertRealLike, t: CertRealLike,
                      grid: Optional[SampleGrid] = None, constant: float = 1.0,
                      prec: int = 128,
                      max_bits: int = DEFAULT_CAP) -> DeviationRecord:
    """Deviation of sum_{q_n <= x} q_n^{-it} from its d li integral.

    The ratio is against the bound shape sqrt(x/log(x+1)) *
    (sqrt(log(x+1)) + sqrt(log(|t|+1))) scaled by ``constant``.
    """
    x = as_certreal(x)
    t = as_certreal(t)
    if grid is None:
        grid = sample_grid(1)
    x1 = grid.x(1)
    if cmp_certified(x, x1, max_bits=max_bits) is Ordering.LESS:
        raise ValueError("x below the first grid point")
    wp = prec + 16
    s_re, s_im = (fzero, fzero), (fzero, fzero)
    for q in system.primes:
        c = cmp_certified(q, x, max_bits=max_bits)
        if c is Ordering.GREATER:
            break
        if c is Ordering.UNDECIDED:
            raise OrderingUndecided("prime not separable from x")
        z = power_complex(q, ZERO, t)
        s_re = mpi_add(s_re, z.re.enclosure(prec), wp)
        s_im = mpi_add(s_im, z.im.enclosure(prec), wp)
    integral = li_oscillatory(x1, x, t, prec=prec)
    diff = (mpi_sub(s_re, integral.re.enclosure(prec), wp),
            mpi_sub(s_im, integral.im.enclosure(prec), wp))
    stat = CertReal(None, _complex_abs_raw(diff, prec))

    xp1 = x + 1
    lx = xp1.log()
    tt = t.abs() + 1
    shape = (x / lx).sqrt() * (lx.sqrt() + tt.log().sqrt())
    bound = constant * shape.to_float()
    sf = stat.to_float()
    return DeviationRecord(x.to_float(), t.to_float(), sf, bound,
                           sf / bound if bound > 0 else math.inf)


# -- B-events -------------------------------------------------------------


def mset_halfwidth(x_k: CertReal, nu: CertReal, mu: CertReal, A: float,
                   j: int) -> CertReal:
    """x_k^{1-(A+1)j} nu^{-(1+A)} mu^{-A}."""
    a = Fraction(A).limit_denominator(10 ** 9)
    expo = 1 - (a + 1) * j
    lead = x_k.powr(CertReal.from_fraction(expo))
    return lead / (nu.powr(CertReal.from_fraction(1 + a)) *
                   mu.powr(CertReal.from_fraction(a)))


def _prefix_entries(snapshot: IntegerSnapshot, k: int):
    """Entries of the snapshot supported on primes q_1..q_{k-1}."""
    return [e for e in snapshot.entries if e.max_prime_index <= k - 2]


def check_B_event(system: PrimeSystem, k: int, j: int, A: float,
                  cutoff: CertRealLike,
                  snapshot: Optional[IntegerSnapshot] = None,
                  grid: Optional[SampleGrid] = None,
                  width_floor: float = 1e-30,
                  prec: int = 128,
                  x_k: Optional[CertReal] = None,
                  max_bits: int = DEFAULT_CAP) -> EventRecord:
    """Membership of q_k in the truncated approximation set of its prefix.

    Tests |q_k - (mu/nu)^{1/j}| against the pair-dependent halfwidth for
    all prefix integers nu, mu up to the cutoff.  The truncated measure
    (factored over the pair sum) and its grid-zeta bound are reported.
    An undecidable membership raises :class:`OrderingUndecided` with the
    witness pair.
    """
    if snapshot is None:
        snapshot = enumerate_integers(system.restrict_indices(range(k - 1))
                                      if k > 1 else PrimeSystem([]),
                                      cutoff, max_bits=max_bits)
        prefix = list(snapshot.entries)
    else:
        prefix = _prefix_entries(snapshot, k)
    q_k = system.primes[k - 1]
    if x_k is None:
        x_k = grid.x(k) if grid is not None else li_inv(k)
    qf = q_k.to_float()
    wmax_f = x_k.to_float() ** (1 - (A + 1) * j)

    detail = {}
    s_nu = sum(v ** -(1.0 + A) for v in (e.value.to_float() for e in prefix))
    s_mu = sum(v ** -A for v in (e.value.to_float() for e in prefix))
    detail["measure_truncated"] = 2.0 * wmax_f * s_nu * s_mu
    if grid is not None:
        zx_1a = sum(grid.x(n).to_float() ** -(1 + A)
                    for n in range(1, grid.n_max + 1))
        zx_a = sum(grid.x(n).to_float() ** -A for n in range(1, grid.n_max + 1))
        detail["measure_bound"] = 2.0 * zx_1a * zx_a * wmax_f

    if wmax_f < width_floor:
        detail["width_underflow"] = True
        return EventRecord("B", k, j, False, detail=detail)

    values = [e.value.to_float() for e in prefix]
    max_val = values[-1] if values else 1.0
    lo_pow = (qf - wmax_f) ** j
    hi_pow = (qf + wmax_f) ** j
    triggered = False
    witness = None
    for ni, nu_e in enumerate(prefix):
        nu_f = values[ni]
        lo_band = nu_f * lo_pow * (1 - 1e-7) - 1e-9
        hi_band = nu_f * hi_pow * (1 + 1e-7) + 1e-9
        if lo_band > max_val:
            break
        lo_i = int(np.searchsorted(values, lo_band, side="left"))
        hi_i = int(np.searchsorted(values, hi_band, side="right"))
        for mi in range(lo_i, hi_i):
            mu_e = prefix[mi]
            ratio = mu_e.value / nu_e.value
            center = ratio.root(j) if j > 1 else ratio
            hw = mset_halfwidth(x_k, nu_e.value, mu_e.value, A, j)
            dist = (q_k - center).abs()
            sign = certify_nonneg(dist - hw, max_bits=max_bits)
            if sign is None:
                raise OrderingUndecided(
                    "B-event membership undecided",
                    witness=(nu_e.exponents, mu_e.exponents, j))
            if sign is False:
                triggered = True
                witness = (nu_e.exponents, mu_e.exponents)
    if witness is not None:
        detail["witness"] = [list(map(list, w)) for w in witness]
    return EventRecord("B", k, j, triggered, detail=detail)


def b_event_sweep(system: PrimeSystem, A: float, cutoff: CertRealLike,
                  grid: Optional[SampleGrid] = None,
                  k_max: Optional[int] = None,
                  width_floor: float = 1e-30,
                  max_bits: int = DEFAULT_CAP) -> List[EventRecord]:
    """B-events over every k (and every j that can host candidates).

    One enumeration of the full system serves all prefixes: the prefix
    of step k is the sub-semigroup on the first k-1 primes.
    """
    k_top = k_max if k_max is not None else len(system.primes)
    if grid is None:
        grid = sample_grid(k_top)
    snapshot = enumerate_integers(system, cutoff, max_bits=max_bits)
    max_val = snapshot.values_float()[-1]
    records = []
    for k in range(1, k_top + 1):
        qf = system.primes[k - 1].to_float()
        j = 0
        while True:
            j += 1
            wmax_f = grid.x(k).to_float() ** (1 - (A + 1) * j)
            no_candidates = (qf - wmax_f) ** j > max_val + 1.0
            if no_candidates and wmax_f < width_floor:
                break
            if no_candidates and j > 1:
                break
            records.append(check_B_event(system, k, j, A, cutoff,
                                         snapshot=snapshot, grid=grid,
                                         width_floor=width_floor,
                                         max_bits=max_bits))
    return records


def post_removal_b_sweep(system: PrimeSystem, events: Sequence[EventRecord],
                         A: float, cutoff: CertRealLike,
                         grid: Optional[SampleGrid] = None,
                         width_floor: float = 1e-30,
                         max_bits: int = DEFAULT_CAP) -> List[EventRecord]:
    """Re-run the B-checks on the thinned system over the same range.

    Surviving primes keep their original grid indices (the event scale
    x_k belongs to the index in the original sampling); prefixes are the
    surviving primes only, whose semigroups are subsets of the original
    prefix semigroups, so nothing can trigger if the removal was sound.
    """
    removed = sorted({ev.k for ev in events if ev.kind == "B" and ev.triggered})
    keep = [i for i in range(len(system.primes)) if (i + 1) not in removed]
    if grid is None:
        grid = sample_grid(len(system.primes))
    thin = system.restrict_indices(keep) if removed else system
    snapshot = enumerate_integers(thin, cutoff, max_bits=max_bits)
    max_val = snapshot.values_float()[-1]
    records = []
    for pos, orig_i in enumerate(keep):
        k_orig = orig_i + 1
        qf = thin.primes[pos].to_float()
        j = 0
        while True:
            j += 1
            wmax_f = grid.x(k_orig).to_float() ** (1 - (A + 1) * j)
            no_candidates = (qf - wmax_f) ** j > max_val + 1.0
            if no_candidates and (wmax_f < width_floor or j > 1):
                break
            rec = check_B_event(thin, pos + 1, j, A, cutoff,
                                snapshot=snapshot, width_floor=width_floor,
                                x_k=grid.x(k_orig), max_bits=max_bits)
            rec.detail["original_index"] = k_orig
            records.append(rec)
    return records


def remove_exceptional(system: PrimeSystem, events: Sequence[EventRecord],
                       check_zeta_at: Sequence[complex] = (2.0,),
                       max_bits: int = DEFAULT_CAP) -> PrimeSystem:
    """Drop primes at triggered B-event indices.

    The zeta relation  zeta_thinned(s) = zeta_full(s) * prod (1 - q^{-s})
    over the removed primes is asserted at the requested points (boxes
    must not be certified disjoint).
    """
    removed = sorted({ev.k for ev in events if ev.kind == "B" and ev.triggered})
    if not removed:
        return system
    keep = [i for i in range(len(system.primes)) if (i + 1) not in removed]
    thin = PrimeSystem(
        [system.primes[i] for i in keep],
        provenance=Provenance(system.provenance.kind,
                              dict(system.provenance.detail,
                                   removed_indices=removed)))
    for s in check_zeta_at:
        lhs = zeta_euler(thin, s, max_bits=max_bits).value
        rhs = zeta_euler(system, s, max_bits=max_bits).value
        for k in removed:
            factor = CertComplex(ONE, ZERO) - power_complex(
                system.primes[k - 1], as_certreal(s.real), as_certreal(s.imag))
            rhs = rhs * factor
        if boxes_disjoint(lhs, rhs, max_bits=max_bits):
            raise PrecisionCapExceeded(
                "zeta relation violated after removal (unsound enumeration?)")
    return thin


# -- pairwise gaps and density --------------------------------------------


@dataclass
class GapAuditReport:
    A: float
    min_margin: CertReal
    min_index: int
    margins_float: List[float]
    positive: bool
    meets_unit_threshold: Optional[bool]

    def to_json(self) -> dict:
        return {"A": self.A, "min_margin": self.min_margin.to_float(),
                "min_index": self.min_index,
                "positive": self.positive,
                "meets_unit_threshold": self.meets_unit_threshold}


def pairwise_gap_audit(snapshot: IntegerSnapshot, A: float,
                       max_bits: int = DEFAULT_CAP) -> GapAuditReport:
    """Margins (nu_{n+1} - nu_n)(nu_n nu_{n+1})^A over consecutive pairs.

    Consecutive pairs suffice for the all-pairs bound: gaps add while the
    weight is largest for neighbours, so the consecutive minimum controls
    every pair.  The report states the certified minimum, whether it is
    positive, and whether it reaches the threshold 1 (equivalent to the
    distance bound |nu_n - nu_m| >= (nu_n nu_m)^{-A}).
    """
    entries = snapshot.entries
    if len(entries) < 2:
        raise ValueError("snapshot needs at least two entries")
    a_fr = Fraction(A).limit_denominator(10 ** 9)
    margins = []
    for i, gap in enumerate(snapshot.gaps()):
        w = entries[i].value * entries[i + 1].value
        weight = w if a_fr == 1 else w.powr(CertReal.from_fraction(a_fr))
        margins.append(gap * weight)
    best, best_i = margins[0], 0
    for i in range(1, len(margins)):
        c = cmp_certified(margins[i], best, max_bits=max_bits)
        if c is Ordering.LESS:
            best, best_i = margins[i], i
        elif c is Ordering.UNDECIDED and not (margins[i].is_exact and best.is_exact):
            raise OrderingUndecided("gap margins not separable", witness=(best_i, i))
    positive = certify_nonneg(best, max_bits=max_bits) is True
    unit = certify_nonneg(best - 1, max_bits=max_bits)
    return GapAuditReport(A, interval_min(margins), best_i,
                          [m.to_float() for m in margins], positive, unit)


@dataclass
class DensityFit:
    a: float
    residuals: List[tuple]  # (x, N(x) - a x)
    residual_exponent: Optional[float]
    nonlinear_flagged: bool

    def to_json(self) -> dict:
        return {"a": self.a,
                "residuals": [[x, r] for x, r in self.residuals],
                "residual_exponent": self.residual_exponent,
                "nonlinear_flagged": self.nonlinear_flagged}


def density_fit(snapshot: IntegerSnapshot, points: int = 48) -> DensityFit:
    """Least-squares slope of N(x) over a geometric grid of x.

    Sample abscissas are midpoints between consecutive entries, so every
    count is exact by construction.  The residual growth exponent is the
    regression slope of log |residual| against log x; a slope at or
    above ~1 (or a nonpositive fitted density) flags a non-linear
    counting regime, as for single-prime systems.
    """
    if len(snapshot.entries) < 100:
        raise ValueError("density fit needs at least 100 entries")
    vals = snapshot.values_float()
    n_total = len(vals)
    idxs = sorted({int(round(v)) for v in
                   np.geomspace(8, n_total - 2, num=min(points, n_total - 9))})
    xs, ns = [], []
    for idx in idxs:
        xs.append(0.5 * (vals[idx] + vals[idx + 1]))
        ns.append(idx + 1)
    xs_arr = np.array(xs)
    ns_arr = np.array(ns, dtype=float)
    a = float(np.dot(ns_arr, xs_arr) / np.dot(xs_arr, xs_arr))
    residuals = ns_arr - a * xs_arr
    pairs = list(zip(xs, residuals.tolist()))
    mask = np.abs(residuals) > 1e-9
    exponent = None
    if mask.sum() >= 3:
        slope, _ = np.polyfit(np.log(xs_arr[mask]), np.log(np.abs(residuals[mask])), 1)
        exponent = float(slope)
    # non-linear regimes: residuals growing like x, or carrying a
    # non-negligible share of the counting signal itself
    rel_res = float(np.max(np.abs(residuals))) / max(a * float(xs_arr[-1]), 1e-300)
    flagged = a <= 0 or rel_res > 0.5 or \
        (exponent is not None and exponent >= 0.95)
    return DensityFit(a, pairs, exponent, flagged)
