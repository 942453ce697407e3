"""Approximation of reals by ratios of Beurling integers.

For each denominator in a snapshot, the closest ratio to the target is
located by a certified binary search on target * denominator; the
irrationality-measure estimate is the supremum of the observed exponents
log(1/error) / log(denominator) over the large-denominator tail.  The
denominator size is taken as written (no reduction of the ratio), per
the definition; this matters: a sharp approximation with a small
denominator re-enters the large-denominator window as a multiplied
copy and legitimately lifts the estimate.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from .certreal import (
    DEFAULT_CAP,
    CertReal,
    CertRealLike,
    Ordering,
    as_certreal,
    cmp_certified,
)
from .systems import BeurlingInteger, IntegerSnapshot


@dataclass
class ApproxRecord:
    target: CertReal
    numerator: BeurlingInteger
    denominator: BeurlingInteger
    error: CertReal
    exponent: float  # log(1/error)/log(denominator); inf on exact hits
    exact_hit: bool

    def to_json(self) -> dict:
        return {
            "numerator": [list(p) for p in self.numerator.exponents],
            "denominator": [list(p) for p in self.denominator.exponents],
            "error": self.error.to_float(),
            "exponent": self.exponent,
            "exact_hit": self.exact_hit,
        }


def _exact_fraction(x) -> Optional[Fraction]:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, CertReal) and x.is_exact:
        return x.to_fraction()
    return None


def _best_for_denominator(x: CertReal, x_fr: Optional[Fraction],
                          snapshot: IntegerSnapshot,
                          den: BeurlingInteger,
                          max_bits: int) -> Optional[ApproxRecord]:
    """Closest snapshot numerator to x * den (certified choice)."""
    values = snapshot.values_float()
    target_f = x.to_float() * den.value.to_float()
    if target_f > values[-1] * 1.0 + 1.0:
        pos = len(values) - 1
        cands = [snapshot.entries[pos]]
    else:
        pos = bisect_left(values, target_f)
        cands = [snapshot.entries[i]
                 for i in (pos - 1, pos, pos + 1)
                 if 0 <= i < len(values)]
    best = None
    for num in cands:
        # exact arithmetic decides rational cases, including exact hits
        if x_fr is not None and num.value.is_exact and den.value.is_exact:
            err_fr = abs(x_fr - num.value.to_fraction()
                         / den.value.to_fraction())
            err = as_certreal(err_fr)
            exact = err_fr == 0
        else:
            err = (x - num.value / den.value).abs()
            exact = False
        if best is None:
            best = (num, err, exact)
            continue
        c = cmp_certified(err, best[1], max_bits=max_bits)
        if c is Ordering.LESS:
            best = (num, err, exact)
        elif c is Ordering.UNDECIDED and exact:
            best = (num, err, exact)
    num, err, exact = best
    den_f = den.value.to_float()
    if exact:
        expo = math.inf
    else:
        err_f = err.to_float()
        if err_f <= 0:
            err_f = max(err.hi_fraction(), 1e-300)
        expo = math.log(1.0 / float(err_f)) / math.log(den_f)
    return ApproxRecord(x, num, den, err, expo, exact)


def best_approximations(x: CertRealLike, snapshot: IntegerSnapshot,
                        top_k: int = 10,
                        max_bits: int = DEFAULT_CAP) -> List[ApproxRecord]:
    """Best ratio per denominator, ranked by exponent, top_k returned.

    The unit denominator is skipped (it carries no scale: the exponent
    normalizes by log of the denominator).  Exact hits rank first with
    an infinite exponent sentinel.
    """
    x_fr = _exact_fraction(x)
    x = as_certreal(x)
    if cmp_certified(x, 0, max_bits=max_bits) is not Ordering.GREATER:
        raise ValueError("target must be certified positive")
    records = []
    for den in snapshot.entries:
        if den.is_unit:
            continue
        rec = _best_for_denominator(x, x_fr, snapshot, den, max_bits)
        if rec is not None:
            records.append(rec)
    records.sort(key=lambda r: (-r.exponent, r.denominator.value.to_float()))
    return records[:top_k]


@dataclass
class MuEstimate:
    value: float
    denominator_cutoff: float  # sqrt of the snapshot bound
    scatter: List[tuple]  # (log denominator, exponent) over all denominators

    def to_json(self) -> dict:
        return {"value": self.value,
                "denominator_cutoff": self.denominator_cutoff,
                "scatter": [[a, b] for a, b in self.scatter]}


def mu_estimate(x: CertRealLike, snapshot: IntegerSnapshot,
                max_bits: int = DEFAULT_CAP) -> MuEstimate:
    """Empirical irrationality measure: sup of exponents over the tail.

    Only denominators at least sqrt(X) enter the supremum (small
    denominators produce noisy exponents); the full scatter is returned
    for inspection.  Exact ratios are rejected: the estimate diverges
    there by convention.
    """
    x_fr = _exact_fraction(x)
    x = as_certreal(x)
    entries = [e for e in snapshot.entries if not e.is_unit]
    if len(entries) < 50:
        raise ValueError("need at least 50 denominators")
    cutoff = math.sqrt(snapshot.bound.to_float())
    # the scatter is empirical: float errors are ample for exponents,
    # except near exact hits, which get the certified treatment
    values = snapshot.values_float()
    xf = x.to_float()
    top = values[-1]
    scatter = []
    best = 0.0
    for den in entries:
        den_f = den.value.to_float()
        target_f = xf * den_f
        pos = bisect_left(values, target_f)
        err_f = math.inf
        for i in (pos - 1, pos, pos + 1):
            if 0 <= i < len(values):
                err_f = min(err_f, abs(xf - values[i] / den_f))
        if target_f > top:
            err_f = min(err_f, abs(xf - top / den_f))
        if err_f < 1e-13 * max(1.0, xf):
            rec = _best_for_denominator(x, x_fr, snapshot, den, max_bits)
            if rec.exact_hit:
                raise ValueError("target is an exact ratio at snapshot scale")
            expo = rec.exponent
        else:
            expo = math.log(1.0 / err_f) / math.log(den_f)
        scatter.append((math.log(den_f), expo))
        if den_f >= cutoff:
            best = max(best, expo)
    return MuEstimate(best, cutoff, scatter)


def scatter_csv(est: MuEstimate) -> str:
    lines = ["log_denominator,exponent"]
    for a, b in est.scatter:
        lines.append(f"{a!r},{b!r}")
    return "\n".join(lines) + "\n"
