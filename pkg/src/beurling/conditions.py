"""Gap conditions on frequency sequences lambda_n = log nu_n.

Three separation criteria are evaluated as *margin profiles* for
explicit constants: the original exponential-gap condition, its doubly
exponential relaxation, and the infimum-based relaxation.  The
underlying conditions quantify over all indices and over constant
choices; only finite evidence is computable, so each report states the
margins over the truncation together with a verdict.

Verdict semantics: a report's verdict is True when no margin is
certified negative.  Margins whose sign cannot be decided at the
precision cap (typically margins that are exactly zero, e.g. a
single-prime system tested with the sharp constant) are listed in
``undecided_indices`` rather than silently resolved either way.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .certreal import (
    DEFAULT_CAP,
    CertReal,
    CertRealLike,
    Ordering,
    as_certreal,
    certify_nonneg,
    cmp_certified,
    interval_min,
)
from .systems import IntegerSnapshot


@dataclass(frozen=True)
class FrequencyView:
    """Increasing frequencies; the unit entry contributes lambda = 0."""

    lambdas: tuple

    @classmethod
    def from_snapshot(cls, snapshot: IntegerSnapshot) -> "FrequencyView":
        sys = snapshot.system
        return cls(tuple(sys.log_value(e) for e in snapshot.entries))

    @classmethod
    def from_values(cls, values: Sequence[CertRealLike]) -> "FrequencyView":
        return cls(tuple(as_certreal(v) for v in values))

    def __len__(self):
        return len(self.lambdas)

    def gaps(self) -> List[CertReal]:
        return [self.lambdas[i + 1] - self.lambdas[i]
                for i in range(len(self.lambdas) - 1)]


@dataclass
class ConditionReport:
    condition: str  # "BC" | "LC" | "NC"
    parameters: dict
    margins: List[CertReal]
    verdict_at_truncation: bool
    undecided_indices: List[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "parameters": {k: str(v) for k, v in self.parameters.items()},
            "margins": [m.to_float() for m in self.margins],
            "verdict_at_truncation": self.verdict_at_truncation,
            "undecided_indices": list(self.undecided_indices),
        }


def _margin_report(condition: str, parameters: dict, margins: List[CertReal],
                   max_bits: int) -> ConditionReport:
    undecided = []
    verdict = True
    for i, m in enumerate(margins):
        sign = certify_nonneg(m, max_bits=max_bits)
        if sign is False:
            verdict = False
        elif sign is None:
            undecided.append(i)
    return ConditionReport(condition, parameters, margins, verdict, undecided)


def bc_margins(view: FrequencyView, c1: CertRealLike, c2: CertRealLike,
               max_bits: int = DEFAULT_CAP) -> ConditionReport:
    """Margins (lambda_{n+1} - lambda_n) - c1 * exp(-c2 * lambda_{n+1})."""
    if len(view) < 2:
        raise ValueError("view needs at least two frequencies")
    c1 = as_certreal(c1)
    c2 = as_certreal(c2)
    margins = []
    for i, gap in enumerate(view.gaps()):
        lam_next = view.lambdas[i + 1]
        margins.append(gap - c1 * (-(c2 * lam_next)).exp())
    return _margin_report("BC", {"c1": c1.to_float(), "c2": c2.to_float()},
                          margins, max_bits)


def lc_margins(view: FrequencyView, c: CertRealLike, delta: CertRealLike,
               max_bits: int = DEFAULT_CAP) -> ConditionReport:
    """Margins (lambda_{n+1} - lambda_n) - c * exp(-exp(delta * lambda_{n+1}))."""
    if len(view) < 2:
        raise ValueError("view needs at least two frequencies")
    c = as_certreal(c)
    delta = as_certreal(delta)
    margins = []
    for i, gap in enumerate(view.gaps()):
        lam_next = view.lambdas[i + 1]
        margins.append(gap - c * (-((delta * lam_next).exp())).exp())
    return _margin_report("LC", {"c": c.to_float(), "delta": delta.to_float()},
                          margins, max_bits)


@dataclass(frozen=True)
class NCProfileResult:
    value: CertReal
    argmin_m: int  # 1-based index of the attaining m
    upper_bound_only: bool  # view exhausted before the early stop fired


def nc_profile(view: FrequencyView, n: int,
               max_bits: int = DEFAULT_CAP) -> NCProfileResult:
    """inf over m > n of log((lam_m + lam_n)/(lam_m - lam_n)) + (m - n).

    ``n`` is 1-based.  For lambda_n = 0 the log term is taken as its
    limit 0.  The scan stops early once the additive part (m - n) alone
    certifies above the running best (the log term is nonnegative), so
    the result equals the exhaustive infimum over the truncation.
    """
    if not 1 <= n < len(view):
        raise ValueError("need an index n with at least one m > n in view")
    lam_n = view.lambdas[n - 1]
    n_is_zero = lam_n.is_exact and lam_n.to_fraction() == 0

    terms = []
    best: Optional[CertReal] = None
    best_m = -1
    exhausted = True
    for m in range(n + 1, len(view) + 1):
        lam_m = view.lambdas[m - 1]
        if n_is_zero:
            term = as_certreal(m - n)
        else:
            ratio = (lam_m + lam_n) / (lam_m - lam_n)
            term = ratio.log() + (m - n)
        terms.append(term)
        if best is None or cmp_certified(term, best, max_bits=max_bits) is Ordering.LESS:
            best, best_m = term, m
        # later terms are >= (m+1-n) > best: stop (kept margin guards the
        # enclosure comparison against endpoint-width noise)
        if cmp_certified(best, (m + 1 - n) - 2 ** -24, max_bits=max_bits) is Ordering.LESS:
            exhausted = False
            break
    return NCProfileResult(interval_min(terms), best_m, exhausted)


def nc_profile_exhaustive(view: FrequencyView, n: int, m_limit: int,
                          max_bits: int = DEFAULT_CAP) -> NCProfileResult:
    """Oracle variant: scan every m <= m_limit with no early stop."""
    if not 1 <= n < len(view):
        raise ValueError("bad index")
    lam_n = view.lambdas[n - 1]
    n_is_zero = lam_n.is_exact and lam_n.to_fraction() == 0
    terms = []
    best = None
    best_m = -1
    for m in range(n + 1, min(m_limit, len(view)) + 1):
        lam_m = view.lambdas[m - 1]
        if n_is_zero:
            term = as_certreal(m - n)
        else:
            ratio = (lam_m + lam_n) / (lam_m - lam_n)
            term = ratio.log() + (m - n)
        terms.append(term)
        if best is None or cmp_certified(term, best, max_bits=max_bits) is Ordering.LESS:
            best, best_m = term, m
    return NCProfileResult(interval_min(terms), best_m, True)


def margins_csv(view: FrequencyView, report: ConditionReport) -> str:
    """CSV profile: one row per gap index (1-based n as in the margins)."""
    buf = io.StringIO()
    buf.write("n,lambda_n,gap,margin\n")
    gaps = view.gaps()
    for i, margin in enumerate(report.margins):
        buf.write("%d,%s,%s,%s\n" % (
            i + 1,
            repr(view.lambdas[i].to_float()),
            repr(gaps[i].to_float()),
            repr(margin.to_float()),
        ))
    return buf.getvalue()
