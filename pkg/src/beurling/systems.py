"""Beurling prime systems and certified enumeration of their integers.

A prime system is a strictly increasing (certified) sequence of reals
greater than 1; the associated integer system is the multiplicative
semigroup it generates.  Enumeration uses a min-heap seeded with the
empty product: each popped integer is extended by every prime at or
above its largest prime factor, so every exponent vector is produced
exactly once and no inexact-value deduplication is ever needed.  Heap
order runs on float log approximations; the final ordering of the
snapshot is re-verified pairwise with certified comparisons, and any
pair that cannot be separated at the precision cap aborts the run with
the colliding exponent vectors.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Iterable, Optional, Sequence

from .certreal import (
    DEFAULT_CAP,
    ONE,
    CertReal,
    CertRealLike,
    Ordering,
    as_certreal,
    cmp_certified,
    cprod,
    csum,
    exact_equal,
)
from .exceptions import OrderingUndecided
from .logint import li_inv
from .serial import certreal_payload

ExponentVector = tuple  # tuple of (prime_index, exponent) pairs, index-sorted

# Float log sums drift by well under this; value pairs whose float logs
# differ by more still get a certified comparison, the screen only
# orders the work.
_FLOG_SLACK = 1e-9


@dataclass(frozen=True)
class Provenance:
    kind: str  # classical | explicit | perturbed | sampled
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "detail": self.detail}


@dataclass(frozen=True)
class BeurlingInteger:
    """A semigroup element: sparse exponent vector plus certified value."""

    exponents: ExponentVector
    value: CertReal

    @property
    def max_prime_index(self) -> int:
        return self.exponents[-1][0] if self.exponents else -1

    @property
    def is_unit(self) -> bool:
        return not self.exponents

    def num_prime_factors(self) -> int:
        return sum(e for _, e in self.exponents)

    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.exponents)

    def __repr__(self):
        return f"BeurlingInteger({dict(self.exponents)} ~ {self.value.to_float():.6g})"


class PrimeSystem:
    """Finite, certified-increasing sequence of Beurling primes (> 1)."""

    def __init__(self, primes: Sequence[CertRealLike],
                 labels: Optional[Sequence[str]] = None,
                 provenance: Optional[Provenance] = None,
                 max_bits: int = DEFAULT_CAP):
        self.primes = tuple(as_certreal(p) for p in primes)
        self.labels = tuple(labels) if labels is not None else None
        self.provenance = provenance or Provenance("explicit")
        if self.labels is not None and len(self.labels) != len(self.primes):
            raise ValueError("labels length mismatch")
        for i, p in enumerate(self.primes):
            if cmp_certified(ONE, p, max_bits=max_bits) is not Ordering.LESS:
                raise ValueError(f"prime #{i} not certified > 1")
        for i in range(len(self.primes) - 1):
            c = cmp_certified(self.primes[i], self.primes[i + 1], max_bits=max_bits)
            if c is Ordering.GREATER:
                raise ValueError(f"primes not increasing at index {i}")
            if c is Ordering.UNDECIDED:
                raise OrderingUndecided(
                    f"primes #{i} and #{i+1} not separable", witness=(i, i + 1))
        self._flogs = [math.log(p.to_float()) for p in self.primes]
        self._lognodes = [p.log() for p in self.primes]

    def __len__(self):
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def float_log(self, index: int) -> float:
        return self._flogs[index]

    def log_node(self, index: int) -> CertReal:
        return self._lognodes[index]

    def unit(self) -> BeurlingInteger:
        return BeurlingInteger((), ONE)

    def integer(self, exponents: Iterable[tuple]) -> BeurlingInteger:
        expts = tuple(sorted((i, e) for i, e in exponents if e))
        if any(e < 0 for _, e in expts):
            raise ValueError("negative exponent")
        if not expts:
            return self.unit()
        value = cprod(self.primes[i] ** e for i, e in expts)
        return BeurlingInteger(expts, value)

    def log_value(self, entry: BeurlingInteger) -> CertReal:
        if entry.is_unit:
            return as_certreal(0)
        return csum(self._lognodes[i] * e if e != 1 else self._lognodes[i]
                    for i, e in entry.exponents)

    def float_log_value(self, exponents: ExponentVector) -> float:
        return sum(self._flogs[i] * e for i, e in exponents)

    def compare_integers(self, a: BeurlingInteger, b: BeurlingInteger,
                         max_bits: int = DEFAULT_CAP) -> Ordering:
        """Certified order of two semigroup elements.

        Exact (rational) values decide directly, including true equality,
        which is reported as a collision.  Otherwise the logarithm
        difference is screened and refined up to the cap.
        """
        if a.exponents == b.exponents:
            return Ordering.UNDECIDED
        if a.value.is_exact and b.value.is_exact:
            fa, fb = a.value.to_fraction(), b.value.to_fraction()
            if fa < fb:
                return Ordering.LESS
            if fa > fb:
                return Ordering.GREATER
            raise OrderingUndecided(
                "distinct exponent vectors with certified equal values",
                witness=(a.exponents, b.exponents))
        diff = {}
        for i, e in a.exponents:
            diff[i] = diff.get(i, 0) + e
        for i, e in b.exponents:
            diff[i] = diff.get(i, 0) - e
        terms = [self._lognodes[i] * e for i, e in sorted(diff.items()) if e]
        return cmp_certified(csum(terms), 0, max_bits=max_bits)

    def restrict_indices(self, indices: Sequence[int]) -> "PrimeSystem":
        labels = None if self.labels is None else [self.labels[i] for i in indices]
        return PrimeSystem([self.primes[i] for i in indices], labels,
                           Provenance(self.provenance.kind,
                                      dict(self.provenance.detail, restricted=list(indices))))

    def to_json(self) -> dict:
        payload = {"provenance": self.provenance.to_json(),
                   "count": len(self.primes),
                   "primes": [certreal_payload(p) for p in self.primes]}
        if self.labels is not None:
            payload["labels"] = list(self.labels)
        return payload


def classical_primes(limit: CertRealLike) -> PrimeSystem:
    """Ordinary primes up to ``limit`` as exact values."""
    lim = as_certreal(limit)
    n = math.floor(lim.hi_fraction())
    if n < 2:
        raise ValueError("limit must be >= 2")
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(math.isqrt(n)) + 1):
        if sieve[i]:
            sieve[i * i:: i] = b"\x00" * len(range(i * i, n + 1, i))
    ps = [p for p in range(2, n + 1)
          if sieve[p] and cmp_certified(p, lim) is not Ordering.GREATER]
    return PrimeSystem([CertReal.from_int(p) for p in ps],
                       labels=[str(p) for p in ps],
                       provenance=Provenance("classical", {"limit": str(n)}))


def sampled_primes_from_uniforms(uniforms: Sequence[float], tol: float = 1e-18,
                                 provenance: Optional[Provenance] = None) -> PrimeSystem:
    """Primes q_n = li_inv(n + u_n) for given uniform draws u_n in [0, 1)."""
    primes = []
    for n, u in enumerate(uniforms, start=1):
        if not 0.0 <= u < 1.0:
            raise ValueError("uniform draw outside [0, 1)")
        y = CertReal.from_int(n) + CertReal.from_float(u)
        primes.append(li_inv(y, tol=tol))
    return PrimeSystem(primes, provenance=provenance or Provenance("sampled"))


class IntegerSnapshot:
    """Immutable increasing enumeration of all Beurling integers <= X."""

    def __init__(self, system: PrimeSystem, bound: CertReal,
                 entries: Sequence[BeurlingInteger]):
        self.system = system
        self.bound = bound
        self.entries = tuple(entries)
        self._values_float = [e.value.to_float() for e in self.entries]
        self._gaps = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def values_float(self) -> list:
        """Float midpoints of the entry values (shared list: do not mutate)."""
        return self._values_float

    def gaps(self) -> list:
        """Consecutive differences d_n = nu_{n+1} - nu_n as certified reals."""
        if self._gaps is None:
            self._gaps = [self.entries[i + 1].value - self.entries[i].value
                          for i in range(len(self.entries) - 1)]
        return self._gaps

    def index_range_leq(self, x: CertReal, max_bits: int = DEFAULT_CAP) -> int:
        """Number of entries certified <= x (ties at exact equality count)."""
        xf = x.to_float()
        lo = _bisect_right(self._values_float, xf - max(1e-9 * abs(xf), 1e-12))
        hi = _bisect_right(self._values_float, xf + max(1e-9 * abs(xf), 1e-12))
        count = lo
        for i in range(lo, min(hi, len(self.entries))):
            v = self.entries[i].value
            if exact_equal(v, x):
                count += 1
                continue
            c = cmp_certified(v, x, max_bits=max_bits)
            if c is Ordering.LESS:
                count += 1
            elif c is Ordering.UNDECIDED:
                raise OrderingUndecided(
                    "entry value not separable from threshold",
                    witness=(self.entries[i].exponents,))
        return count

    def to_json(self) -> dict:
        return {"system": self.system.to_json(),
                "X": certreal_payload(self.bound),
                "entries": [[list(p) for p in e.exponents] for e in self.entries]}


def _bisect_right(arr, x):
    import bisect
    return bisect.bisect_right(arr, x)


def enumerate_integers(system: PrimeSystem, bound: CertRealLike,
                       max_bits: int = DEFAULT_CAP,
                       max_entries: int = 20_000_000) -> IntegerSnapshot:
    """All products of system primes that are <= bound, sorted and certified.

    Raises :class:`OrderingUndecided` when two candidate products cannot
    be separated (or certify equal) at the precision cap, reporting the
    colliding exponent vectors.
    """
    X = as_certreal(bound)
    if cmp_certified(X, 1, max_bits=max_bits) is Ordering.LESS:
        raise ValueError("bound must be >= 1")
    logx = math.log(X.to_float()) if X.to_float() > 0 else 0.0

    active = []
    for i, p in enumerate(system.primes):
        if _leq_bound(system, BeurlingInteger(((i, 1),), p), X, logx, max_bits):
            active.append(i)
        else:
            break
    # heap items: (float log, insertion counter, entry)
    heap = [(0.0, 0, system.unit())]
    counter = 1
    out = []
    while heap:
        flog, _, entry = heapq.heappop(heap)
        out.append((flog, entry))
        if len(out) > max_entries:
            raise ValueError("enumeration exceeds max_entries")
        start = entry.max_prime_index if entry.exponents else 0
        for j in active[_index_of(active, start):]:
            child = _extend(system, entry, j)
            if _leq_bound(system, child, X, logx, max_bits):
                heapq.heappush(heap, (system.float_log_value(child.exponents),
                                      counter, child))
                counter += 1
            else:
                break  # primes increase, so larger j only overshoot further

    entries = _certify_sorted(system, out, max_bits)
    return IntegerSnapshot(system, X, entries)


def _index_of(active, start):
    import bisect
    return bisect.bisect_left(active, start)


def _extend(system: PrimeSystem, entry: BeurlingInteger, j: int) -> BeurlingInteger:
    expts = list(entry.exponents)
    if expts and expts[-1][0] == j:
        expts[-1] = (j, expts[-1][1] + 1)
    else:
        expts.append((j, 1))
    return BeurlingInteger(tuple(expts), entry.value * system.primes[j])


def _leq_bound(system, entry, X, logx, max_bits) -> bool:
    flog = system.float_log_value(entry.exponents)
    if flog < logx - _FLOG_SLACK:
        return True
    if flog > logx + _FLOG_SLACK:
        return False
    if exact_equal(entry.value, X):
        return True
    c = cmp_certified(entry.value, X, max_bits=max_bits)
    if c is Ordering.UNDECIDED:
        raise OrderingUndecided("product not separable from bound",
                                witness=(entry.exponents,))
    return c is Ordering.LESS


def _certify_sorted(system: PrimeSystem, flagged: list, max_bits: int):
    """Certify strict ordering of heap output, repairing float-level ties."""
    entries = [e for _, e in flagged]
    flogs = [f for f, _ in flagged]
    # First pass: certified adjacent comparisons; on an inversion fall
    # back to a full certified sort (float screening was too coarse).
    for i in range(len(entries) - 1):
        c = system.compare_integers(entries[i], entries[i + 1], max_bits)
        if c is Ordering.LESS:
            continue
        if c is Ordering.GREATER and abs(flogs[i] - flogs[i + 1]) < 4 * _FLOG_SLACK:
            entries = _full_certified_sort(system, entries, max_bits)
            break
        raise OrderingUndecided(
            "adjacent snapshot entries not separable",
            witness=(entries[i].exponents, entries[i + 1].exponents))
    return entries


def _full_certified_sort(system, entries, max_bits):
    def cmp(a, b):
        c = system.compare_integers(a, b, max_bits)
        if c is Ordering.UNDECIDED:
            raise OrderingUndecided("entries not separable during sort",
                                    witness=(a.exponents, b.exponents))
        return -1 if c is Ordering.LESS else 1

    ordered = sorted(entries, key=cmp_to_key(cmp))
    for i in range(len(ordered) - 1):
        if system.compare_integers(ordered[i], ordered[i + 1], max_bits) is not Ordering.LESS:
            raise OrderingUndecided(
                "adjacent snapshot entries not separable",
                witness=(ordered[i].exponents, ordered[i + 1].exponents))
    return ordered


def count_functions(snapshot: IntegerSnapshot, x: CertRealLike,
                    max_bits: int = DEFAULT_CAP) -> tuple:
    """(N_q(x), pi_q(x)) with ties at certified equality counted inclusively."""
    x = as_certreal(x)
    if cmp_certified(x, snapshot.bound, max_bits=max_bits) is Ordering.GREATER:
        raise ValueError("x exceeds snapshot bound")
    n_count = snapshot.index_range_leq(x, max_bits)
    p_count = 0
    for p in snapshot.system.primes:
        if exact_equal(p, x):
            p_count += 1
            continue
        c = cmp_certified(p, x, max_bits=max_bits)
        if c is Ordering.LESS:
            p_count += 1
        elif c is Ordering.UNDECIDED:
            raise OrderingUndecided("prime not separable from threshold")
    return n_count, p_count


@dataclass(frozen=True)
class MinGapResult:
    value: CertReal
    index: int  # gap between entries[index] and entries[index + 1]


def min_gap_exponent(snapshot: IntegerSnapshot, c2: CertRealLike = 0,
                     max_bits: int = DEFAULT_CAP) -> MinGapResult:
    """min over n of (nu_{n+1} - nu_n) * nu_{n+1}^{c2}, with its argmin.

    Ties between exactly equal margins keep the earliest index; margins
    that cannot be ordered at the cap raise :class:`OrderingUndecided`.
    """
    if len(snapshot.entries) < 2:
        raise ValueError("snapshot needs at least two entries")
    c2 = as_certreal(c2)
    gaps = snapshot.gaps()
    margins = []
    for i, g in enumerate(gaps):
        nxt = snapshot.entries[i + 1].value
        margins.append(g if _is_zero(c2) else g * nxt.powr(c2))
    best, best_i = margins[0], 0
    for i in range(1, len(margins)):
        c = cmp_certified(margins[i], best, max_bits=max_bits)
        if c is Ordering.LESS:
            best, best_i = margins[i], i
        elif c is Ordering.UNDECIDED:
            if margins[i].is_exact and best.is_exact:
                continue  # exact tie: keep the earlier index
            raise OrderingUndecided("gap margins not separable",
                                    witness=(best_i, i))
    return MinGapResult(best, best_i)


def _is_zero(x: CertReal) -> bool:
    return x.is_exact and x.to_fraction() == 0


# -- persistence --------------------------------------------------------


def system_from_json(payload: dict, tol: float = 1e-18) -> PrimeSystem:
    """Rebuild a prime system; sampled systems are re-derived from their
    recorded seed, explicit ones from their decimal strings."""
    prov = payload.get("provenance", {})
    kind = prov.get("kind", "explicit")
    detail = prov.get("detail", {})
    if kind == "sampled" and "seed" in detail:
        from .randomsys import sample_primes
        return sample_primes(int(detail["seed"]), int(detail["count"]),
                             tol=float(detail.get("tol", tol)))
    primes = []
    for p in payload["primes"]:
        if "exact" in p:
            primes.append(CertReal.from_decimal(p["exact"]))
        else:
            primes.append(CertReal.from_interval(
                CertReal.from_decimal(p["lo"]), CertReal.from_decimal(p["hi"])))
    return PrimeSystem(primes, labels=payload.get("labels"),
                       provenance=Provenance(kind, detail))


def snapshot_from_json(payload: dict, max_bits: int = DEFAULT_CAP) -> IntegerSnapshot:
    """Re-derive a snapshot from its stored exponent vectors.

    Values are recomputed from the primes (never read from the file) and
    the stored ordering is re-certified.
    """
    system = system_from_json(payload["system"])
    xp = payload["X"]
    X = (CertReal.from_decimal(xp["exact"]) if "exact" in xp
         else CertReal.from_interval(CertReal.from_decimal(xp["lo"]),
                                     CertReal.from_decimal(xp["hi"])))
    entries = [system.integer([tuple(p) for p in vec]) for vec in payload["entries"]]
    for i in range(len(entries) - 1):
        if system.compare_integers(entries[i], entries[i + 1], max_bits) is not Ordering.LESS:
            raise OrderingUndecided("stored ordering failed re-certification",
                                    witness=(entries[i].exponents,
                                             entries[i + 1].exponents))
    return IntegerSnapshot(system, X, entries)
