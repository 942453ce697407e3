"""Finite generalized-Dirichlet-series algebra over a Beurling system.

Coefficients live on exponent vectors of the system's semigroup, so
multiplication is convolution by exponent-vector addition; the square
norm is the coefficient two-norm (the Besicovitch average of a Dirichlet
polynomial), and even norms reduce to square norms of powers through the
multiplicative lift.  Any shift applied at construction (series in
s + shift) is folded straight into the numeric coefficients and recorded
as metadata.

The outer-function experiment truncates the inverse-zeta coefficients at
X and multiplies against the truncated zeta coefficients: below X the
unit convolution identity cancels everything, so the defect norm e_X is
carried entirely by incomplete divisor sums above X.  Its computation
pairs every coefficient of one factor with every coefficient of the
other, which is done in vectorized form over additive exponent-vector
fingerprints (two independent 64-bit weight sets guard the grouping).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .certreal import (
    DEFAULT_CAP,
    ONE,
    ZERO,
    CertComplex,
    CertReal,
    CertRealLike,
    Ordering,
    as_certreal,
    certify_nonneg,
    cmp_certified,
    csum,
)
from .exceptions import OrderingUndecided
from .systems import IntegerSnapshot, PrimeSystem
from .zeta import mobius_of, zeta_euler

ExponentVector = tuple


@dataclass
class DirichletSeries:
    """Finitely supported coefficients over the system's semigroup."""

    system: PrimeSystem
    coeffs: Dict[ExponentVector, complex]
    shift: float = 0.0  # provenance: coefficients already absorb nu^{-shift}
    discarded_mass: float = 0.0  # l1 mass dropped by the producing truncation

    def __post_init__(self):
        self.coeffs = {k: complex(v) for k, v in self.coeffs.items() if v != 0}

    def copy_with(self, coeffs, discarded=0.0) -> "DirichletSeries":
        return DirichletSeries(self.system, coeffs, self.shift, discarded)

    def evaluate(self, s: complex) -> complex:
        """Float evaluation sum a_nu nu^{-s} (screening quality)."""
        s = complex(s)
        total = 0j
        for key, a in self.coeffs.items():
            lam = self.system.float_log_value(key)
            total += a * complex(math.exp(-s.real * lam)) * \
                complex(math.cos(s.imag * lam), -math.sin(s.imag * lam))
        return total

    def support_size(self) -> int:
        return len(self.coeffs)


def unit_series(system: PrimeSystem) -> DirichletSeries:
    return DirichletSeries(system, {(): 1.0 + 0j})


def zeta_partial_series(snapshot: IntegerSnapshot, shift: float) -> DirichletSeries:
    """Coefficients nu^{-shift} for every snapshot entry."""
    coeffs = {e.exponents: complex(e.value.to_float() ** -shift)
              for e in snapshot.entries}
    return DirichletSeries(snapshot.system, coeffs, shift)


def mobius_series(snapshot: IntegerSnapshot, shift: float) -> DirichletSeries:
    """Coefficients mu(nu) nu^{-shift} (inverse-zeta truncation)."""
    coeffs = {}
    for e in snapshot.entries:
        mu = mobius_of(e)
        if mu:
            coeffs[e.exponents] = complex(mu * e.value.to_float() ** -shift)
    return DirichletSeries(snapshot.system, coeffs, shift)


def _coeff_l2sq(values) -> float:
    return math.fsum((v.real * v.real + v.imag * v.imag) for v in values)


def h2_norm_squared(f: DirichletSeries) -> float:
    return _coeff_l2sq(f.coeffs.values())


def h2_norm(f: DirichletSeries) -> float:
    """Square norm of the coefficients (Besicovitch square mean)."""
    return math.sqrt(h2_norm_squared(f))


def _add_vectors(a: ExponentVector, b: ExponentVector) -> ExponentVector:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for i, e in b:
        merged[i] = merged.get(i, 0) + e
    return tuple(sorted(merged.items()))


def multiply(f: DirichletSeries, g: DirichletSeries, bound: CertRealLike,
             max_bits: int = DEFAULT_CAP) -> DirichletSeries:
    """Convolution with keys kept while their value is <= bound.

    Discarded l1 mass is accumulated on the result.  Near-boundary
    products are classified by certified comparison.
    """
    if f.system is not g.system:
        raise ValueError("series must share a prime system")
    if abs(f.shift - g.shift) > 0:
        raise ValueError("series must share the same shift")
    X = as_certreal(bound)
    logx = math.log(X.to_float())
    system = f.system
    out: Dict[ExponentVector, complex] = {}
    discarded = 0.0
    for ka, va in f.coeffs.items():
        base = system.float_log_value(ka)
        for kb, vb in g.coeffs.items():
            flog = base + system.float_log_value(kb)
            if flog > logx + 1e-9:
                discarded += abs(va * vb)
                continue
            key = _add_vectors(ka, kb)
            if flog > logx - 1e-9:
                value = system.integer(key).value
                c = cmp_certified(value, X, max_bits=max_bits)
                if c is Ordering.GREATER:
                    discarded += abs(va * vb)
                    continue
                if c is Ordering.UNDECIDED and not value.is_exact:
                    raise OrderingUndecided("product not separable from bound",
                                            witness=(key,))
            out[key] = out.get(key, 0j) + va * vb
    return DirichletSeries(system, out, f.shift, discarded)


@dataclass(frozen=True)
class EvenNorm:
    p: int
    value: float
    pth_power: float
    discarded_mass: float
    truncated: bool


def even_p_norm(f: DirichletSeries, p: int, bound: CertRealLike) -> EvenNorm:
    """Even Besicovitch norms through the lift: p = 2 directly, p = 4 as
    the square norm of the coefficient self-convolution."""
    if p == 2:
        sq = h2_norm_squared(f)
        return EvenNorm(2, math.sqrt(sq), sq, 0.0, False)
    if p == 4:
        sq = multiply(f, f, bound)
        power = h2_norm_squared(sq)
        return EvenNorm(4, power ** 0.25, power, sq.discarded_mass,
                        sq.discarded_mass > 0)
    raise ValueError("only even p in {2, 4} supported")


@dataclass(frozen=True)
class Character:
    """Completely multiplicative unimodular twist, one value per prime."""

    values: tuple

    @classmethod
    def random(cls, system: PrimeSystem, seed: int) -> "Character":
        rng = np.random.Generator(np.random.PCG64(seed))
        angles = rng.uniform(0.0, 2.0 * math.pi, size=len(system.primes))
        return cls(tuple(complex(math.cos(a), math.sin(a)) for a in angles))

    @classmethod
    def trivial(cls, system: PrimeSystem) -> "Character":
        return cls((1.0 + 0j,) * len(system.primes))

    def conj(self) -> "Character":
        return Character(tuple(v.conjugate() for v in self.values))

    def of(self, exponents: ExponentVector) -> complex:
        out = 1.0 + 0j
        for i, e in exponents:
            out *= self.values[i] ** e
        return out


def twist(f: DirichletSeries, chi: Character) -> DirichletSeries:
    """Coefficientwise multiplication by chi(nu)."""
    return f.copy_with({k: v * chi.of(k) for k, v in f.coeffs.items()},
                       f.discarded_mass)


# -- the outer-function defect ------------------------------------------


_FP_SEEDS = (0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F)


def _fingerprints(system: PrimeSystem, keys: Sequence[ExponentVector],
                  seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    weights = [int(w) for w in rng.integers(1, 2 ** 63 - 1,
                                            size=len(system.primes),
                                            dtype=np.int64)]
    mask = (1 << 64) - 1
    out = np.zeros(len(keys), dtype=np.uint64)
    for idx, key in enumerate(keys):
        acc = 0
        for i, e in key:
            acc = (acc + weights[i] * e) & mask
        out[idx] = acc
    return out


@dataclass
class OuterStep:
    X: float
    defect: float  # e_X
    pairs: int
    discarded_mass: float
    degenerate: bool

    def to_json(self) -> dict:
        return {"X": self.X, "defect": self.defect, "pairs": self.pairs,
                "discarded_mass": self.discarded_mass,
                "degenerate": self.degenerate}


def _incomplete_defect(snapshot: IntegerSnapshot, upto: int, shift: float,
                       bound: CertReal, chunk: int = 400) -> OuterStep:
    """e_X for the truncation nu <= bound (covering ``upto`` entries).

    Computes the square norm of 1 - p_X f_X with the X^2 product cap,
    which retains every pairwise product: the defect is exactly the mass
    of incomplete divisor sums at products above X.
    """
    entries = snapshot.entries[:upto]
    system = snapshot.system
    X = bound.to_float()
    if upto <= 1:
        return OuterStep(X, 0.0, 0, 0.0, True)
    keys = [e.exponents for e in entries]
    logs = np.array([system.float_log_value(k) for k in keys])
    vals_p = np.exp(-shift * logs)
    mus = np.array([mobius_of(e) for e in entries], dtype=float)
    f_mask = mus != 0
    keys_f = [k for k, m in zip(keys, f_mask) if m]
    logs_f = logs[f_mask]
    vals_f = (mus[f_mask]) * np.exp(-shift * logs_f)

    fp1_p = _fingerprints(system, keys, _FP_SEEDS[0])
    fp2_p = _fingerprints(system, keys, _FP_SEEDS[1])
    fp1_f = _fingerprints(system, keys_f, _FP_SEEDS[0])
    fp2_f = _fingerprints(system, keys_f, _FP_SEEDS[1])

    logx = math.log(X)
    x_cr = bound
    kept_h1, kept_h2, kept_c = [], [], []
    pairs = 0
    f_index = [i for i, m in enumerate(f_mask) if m]
    for lo in range(0, len(keys_f), chunk):
        hi = min(lo + chunk, len(keys_f))
        lsum = logs[:, None] + logs_f[None, lo:hi]
        keep = lsum > logx + 1e-9
        near = np.abs(lsum - logx) <= 1e-9
        if near.any():
            # boundary products (exact systems can hit X exactly):
            # classify each by certified comparison against X
            for pi, fj in zip(*np.nonzero(near)):
                key = _add_vectors(keys[pi], keys_f[lo + fj])
                value = system.integer(key).value
                c = cmp_certified(value, x_cr)
                if c is Ordering.GREATER:
                    keep[pi, fj] = True
                elif c is Ordering.UNDECIDED and not value.is_exact:
                    raise OrderingUndecided(
                        "product not separable from the truncation bound",
                        witness=(key,))
        pairs += keep.size
        if not keep.any():
            continue
        h1 = (fp1_p[:, None] + fp1_f[None, lo:hi])[keep]
        h2 = (fp2_p[:, None] + fp2_f[None, lo:hi])[keep]
        cc = (vals_p[:, None] * vals_f[None, lo:hi])[keep]
        kept_h1.append(h1)
        kept_h2.append(h2)
        kept_c.append(cc)
    if not kept_h1:
        return OuterStep(X, 0.0, pairs, 0.0, False)
    h1 = np.concatenate(kept_h1)
    h2 = np.concatenate(kept_h2)
    cc = np.concatenate(kept_c)
    order = np.lexsort((h2, h1))
    h1, h2, cc = h1[order], h2[order], cc[order]
    boundary = np.empty(len(h1), dtype=bool)
    boundary[0] = True
    boundary[1:] = (h1[1:] != h1[:-1]) | (h2[1:] != h2[:-1])
    group_ids = np.cumsum(boundary) - 1
    sums = np.zeros(group_ids[-1] + 1)
    np.add.at(sums, group_ids, cc)
    defect = float(np.sqrt(np.sum(sums * sums)))
    return OuterStep(X, defect, pairs, 0.0, False)


def outer_approx_test(snapshot: IntegerSnapshot, epsilon: float,
                      x_list: Sequence[float]) -> List[OuterStep]:
    """Defect norms e_X = |1 - p_X f_X| for each truncation in x_list.

    p_X carries nu^{-1/2-epsilon}, f_X the inverse-zeta coefficients
    mu(nu) nu^{-1/2-epsilon}; the product cap X^2 discards nothing, so
    e_X measures exactly the incomplete divisor sums above X.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must be in (0, 1/2)")
    shift = 0.5 + epsilon
    steps = []
    for x in sorted(x_list):
        x_cr = as_certreal(x)
        upto = snapshot.index_range_leq(x_cr)
        steps.append(_incomplete_defect(snapshot, upto, shift, x_cr))
    return steps


# -- the desk-scale counterexample report --------------------------------


@dataclass
class HelsonReport:
    epsilon: float
    euler_partials: List[Tuple[float, float]]  # (X, prod_{q<=X}(1-1/q))
    mobius_partials: List[Tuple[float, float]]  # (X, sum mu(nu)/nu)
    defects: List[OuterStep]
    evaluations: List[dict]  # cross-checks of f against 1/zeta

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "euler_partials": [[x, v] for x, v in self.euler_partials],
            "mobius_partials": [[x, v] for x, v in self.mobius_partials],
            "defects": [d.to_json() for d in self.defects],
            "evaluations": self.evaluations,
        }


def mobius_eval_certified(snapshot: IntegerSnapshot, upto: int,
                          total_shift: CertRealLike) -> CertComplex:
    """Certified partial sum of mu(nu) nu^{-total_shift} over nu <= X."""
    s = as_certreal(total_shift)
    parts = []
    for e in snapshot.entries[:upto]:
        mu = mobius_of(e)
        if not mu:
            continue
        term = (-(s * snapshot.system.log_value(e))).exp()
        parts.append(term if mu > 0 else -term)
    return CertComplex(csum(parts), ZERO)


def _mobius_tail_bound(system: PrimeSystem, X: CertReal,
                       sigma_total: float) -> CertReal:
    """Rankin bound on the absolute tail of the inverse-zeta series."""
    pf = [p.to_float() for p in system.primes]
    xf = X.to_float()

    def est(s0f):
        z = 1.0
        for q in pf:
            z /= (1.0 - q ** -s0f)
        return z * xf ** (s0f - sigma_total)

    grid = [0.75 + 0.25 * i for i in range(1, int(4 * sigma_total))]
    best = min(grid, key=est)
    s0 = as_certreal(best)
    zeta0 = zeta_euler(system, best).value.re
    return zeta0 * ((s0 - sigma_total) * X.log()).exp()


def helson_demo(snapshot: IntegerSnapshot, epsilon: float,
                x_list: Sequence[float],
                s_eval_list: Sequence[float] = (1.0,),
                max_bits: int = DEFAULT_CAP) -> HelsonReport:
    """Desk-scale demonstration around the outer counterexample.

    Reports (i) the partial Euler products at argument 1 (the value of
    the candidate function at its in-domain zero location, trending to
    zero), (ii) the defect norms e_X, and (iii) certified cross-checks
    of the truncated series against the reciprocal Euler product at
    points right of the critical shift.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must be in (0, 1/2)")
    system = snapshot.system
    shift = 0.5 + epsilon
    euler_partials = []
    mobius_partials = []
    for x in sorted(x_list):
        prod = 1.0
        for q in system.primes:
            qf = q.to_float()
            if qf <= x:
                prod *= (1.0 - 1.0 / qf)
        upto = snapshot.index_range_leq(as_certreal(x))
        msum = 0.0
        for e in snapshot.entries[:upto]:
            mu = mobius_of(e)
            if mu:
                msum += mu / e.value.to_float()
        euler_partials.append((x, prod))
        mobius_partials.append((x, msum))

    defects = outer_approx_test(snapshot, epsilon, x_list)

    evaluations = []
    for s in s_eval_list:
        total = s + shift
        upto = snapshot.index_range_leq(snapshot.bound)
        fx = mobius_eval_certified(snapshot, upto, total)
        tail = _mobius_tail_bound(system, snapshot.bound, total)
        inv = CertComplex(ONE, ZERO) / zeta_euler(system, total,
                                                  max_bits=max_bits).value
        diff = (fx - inv).abs()
        consistent = certify_nonneg(tail - diff, max_bits=max_bits)
        evaluations.append({
            "s": s,
            "series_value": fx.re.to_float(),
            "inverse_zeta": inv.re.to_float(),
            "difference": diff.to_float(),
            "tail_bound": tail.to_float(),
            "consistent": bool(consistent) if consistent is not None else None,
        })
    return HelsonReport(epsilon, euler_partials, mobius_partials, defects,
                        evaluations)
