import math
from fractions import Fraction

import pytest

from beurling.certreal import Ordering, certify_nonneg, cmp_certified
from beurling.logint import li, li_float
from beurling.randomsys import (
    a_event_threshold,
    b_event_sweep,
    box_property_certified,
    check_A_event,
    check_B_event,
    density_fit,
    exp_sum_deviation,
    pairwise_gap_audit,
    remove_exceptional,
    sample_grid,
    sample_primes,
    uniform_draws,
)
from beurling.systems import PrimeSystem, classical_primes, enumerate_integers
from beurling.zeta import zeta_euler


@pytest.fixture(scope="module")
def grid30():
    return sample_grid(30)


@pytest.fixture(scope="module")
def seeded30():
    return sample_primes(42, 30)


def test_uniform_stream_reproducible():
    a = uniform_draws(42, 10)
    b = uniform_draws(42, 10)
    assert list(a) == list(b)
    assert list(uniform_draws(43, 10)) != list(a)


def test_primes_land_in_their_cells(seeded30, grid30):
    for n in range(1, 11):
        q = seeded30.primes[n - 1]
        assert cmp_certified(grid30.x(n), q) is not Ordering.GREATER
        assert cmp_certified(q, grid30.x(n + 1)) is not Ordering.GREATER


def test_degenerate_uniforms_give_the_grid(grid30):
    s = sample_primes(0, 5, uniforms=[0.0] * 5)
    for i in range(5):
        assert abs(s.primes[i].to_float() - grid30.x(i + 1).to_float()) < 1e-15


def test_box_property(seeded30):
    assert box_property_certified(seeded30)
    # strict margins: li(q_n) - n and n+1 - li(q_n) both certified positive
    for n in (1, 7, 23):
        v = li(seeded30.primes[n - 1])
        assert certify_nonneg(v - n) is True
        assert certify_nonneg((n + 1) - v) is True


def test_sampling_bit_identical_rerun():
    # like-for-like runs: fresh systems, identical evaluation history
    first = sample_primes(42, 12)
    again = sample_primes(42, 12)
    assert [p.serialize(30) for p in again.primes] == \
        [p.serialize(30) for p in first.primes]


def test_a_event_at_k_one(seeded30, grid30):
    # statistic is exactly the modulus of one unimodular term
    rec = check_A_event(seeded30, 1, 5, grid=grid30)
    assert abs(rec.statistic - 1.0) < 1e-12
    assert rec.threshold > 8 * math.sqrt(grid30.x(1).to_float())
    assert not rec.triggered


def test_a_threshold_monotone_in_m(grid30):
    x = grid30.x(10)
    vals = [a_event_threshold(x, m).to_float() for m in (1, 2, 5, 30)]
    assert vals == sorted(vals)


def test_exp_sum_deviation_zero_at_first_grid_point(seeded30, grid30):
    dev = exp_sum_deviation(seeded30, grid30.x(1), 4.2, grid=grid30)
    assert dev.statistic < 1e-12


def test_exp_sum_deviation_at_t_zero_counts(seeded30, grid30):
    # statistic reduces to |pi(x) - li(x) + 1|, at most 2 by the box property
    for xf in (5.0, 12.5, 30.0):
        dev = exp_sum_deviation(seeded30, xf, 0, grid=grid30)
        want = abs(sum(1 for q in seeded30.primes if q.to_float() <= xf)
                   - li_float(xf) + 1.0)
        assert abs(dev.statistic - want) < 1e-9
        assert dev.statistic <= 2.0


def test_b_event_k1_never_triggers(seeded30, grid30):
    rec = check_B_event(seeded30, 1, 1, 1.0, 100, grid=grid30)
    assert not rec.triggered
    assert rec.detail["measure_truncated"] >= 0


def test_b_event_width_underflow_flagged(seeded30, grid30):
    rec = check_B_event(seeded30, 3, 60, 1.0, 100, grid=grid30)
    assert not rec.triggered
    assert rec.detail.get("width_underflow") is True


def _engineered_pair():
    """A two-prime system whose second prime sits inside an interval of
    the approximation set of its prefix (center q1^{3/2}, j = 2)."""
    g = sample_grid(2)
    q1 = g.x(1).to_float() + 0.3
    u1 = li_float(q1) - 1.0
    x2 = g.x(2).to_float()
    center = q1 ** 1.5
    halfwidth = x2 ** (1 - 4) * (q1 ** 3) ** -1.0  # nu = 1, mu = q1^3, A = 1
    target = center + 0.45 * halfwidth
    u2 = li_float(target) - 2.0
    assert 0.0 < u1 < 1.0 and 0.0 < u2 < 1.0
    return sample_primes(0, 2, uniforms=[u1, u2]), g


def test_b_event_engineered_trigger():
    system, g = _engineered_pair()
    rec = check_B_event(system, 2, 2, 1.0, 300, grid=g)
    assert rec.triggered
    assert "witness" in rec.detail


def test_b_sweep_and_removal_on_engineered_system():
    system, g = _engineered_pair()
    recs = b_event_sweep(system, 1.0, 300, grid=g)
    triggered = [r for r in recs if r.triggered]
    assert any(r.k == 2 for r in triggered)
    thin = remove_exceptional(system, recs)
    assert len(thin.primes) == 1
    # post-removal sweep over the same range triggers nothing
    recs2 = b_event_sweep(thin, 1.0, 300, grid=g, k_max=1)
    assert not any(r.triggered for r in recs2)


def test_remove_exceptional_identity_when_clean(seeded30):
    out = remove_exceptional(seeded30, [])
    assert out is seeded30


def test_remove_exceptional_zeta_relation_exact():
    from beurling.randomsys import EventRecord
    sys235 = PrimeSystem([2, 3, 5])
    thin = remove_exceptional(sys235, [EventRecord("B", 2, 1, True)])
    assert [int(p.to_fraction()) for p in thin.primes] == [2, 5]
    lhs = zeta_euler(thin, 2.0).value.re
    rhs = zeta_euler(sys235, 2.0).value.re * (1 - Fraction(1, 9))
    assert lhs.contains_fraction(Fraction(25, 18))
    assert rhs.contains_fraction(Fraction(25, 18))


def test_pairwise_gap_audit_classical():
    snap = enumerate_integers(classical_primes(30), 200)
    rep = pairwise_gap_audit(snap, 1.0)
    assert rep.positive
    assert rep.meets_unit_threshold is True
    assert rep.min_margin.to_fraction() == 2  # gap 1 at (1, 2), weight 1*2
    assert rep.min_index == 0


def test_pairwise_gap_audit_single_prime():
    snap = enumerate_integers(PrimeSystem([2]), 64)
    rep = pairwise_gap_audit(snap, 1.0)
    assert rep.min_margin.to_fraction() == 2


def test_pairwise_audit_matches_all_pairs_brute_force(seeded30):
    snap = enumerate_integers(seeded30, 60)
    rep = pairwise_gap_audit(snap, 1.0)
    vals = snap.values_float()
    brute = min((vals[j] - vals[i]) * (vals[i] * vals[j])
                for i in range(len(vals)) for j in range(i + 1, len(vals)))
    # consecutive minimum controls all pairs
    assert rep.min_margin.to_float() <= brute + 1e-9


def test_density_fit_classical():
    snap = enumerate_integers(classical_primes(600), 600)
    fit = density_fit(snap)
    assert abs(fit.a - 1.0) < 0.01
    assert not fit.nonlinear_flagged
    assert all(abs(r) <= 1.0 for _, r in fit.residuals)


def test_density_fit_single_prime_flagged():
    snap = enumerate_integers(PrimeSystem([2]), 2 ** 130)
    fit = density_fit(snap)
    assert fit.nonlinear_flagged


def test_density_fit_needs_enough_entries():
    snap = enumerate_integers(PrimeSystem([2, 3]), 50)
    with pytest.raises(ValueError):
        density_fit(snap)
