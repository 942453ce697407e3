import math

import pytest

from beurling.systems import PrimeSystem, classical_primes, enumerate_integers
from beurling.zeta import mobius_of
from beurling.hardy import (
    Character,
    DirichletSeries,
    even_p_norm,
    h2_norm,
    h2_norm_squared,
    helson_demo,
    mobius_series,
    multiply,
    outer_approx_test,
    twist,
    unit_series,
    zeta_partial_series,
)
from beurling.randomsys import sample_primes


@pytest.fixture(scope="module")
def sys23():
    return PrimeSystem([2, 3])


@pytest.fixture(scope="module")
def snap23(sys23):
    return enumerate_integers(sys23, 100)


def test_h2_norm_examples(sys23):
    f = DirichletSeries(sys23, {(): 1.0, ((0, 1),): -0.5})
    assert abs(h2_norm(f) - math.sqrt(5) / 2) < 1e-15
    assert h2_norm(DirichletSeries(sys23, {})) == 0.0


def test_twist_preserves_norms(sys23):
    f = DirichletSeries(sys23, {(): 1.0, ((0, 1),): 0.3 - 0.4j, ((1, 1),): 2.0})
    chi = Character.random(sys23, 9)
    assert abs(h2_norm(twist(f, chi)) - h2_norm(f)) < 1e-14


def test_twist_sign_flip_on_prime_powers(sys23):
    f = DirichletSeries(sys23, {((0, 1),): 1.0, ((0, 2),): 1.0})
    chi = Character((-1.0 + 0j, 1.0 + 0j))
    tw = twist(f, chi)
    assert tw.coeffs[((0, 1),)] == -1.0
    assert tw.coeffs[((0, 2),)] == 1.0


def test_double_twist_is_identity(sys23):
    f = DirichletSeries(sys23, {(): 1.0, ((0, 1), (1, 2)): 1.5j})
    chi = Character.random(sys23, 4)
    back = twist(twist(f, chi), chi.conj())
    for k, v in f.coeffs.items():
        assert abs(back.coeffs[k] - v) < 1e-14


def test_multiply_unit_is_identity(sys23):
    f = DirichletSeries(sys23, {(): 2.0, ((1, 1),): -1.0})
    g = multiply(f, unit_series(sys23), 100)
    assert g.coeffs == f.coeffs
    assert g.discarded_mass == 0.0


def test_multiply_binomial_square(sys23):
    b = DirichletSeries(sys23, {(): 1.0, ((0, 1),): 1.0})
    sq = multiply(b, b, 100)
    assert sq.coeffs[()] == 1.0
    assert sq.coeffs[((0, 1),)] == 2.0
    assert sq.coeffs[((0, 2),)] == 1.0


def test_multiply_reports_discarded_mass(sys23):
    f = DirichletSeries(sys23, {((0, 3),): 1.0})  # value 8
    g = DirichletSeries(sys23, {((0, 3),): 2.0})
    out = multiply(f, g, 10)  # 64 > 10 dropped
    assert out.coeffs == {}
    assert out.discarded_mass == 2.0


def test_mobius_times_zeta_is_unit(snap23):
    zp = zeta_partial_series(snap23, 0.75)
    mb = mobius_series(snap23, 0.75)
    prod = multiply(zp, mb, 100)
    assert abs(prod.coeffs[()] - 1.0) < 1e-14
    others = [abs(v) for k, v in prod.coeffs.items() if k != ()]
    assert max(others, default=0.0) < 1e-13


def test_even_norm_values(sys23):
    one = unit_series(sys23)
    assert even_p_norm(one, 2, 100).value == 1.0
    assert even_p_norm(one, 4, 100).value == 1.0
    b = DirichletSeries(sys23, {(): 1.0, ((0, 1),): 1.0})
    res = even_p_norm(b, 4, 100)
    assert abs(res.pth_power - 6.0) < 1e-14
    with pytest.raises(ValueError):
        even_p_norm(b, 3, 100)


def test_parseval_lift_identity_when_nothing_discarded():
    cl = classical_primes(11)
    snap = enumerate_integers(cl, 10)
    f = zeta_partial_series(snap, 1.0)  # coefficients n^{-1}, n <= 10
    res = even_p_norm(f, 4, 200)  # cap above 100: no discard
    assert res.discarded_mass == 0.0
    direct = h2_norm_squared(multiply(f, f, 200))
    assert res.pth_power == direct  # identical summation, bit-equal


def test_h4_matches_brute_force_convolution():
    cl = classical_primes(11)
    snap = enumerate_integers(cl, 10)
    f = zeta_partial_series(snap, 1.0)
    res = even_p_norm(f, 4, 200)
    conv = {}
    for n in range(1, 11):
        for m in range(1, 11):
            conv[n * m] = conv.get(n * m, 0.0) + (n * m) ** -1.0
    brute = sum(v * v for v in conv.values())
    assert abs(res.pth_power - brute) < 1e-14


def test_outer_defect_matches_symbolic_oracle(snap23):
    steps = outer_approx_test(snap23, 0.25, [10])
    entries = snap23.entries
    vals = [e.value.to_fraction() for e in entries]
    acc = {}
    for ae, av in zip(entries, vals):
        if av > 10:
            continue
        for be, bv in zip(entries, vals):
            if bv > 10 or mobius_of(be) == 0 or av * bv <= 10:
                continue
            key = av * bv
            acc[key] = acc.get(key, 0.0) + mobius_of(be) * float(av * bv) ** -0.75
    oracle = math.sqrt(sum(w * w for w in acc.values()))
    assert abs(steps[0].defect - oracle) < 1e-12


def test_outer_defect_trend(snap23):
    steps = outer_approx_test(snap23, 0.25, [5, 20, 90])
    assert steps[-1].defect < steps[0].defect


def test_outer_degenerate_truncation(snap23):
    steps = outer_approx_test(snap23, 0.25, [1.5])
    assert steps[0].degenerate
    assert steps[0].defect == 0.0


def test_outer_defect_invariant_under_joint_twist(snap23):
    # e_X is a coefficient two-norm of a product of twisted factors;
    # twisting p and f jointly multiplies each product coefficient by a
    # unimodular chi(nu), leaving the norm unchanged: verified through
    # the dict route on a small truncation
    zp = zeta_partial_series(snap23, 0.75)
    mb = mobius_series(snap23, 0.75)
    chi = Character.random(snap23.system, 11)
    prod_plain = multiply(zp, mb, 10 ** 4)
    prod_tw = multiply(twist(zp, chi), twist(mb, chi), 10 ** 4)
    assert abs(h2_norm(prod_plain) - h2_norm(prod_tw)) < 1e-12


def test_mobius_series_squarefree_support(snap23):
    mb = mobius_series(snap23, 0.75)
    for key in mb.coeffs:
        assert all(e == 1 for _, e in key)


def test_helson_demo_small_sampled_system():
    system = sample_primes(42, 40)
    snap = enumerate_integers(system, 1000)
    rep = helson_demo(snap, 0.25, [10, 100, 1000], s_eval_list=[1.0])
    prods = [v for _, v in rep.euler_partials]
    assert all(prods[i + 1] < prods[i] for i in range(len(prods) - 1))
    assert rep.defects[-1].defect < rep.defects[0].defect
    ev = rep.evaluations[0]
    assert ev["consistent"] is True
    assert ev["difference"] <= ev["tail_bound"]


def test_helson_demo_epsilon_validation(snap23):
    with pytest.raises(ValueError):
        helson_demo(snap23, 0.75, [10])
