import math
from fractions import Fraction

import pytest

from beurling.certreal import CertReal, Ordering
from beurling.exceptions import OrderingUndecided
from beurling.systems import (
    PrimeSystem,
    classical_primes,
    count_functions,
    enumerate_integers,
    min_gap_exponent,
    snapshot_from_json,
)


def brute_force_two_primes(p, q, bound):
    """Oracle: all products p^a q^b <= bound by double loop."""
    vals = set()
    a = 0
    while p ** a <= bound:
        b = 0
        while p ** a * q ** b <= bound:
            vals.add(p ** a * q ** b)
            b += 1
        a += 1
    return sorted(vals)


def sieve(n):
    marks = bytearray([1]) * (n + 1)
    marks[0:2] = b"\x00\x00"
    for i in range(2, int(math.isqrt(n)) + 1):
        if marks[i]:
            marks[i * i :: i] = b"\x00" * len(range(i * i, n + 1, i))
    return [p for p in range(2, n + 1) if marks[p]]


def test_classical_primes_small():
    assert [int(p.to_fraction()) for p in classical_primes(10)] == [2, 3, 5, 7]
    assert [int(p.to_fraction()) for p in classical_primes(2)] == [2]
    assert len(classical_primes(50)) == 15
    assert len(classical_primes(50)) == len(sieve(50))


def test_prime_system_validation():
    with pytest.raises(ValueError):
        PrimeSystem([3, 2])
    with pytest.raises(ValueError):
        PrimeSystem([1, 2])
    with pytest.raises(ValueError):
        PrimeSystem([Fraction(1, 2)])


def test_enumerate_single_prime():
    snap = enumerate_integers(PrimeSystem([2]), 10)
    assert [e.value.to_fraction() for e in snap.entries] == [1, 2, 4, 8]


def test_enumerate_two_primes_matches_brute_force():
    snap = enumerate_integers(PrimeSystem([2, 3]), 13)
    assert [int(e.value.to_fraction()) for e in snap.entries] == [1, 2, 3, 4, 6, 8, 9, 12]
    got = [int(e.value.to_fraction()) for e in enumerate_integers(PrimeSystem([2, 3]), 10 ** 4)]
    assert got == brute_force_two_primes(2, 3, 10 ** 4)


def test_enumerate_classical_is_initial_segment():
    snap = enumerate_integers(classical_primes(50), 50)
    assert [int(e.value.to_fraction()) for e in snap.entries] == list(range(1, 51))
    n, p = count_functions(snap, 50)
    assert (n, p) == (50, 15)


def test_enumerate_includes_unit_and_exponent_vectors():
    snap = enumerate_integers(PrimeSystem([2, 3]), 13)
    assert snap.entries[0].is_unit
    twelve = [e for e in snap.entries if e.value.to_fraction() == 12][0]
    assert twelve.exponents == ((0, 2), (1, 1))


def test_closure_under_division_by_primes():
    # completeness: entry/prime stays an entry whenever it divides
    snap = enumerate_integers(PrimeSystem([2, 3]), 200)
    keys = {e.exponents for e in snap.entries}
    for e in snap.entries:
        for i, exp in e.exponents:
            reduced = tuple((j, x - 1 if j == i else x) for j, x in e.exponents
                            if not (j == i and x == 1))
            assert reduced in keys


def test_closure_under_multiplication():
    snap = enumerate_integers(PrimeSystem([2, 3]), 100)
    keys = {e.exponents for e in snap.entries}
    for e in snap.entries:
        v = e.value.to_fraction()
        for i, q in enumerate((2, 3)):
            if v * q <= 100:
                grown = dict(e.exponents)
                grown[i] = grown.get(i, 0) + 1
                assert tuple(sorted(grown.items())) in keys


def test_count_functions_edges():
    snap = enumerate_integers(PrimeSystem([2]), 8)
    assert count_functions(snap, 8) == (4, 1)
    assert count_functions(snap, 1) == (1, 0)
    with pytest.raises(ValueError):
        count_functions(snap, 9)


def test_min_gap_exponent_exhaustive_oracle():
    snap = enumerate_integers(PrimeSystem([2, 3]), 13)
    res = min_gap_exponent(snap, 0)
    assert res.value.to_fraction() == 1
    vals = [int(e.value.to_fraction()) for e in snap.entries]
    oracle = min(vals[i + 1] - vals[i] for i in range(len(vals) - 1))
    assert res.value.to_fraction() == oracle


def test_min_gap_with_positive_exponent():
    snap = enumerate_integers(classical_primes(50), 50)
    res = min_gap_exponent(snap, 1)
    # gaps are all 1, margin = nu_{n+1}, minimal at nu_2 = 2
    assert res.index == 0
    assert res.value.to_fraction() == 2


def test_min_gap_single_prime():
    snap = enumerate_integers(PrimeSystem([2]), 10)
    assert min_gap_exponent(snap, 0).value.to_fraction() == 1


def test_collision_aborts_with_witness():
    with pytest.raises(OrderingUndecided) as exc:
        enumerate_integers(PrimeSystem([2, 4]), 20)
    assert exc.value.witness is not None


def test_irrational_system_certified_order():
    s = PrimeSystem([CertReal.from_decimal("2.25"),
                     CertReal.from_int(2) * CertReal.from_int(3).sqrt()])
    snap = enumerate_integers(s, 100)
    floats = snap.values_float()
    assert floats == sorted(floats)
    for i in range(len(snap.entries) - 1):
        assert (s.compare_integers(snap.entries[i], snap.entries[i + 1])
                is Ordering.LESS)


def test_snapshot_persistence_rederives_values():
    snap = enumerate_integers(PrimeSystem([2, 3]), 13)
    back = snapshot_from_json(snap.to_json())
    assert [e.exponents for e in back.entries] == [e.exponents for e in snap.entries]
    assert [e.value.to_fraction() for e in back.entries] == \
        [e.value.to_fraction() for e in snap.entries]


def test_snapshot_persistence_rejects_corrupted_order():
    payload = enumerate_integers(PrimeSystem([2, 3]), 13).to_json()
    payload["entries"][1], payload["entries"][2] = payload["entries"][2], payload["entries"][1]
    with pytest.raises(OrderingUndecided):
        snapshot_from_json(payload)


def test_enumeration_bound_inclusive():
    snap = enumerate_integers(PrimeSystem([2]), 8)
    assert [e.value.to_fraction() for e in snap.entries] == [1, 2, 4, 8]
