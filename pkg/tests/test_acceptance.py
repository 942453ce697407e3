"""Acceptance suite: one test per numbered criterion, run at the stated
tolerances, each printing a single PASS/FAIL line.

The expensive seed-42 construction (200 primes, their grid, and the
snapshot to 1e4) is built once per session and shared by the criteria
that exercise it.
"""

import math
import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from beurling.certreal import CertReal, Ordering, as_certreal, certify_nonneg, cmp_certified
from beurling.cli import dispatch
from beurling.conditions import FrequencyView, nc_profile, nc_profile_exhaustive
from beurling.construct import ConstructParams, perturb_system, sigma_inf_select
from beurling.diophantine import best_approximations, mu_estimate
from beurling.hardy import (
    even_p_norm,
    h2_norm_squared,
    helson_demo,
    multiply,
    zeta_partial_series,
)
from beurling.logint import li
from beurling.randomsys import (
    a_event_sweep,
    b_event_sweep,
    box_property_certified,
    density_fit,
    post_removal_b_sweep,
    remove_exceptional,
    sample_grid,
    sample_primes,
)
from beurling.systems import (
    PrimeSystem,
    classical_primes,
    count_functions,
    enumerate_integers,
    min_gap_exponent,
)
from beurling.zeta import (
    DensityEnvelope,
    dirichlet_unit_check,
    log_zeta,
    mobius_table,
    z_eval,
    zeta_euler,
    zeta_sum,
)
from beurling.certreal import CertComplex, boxes_disjoint

DATA = Path(__file__).parent / "data"

SEED = 42
N_MAX = 200
SNAPSHOT_BOUND = 10 ** 4


def report(criterion: int, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status} {detail}".rstrip())
    assert ok, f"criterion {criterion} failed: {detail}"


@pytest.fixture(scope="session")
def seed42_system():
    return sample_primes(SEED, N_MAX)


@pytest.fixture(scope="session")
def seed42_grid():
    return sample_grid(N_MAX)


@pytest.fixture(scope="session")
def seed42_snapshot(seed42_system):
    return enumerate_integers(seed42_system, SNAPSHOT_BOUND)


@pytest.fixture(scope="session")
def classical100_snapshot():
    return enumerate_integers(classical_primes(100), SNAPSHOT_BOUND)


def test_criterion_1_classical_cross_check():
    t0 = time.monotonic()
    system = classical_primes(1000)
    snap = enumerate_integers(system, 1000)
    values = [int(e.value.to_fraction()) for e in snap.entries]
    exact = values == list(range(1, 1001))
    n_count, _ = count_functions(snap, 1000)
    _, pi50 = count_functions(snap, 50)
    elapsed = time.monotonic() - t0
    ok = exact and n_count == 1000 and pi50 == 15 and elapsed < 10.0
    report(1, ok, f"N(1000)={n_count} pi(50)={pi50} {elapsed:.2f}s")


def test_criterion_2_oracle_equivalence():
    snap = enumerate_integers(PrimeSystem([2, 3]), 10 ** 4)
    got = [int(e.value.to_fraction()) for e in snap.entries]
    brute = sorted({2 ** a * 3 ** b
                    for a in range(14) for b in range(9)
                    if 2 ** a * 3 ** b <= 10 ** 4})
    enum_ok = got == brute

    gap_ok = True
    for c2 in (0, 1):
        res = min_gap_exponent(snap, c2)
        margins = [Fraction(got[i + 1] - got[i]) * Fraction(got[i + 1]) ** c2
                   for i in range(len(got) - 1)]
        best = min(margins)
        best_idx = margins.index(best)
        gap_ok &= res.value.refine(256).contains_fraction(best)
        gap_ok &= res.index == best_idx
    report(2, enum_ok and gap_ok,
           f"entries={len(got)} min_gap checks at c2 in {{0,1}}")


def test_criterion_3_bayart_profile_early_stop():
    count = 100 + 10 ** 3 + 5
    view = FrequencyView.from_values(
        [CertReal.from_int(k).log() for k in range(1, count + 1)])
    ok = True
    worst = None
    for n in range(1, 101):
        fast = nc_profile(view, n)
        slow = nc_profile_exhaustive(view, n, n + 10 ** 3)
        same_arg = fast.argmin_m == slow.argmin_m
        a = fast.value.enclosure(128)
        b = slow.value.enclosure(128)
        from mpmath.libmp import mpf_cmp
        same_val = mpf_cmp(a[0], b[0]) == 0 and mpf_cmp(a[1], b[1]) == 0
        if not (same_arg and same_val):
            ok = False
            worst = n
            break
    report(3, ok, f"n<=100 vs exhaustive m<=n+1000" +
           ("" if ok else f" (first mismatch n={worst})"))


def test_criterion_4_perturbation_run():
    t0 = time.monotonic()
    sel = sigma_inf_select(PrimeSystem([2]), ConstructParams(A=1.0))
    sel_ok = sel == 3.0

    target = classical_primes(29)
    params = ConstructParams(A=1.0, cutoff=10 ** 4)
    result = perturb_system(target, params)
    budget_ok = True
    for q, qt in zip(target.primes, result.system.primes):
        diff = (qt - q).abs()
        inv = 1 / q
        exact_same = q.is_exact and qt.is_exact and q.to_fraction() == qt.to_fraction()
        budget_ok &= exact_same or certify_nonneg(inv - diff) is True
    grid_steps = [s for s in result.steps if s.path == "grid"]
    exclusion_ok = all(s.exclusion is not None and s.exclusion.passed
                       for s in grid_steps)
    cert = result.certificate
    cert_ok = cert.valid and cert.exponent == 6.0 * result.sigma_inf and \
        certify_nonneg(cert.min_margin) is True
    elapsed = time.monotonic() - t0
    ok = sel_ok and budget_ok and exclusion_ok and cert_ok and elapsed < 300.0
    report(4, ok, f"sigma_inf({{2}})={sel} sigma_inf(run)={result.sigma_inf} "
                  f"margin={cert.min_margin.to_float():.4g} {elapsed:.1f}s")


def test_criterion_5_random_construction(seed42_system, seed42_grid,
                                         seed42_snapshot):
    system, grid, snap = seed42_system, seed42_grid, seed42_snapshot

    box_ok = box_property_certified(system)

    # |pi(x) - li(x)| <= 2 up to x_200: certified at prime jumps and spot points
    dev_ok = True
    xs = [grid.x(N_MAX)] + [system.primes[i] for i in range(0, N_MAX, 20)]
    rng = random.Random(5)
    xs += [as_certreal(rng.uniform(grid.x(1).to_float(),
                                   grid.x(N_MAX).to_float()))
           for _ in range(10)]
    for x in xs:
        pi_x = sum(1 for q in system.primes
                   if cmp_certified(q, x) is not Ordering.GREATER)
        dev = li(x) - pi_x
        dev_ok &= certify_nonneg(2 - dev.abs()) is True

    records = a_event_sweep(system, grid, N_MAX, 50)
    worst = max(r.statistic / r.threshold for r in records)
    a_ok = worst <= 1.0 and not any(r.triggered for r in records)

    b_records = b_event_sweep(system, 1.0, 1000, grid=grid)
    thinned = remove_exceptional(system, b_records)
    post = post_removal_b_sweep(system, b_records, 1.0, 1000, grid=grid)
    b_ok = not any(r.triggered for r in post)

    fit = density_fit(snap)
    fit_ok = fit.residual_exponent is not None and fit.residual_exponent <= 0.75

    ok = box_ok and dev_ok and a_ok and b_ok and fit_ok
    report(5, ok, f"worst stat/thr={worst:.3f} removed={len(system.primes) - len(thinned.primes)} "
                  f"resid_exp={fit.residual_exponent:.3f}")


def test_criterion_6_zeta_consistency(seed42_system, seed42_snapshot,
                                      classical100_snapshot):
    cases = [
        (PrimeSystem([2]), enumerate_integers(PrimeSystem([2]), 2 ** 13),
         DensityEnvelope(1.0, 1.0)),
        (PrimeSystem([2, 3]), enumerate_integers(PrimeSystem([2, 3]), 10 ** 4),
         DensityEnvelope(1.0, 1.0)),
        (classical_primes(100), classical100_snapshot, DensityEnvelope(1.0, 1.0)),
        # envelope for the sampled system: observed N/x stays below 0.55
        (seed42_system, seed42_snapshot, DensityEnvelope(0.7, 5.0)),
    ]
    rng = random.Random(17)
    ok = True
    for system, snap, env in cases:
        for _ in range(5):  # 5 x 4 systems = 20 points at sigma = 2
            s = complex(2.0, rng.uniform(-10.0, 10.0))
            euler = zeta_euler(system, s)
            sum_ev = zeta_sum(snap, s, envelope=env)
            diff = (euler.value - sum_ev.value).abs()
            tails = sum_ev.tail_bound + (euler.tail_bound or as_certreal(0))
            ok &= certify_nonneg(tails - diff, max_bits=512) is True

            # overlap checks: a genuine inconsistency separates within a
            # couple of refinements, so the ladder stays short
            lz = log_zeta(system, s)
            ok &= not boxes_disjoint(lz.value.exp(), euler.value, max_bits=256)

            zv = z_eval(system, s)
            sbox = CertComplex(as_certreal(s.real), as_certreal(s.imag))
            recon = sbox * zv.value.exp() / (sbox - CertComplex(1, 0))
            ok &= not boxes_disjoint(recon, euler.value, max_bits=256)
    report(6, ok, "euler/sum/log/Z consistency at 20 random s, sigma=2")


def test_criterion_7_mobius_identity(seed42_snapshot, classical100_snapshot):
    snapshots = [
        enumerate_integers(PrimeSystem([2]), 10 ** 4),
        enumerate_integers(PrimeSystem([2, 3]), 10 ** 4),
        classical100_snapshot,
        seed42_snapshot,
    ]
    total = 0
    ok = True
    for snap in snapshots:
        table = mobius_table(snap)
        for e in snap.entries:
            want = 1 if e.is_unit else 0
            ok &= dirichlet_unit_check(table, e) == want
            total += 1
    report(7, ok, f"unit convolution over {total} integers across 4 systems")


def test_criterion_8_helson_demo(seed42_snapshot):
    t0 = time.monotonic()
    rep = helson_demo(seed42_snapshot, 0.25, [100.0, 1000.0, 10000.0],
                      s_eval_list=[1.0])
    prods = [v for _, v in rep.euler_partials]
    euler_ok = all(prods[i + 1] < prods[i] for i in range(len(prods) - 1))
    defect_ok = rep.defects[-1].defect < rep.defects[0].defect
    eval_ok = rep.evaluations[0]["consistent"] is True
    no_discard = all(d.discarded_mass == 0.0 for d in rep.defects)

    # Parseval/lift identity, exact when nothing is discarded
    small = enumerate_integers(classical_primes(11), 10)
    f = zeta_partial_series(small, 1.0)
    res = even_p_norm(f, 4, 200)
    parseval_ok = res.discarded_mass == 0.0 and \
        res.pth_power == h2_norm_squared(multiply(f, f, 200))

    elapsed = time.monotonic() - t0
    ok = euler_ok and defect_ok and eval_ok and no_discard and parseval_ok \
        and elapsed < 300.0
    report(8, ok, f"e_X: {rep.defects[0].defect:.4f} -> {rep.defects[-1].defect:.4f}; "
                  f"f(1.0) diff {rep.evaluations[0]['difference']:.2e} <= "
                  f"tail {rep.evaluations[0]['tail_bound']:.2e}; {elapsed:.0f}s")


def test_criterion_9_diophantine():
    # the full classical system: every ordinary integer up to the bound
    # is a denominator (the continued-fraction oracle assumes as much)
    snap = enumerate_integers(classical_primes(SNAPSHOT_BOUND), SNAPSHOT_BOUND)
    entries = snap.entries
    rng = random.Random(99)
    planted_ok = True
    for _ in range(20):
        i = rng.randrange(1, len(entries))
        j = rng.randrange(1, len(entries))
        target = Fraction(int(entries[i].value.to_fraction()),
                          int(entries[j].value.to_fraction()))
        recs = best_approximations(target, snap, top_k=1)
        planted_ok &= recs[0].exact_hit and recs[0].error.to_float() == 0.0

    # continued-fraction oracle with the as-written denominator convention
    def semiconvergents(x, qmax):
        out = []
        p2, q2 = 1, 0
        p1, q1 = int(math.floor(x)), 1
        out.append((p1, q1))
        frac = x - math.floor(x)
        while q1 <= qmax and frac > 1e-15:
            y = 1.0 / frac
            a = int(math.floor(y))
            frac = y - a
            for tt in range(1, a + 1):
                p, q = p2 + tt * p1, q2 + tt * q1
                if q > qmax:
                    break
                out.append((p, q))
            p2, q2, p1, q1 = p1, q1, p2 + a * p1, q2 + a * q1
        return out

    def cf_oracle(x, X):
        lo = math.isqrt(X)
        hi = int(X / x)
        best = 0.0
        for p, q in semiconvergents(x, hi):
            err = abs(x - p / q)
            if err == 0:
                return math.inf
            t0 = max(1, -(-lo // q))
            q_eff, p_eff = t0 * q, t0 * p
            if lo <= q_eff <= hi and p_eff <= SNAPSHOT_BOUND:
                best = max(best, math.log(1 / err) / math.log(q_eff))
        return best

    mu_ok = True
    rng2 = random.Random(2026)
    worst = 0.0
    for _ in range(20):
        x = rng2.uniform(1.0, 10.0)
        est = mu_estimate(x, snap)
        oracle = cf_oracle(x, SNAPSHOT_BOUND)
        diff = abs(est.value - oracle)
        worst = max(worst, diff)
        mu_ok &= diff <= 0.5
    report(9, planted_ok and mu_ok,
           f"20 planted ratios exact; mu vs CF worst diff {worst:.3f}")


def test_criterion_10_determinism(tmp_path):
    jobs = [
        ("gen", ["gen", "--primes-file", str(DATA / "classical_1000.txt"),
                 "--limit", "1000"]),
        ("conditions", ["conditions", "--classical", "20", "--limit", "50",
                        "--bc", "1,1", "--nc", "1,5"]),
        ("zeta", ["zeta", "--classical", "100", "--mode", "euler",
                  "--sigma", "2.0", "--t", "1.5"]),
        ("perturb", ["perturb", "--classical", "12", "--A", "1",
                     "--cutoff", "500", "--seed", "3"]),
        ("sample", ["sample", "--seed", "42", "--count", "15",
                    "--sweep", "8,3,5"]),
        ("dioph", ["dioph", "--target", "pi", "--limit", "500",
                   "--classical", "500"]),
        ("helson", ["helson", "--seed", "42", "--count", "20",
                    "--epsilon", "0.25", "--limits", "10,100"]),
    ]
    ok = True
    for name, argv in jobs:
        first = tmp_path / f"{name}.json"
        replay = tmp_path / f"{name}_replay.json"
        rc1 = dispatch(argv + ["--out", str(first)])
        rc2 = dispatch(["rerun", "--manifest", str(first), "--out", str(replay)])
        same = first.read_bytes() == replay.read_bytes()
        ok &= rc1 == 0 and rc2 == 0 and same
        if not same:
            print(f"  determinism mismatch: {name}")
    golden = DATA / "sample_seed42_n100.json"
    replay = tmp_path / "golden_replay.json"
    rc = dispatch(["rerun", "--manifest", str(golden), "--out", str(replay)])
    ok &= rc == 0 and replay.read_bytes() == golden.read_bytes()
    report(10, ok, "7 subcommands + golden replay byte-identical")
