"""Acceptance criteria, one test each.

A summary with one PASS/FAIL line per criterion is printed at the end of
the pytest run (see ``conftest.py``).
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate, special

from biparam import (
    InversionConfig,
    WaitingRegionRates,
    ck_residual,
    expected_warranty_expense,
    extract_waiting_transforms,
    factorization_residual,
    invert2d_matrix,
    invert2d_scalar,
    marginal_distribution,
    pde_transition,
    resolvent_at,
    series_transition,
    solve_goursat,
    transition,
    validate_generator,
    validate_policy,
    waiting_cdf_at,
)
from biparam.errors import ValidationError

from oracles import j0_sqrt_series, machine_closed_form, random_generator

GOLDEN = {
    (0.2, 0.6): [[0.7781, 0.2219], [0.0666, 0.9334]],
    (2.0, 2.0): [[0.4272, 0.5754], [0.1726, 0.8300]],
}
MARGINALS = {(0.2, 0.6): [0.0666, 0.9334], (2.0, 2.0): [0.1726, 0.8300]}
CK_REGRESSION = 0.22364402832507645


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def test_criterion_1_transition_tables(a5, criterion):
    worst, slowest = 0.0, 0.0
    for at, table in GOLDEN.items():
        for method in ("series", "laplace2d", "pde"):
            P, dt = _timed(transition, a5, at, method)
            rel = float(np.max(np.abs(P.p - table) / np.abs(table)))
            worst, slowest = max(worst, rel), max(slowest, dt)
            assert rel <= 0.04, (method, at, P.p)
            assert dt < 1.0, (method, at, dt)
    criterion["detail"] = f"max rel err {worst:.2%} (limit 4%), slowest solve {slowest:.3f}s"


def test_criterion_2_marginals(a5, criterion):
    start = time.perf_counter()
    worst = 0.0
    for at, expected in MARGINALS.items():
        pi = marginal_distribution([0, 1], invert2d_matrix(a5, at)).pi
        rel = float(np.max(np.abs(pi - expected) / np.abs(expected)))
        worst = max(worst, rel)
        assert rel <= 0.04, (at, pi)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    criterion["detail"] = f"max rel err {worst:.2%} (limit 4%), {elapsed:.3f}s"


def test_criterion_3_warranty(a5, criterion):
    start = time.perf_counter()
    _, G = extract_waiting_transforms(a5)
    policy = validate_policy([(0.5, 0.2, 1.0), (1.0, 0.3, 0.1)], from_state=1)
    report = expected_warranty_expense(policy, G)
    small = waiting_cdf_at(G, (0.5, 0.2))
    increment = waiting_cdf_at(G, (1.0, 0.3)) - small
    elapsed = time.perf_counter() - start
    assert report.ewe == pytest.approx(0.0704, rel=0.02)
    assert small == pytest.approx(0.0591, rel=0.04)
    assert increment == pytest.approx(0.1130, rel=0.04)
    assert elapsed < 1.0
    criterion["detail"] = (f"EWE {report.ewe:.5f}C, G(0.5,0.2) {small:.5f}, "
                           f"increment {increment:.5f}, {elapsed:.3f}s")


def test_criterion_4_cross_solver(criterion):
    rng = np.random.default_rng(2026)
    cfg = InversionConfig(target_digits=8)
    start = time.perf_counter()
    worst_all, worst_sp = 0.0, 0.0
    for _ in range(20):
        n = int(rng.integers(2, 6))
        A = validate_generator(random_generator(rng, n, bound=3.0))
        assert np.abs(A.a).max() <= 3.0
        x = rng.uniform(0.01, 4.0)
        t = math.sqrt(x) * math.exp(rng.uniform(-1.0, 1.0))
        u = x / t
        assert t * u <= 4.0 + 1e-12
        s = series_transition(A, (t, u), rel_tol=1e-12).p
        l = invert2d_matrix(A, (t, u), cfg).p
        p = pde_transition(A, (t, u), refine=True).p
        worst_all = max(worst_all, np.abs(s - l).max(), np.abs(s - p).max(), np.abs(l - p).max())
        worst_sp = max(worst_sp, np.abs(s - p).max())
    elapsed = time.perf_counter() - start
    assert worst_all <= 1e-3
    assert worst_sp <= 1e-4
    assert elapsed < 60
    criterion["detail"] = (f"pairwise max {worst_all:.2e} (limit 1e-3), "
                           f"series-pde {worst_sp:.2e} (limit 1e-4), {elapsed:.2f}s")


def _is_generator(a):
    n = a.shape[0]
    off = a[~np.eye(n, dtype=bool)]
    return bool(np.all(off >= 0) and np.all(np.diag(a) <= 0)
                and np.all(np.abs(a.sum(axis=1)) <= 1e-12))


def test_criterion_5_invariants(a5, criterion):
    rng = np.random.default_rng(5)
    start = time.perf_counter()

    # generator validation: accept iff the invariants hold
    choices = np.array([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
    accepted = 0
    for _ in range(3000):
        n = int(rng.integers(1, 5))
        a = rng.choice(choices, size=(n, n))
        if rng.random() < 0.3:
            a = random_generator(rng, n)
        try:
            validate_generator(a)
            ok = True
        except ValidationError:
            ok = False
        assert ok == _is_generator(a)
        accepted += ok
    assert accepted > 100

    # series row sums
    rows = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 7))
        A = validate_generator(random_generator(rng, n))
        rows = max(rows, series_transition(A, rng.uniform(0, 3, size=2)).row_sum_error())
    assert rows <= 1e-10

    # survival factorisation
    fact = 0.0
    for _ in range(2000):
        r = WaitingRegionRates(0, *rng.uniform(0, 10, size=2))
        p1, p2 = rng.uniform(0, 10, size=(2, 2))
        fact = max(fact, factorization_residual(r, p1, p2))
    assert fact <= 1e-14

    # resolvent residual
    res = 0.0
    for _ in range(300):
        n = int(rng.integers(2, 7))
        A = validate_generator(random_generator(rng, n))
        s1, s2 = rng.uniform(-5, 5, size=2) + 1j * rng.uniform(-5, 5, size=2)
        if np.min(np.abs(np.linalg.eigvals(A.a) - s1 * s2)) < 1e-3:
            continue
        R = resolvent_at(A, (s1, s2))
        res = max(res, np.abs((s1 * s2 * np.eye(n) - A.a) @ R - np.eye(n)).max())
    assert res <= 1e-10

    # PDE second-order convergence against the closed form
    ref = machine_closed_form(4.0)
    errs = [np.abs(solve_goursat(a5, 2, 2, m, m).values[-1, -1] - ref).max()
            for m in (50, 100, 200, 400)]
    ratios = [c / f for c, f in zip(errs, errs[1:])]
    assert all(3 <= q <= 5 for q in ratios)

    elapsed = time.perf_counter() - start
    assert elapsed < 30
    criterion["detail"] = (f"row sums {rows:.1e}, factorisation {fact:.1e}, resolvent {res:.1e}, "
                           f"pde ratios {', '.join(f'{q:.2f}' for q in ratios)}, {elapsed:.2f}s")


def _forward_transform(a, s1, s2):
    # double Laplace transform of J0(2 sqrt(a t u)), truncated where e^{-s x} < 1e-14
    T, U = 33.0 / s1, 33.0 / s2
    f = lambda u, t: math.exp(-s1 * t - s2 * u) * special.j0(2 * math.sqrt(a * t * u))
    value, _ = integrate.dblquad(f, 0, T, 0, U, epsabs=1e-10, epsrel=1e-10)
    return value


def test_criterion_6_bessel_identity(criterion):
    start = time.perf_counter()
    quad = 0.0
    for a, s1, s2 in [(0.6, 1.0, 1.5), (2.6, 2.0, 1.0), (2.6, 1.5, 3.0)]:
        q = abs(_forward_transform(a, s1, s2) - 1 / (s1 * s2 + a))
        quad = max(quad, q)
        assert q <= 1e-4
    inv = 0.0
    for a in (0.6, 2.6):
        for x in (0.06, 0.18, 1.0, 4.0):
            at = (math.sqrt(x), math.sqrt(x))
            got = invert2d_scalar(lambda s1, s2: 1 / (s1 * s2 + a), at)
            d = abs(got - j0_sqrt_series(a * x))
            inv = max(inv, d)
            assert d <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 10
    criterion["detail"] = f"inversion vs series {inv:.1e} (limit 1e-6), quadrature {quad:.1e}, {elapsed:.2f}s"


def test_criterion_7_ck_diagnostic(a5, criterion):
    value = ck_residual(a5, (1, 1), (1, 1), solver="series")
    assert value > 0
    assert value == pytest.approx(CK_REGRESSION, abs=1e-12)
    criterion["detail"] = f"ck_residual = {value:.17g} (regression {CK_REGRESSION})"
