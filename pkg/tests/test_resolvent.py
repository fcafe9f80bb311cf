import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biparam import (
    InversionConfig,
    QueryPoint,
    TransformPoint,
    ck_residual,
    invert2d_matrix,
    resolvent_at,
    series_transition,
    transition,
    validate_generator,
)
from biparam.errors import (
    EntryInversionError,
    MaxTermsExceededError,
    SingularResolventError,
    ValidationError,
)
from biparam.resolvent import resolvent_batch

from oracles import machine_closed_form, random_generator

P_SMALL = [[0.7781, 0.2219], [0.0666, 0.9334]]
P_LARGE = [[0.4272, 0.5754], [0.1726, 0.8300]]


def test_resolvent_at_one(a5):
    expected = np.array([[8, 10], [3, 15]]) / 18
    assert np.abs(resolvent_at(a5, (1, 1)) - expected).max() <= 1e-12


@pytest.mark.parametrize("s", [(2, 0.5), (1j, 3), (0.5 + 2j, 0.25 - 1j)])
def test_zero_generator_resolvent(zero2, s):
    c = complex(s[0]) * complex(s[1])
    assert np.abs(resolvent_at(zero2, TransformPoint(*s)) - np.eye(2) / c).max() <= 1e-15


def test_singular_at_zero_product(a5):
    with pytest.raises(SingularResolventError):
        resolvent_at(a5, (0, 1))
    with pytest.raises(SingularResolventError):
        resolvent_at(a5, (2.6, -1))  # s1 s2 = -2.6, the other eigenvalue


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1),
       st.complex_numbers(min_magnitude=0.05, max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.complex_numbers(min_magnitude=0.05, max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_resolvent_residual(n, seed, s1, s2):
    A = validate_generator(random_generator(np.random.default_rng(seed), n))
    if np.min(np.abs(np.linalg.eigvals(A.a) - s1 * s2)) < 1e-3:
        return
    R = resolvent_at(A, (s1, s2))
    residual = (s1 * s2 * np.eye(n) - A.a) @ R - np.eye(n)
    assert np.abs(residual).max() <= 1e-10


def test_batch_matches_pointwise(a5):
    s1 = np.array([1 + 1j, 2.0, 0.5j + 3])
    s2 = np.array([0.5, 1 - 1j, 2.0])
    batch = resolvent_batch(a5, s1, s2)
    for k in range(3):
        assert np.abs(batch[k] - resolvent_at(a5, (s1[k], s2[k]))).max() <= 1e-14


def test_series_small_point(a5):
    P = series_transition(a5, (0.1, 0.1))
    assert P.p[0, 1] == pytest.approx(2 * 0.01 - 5.2 * 0.01**2 / 4, abs=1e-6)
    assert P.p[0, 1] == pytest.approx(0.01987, abs=1e-6)


@pytest.mark.parametrize("at", [(0, 3.0), (5.0, 0)])
def test_series_on_axes_is_identity(a5, at):
    assert np.array_equal(series_transition(a5, at).p, np.eye(2))


@pytest.mark.parametrize("x", [0.01, 0.12, 1.0, 4.0, 9.0])
def test_series_matches_closed_form(a5, x):
    P = series_transition(a5, (x, 1.0))
    assert np.abs(P.p - machine_closed_form(x)).max() <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.floats(0, 3), st.floats(0, 3))
def test_series_rows_sum_to_one(n, seed, t, u):
    A = validate_generator(random_generator(np.random.default_rng(seed), n))
    assert series_transition(A, (t, u)).row_sum_error() <= 1e-10


def test_series_max_terms(a5):
    with pytest.raises(MaxTermsExceededError):
        series_transition(a5, (10, 10), max_terms=5)
    with pytest.raises(ValidationError):
        series_transition(a5, (1, 1), max_terms=0)


@pytest.mark.parametrize("at, expected", [((0.2, 0.6), P_SMALL), ((2.0, 2.0), P_LARGE)])
def test_inversion_matches_golden_tables(a5, at, expected):
    P = invert2d_matrix(a5, at)
    assert P.method == "laplace2d"
    np.testing.assert_allclose(P.p, expected, rtol=0.04)


def test_inversion_zero_generator(zero2):
    assert np.abs(invert2d_matrix(zero2, (0.7, 1.3)).p - np.eye(2)).max() <= 1e-8


def test_series_vs_inversion_at_two_two(a5):
    a = series_transition(a5, (2, 2)).p
    b = invert2d_matrix(a5, (2, 2)).p
    assert np.abs(a - b).max() <= 4e-2
    assert np.abs(a - machine_closed_form(4.0)).max() <= 1e-12


def test_entry_errors_are_tagged(a5):
    with pytest.raises(EntryInversionError) as exc:
        invert2d_matrix(validate_generator([[-50, 50], [50, -50]]), (3, 3),
                        InversionConfig(euler_terms=12, target_digits=12))
    assert (exc.value.i, exc.value.j) in {(0, 0), (0, 1), (1, 0), (1, 1)}


@pytest.mark.parametrize("method", ["series", "laplace2d", "pde"])
def test_dispatch_boundary_is_identity(a5, method):
    P = transition(a5, (0, 2), method)
    assert np.array_equal(P.p, np.eye(2)) and P.method == method


def test_dispatch_unknown_method(a5):
    with pytest.raises(ValidationError):
        transition(a5, (1, 1), "magic")


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.floats(0.05, 2), st.floats(0.05, 2))
def test_series_and_inversion_agree_on_random_generators(n, seed, t, u):
    A = validate_generator(random_generator(np.random.default_rng(seed), n))
    cfg = InversionConfig()
    diff = np.abs(series_transition(A, (t, u)).p - invert2d_matrix(A, (t, u), cfg).p).max()
    assert diff <= max(10 * cfg.tolerance, 1e-4)


def test_ck_zero_generator(zero2):
    assert ck_residual(zero2, (1, 2), (0.5, 3)) <= 1e-12


def test_ck_machine_is_positive(a5):
    value = ck_residual(a5, (1, 1), (1, 1))
    assert value > 0
    assert value == pytest.approx(0.22364402832507645, abs=1e-12)


def test_ck_boundary_factors(a5):
    value = ck_residual(a5, (0.7, 0), (0, 1.3))
    P = series_transition(a5, (0.7, 1.3)).p
    assert value == pytest.approx(np.abs(P - np.eye(2)).sum(axis=1).max(), abs=1e-15)


def test_ck_with_other_solvers(a5):
    ref = ck_residual(a5, (1, 1), (1, 1))
    assert ck_residual(a5, (1, 1), (1, 1), "laplace2d") == pytest.approx(ref, abs=1e-6)
    assert ck_residual(a5, QueryPoint(1, 1), QueryPoint(1, 1), "pde") == pytest.approx(ref, abs=1e-4)
