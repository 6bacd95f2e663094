import warnings

import numpy as np
import pytest
from numpy.polynomial import chebyshev as C

from faberlab.faber import (DegenerateContourError, faber_poly, faber_polys, faber_values,
                            faber_via_contour, fk_log_abs, normalized_derivative, pk_log_abs,
                            pk_series_check, pk_values, toeplitz_matrix, toeplitz_pk,
                            toeplitz_pk_all)
from faberlab.series import LaurentTail

from conftest import random_tail


def cheb_monic(kind, k):
    """2^{1-k} T_k or 2^{-k} U_k in ascending power coefficients."""
    if kind == "T":
        c = C.cheb2poly([0] * k + [1]) * 2.0 ** (1 - k)
    else:
        # U_k = sum of T_j over j = k, k-2, ... (T_0 halved)
        t = np.zeros(k + 1)
        t[k % 2::2] = 2
        if k % 2 == 0:
            t[0] = 1
        c = C.cheb2poly(t) * 2.0 ** (-k)
    return c


@pytest.mark.parametrize("k", [1, 2, 5, 12])
def test_segment_tail_faber_is_chebyshev_t(segment_tail, k):
    assert np.allclose(faber_poly(segment_tail, k).full, cheb_monic("T", k), atol=1e-14)


@pytest.mark.parametrize("k", [1, 2, 5, 12])
def test_segment_tail_pk_is_chebyshev_u(segment_tail, k):
    assert np.allclose(toeplitz_pk(segment_tail, k).full, cheb_monic("U", k), atol=1e-14)


def test_identity_map_gives_powers():
    tail = LaurentTail([0])
    for k, p in enumerate(faber_polys(tail, 6)):
        assert np.array_equal(p.full, np.eye(k + 1)[k])


def test_shift_gives_translated_powers():
    tail = LaurentTail([2.0])
    z = 3.5 + 1j
    assert abs(faber_poly(tail, 4)(z) - (z - 2) ** 4) < 1e-12


def test_low_degree_closed_forms():
    b = np.array([0.3 - 0.1j, 0.5, 0.2j, -0.1])
    tail = LaurentTail(b)
    F = faber_polys(tail, 3)
    z = 0.7 + 0.2j
    assert abs(F[1](z) - (z - b[0])) < 1e-15
    assert abs(F[2](z) - ((z - b[0]) ** 2 - 2 * b[1])) < 1e-14
    F3 = (z - b[0]) ** 3 - 3 * b[1] * (z - b[0]) - 3 * b[2]
    assert abs(F[3](z) - F3) < 1e-14


def test_derivative_identity_random():
    rng = np.random.default_rng(5)
    for _ in range(5):
        tail = random_tail(rng)
        F = faber_polys(tail, 21)
        for k, P in enumerate(toeplitz_pk_all(tail, 20)):
            d = normalized_derivative(F[k + 1]).full
            assert np.max(np.abs(d - P.full)) <= 1e-9 * max(1, np.max(np.abs(P.full)))


def test_pk_is_characteristic_polynomial():
    rng = np.random.default_rng(6)
    tail = random_tail(rng)
    z = 0.4 - 0.3j
    for k in (1, 3, 8):
        A = toeplitz_matrix(tail, k)
        assert abs(np.linalg.det(z * np.eye(k) - A) - toeplitz_pk(tail, k)(z)) < 1e-10


def test_toeplitz_layout():
    A = toeplitz_matrix(LaurentTail([1, 2, 3]), 3)
    assert np.array_equal(A, [[1, 2, 3], [1, 1, 2], [0, 1, 1]])


def test_contour_oracles():
    rng = np.random.default_rng(7)
    tail = random_tail(rng)
    z = 0.2 + 0.1j
    fv, pv = faber_values(tail, z, 10), pk_values(tail, z, 10)
    for k in range(11):
        assert abs(faber_via_contour(tail, k, z, 2.0) - fv[k]) < 1e-10
        assert abs(pk_series_check(tail, k, z, 2.0) - pv[k]) < 1e-10


def test_contour_degenerate():
    with pytest.raises(DegenerateContourError):
        faber_via_contour(LaurentTail([0]), 2, 2.0, 2.0)


def test_contour_node_floor():
    with pytest.raises(ValueError):
        pk_series_check(LaurentTail([0]), 1, 0.0, 2.0, M=64)


def test_value_recurrences_match_polys():
    rng = np.random.default_rng(8)
    tail = random_tail(rng)
    z = np.array([0.1, 1 + 1j, -2j])
    fv, pv = faber_values(tail, z, 8), pk_values(tail, z, 8)
    F, P = faber_polys(tail, 8), toeplitz_pk_all(tail, 8)
    for k in range(9):
        assert np.allclose(fv[k], F[k](z), rtol=1e-12)
        assert np.allclose(pv[k], P[k](z), rtol=1e-12)


def test_log_abs_no_overflow(segment_tail):
    # |U_k(z)| / 2^k grows like |w|^k; far away the plain values overflow
    z = np.array([1e60 + 0j])
    logs = pk_log_abs(segment_tail, z, 400)[:, 0]
    assert np.all(np.isfinite(logs))
    assert abs(logs[-1] / 400 - np.log(1e60)) < 1e-3
    flogs = fk_log_abs(segment_tail, z, 400)[:, 0]
    assert np.all(np.isfinite(flogs))


def test_log_abs_matches_direct(segment_tail):
    z = np.array([0.3 + 0.8j])
    logs = pk_log_abs(segment_tail, z, 30)[:, 0]
    direct = np.log(np.abs(pk_values(segment_tail, z, 30)[1:, 0]))
    assert np.allclose(logs, direct, atol=1e-12)


def test_warns_beyond_sampled_order():
    tail = LaurentTail([0, 0.1], residual=1e-14)
    with pytest.warns(UserWarning):
        faber_polys(tail, 5)


def test_exact_tail_does_not_warn(segment_tail):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        faber_polys(segment_tail, 10)


def test_negative_degree():
    with pytest.raises(ValueError):
        toeplitz_pk(LaurentTail([0]), -1)


def test_derivative_of_constant():
    with pytest.raises(ValueError):
        normalized_derivative(faber_poly(LaurentTail([0]), 0))


def test_faber_log_abs_matches_direct():
    tail = random_tail(np.random.default_rng(9))
    z = np.array([0.3 + 0.8j, 2.0, -0.1j])
    logs = fk_log_abs(tail, z, 25)
    direct = np.log(np.abs(faber_values(tail, z, 25)[1:]))
    assert np.allclose(logs, direct, atol=1e-10)


def test_log_abs_decaying_values(segment_tail):
    # |U_k(1)| / 2^k = (k + 1) / 2^k falls below the double range
    logs = pk_log_abs(segment_tail, np.array([1.0 + 0j]), 3000)[:, 0]
    k = np.arange(1, 3001)
    assert np.allclose(logs, np.log(k + 1) - k * np.log(2), rtol=1e-9)
