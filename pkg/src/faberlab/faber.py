"""Faber polynomials ``F_k`` and normalized derivatives ``P_k`` of a Laurent tail.

Matching powers of ``w`` in the two generating functions gives

    F_0 = 1,  F_{n+1} = (z - b_0) F_n - sum_{k=1}^{n} b_k F_{n-k} - n b_n,
    P_0 = 1,  P_n     = (z - b_0) P_{n-1} - sum_{j=1}^{n-1} b_j P_{n-1-j}.

The second recurrence is the cofactor expansion of ``det(z I - A_n)`` for
the Hessenberg Toeplitz section ``A_n``.  Both are cross-checked against
trapezoid-rule contour integrals (``faber_via_contour``, ``pk_series_check``)
and dense determinants in the test suite.
"""

import warnings

import numpy as np

from .series import LaurentTail, MonicPoly

__all__ = [
    "DegenerateContourError",
    "faber_polys",
    "faber_poly",
    "toeplitz_pk",
    "toeplitz_pk_all",
    "toeplitz_matrix",
    "normalized_derivative",
    "faber_via_contour",
    "pk_series_check",
    "faber_values",
    "pk_values",
    "pk_log_abs",
    "fk_log_abs",
]


class DegenerateContourError(ArithmeticError):
    """The image of the quadrature circle passes through the evaluation point."""


def _check_order(tail, k):
    if k < 0:
        raise ValueError("degree must be nonnegative")
    # exact (finite) tails carry residual nan and need no warning
    if k > tail.truncation_order + 1 and np.isfinite(tail.residual):
        warnings.warn(
            f"degree {k} exceeds truncation order {tail.truncation_order}; "
            "higher coefficients are taken as zero", stacklevel=3)


def _faber_rows(b, K, one=1.0, zero=0.0, dtype=complex):
    """Coefficient rows (ascending) of F_0..F_K; ``b`` padded to length >= K+1."""
    C = np.full((K + 1, K + 1), zero, dtype=dtype)
    C[0, 0] = one
    for n in range(K):
        row = np.full(K + 1, zero, dtype=dtype)
        row[1:] = C[n, :-1]
        row -= b[0] * C[n]
        if n >= 1:
            row -= b[1:n + 1] @ C[n - 1::-1][:n]
        row[0] -= n * b[n]
        C[n + 1] = row
    return C


def _pk_rows(b, K, one=1.0, zero=0.0, dtype=complex):
    """Coefficient rows of P_0..P_K."""
    C = np.full((K + 1, K + 1), zero, dtype=dtype)
    C[0, 0] = one
    for n in range(1, K + 1):
        row = np.full(K + 1, zero, dtype=dtype)
        row[1:] = C[n - 1, :-1]
        row -= b[0] * C[n - 1]
        if n >= 2:
            row -= b[1:n] @ C[n - 2::-1][:n - 1]
        C[n] = row
    return C


def faber_polys(tail, K):
    """Faber polynomials ``F_0 .. F_K`` of ``tail``.

    Coefficients beyond the truncation order count as zero; a warning is
    issued when ``K`` needs them.
    """
    _check_order(tail, K)
    b = tail.padded(K + 1)
    C = _faber_rows(b, K)
    N = tail.truncation_order
    return [MonicPoly(C[n, :n], truncation_order=N) for n in range(K + 1)]


def faber_poly(tail, k):
    return faber_polys(tail, k)[k]


def toeplitz_pk(tail, k):
    """``P_k``, the characteristic polynomial of the k x k Toeplitz section."""
    _check_order(tail, k)
    C = _pk_rows(tail.padded(k + 1), k)
    return MonicPoly(C[k, :k], truncation_order=tail.truncation_order)


def toeplitz_pk_all(tail, K):
    _check_order(tail, K)
    C = _pk_rows(tail.padded(K + 1), K)
    N = tail.truncation_order
    return [MonicPoly(C[n, :n], truncation_order=N) for n in range(K + 1)]


def toeplitz_matrix(tail, k):
    """Leading k x k section: ``b_{j-i}`` on and above the diagonal, ones below it."""
    b = tail.padded(k)
    i, j = np.indices((k, k))
    A = np.where(j >= i, b[np.clip(j - i, 0, k)], 0).astype(complex)
    A[i == j + 1] = 1.0
    return A


def normalized_derivative(F):
    """``F' / deg(F)`` as a monic polynomial of one lower degree."""
    n = F.degree
    if n < 1:
        raise ValueError("derivative of a constant is not monic")
    full = F.full
    d = np.arange(1, n + 1) * full[1:] / n
    return MonicPoly.from_full(d, truncation_order=F.truncation_order)


def _contour(tail, z, R, M, numerator):
    if M < 256:
        raise ValueError("use at least 256 quadrature nodes")
    w = R * np.exp(2j * np.pi * np.arange(M) / M)
    den = tail(w) - z
    if np.min(np.abs(den)) < 1e-10:
        raise DegenerateContourError("g(|w| = R) passes through z")
    return complex(np.mean(numerator(w) / den))


def faber_via_contour(tail, k, z, R, M=1024):
    """``F_k(z) = (2 pi i)^{-1} oint w^k g'(w) / (g(w) - z) dw`` over ``|w| = R``."""
    return _contour(tail, z, R, M, lambda w: w ** (k + 1) * tail.derivative(w))


def pk_series_check(tail, k, z, R, M=1024):
    """``P_k(z) = (2 pi i)^{-1} oint w^k / (g(w) - z) dw`` over ``|w| = R``."""
    return _contour(tail, z, R, M, lambda w: w ** (k + 1))


def _values(b, z, K, faber):
    z = np.asarray(z, dtype=complex)
    vals = np.empty((K + 1,) + z.shape, dtype=complex)
    vals[0] = 1
    for n in range(1, K + 1):
        if faber:
            m = n - 1
            acc = (z - b[0]) * vals[m] - m * b[m]
            if m >= 1:
                acc -= np.tensordot(b[1:m + 1], vals[m - 1::-1][:m], axes=1)
        else:
            acc = (z - b[0]) * vals[n - 1]
            if n >= 2:
                acc -= np.tensordot(b[1:n], vals[n - 2::-1][:n - 1], axes=1)
        vals[n] = acc
    return vals


def pk_values(tail, z, K):
    """``P_0(z) .. P_K(z)`` by the value recurrence; shape ``(K+1,) + z.shape``."""
    return _values(tail.padded(K + 1), z, K, faber=False)


def faber_values(tail, z, K):
    return _values(tail.padded(K + 1), z, K, faber=True)


def _log_abs(b, z, K, faber):
    """``log|Q_n(z)|`` for n = 1..K, overflow and underflow free.

    Each history entry is stored as a unit phase and a log-modulus.  Every
    step rescales the recurrence terms by their largest log-modulus, so
    values spanning any range of magnitudes combine without overflow;
    terms smaller than the largest by more than the double range
    underflow harmlessly to zero.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    phase = np.zeros((K + 1, z.size), dtype=complex)
    logm = np.full((K + 1, z.size), -np.inf)
    phase[0], logm[0] = 1, 0
    lead = z - b[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        lead_log = np.log(np.abs(lead))
        lead_phase = np.where(lead != 0, lead / np.abs(lead), 0)
        b_log = np.log(np.abs(b))
        b_phase = np.where(b != 0, b / np.abs(b), 0)
    out = np.empty((K, z.size))
    for n in range(1, K + 1):
        m = n - 1
        # Q_n = (z - b_0) Q_m - sum_{j=1}^{m} b_j Q_{m-j}  [- m b_m for F]
        logs = [lead_log + logm[m]]
        phases = [lead_phase * phase[m]]
        if m >= 1:
            logs.append(b_log[1:m + 1, None] + logm[m - 1::-1][:m])
            phases.append(-b_phase[1:m + 1, None] * phase[m - 1::-1][:m])
        if faber and m >= 1 and b[m] != 0:
            logs.append(np.full((1, z.size), np.log(m) + b_log[m]))
            phases.append(np.full((1, z.size), -b_phase[m]))
        L = np.vstack([np.atleast_2d(x) for x in logs])
        Ph = np.vstack([np.atleast_2d(x) for x in phases])
        ref = L.max(axis=0)
        ok = np.isfinite(ref)
        ref_safe = np.where(ok, ref, 0.0)
        with np.errstate(invalid="ignore"):
            acc = np.sum(Ph * np.exp(L - ref_safe), axis=0)
        a = np.abs(acc)
        with np.errstate(divide="ignore"):
            val = np.where(ok & (a > 0), ref_safe + np.log(np.where(a > 0, a, 1.0)), -np.inf)
        logm[n] = val
        phase[n] = np.where(np.isfinite(val), acc / np.where(a > 0, a, 1.0), 0)
        out[n - 1] = val
    return out


def pk_log_abs(tail, z, K):
    """``log|P_k(z)|`` for k = 1..K; shape ``(K, z.size)``."""
    return _log_abs(tail.padded(K + 1), z, K, faber=False)


def fk_log_abs(tail, z, K):
    """``log|F_k(z)|`` for k = 1..K; shape ``(K, z.size)``."""
    return _log_abs(tail.padded(K + 1), z, K, faber=True)
