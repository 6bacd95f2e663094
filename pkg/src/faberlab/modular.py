"""Modular lambda function on the upper half-plane and its inverse.

``lambda_fn`` is evaluated from the theta quotient
``16 q (sum q^{n(n+1)})^4 / theta_3^4`` with nome ``q = exp(i pi tau)`` after
reducing ``tau`` into the standard SL(2, Z) fundamental domain, where
``|q| <= exp(-pi sqrt(3) / 2)``.  The two involutions

    lambda(tau + 1) = lambda / (lambda - 1),    lambda(-1/tau) = 1 - lambda

carry the value back to the original point.
"""

import numpy as np

from .series import Mobius

__all__ = [
    "GAMMA2_GENERATORS",
    "lambda_fn",
    "lambda_with_derivative",
    "invert_lambda",
    "reduce_gamma2",
    "in_gamma2_domain",
]

# tau -> tau + 2 and tau -> tau / (2 tau + 1) generate Gamma(2) / {+-1}.
GAMMA2_GENERATORS = (Mobius(1, 2, 0, 1), Mobius(1, 0, 2, 1))

_NTERMS = 7  # |q| <= 0.0659 on the reduced domain: q^(7^2) is far below 1e-18
_MAX_REDUCTION_STEPS = 400


def _as_upper(tau):
    tau = np.asarray(tau, dtype=complex)
    if np.any(~(tau.imag > 0)):
        raise ValueError("tau must lie in the upper half-plane")
    return tau


def _series(tau):
    """lambda and d(lambda)/d(tau) on points with Im(tau) >= sqrt(3)/2."""
    q = np.exp(1j * np.pi * tau)
    a = np.zeros_like(q)
    da = np.zeros_like(q)  # q * dA/dq
    b = np.ones_like(q)
    db = np.zeros_like(q)  # q * dB/dq
    for n in range(_NTERMS):
        e = n * (n + 1)
        t = q**e
        a += t
        da += e * t
        if n >= 1:
            t = q ** (n * n)
            b += 2 * t
            db += 2 * n * n * t
    lam = 16 * q * (a / b) ** 4
    dlam = 1j * np.pi * lam * (1 + 4 * da / a - 4 * db / b)
    return lam, dlam


def lambda_with_derivative(tau):
    """Return ``(lambda(tau), lambda'(tau))`` for array-like ``tau`` in H."""
    tau = _as_upper(tau)
    shape = tau.shape
    t = tau.ravel().copy()
    # phi maps lambda(t_reduced) back to lambda(tau); W maps tau to t_reduced
    pa, pb, pc, pd = (np.ones_like(t), np.zeros_like(t), np.zeros_like(t), np.ones_like(t))
    wa, wb, wc, wd = pa.copy(), pb.copy(), pc.copy(), pd.copy()
    for _ in range(_MAX_REDUCTION_STEPS):
        n = np.round(t.real)
        t = t - n
        odd = (np.abs(n) % 2) == 1
        # right-multiply phi by (1, 0; 1, -1) where the shift is odd
        pa, pb = np.where(odd, pa + pb, pa), np.where(odd, -pb, pb)
        pc, pd = np.where(odd, pc + pd, pc), np.where(odd, -pd, pd)
        wa, wb = wa - n * wc, wb - n * wd
        inv = np.abs(t) < 1 - 1e-15
        if not inv.any():
            break
        t = np.where(inv, -1 / np.where(inv, t, 1), t)
        # right-multiply phi by (-1, 1; 0, 1)
        pa, pb = np.where(inv, -pa, pa), np.where(inv, pa + pb, pb)
        pc, pd = np.where(inv, -pc, pc), np.where(inv, pc + pd, pd)
        wa, wb, wc, wd = (np.where(inv, -wc, wa), np.where(inv, -wd, wb),
                          np.where(inv, wa, wc), np.where(inv, wb, wd))
    else:
        raise RuntimeError("modular reduction did not terminate")
    lam_r, dlam_r = _series(t)
    den = pc * lam_r + pd
    lam = (pa * lam_r + pb) / den
    dphi = (pa * pd - pb * pc) / den**2
    dt = 1 / (wc * tau.ravel() + wd) ** 2
    return lam.reshape(shape), (dphi * dlam_r * dt).reshape(shape)


def lambda_fn(tau):
    """Modular lambda function ``theta_2^4 / theta_3^4``.

    Parameters
    ----------
    tau : complex or array_like of complex
        Points with positive imaginary part.

    Returns
    -------
    complex or ndarray
        Same shape as ``tau``.
    """
    lam, _ = lambda_with_derivative(tau)
    return lam[()] if lam.ndim == 0 else lam


def in_gamma2_domain(tau, tol=1e-12):
    """Membership in ``{|Re tau| <= 1, |tau - 1/2| >= 1/2, |tau + 1/2| >= 1/2}``."""
    tau = np.asarray(tau, dtype=complex)
    return ((np.abs(tau.real) <= 1 + tol)
            & (np.abs(tau - 0.5) >= 0.5 - tol)
            & (np.abs(tau + 0.5) >= 0.5 - tol))


def reduce_gamma2(tau, return_matrix=False):
    """Move ``tau`` into the standard Gamma(2) fundamental domain.

    With ``return_matrix`` the accumulated element ``(a, b, c, d)`` (arrays)
    with ``reduced = (a tau + b) / (c tau + d)`` is returned as well.
    """
    tau = _as_upper(tau)
    t = tau.ravel().copy()
    a, b, c, d = np.ones_like(t), np.zeros_like(t), np.zeros_like(t), np.ones_like(t)
    for _ in range(_MAX_REDUCTION_STEPS):
        n = 2 * np.round(t.real / 2)
        t = t - n
        a, b = a - n * c, b - n * d
        right = np.abs(t - 0.5) < 0.5 - 1e-15
        left = np.abs(t + 0.5) < 0.5 - 1e-15
        if not (right.any() or left.any()):
            break
        # tau / (-2 tau + 1) inside the right disk, tau / (2 tau + 1) inside the left
        s = np.where(right, -2.0, np.where(left, 2.0, 0.0))
        t = t / (s * t + 1)
        c, d = c + s * a, d + s * b
    else:
        raise RuntimeError("Gamma(2) reduction did not terminate")
    # the line Re tau = -1 is identified with Re tau = 1
    edge = np.abs(t.real + 1) < 1e-13
    t = np.where(edge, t + 2, t)
    a, b = np.where(edge, a + 2 * c, a), np.where(edge, b + 2 * d, b)
    t = t.reshape(tau.shape)
    if return_matrix:
        return t, tuple(x.reshape(tau.shape) for x in (a, b, c, d))
    return t


def _agm(x, y, iters=40):
    for _ in range(iters):
        x, y = (x + y) / 2, np.sqrt(x * y)
        # the "right" choice of square root keeps the mean near the average
        flip = np.abs(x - y) > np.abs(x + y)
        y = np.where(flip, -y, y)
    return x


def _tau_guess(m):
    """i K(1-m) / K(m) with K(m) = pi / (2 agm(1, sqrt(1-m)))."""
    kp = _agm(np.ones_like(m), np.sqrt(m))
    k = _agm(np.ones_like(m), np.sqrt(1 - m))
    return 1j * k / kp


# (phi, W) with lambda(W tau) = phi(lambda(tau)); phi runs over the
# anharmonic group, realised by the six cosets of Gamma(2) in SL(2, Z).
def _anharmonic_table():
    shift = (Mobius(1, 1, 0, 1), Mobius(1, 0, 1, -1))
    flip = (Mobius(0, -1, 1, 0), Mobius(-1, 1, 0, 1))
    table = [(Mobius(1, 0, 0, 1), Mobius(1, 0, 0, 1))]
    for word in ("s", "f", "sf", "fs", "sfs"):
        w, p = Mobius(1, 0, 0, 1), Mobius(1, 0, 0, 1)
        for letter in word:
            g, ph = shift if letter == "s" else flip
            # lambda(g W tau) = ph(lambda(W tau)) = ph(p(lambda(tau)))
            w, p = g @ w, ph @ p
        table.append((p, w))
    return table


_ANHARMONIC = _anharmonic_table()


def invert_lambda(a, tol=1e-13, maxiter=60):
    """Solve ``lambda(tau) = a`` with ``tau`` in the Gamma(2) fundamental domain.

    A complete-elliptic-integral ratio (computed with the AGM) supplies a
    starting point for each of the six anharmonic images of ``a``; the
    best one is mapped back, polished by Newton's method and reduced.

    Parameters
    ----------
    a : complex or array_like
        Target values, excluding the punctures 0 and 1.
    tol : float
        Relative residual accepted by the Newton polish.

    Returns
    -------
    complex or ndarray
    """
    arr = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("lambda takes only finite values")
    if np.any((np.abs(arr) < 1e-300) | (np.abs(arr - 1) < 1e-300)):
        raise ValueError("0 and 1 are omitted values of lambda")
    flat = arr.ravel()
    best = np.full(flat.shape, np.nan + 0j)
    best_res = np.full(flat.shape, np.inf)
    with np.errstate(all="ignore"):
        for phi, w in _ANHARMONIC:
            # lambda(W t) = phi(lambda(t)) = a  <=>  lambda(t) = phi^{-1}(a)
            m = phi.inverse()(flat)
            t = _tau_guess(m)
            ok = np.isfinite(t) & (t.imag > 0)
            t = np.where(ok, t, 1j)
            cand = w(t)
            ok &= np.isfinite(cand) & (cand.imag > 0)
            cand = np.where(ok, cand, 1j)
            res = np.abs(lambda_fn(cand) - flat) / np.maximum(1, np.abs(flat))
            res = np.where(ok, res, np.inf)
            take = res < best_res
            best = np.where(take, cand, best)
            best_res = np.where(take, res, best_res)
    tau = best
    for _ in range(maxiter):
        lam, dlam = lambda_with_derivative(tau)
        err = lam - flat
        step = err / dlam
        # damp steps that would leave the half-plane
        while True:
            new = tau - step
            bad = new.imag <= 0
            if not bad.any():
                break
            step = np.where(bad, step / 2, step)
        tau = new
        if np.all(np.abs(err) <= tol * np.maximum(1, np.abs(flat))):
            break
    else:
        raise RuntimeError("lambda inversion did not converge")
    tau = reduce_gamma2(tau)
    return tau.reshape(arr.shape)[()] if arr.ndim == 0 else tau.reshape(arr.shape)
