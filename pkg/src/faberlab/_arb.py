"""Multiprecision kernels on top of python-flint (Arb ball arithmetic).

Only midpoints are propagated through iterations; the balls are used for
arithmetic, not for certification.
"""

import math

import flint
import numpy as np

__all__ = [
    "acb",
    "to_complex",
    "recurrence_poly",
    "aberth_polish",
    "eigvals",
    "default_prec",
]


def acb(z):
    z = complex(z)
    return flint.acb(z.real, z.imag)


def to_complex(x):
    return complex(float(x.real.mid()), float(x.imag.mid()))


def default_prec(k):
    """Working precision (bits) for degree-``k`` zero problems.

    Toeplitz sections of covering-map tails lose roughly two bits per
    degree to nonnormality; 128 bits are kept in reserve beyond that.
    """
    return 128 + 2 * int(k)


def recurrence_poly(b, k, prec, faber=False):
    """``P_k`` (or ``F_k``) as an ``acb_poly`` from exact double coefficients ``b``."""
    with flint.ctx.workprec(prec):
        bb = [acb(x) for x in b[: k + 1]] + [flint.acb(0)] * max(0, k + 1 - len(b))
        z = flint.acb_poly([0, 1])
        hist = [flint.acb_poly([1])]
        for n in range(1, k + 1):
            if faber:
                m = n - 1
                acc = (z - bb[0]) * hist[m] - m * bb[m]
                for j in range(1, m + 1):
                    acc -= bb[j] * hist[m - j]
            else:
                acc = (z - bb[0]) * hist[n - 1]
                for j in range(1, n):
                    acc -= bb[j] * hist[n - 1 - j]
            hist.append(acc)
        return hist[k]


def _mid(x):
    return flint.acb(x.real.mid(), x.imag.mid())


def aberth_polish(poly, start, prec, maxsweeps=200, tol_bits=None):
    """Simultaneous Newton (Aberth-Ehrlich) iteration from ``start``.

    Returns ``(roots, sweeps, converged)`` with the roots as acb midpoints.
    The Newton corrections are deflated by the other current estimates so
    that distinct starting points cannot collapse onto one root.
    """
    k = poly.degree()
    with flint.ctx.workprec(prec):
        dpoly = poly.derivative()
        zs = [acb(s) for s in start]
        # quadratic convergence: once a step is below 2^(-prec/2) the next
        # one is at the rounding floor, so the root is frozen after it
        tol_bits = prec // 2 if tol_bits is None else tol_bits
        eps = flint.arb(2) ** (-tol_bits)
        converged = np.zeros(k, dtype=bool)
        for sweep in range(1, maxsweeps + 1):
            worst = 0.0
            for i in range(k):
                if converged[i]:
                    continue
                zi = zs[i]
                p = poly(zi)
                dp = dpoly(zi)
                if p.contains(0):
                    # value indistinguishable from zero at this precision
                    converged[i] = True
                    continue
                newton = p / dp
                s = flint.acb(0)
                for j in range(k):
                    if j != i:
                        s += 1 / (zi - zs[j])
                step = _mid(newton / (1 - newton * s))
                if not step.is_finite():
                    # estimates of a multiple root met exactly; keep zi and let
                    # the residual test judge it
                    converged[i] = True
                    continue
                zs[i] = _mid(zi - step)
                rel = float((step.abs_upper() / max(1.0, float(zs[i].abs_upper()))).mid())
                worst = max(worst, rel)
                if rel < float(eps.mid()):
                    converged[i] = True
                    p = poly(zs[i])
                    if not p.contains(0):
                        zs[i] = _mid(zs[i] - p / dpoly(zs[i]))
            if converged.all():
                return zs, sweep, True
        return zs, maxsweeps, False


def eigvals(A, prec=None, maxprec=4096):
    """Eigenvalues of a dense complex matrix in multiprecision (adaptive)."""
    n = A.shape[0]
    prec = prec or default_prec(n)
    while True:
        with flint.ctx.workprec(prec):
            M = flint.acb_mat([[acb(x) for x in row] for row in A])
            ev = M.eig(nonstop=True)
            vals = np.array([to_complex(x) for x in ev])
        if np.all(np.isfinite(vals)):
            return vals, prec
        if prec >= maxprec:
            raise ArithmeticError(f"multiprecision eigenvalues failed at {prec} bits")
        prec *= 2


def residual_ok(poly, z, thresh_log2):
    """``|p(z)| <= 2^thresh_log2`` evaluated in the poly's context."""
    v = poly(z)
    a = float(v.abs_upper().mid())
    return a == 0.0 or math.log2(a) <= thresh_log2, a
