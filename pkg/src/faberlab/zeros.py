"""Zeros of ``P_k`` and ``F_k``, their counting measures, and distances to predicted supports.

Two independent routes produce the zeros of ``P_k``: eigenvalues of the
Toeplitz section (``pk_zeros_via_eigen``) and roots of the polynomial from
the recurrence (``roots``).  Both have a double and an extended-precision
mode; the extended modes share no algorithm (Arb's eigensolver on one
side, Aberth-Newton polishing of recurrence coefficients on the other).
"""

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

from . import _arb, _io
from .faber import fk_log_abs, pk_log_abs, toeplitz_matrix, toeplitz_pk, faber_poly
from .series import MonicPoly

__all__ = [
    "ZeroEnsemble",
    "PolylineSet",
    "RootConvergenceError",
    "roots",
    "extended_poly",
    "pk_zeros_via_eigen",
    "zeros_of",
    "multiset_distance",
    "hausdorff",
    "cdf_discrepancy",
    "arcsine_cdf",
    "potential_estimate",
    "delta_via_limit",
    "fraction_outside",
    "write_zeros_csv",
    "write_convergence_csv",
    "write_potential_grid_csv",
]

PRECISIONS = ("standard", "extended")
MAX_SWEEPS = 200
RESIDUAL_FACTOR = 1e-20
MIN_EXTENDED_BITS = 100  # about 30 significant digits


class RootConvergenceError(ArithmeticError):
    """Polishing did not converge; ``partial`` holds the current estimates."""

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True, eq=False)
class ZeroEnsemble:
    """Normalized zero counting measure: ``k`` zeros each of mass ``1/k``."""

    zeros: np.ndarray
    source: str = "P"
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        z = np.array(self.zeros, dtype=complex).ravel()
        if z.size == 0:
            raise ValueError("an ensemble needs at least one zero")
        z.setflags(write=False)
        object.__setattr__(self, "zeros", z)

    @property
    def k(self):
        return self.zeros.size

    @property
    def weights(self):
        w = Fraction(1, self.k)
        return [w] * self.k

    @property
    def total_mass(self):
        return sum(self.weights, Fraction(0))

    def __len__(self):
        return self.k


@dataclass(frozen=True, eq=False)
class PolylineSet:
    """Union of polylines; ``h`` bounds the spacing of consecutive points."""

    polylines: tuple
    h: float = None

    def __post_init__(self):
        lines = tuple(np.array(p, dtype=complex).ravel() for p in self.polylines)
        if not lines or any(p.size == 0 for p in lines):
            raise ValueError("empty polyline set")
        steps = [np.abs(np.diff(p)) for p in lines if p.size > 1]
        hmax = max((float(s.max()) for s in steps), default=0.0)
        h = hmax if self.h is None else float(self.h)
        if hmax > h * (1 + 1e-12):
            raise ValueError(f"consecutive points {hmax:.3g} apart exceed h = {h:.3g}")
        for p in lines:
            p.setflags(write=False)
        object.__setattr__(self, "polylines", lines)
        object.__setattr__(self, "h", h)

    @property
    def points(self):
        return np.concatenate(self.polylines)

    def segments(self):
        """Endpoints ``(A, B)`` of every segment; isolated points give ``A == B``."""
        a, b = [], []
        for p in self.polylines:
            if p.size == 1:
                a.append(p)
                b.append(p)
            else:
                a.append(p[:-1])
                b.append(p[1:])
        return np.concatenate(a), np.concatenate(b)

    def refined(self, h):
        """Same set with extra collinear points so that the spacing is at most ``h``."""
        out = []
        for p in self.polylines:
            pts = [p[:1]]
            for x, y in zip(p[:-1], p[1:]):
                n = max(1, int(math.ceil(abs(y - x) / h)))
                pts.append(x + (y - x) * np.arange(1, n + 1) / n)
            out.append(np.concatenate(pts))
        return PolylineSet(out, h)

    def distance(self, z):
        """Exact Euclidean distance from each point of ``z`` to the set."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        a, b = self.segments()
        best = np.full(z.shape, np.inf)
        d = b - a
        dd = np.abs(d) ** 2
        chunk = max(1, 2_000_000 // max(1, a.size))
        for s in range(0, z.size, chunk):
            zz = z[s:s + chunk, None]
            with np.errstate(invalid="ignore", divide="ignore"):
                t = np.where(dd > 0, ((zz - a) * d.conj()).real / dd, 0.0)
            t = np.clip(t, 0.0, 1.0)
            best[s:s + chunk] = np.min(np.abs(zz - (a + t * d)), axis=1)
        return best

    def to_json(self):
        return [[[float(x.real), float(x.imag)] for x in p] for p in self.polylines]

    @classmethod
    def from_json(cls, obj):
        legs = obj["legs"] if isinstance(obj, dict) else obj
        return cls([np.array([complex(x, y) for x, y in leg]) for leg in legs])


# ---------------------------------------------------------------- roots


def _companion_roots(full):
    """Eigenvalues of the (LAPACK-balanced) companion matrix of a monic polynomial."""
    k = full.size - 1
    if k == 1:
        return np.array([-full[0]])
    C = np.zeros((k, k), dtype=complex)
    C[1:, :-1] = np.eye(k - 1)
    C[:, -1] = -full[:-1]
    return np.linalg.eigvals(C)


def extended_poly(tail, k, source="P", prec=None):
    """Monic ``P_k`` or ``F_k`` carrying Arb coefficients from the recurrence."""
    prec = prec or _arb.default_prec(k)
    hp = _arb.recurrence_poly(tail.padded(k + 1), k, prec, faber=(source == "F"))
    c = np.array([_arb.to_complex(x) for x in hp.coeffs()[:-1]])
    return MonicPoly(c, hp_coeffs=hp, truncation_order=tail.truncation_order)


def roots(p, precision="standard", maxsweeps=MAX_SWEEPS, prec=None):
    """All zeros of a monic polynomial with multiplicity.

    Parameters
    ----------
    p : MonicPoly
    precision : {"standard", "extended"}
        ``"extended"`` polishes the companion eigenvalues by simultaneous
        Newton (Aberth) sweeps in multiprecision, using ``p.hp_coeffs`` when
        present, and accepts when ``|p(z)| <= 1e-20 max|coeff|``.
    maxsweeps : int
        Iteration cap for the polish.

    Returns
    -------
    ZeroEnsemble
    """
    if precision not in PRECISIONS:
        raise ValueError(f"precision must be one of {PRECISIONS}")
    k = p.degree
    if k < 1:
        raise ValueError("a constant has no zeros")
    if np.all(p.coeffs == 0):
        return ZeroEnsemble(np.zeros(k, dtype=complex), meta={"precision": precision})
    start = _companion_roots(p.full)
    if precision == "standard":
        return ZeroEnsemble(start, meta={"precision": precision})
    prec = max(MIN_EXTENDED_BITS, prec or _arb.default_prec(k))
    hp = p.hp_coeffs
    with _arb.flint.ctx.workprec(prec):
        if hp is None:
            hp = _arb.flint.acb_poly([_arb.acb(c) for c in p.full])
        cmax = max(float(c.abs_upper().mid()) for c in hp.coeffs())
        zs, sweeps, ok = _arb.aberth_polish(hp, start, prec, maxsweeps)
        vals = np.array([_arb.to_complex(z) for z in zs])
        bound = math.log2(RESIDUAL_FACTOR * cmax)
        res = [_arb.residual_ok(hp, z, bound) for z in zs]
    if not ok or not all(r[0] for r in res):
        worst = max(r[1] for r in res)
        raise RootConvergenceError(
            f"root polish failed after {sweeps} sweeps (max residual {worst:.3g})", vals)
    return ZeroEnsemble(vals, meta={"precision": precision, "sweeps": sweeps, "prec": prec})


def pk_zeros_via_eigen(tail, k, precision="standard"):
    """Zeros of ``P_k`` as eigenvalues of the ``k x k`` Toeplitz section."""
    if k < 1:
        raise ValueError("k must be at least 1")
    A = toeplitz_matrix(tail, k)
    if precision == "standard":
        vals = np.linalg.eigvals(A)
        if not np.all(np.isfinite(vals)):
            raise np.linalg.LinAlgError("eigenvalue solver did not converge")
        return ZeroEnsemble(vals, meta={"precision": precision})
    if precision != "extended":
        raise ValueError(f"precision must be one of {PRECISIONS}")
    vals, prec = _arb.eigvals(A)
    return ZeroEnsemble(vals, meta={"precision": precision, "prec": prec})


def zeros_of(tail, k, source="P", precision="standard"):
    """Zeros of ``P_k`` (``source="P"``) or ``F_k`` (``"F"``) by polynomial roots."""
    if source not in ("P", "F"):
        raise ValueError("source must be 'P' or 'F'")
    if precision == "extended":
        p = extended_poly(tail, k, source)
    else:
        p = toeplitz_pk(tail, k) if source == "P" else faber_poly(tail, k)
    ens = roots(p, precision)
    return ZeroEnsemble(ens.zeros, source, ens.meta)


def multiset_distance(a, b):
    """Largest pair distance under the matching minimizing the summed distances."""
    a = np.asarray(getattr(a, "zeros", a), dtype=complex).ravel()
    b = np.asarray(getattr(b, "zeros", b), dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError("multisets of different size")
    cost = np.abs(a[:, None] - b[None, :])
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max())


# ------------------------------------------------------------ diagnostics


def _sup_distance_from_set(target, pts, tol=1e-10):
    """``sup_{x in target} dist(x, pts)`` by Lipschitz branch and bound."""
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))

    def dist(x):
        d, _ = tree.query(np.column_stack([x.real, x.imag]))
        return d

    a, b = target.segments()
    best = float(dist(np.concatenate([a, b])).max())
    # intervals (start, end) still able to beat best; f is 1-Lipschitz
    lo, hi = a[a != b], b[a != b]
    while lo.size:
        mid = (lo + hi) / 2
        fm = dist(mid)
        best = max(best, float(fm.max()))
        half = np.abs(hi - lo) / 2
        keep = (fm + half > best + tol) & (half > tol)
        lo, hi, mid = lo[keep], hi[keep], mid[keep]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    return best


def hausdorff(ensemble, target):
    """Directed distances ``(sup_zeros dist(., target), sup_target dist(., zeros))``."""
    pts = np.asarray(getattr(ensemble, "zeros", ensemble), dtype=complex).ravel()
    if pts.size == 0:
        raise ValueError("empty zero set")
    if target is None or len(target.polylines) == 0:
        raise ValueError("empty target")
    to = float(np.max(target.distance(pts)))
    return to, _sup_distance_from_set(target, pts)


def fraction_outside(ensemble, target, radius):
    """Share of zeros farther than ``radius`` from ``target``."""
    pts = np.asarray(getattr(ensemble, "zeros", ensemble), dtype=complex).ravel()
    return float(np.mean(target.distance(pts) > radius))


def arcsine_cdf(x, lo=-1.0, hi=1.0):
    """CDF of the equilibrium (arcsine) measure of ``[lo, hi]``."""
    t = np.clip((2 * np.asarray(x, dtype=float) - lo - hi) / (hi - lo), -1.0, 1.0)
    return 0.5 + np.arcsin(t) / np.pi


REFERENCE_MEASURES = {"arcsine": arcsine_cdf}


def cdf_discrepancy(ensemble, reference="arcsine", imag_tol=1e-3):
    """Kolmogorov distance between the real projection of the zeros and a reference law.

    Parameters
    ----------
    ensemble : ZeroEnsemble or array_like
    reference : str or callable
        A name in ``REFERENCE_MEASURES`` or a vectorized CDF.
    imag_tol : float
        Zeros with ``|Im| > imag_tol`` make the projection meaningless and
        raise ``ValueError``.
    """
    z = np.asarray(getattr(ensemble, "zeros", ensemble), dtype=complex).ravel()
    if np.max(np.abs(z.imag)) > imag_tol:
        raise ValueError(f"zeros leave the real axis by {np.max(np.abs(z.imag)):.3g}")
    cdf = REFERENCE_MEASURES[reference] if isinstance(reference, str) else reference
    x = np.sort(z.real)
    n = x.size
    F = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def potential_estimate(p, z, return_flag=False):
    """``-(1/deg) log|p(z)|``; ``+inf`` (flagged, no exception) at a zero of ``p``."""
    z = np.asarray(z, dtype=complex)
    v = np.abs(p(z))
    hit = v == 0
    with np.errstate(divide="ignore"):
        out = np.where(hit, np.inf, -np.log(np.where(hit, 1.0, v)) / p.degree)
    out = out[()] if out.ndim == 0 else out
    if return_flag:
        return out, (hit[()] if hit.ndim == 0 else hit)
    return out


def delta_via_limit(tail, z, kmax, source="P"):
    """``|Q_k(z)|^{1/k}`` for ``k = 1..kmax`` by the value recurrence in log scale.

    Returns an array of shape ``(kmax,)`` for scalar ``z`` and
    ``(kmax, n)`` for ``n`` points.
    """
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    scalar = np.ndim(z) == 0
    logs = (pk_log_abs if source == "P" else fk_log_abs)(tail, z, kmax)
    k = np.arange(1, kmax + 1)[:, None]
    out = np.exp(logs / k)
    return out[:, 0] if scalar else out


# ------------------------------------------------------------------- CSV

def write_zeros_csv(path, ensembles):
    rows = []
    for ens in ensembles:
        order = np.lexsort((ens.zeros.imag, ens.zeros.real))
        rows.extend((ens.k, z.real, z.imag, ens.source) for z in ens.zeros[order])
    _io.write_csv(path, ("k", "re", "im", "source"), rows)


def write_convergence_csv(path, rows):
    """``rows`` of ``(k, hausdorff_to, hausdorff_from, cdf_disc)``."""
    _io.write_csv(path, ("k", "hausdorff_to", "hausdorff_from", "cdf_disc"), rows)


def write_potential_grid_csv(path, z, p_est, delta):
    z = np.asarray(z).ravel()
    p_est = np.asarray(p_est, dtype=float).ravel()
    delta = np.asarray(delta, dtype=float).ravel()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        gap = np.abs(p_est + np.log(delta))
    _io.write_csv(path, ("re", "im", "p_k_est", "delta_exact", "abs_gap"),
                  zip(z.real, z.imag, p_est, delta, gap))
