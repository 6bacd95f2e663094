"""Hyperbolic geometry of the unit disk behind the covering map.

All disk points here live in the ``u``-disk of ``G = lambda o M``, which is
tied to the exterior variable by ``w = phase * r / u``.  The Dirichlet
domain of the deck group centred at ``u = 0`` is a hexagon whose sides are
bisectors of ``0`` and six orbit points; its image under ``G`` (pulled back
by ``T``) gives the predicted limit set: a tripod for three non-collinear
points and the hull segment for collinear ones.

``delta_exact`` computes ``delta(z) = r / |u*|`` where ``u*`` is the
preimage of ``T(z)`` of least modulus, found by descending through the
orbit; ``classify_point`` counts how many orbit points attain that
modulus.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import modular
from .covering import apply_stack, deck_generators, reduced_words
from .series import Mobius
from .zeros import PolylineSet

__all__ = [
    "GeometryError",
    "Geodesic",
    "Arc",
    "Hexagon",
    "DeltaResult",
    "hyp_dist",
    "bisector",
    "triangle_sides",
    "six_centers",
    "dirichlet_hexagon",
    "tripod",
    "segment_prediction",
    "predict",
    "delta_exact",
    "delta_map",
    "classify_point",
    "ridge_scan",
]

TIE_TOL = 1e-8
AMBIGUOUS_TOL = 1e-5
DESCENT_TOL = 1e-13
MAX_DESCENT_STEPS = 10_000
COUNT_WORD_LEN = 5
DESCENT_WORD_LEN = 2
PUNCTURE_TOL = 1e-9
LEG_END_TOL = 1e-3


class GeometryError(RuntimeError):
    pass


def hyp_dist(u, v):
    """Hyperbolic distance ``2 atanh(|u - v| / |1 - conj(u) v|)`` in the unit disk."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if np.any(np.abs(u) >= 1) or np.any(np.abs(v) >= 1):
        raise ValueError("points must lie inside the unit disk")
    d = 2 * np.arctanh(np.abs(u - v) / np.abs(1 - np.conj(u) * v))
    return d[()] if d.ndim == 0 else d


@dataclass(frozen=True)
class Geodesic:
    """A disk geodesic: circle orthogonal to ``|u| = 1`` or a diameter.

    For the circle form ``center`` and ``radius`` are set; for a diameter
    ``center`` is the unit direction and ``radius`` is ``inf``.
    """

    center: complex
    radius: float
    orientation: int = 1

    def __post_init__(self):
        if math.isfinite(self.radius):
            if abs(abs(self.center) ** 2 - 1 - self.radius**2) > 1e-10 * max(1, self.radius**2):
                raise ValueError("circle is not orthogonal to the unit circle")
        elif abs(abs(self.center) - 1) > 1e-12:
            raise ValueError("diameter direction must be a unit vector")

    @property
    def is_diameter(self):
        return not math.isfinite(self.radius)

    @classmethod
    def through_ideal(cls, e1, e2):
        """Geodesic with ideal endpoints ``e1, e2`` on the unit circle."""
        e1, e2 = complex(e1) / abs(e1), complex(e2) / abs(e2)
        cos = (e1 * e2.conjugate()).real
        if cos < -1 + 1e-14:
            return cls(e1, math.inf)
        c = (e1 + e2) / (1 + cos)
        return cls(c, math.sqrt(max(abs(c) ** 2 - 1, 0.0)))

    def distance(self, z):
        """Euclidean distance of ``z`` from the supporting circle or line."""
        z = np.asarray(z, dtype=complex)
        if self.is_diameter:
            return np.abs((z * np.conj(self.center)).imag)
        return np.abs(np.abs(z - self.center) - self.radius)

    def ideal_points(self):
        if self.is_diameter:
            return self.center, -self.center
        c, rho = self.center, self.radius
        half = math.atan2(rho, 1.0)  # half the angle the arc subtends at the origin
        e = c / abs(c)
        return e * complex(math.cos(half), math.sin(half)), e * complex(math.cos(half), -math.sin(half))

    def intersect(self, other):
        """The intersection point inside the disk, or ``None``."""
        if self.is_diameter and other.is_diameter:
            return 0j
        if self.is_diameter:
            return other.intersect(self)
        c1, r1 = self.center, self.radius
        if other.is_diameter:
            d = other.center
            # points c1-projection onto the line t d, then offset along d
            t0 = (c1 * d.conjugate()).real
            h2 = r1**2 - abs(c1 - t0 * d) ** 2
            if h2 < 0:
                return None
            cands = [(t0 + s * math.sqrt(h2)) * d for s in (1, -1)]
        else:
            c2, r2 = other.center, other.radius
            dvec = c2 - c1
            dist = abs(dvec)
            if dist == 0 or dist > r1 + r2 or dist < abs(r1 - r2):
                return None
            a = (r1**2 - r2**2 + dist**2) / (2 * dist)
            h = math.sqrt(max(r1**2 - a**2, 0.0))
            base = c1 + a * dvec / dist
            perp = 1j * dvec / dist
            cands = [base + h * perp, base - h * perp]
        inside = [p for p in cands if abs(p) < 1]
        return min(inside, key=abs) if inside else None

    def angle(self, z):
        return np.angle(np.asarray(z, dtype=complex) - self.center)

    def points(self, start, end, t):
        """Points along the geodesic from ``start`` to ``end`` at parameters ``t`` in [0, 1]."""
        t = np.asarray(t, dtype=float)
        if self.is_diameter:
            return start + (end - start) * t
        a0 = float(self.angle(start))
        a1 = float(self.angle(end))
        da = (a1 - a0 + math.pi) % (2 * math.pi) - math.pi  # the arc inside the disk
        return self.center + self.radius * np.exp(1j * (a0 + da * t))


def bisector(zeta):
    """Geodesic of points hyperbolically equidistant from ``0`` and ``zeta``."""
    zeta = complex(zeta)
    m = abs(zeta)
    if m == 0:
        raise ValueError("the bisector of 0 with itself is undefined")
    if m >= 1:
        raise ValueError("zeta must lie inside the unit disk")
    t = math.tanh(math.atanh(m) / 2)  # hyperbolic midpoint of [0, zeta]
    e = zeta / m
    return Geodesic((1 + t * t) / (2 * t) * e, (1 - t * t) / (2 * t))


# -------------------------------------------------------------- triangles


def _reflection(kind, c, rho=None):
    """Real matrix ``A`` such that the reflection is ``tau -> A(conj(tau))``."""
    if kind == "line":
        return np.array([[-1.0, 2 * c], [0.0, 1.0]])
    return np.array([[c, rho * rho - c * c], [1.0, -c]])


def triangle_sides(tau0):
    """Sides and cusps of the ideal Gamma(2) triangle containing ``tau0``.

    Returns ``(reflections, cusps)``: one reflection matrix per side, and
    ``cusps[(j, k)]`` the ideal vertex shared by sides ``j`` and ``k``.
    """
    x = complex(tau0).real
    if x > 1e-12:
        # vertices 0, 1, inf: Re = 0, Re = 1 and |tau - 1/2| = 1/2
        refl = [_reflection("line", 0.0), _reflection("line", 1.0), _reflection("circle", 0.5, 0.5)]
        ends = [(0.0, math.inf), (1.0, math.inf), (0.0, 1.0)]
    elif x < -1e-12:
        refl = [_reflection("line", 0.0), _reflection("line", -1.0), _reflection("circle", -0.5, 0.5)]
        ends = [(0.0, math.inf), (-1.0, math.inf), (-1.0, 0.0)]
    else:
        raise GeometryError("base point lies on a triangle side (collinear configuration)")
    cusps = {}
    for j in range(3):
        for k in range(3):
            if j != k:
                (shared,) = set(ends[j]) & set(ends[k])
                cusps[(j, k)] = shared
    return refl, cusps


def _pairing_elements(cov):
    """Disk Moebius maps ``M^{-1} A_j A_k M`` for ordered side pairs ``(j, k)``."""
    refl, cusps = triangle_sides(cov.tau0)
    m = cov.to_half_plane
    minv = m.inverse()
    out = {}
    for j in range(3):
        for k in range(3):
            if j != k:
                A = refl[j] @ refl[k]
                g = Mobius(A[0, 0], A[0, 1], A[1, 0], A[1, 1])
                out[(j, k)] = (minv @ g @ m).normalized()
    return out, cusps


def six_centers(cov, check=True):
    """Orbit points ``zeta_{j,k}`` of ``0`` two reflections away, keyed by ``(j, k)``.

    ``zeta_{j,k}`` is the disk image of ``A_j A_k tau0`` where ``A_j`` is the
    reflection in side ``j`` of the triangle containing ``tau0``.
    """
    if cov.E.collinear:
        raise GeometryError("six centers require a non-collinear configuration")
    elems, _ = _pairing_elements(cov)
    centers = {key: complex(g(0j)) for key, g in elems.items()}
    if check:
        vals = np.array(list(centers.values()))
        err = float(np.max(np.abs(cov.G(vals) - cov.a)) / max(1.0, abs(cov.a)))
        if err > 1e-8:
            raise GeometryError(f"centers do not map to a (error {err:.3g})")
        d = np.abs(vals[:, None] - vals[None, :]) + np.eye(6)
        if d.min() < 1e-6:
            raise GeometryError("centers are not distinct")
    return centers


# ---------------------------------------------------------------- hexagon


@dataclass(frozen=True)
class Arc:
    geodesic: Geodesic
    start: complex
    end: complex
    center_key: tuple

    def points(self, t):
        return self.geodesic.points(self.start, self.end, t)


@dataclass(frozen=True)
class Hexagon:
    """Dirichlet hexagon; ``arcs[i]`` joins ``vertices[i]`` to ``vertices[i+1]``.

    Even positions of ``vertices`` are finite, odd positions ideal.
    """

    arcs: tuple
    vertices: tuple
    centers: dict

    @property
    def finite_vertices(self):
        return self.vertices[0::2]

    @property
    def ideal_vertices(self):
        return self.vertices[1::2]

    def contains(self, u, tol=1e-12):
        """Closed-domain test ``d(u, 0) <= d(u, zeta)`` for all six centers."""
        u = np.asarray(u, dtype=complex)
        ok = np.abs(u) < 1
        for zeta in self.centers.values():
            # closer to 0 iff outside the bisector circle (same side as 0)
            g = bisector(zeta)
            ok &= np.abs(u - g.center) >= g.radius - tol
        return ok


def dirichlet_hexagon(centers, cusps=None, tol=1e-9):
    """Intersect the six half-planes ``d(w, 0) < d(w, zeta)``.

    Parameters
    ----------
    centers : dict
        ``{(j, k): zeta_{j,k}}`` as returned by ``six_centers``.
    cusps : dict, optional
        Disk ideal vertex shared by the bisectors ``(j, k)`` and ``(k, j)``.
        When omitted it is taken as the common ideal endpoint of the two
        bisectors.

    Returns
    -------
    Hexagon
        Cyclic order ``V_0, c_01, V_1, c_12, V_2, c_20`` where ``V_j`` is the
        finite vertex on the bisectors ``(j, k)`` and ``(j, k')``.
    """
    if len(centers) != 6:
        raise GeometryError(f"need six centers, got {len(centers)}")
    bis = {key: bisector(z) for key, z in centers.items()}
    verts = {}
    for j in range(3):
        k, kk = [x for x in range(3) if x != j]
        v = bis[(j, k)].intersect(bis[(j, kk)])
        if v is None:
            raise GeometryError(f"bisectors ({j},{k}) and ({j},{kk}) do not meet in the disk")
        d = [hyp_dist(v, 0)] + [hyp_dist(v, centers[(j, x)]) for x in (k, kk)]
        if max(d) - min(d) > 1e-9 * max(1, max(d)):
            raise GeometryError(f"finite vertex {j} is not equidistant: {d}")
        verts[j] = complex(v)
    ideal = {}
    for j, k in ((0, 1), (1, 2), (2, 0)):
        if cusps is not None:
            c = complex(cusps[(j, k)])
        else:
            ends = [np.array(bis[key].ideal_points()) for key in ((j, k), (k, j))]
            dd = np.abs(ends[0][:, None] - ends[1][None, :])
            i0, i1 = np.unravel_index(np.argmin(dd), dd.shape)
            c = complex(ends[0][i0])
        for key in ((j, k), (k, j)):
            if bis[key].distance(c) > tol:
                raise GeometryError(f"cusp {j}{k} is off bisector {key}")
        ideal[(j, k)] = c
    vertices, arcs = [], []
    for j, k in ((0, 1), (1, 2), (2, 0)):
        c = ideal[(j, k)]
        vertices += [verts[j], c]
        arcs += [Arc(bis[(j, k)], verts[j], c, (j, k)), Arc(bis[(k, j)], c, verts[k], (k, j))]
    for i, arc in enumerate(arcs):
        if abs(arc.end - arcs[(i + 1) % 6].start) > tol:
            raise GeometryError("hexagon arcs do not close up")
    hexagon = Hexagon(tuple(arcs), tuple(vertices), dict(centers))
    if not hexagon.contains(0j):
        raise GeometryError("origin outside the hexagon")
    for i, v in enumerate(vertices):
        finite = abs(v) < 1 - 1e-12
        if finite != (i % 2 == 0):
            raise GeometryError("finite and ideal vertices do not alternate")
    return hexagon


def build_hexagon(cov):
    centers = six_centers(cov)
    _, cusps_h = _pairing_elements(cov)
    minv = cov.to_half_plane.inverse()
    cusps = {key: complex(minv(complex(c) if math.isfinite(c) else complex(math.inf, 0)))
             for key, c in cusps_h.items()}
    return dirichlet_hexagon(centers, cusps)


# ----------------------------------------------------------------- tripod


def _cusp_image(cov, c):
    """Puncture reached at the half-plane cusp ``c``: lambda is 0 at inf, 1 at 0, inf at odd integers."""
    if not math.isfinite(c):
        lam = 0j
    elif round(c) % 2 == 0:
        lam = 1 + 0j
    else:
        lam = complex(math.inf, 0)
    return complex(cov.T_inv(lam))


def _z_of_u(cov, u):
    ti = cov.T_inv
    with np.errstate(all="ignore"):
        lam = np.atleast_1d(cov.G(u))
        inv = 1 / lam
        # (A + B/lam) / (C + D/lam) stays finite as lam grows
        return np.where(np.abs(lam) > 1e8, (ti.a + ti.b * inv) / (ti.c + ti.d * inv),
                        (ti.a * lam + ti.b) / (ti.c * lam + ti.d))


def _leg(cov, arc, target, h, n0, end_tol):
    """Image polyline of ``arc`` (finite vertex -> cusp) stopping near ``target``."""
    t = list(np.linspace(0.0, 1.0, n0 + 1)[:-1])
    # march geometrically into the cusp until the image reaches the puncture
    step = 1.0 / n0
    while True:
        step /= 2
        zt = _z_of_u(cov, arc.points(1.0 - step))[0]
        if not np.isfinite(zt) or step < 1e-15:
            break
        t.append(1.0 - step)
        if abs(zt - target) <= end_tol:
            break
    t = np.array(t)
    z = _z_of_u(cov, arc.points(t))
    for _ in range(60):
        gap = np.abs(np.diff(z))
        bad = np.flatnonzero(gap > h)
        if bad.size == 0:
            break
        mids = (t[bad] + t[bad + 1]) / 2
        t = np.insert(t, bad + 1, mids)
        z = np.insert(z, bad + 1, _z_of_u(cov, arc.points(mids)))
    else:
        raise GeometryError("leg refinement did not reach the requested spacing")
    near = np.flatnonzero(np.abs(z - target) <= end_tol)
    if near.size == 0:
        raise GeometryError(f"leg does not approach {target} within {end_tol}")
    cut = near[0]
    z = np.append(z[:cut], target)  # snap the truncated end to the puncture
    return z


def tripod(cov, hexagon=None, pts_per_leg=64, h=0.01, end_tol=LEG_END_TOL):
    """Predicted limit set for three non-collinear points: legs from ``b'`` to ``p1, p2, p3``.

    Returns
    -------
    PolylineSet
        Three legs in the order of ``cov.E.points``.  ``h`` bounds the
        spacing between consecutive leg points.
    """
    if cov.E.collinear:
        raise GeometryError("tripod needs a non-collinear configuration")
    hexagon = hexagon or build_hexagon(cov)
    _, cusps_h = _pairing_elements(cov)
    cusp_z = {key: _cusp_image(cov, c) for key, c in cusps_h.items()}
    fv = np.array(hexagon.finite_vertices)
    bvals = cov.G(fv)
    if np.max(np.abs(bvals - bvals.mean())) > 1e-6 * max(1.0, abs(bvals.mean())):
        raise GeometryError(f"finite vertices have different images: {bvals}")
    b_prime = complex(cov.T_inv(np.atleast_1d(bvals.mean()))[0])
    elems, _ = _pairing_elements(cov)
    legs = {}
    for arc in hexagon.arcs[0::2]:
        j, k = arc.center_key
        # the paired side (k, j) is carried onto (j, k) by the (j, k) element
        partner = hexagon.arcs[[a.center_key for a in hexagon.arcs].index((k, j))]
        s = partner.points(np.linspace(0.02, 0.98, 17))
        moved = elems[(j, k)](s)
        err_geo = float(np.max(arc.geodesic.distance(moved)))
        g0 = cov.G(s)
        err_img = float(np.max(np.abs(cov.G(moved) - g0) / np.maximum(1, np.abs(g0))))
        if err_geo > 1e-9 or err_img > 1e-6:
            raise GeometryError(f"paired arcs disagree ({err_geo:.3g}, {err_img:.3g})")
        idx = int(np.argmin(np.abs(cov.E.points - cusp_z[(j, k)])))
        z = _leg(cov, arc, cov.E.points[idx], h, pts_per_leg, end_tol)
        z[0] = b_prime
        legs[idx] = z
    if sorted(legs) != [0, 1, 2]:
        raise GeometryError("legs do not end at three distinct punctures")
    return PolylineSet([legs[i] for i in range(3)], h)


def segment_prediction(E, h=0.01):
    """The hull segment of three collinear points, discretized with spacing ``<= h``."""
    if not E.collinear:
        raise GeometryError("segment prediction needs collinear points")
    pts = E.points
    d = np.abs(pts[:, None] - pts[None, :])
    i, j = np.unravel_index(np.argmax(d), d.shape)
    a, b = sorted((pts[i], pts[j]), key=lambda z: (z.real, z.imag))
    n = max(1, int(math.ceil(abs(b - a) / h)))
    return PolylineSet([a + (b - a) * np.arange(n + 1) / n], h)


def predict(cov, h=0.01):
    """Tripod or segment according to the configuration."""
    return segment_prediction(cov.E, h) if cov.E.collinear else tripod(cov, h=h)


# ------------------------------------------------------------------ delta


@dataclass(frozen=True)
class DeltaResult:
    delta: np.ndarray
    count: np.ndarray
    ambiguous: np.ndarray
    u: np.ndarray
    steps: int


def _descend(u, mats, tol=DESCENT_TOL, cap=MAX_DESCENT_STEPS):
    """Repeatedly apply the word that lowers ``|u|`` most until none does."""
    u = u.copy()
    for step in range(cap):
        v = apply_stack(mats, u)
        m = np.abs(v)
        best = np.argmin(m, axis=0)
        mb = m[best, np.arange(u.size)]
        move = np.abs(u) - mb > tol
        if not move.any():
            return u, step
        u[move] = v[best[move], np.flatnonzero(move)]
    raise GeometryError(f"orbit descent exceeded {cap} steps")


def _dz_du(cov, u):
    m = cov.to_half_plane
    lam, dlam = modular.lambda_with_derivative(m(u))
    ti = cov.T_inv
    return ti.derivative(lam) * dlam * m.derivative(u)


def delta_map(cov, z, tie_tol=TIE_TOL, radius=0.0, group=None, chunk=4096):
    """``delta`` and maximizer counts for many points.

    Parameters
    ----------
    tie_tol : float
        Orbit points whose log-modulus exceeds the minimum by at most this
        count as maximizers.
    radius : float
        Resolution of a grid scan.  A competitor also counts when its gap
        could close within ``radius`` of ``z``, judged from the gradients of
        the log-moduli.  Zero gives the pointwise classification.

    Points within ``1e-9`` of ``E`` get ``delta = r`` and ``count = 0``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    group = group or deck_generators(cov)
    near_e = np.min(np.abs(z[:, None] - cov.E.points[None, :]), axis=1) < PUNCTURE_TOL
    zz = np.where(near_e, cov.E.points[0] + 10.0, z)
    zeta = np.atleast_1d(cov.T(zz))
    tau = np.atleast_1d(modular.invert_lambda(zeta))
    u = cov.to_half_plane.inverse()(tau)
    desc, _ = reduced_words(group, DESCENT_WORD_LEN)
    full, _ = reduced_words(group, COUNT_WORD_LEN)
    delta = np.empty(z.size)
    count = np.zeros(z.size, dtype=int)
    amb = np.zeros(z.size, dtype=bool)
    ustar = np.empty(z.size, dtype=complex)
    steps = 0
    for s in range(0, z.size, chunk):
        uc = u[s:s + chunk]
        for _ in range(20):
            uc, n = _descend(uc, desc[1:])
            steps = max(steps, n)
            # a longer word may still lower |u|; resume the descent from there
            v = apply_stack(full[1:], uc)
            mv = np.abs(v)
            best = np.argmin(mv, axis=0)
            mb = mv[best, np.arange(uc.size)]
            lower = np.abs(uc) - mb > DESCENT_TOL
            if not lower.any():
                break
            uc = uc.copy()
            uc[lower] = v[best[lower], np.flatnonzero(lower)]
        else:
            raise GeometryError("descent with long words did not settle")
        v = apply_stack(full, uc)
        logm = np.log(np.abs(v))
        gap = logm - logm.min(axis=0)
        ties = gap <= tie_tol
        if radius > 0:
            dudz = 1 / _dz_du(cov, uc)
            a, b, c, d = (full[:, i, j, None] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
            dgamma = 1 / (c * uc[None, :] + d) ** 2
            slope = np.abs(dgamma * dudz[None, :]) / np.abs(v)
            smin = slope[np.argmin(logm, axis=0), np.arange(uc.size)]
            ties |= gap <= radius * (slope + smin[None, :])
        count[s:s + chunk] = ties.sum(axis=0)
        second = np.where(ties, np.inf, gap).min(axis=0)
        amb[s:s + chunk] = (second > tie_tol) & (second < AMBIGUOUS_TOL)
        ustar[s:s + chunk] = uc
        delta[s:s + chunk] = cov.r / np.abs(uc)
    delta[near_e] = cov.r
    count[near_e] = 0
    return DeltaResult(delta, count, amb, ustar, steps)


def delta_exact(cov, z, tie_tol=TIE_TOL):
    """``(delta(z), maximizer_count)`` with ``delta(z) = r / min |u|`` over preimages.

    Raises ``ValueError`` within ``1e-9`` of ``E``.
    """
    z = complex(z)
    if np.min(np.abs(cov.E.points - z)) < PUNCTURE_TOL:
        raise ValueError("delta is not defined on E")
    res = delta_map(cov, z, tie_tol)
    return float(res.delta[0]), int(res.count[0])


def classify_point(cov, z, tie_tol=TIE_TOL, radius=0.0):
    """``"C1"`` for a unique least-modulus preimage, ``"Cp_multiple"`` otherwise."""
    z = complex(z)
    if np.min(np.abs(cov.E.points - z)) < PUNCTURE_TOL:
        raise ValueError("classification is not defined on E")
    res = delta_map(cov, z, tie_tol, radius)
    return "C1" if res.count[0] == 1 else "Cp_multiple"


def grid(window, n):
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys)
    return (X + 1j * Y).ravel(), max((x1 - x0) / (n - 1), (y1 - y0) / (n - 1))


def ridge_scan(cov, n=200, window=(-1.5, 1.5, -1.5, 1.5), tie_tol=TIE_TOL):
    """Classify an ``n x n`` grid at the resolution of its half-diagonal.

    Returns ``(z, DeltaResult, h)``; ridge nodes are those with count >= 2.
    """
    z, h = grid(window, n)
    res = delta_map(cov, z, tie_tol, radius=h / math.sqrt(2))
    return z, res, h
