"""Normalized universal covering of the complement of three points.

The covering is assembled as

    g(w) = T^{-1}(G(phase * r / w)),    G = lambda o M,

where ``T`` sends the three points to ``0, 1, inf``, ``lambda`` is the
modular lambda function and ``M`` is the Moebius map of the unit disk onto
the upper half-plane with ``M(0) = tau0``, ``lambda(tau0) = T(inf)``.  The
radius ``r`` and the unimodular ``phase`` are fixed in closed form by the
normalization ``g(w) = w + O(1)`` at infinity.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import modular
from .series import (LaurentTail, Mobius, coeffs_from_samples, eval_laurent, sample_circle,
                     tail_from_json, tail_to_json)

__all__ = [
    "ThreePointSet",
    "CoveringMap",
    "DeckGroup",
    "CoveringError",
    "lambda_fn",
    "invert_lambda",
    "mobius_to_standard",
    "build_covering",
    "eval_g",
    "laurent_of_g",
    "deck_generators",
    "reduced_words",
    "orbit_of_center",
    "pole_radius",
    "covering_to_json",
    "covering_from_json",
]

lambda_fn = modular.lambda_fn
invert_lambda = modular.invert_lambda

MAX_WORD_LEN = 12
DEFAULT_ORDER = 512
# coefficient errors grow like eps * (radius / rho0)^k, so sample close to rho0
RADIUS_FACTOR = 1.02


class CoveringError(RuntimeError):
    pass


@dataclass(frozen=True)
class ThreePointSet:
    p1: complex
    p2: complex
    p3: complex

    def __post_init__(self):
        pts = [complex(p) for p in (self.p1, self.p2, self.p3)]
        for name, p in zip(("p1", "p2", "p3"), pts):
            object.__setattr__(self, name, p)
            if not (math.isfinite(p.real) and math.isfinite(p.imag)):
                raise ValueError("points must be finite")
        for x, y in itertools.combinations(pts, 2):
            if abs(x - y) < 1e-9:
                raise ValueError("points must be pairwise distinct")

    @classmethod
    def parse(cls, text):
        """From ``"p1,p2,p3"`` using Python complex literals, e.g. ``"-1,0,1"``."""
        parts = [s.strip().replace(" ", "").replace("i", "j") for s in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma separated points, got {text!r}")
        return cls(*(complex(s) for s in parts))

    @property
    def points(self):
        return np.array([self.p1, self.p2, self.p3])

    @property
    def collinear(self):
        q = (self.p3 - self.p1) / (self.p2 - self.p1)
        return abs(q.imag) <= 1e-12 * max(1.0, abs(q))

    def scaled(self, s):
        return ThreePointSet(s * self.p1, s * self.p2, s * self.p3)


@dataclass(frozen=True)
class DeckGroup:
    generators: tuple
    word_cap: int = MAX_WORD_LEN

    @property
    def letters(self):
        g1, g2 = self.generators
        return (g1, g1.inverse().normalized(), g2, g2.inverse().normalized())


@dataclass(frozen=True, eq=False)
class CoveringMap:
    E: ThreePointSet
    T: Mobius
    a: complex
    tau0: complex
    theta_phase: complex
    r: float
    rho0: float = math.nan
    tail: LaurentTail = field(default=None, repr=False)

    @property
    def to_half_plane(self):
        """``M``: unit disk onto the upper half-plane with ``M(0) = tau0``."""
        return _disk_to_half_plane(self.tau0)

    @property
    def T_inv(self):
        return self.T.inverse()

    def G(self, u):
        """Covering of the punctured plane ``C minus {0, 1}`` by the unit disk."""
        return lambda_fn(self.to_half_plane(np.asarray(u, dtype=complex)))

    def G_with_derivative(self, u):
        u = np.asarray(u, dtype=complex)
        m = self.to_half_plane
        lam, dlam = modular.lambda_with_derivative(m(u))
        return lam, dlam * m.derivative(u)

    def disk_point(self, w):
        return self.theta_phase * self.r / np.asarray(w, dtype=complex)

    def __call__(self, w):
        return eval_g(self, w)


def _disk_to_half_plane(tau0):
    # u -> (tau0 - conj(tau0) u) / (1 - u)
    return Mobius(-tau0.conjugate(), tau0, -1, 1).normalized()


def mobius_to_standard(E):
    """Moebius ``T`` with ``T(E) = {0, 1, inf}`` and ``a = T(inf)`` in ``H+`` or ``(-inf, 0)``.

    Orderings of ``(p1, p2, p3)`` are tried lexicographically; the first one
    whose ``a`` is admissible wins.
    """
    pts = E.points
    collinear = E.collinear
    for i, j, k in itertools.permutations(range(3)):
        pi, pj, pk = pts[i], pts[j], pts[k]
        # T(p_i) = 0, T(p_j) = 1, T(p_k) = inf
        T = Mobius(pj - pk, -pi * (pj - pk), pj - pi, -pk * (pj - pi)).normalized()
        a = (pj - pk) / (pj - pi)
        if collinear:
            if abs(a.imag) <= 1e-9 * abs(a) and a.real < 0:
                return T, complex(a.real, 0.0)
        elif a.imag > 0:
            return T, a
    raise CoveringError("no ordering sends infinity into H+ or the negative axis")


def build_covering(E, order=DEFAULT_ORDER, radius_factor=RADIUS_FACTOR):
    """Construct the normalized covering map of ``C minus E`` for three points ``E``.

    Parameters
    ----------
    E : ThreePointSet
    order : int
        Truncation order of the cached Laurent tail.
    radius_factor : float
        The tail is sampled on ``|w| = radius_factor * rho0``.
    """
    T, a = mobius_to_standard(E)
    tau0 = complex(invert_lambda(a))
    m = _disk_to_half_plane(tau0)
    _, dlam = modular.lambda_with_derivative(tau0)
    c = complex(dlam) * complex(m.derivative(0))
    if abs(c) < 1e-14:
        raise CoveringError("covering map is degenerate at the base point")
    ti = T.inverse()
    # T^{-1}(zeta) = A / (zeta - a) + B + O(zeta - a)
    A = (ti.a * a + ti.b) / ti.c
    r = abs(A / c)
    phase = A / (c * r)
    phase /= abs(phase)
    cov = CoveringMap(E, T, a, tau0, phase, r)
    rho0 = pole_radius(cov)
    cov = CoveringMap(E, T, a, tau0, phase, r, rho0)
    tail = laurent_of_g(cov, order, radius=radius_factor * rho0)
    return CoveringMap(E, T, a, tau0, phase, r, rho0, tail)


def eval_g(cov, w):
    """``g(w)`` for ``|w| > r``."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) <= cov.r):
        raise ValueError("g is defined only on |w| > r")
    zeta = np.atleast_1d(cov.G(cov.disk_point(w)))
    out = cov.T_inv(zeta).reshape(w.shape)
    return out[()] if out.ndim == 0 else out


def laurent_of_g(cov, n, radius=None, samples=None, check=True):
    """Laurent tail of ``g`` of order ``n`` from samples on ``|w| = radius``.

    The expansion at infinity converges only outside the outermost pole, so
    the circle must satisfy ``radius > rho0``.  The result is checked
    against ``g`` on the circle ``1.1 * radius``.
    """
    if radius is None:
        radius = RADIUS_FACTOR * cov.rho0
    if math.isfinite(cov.rho0) and radius <= cov.rho0:
        raise CoveringError(
            f"sampling radius {radius:.6g} must exceed the pole radius {cov.rho0:.6g}")
    if samples is None:
        # aliasing decays like (rho0 / radius)^M
        ratio = cov.rho0 / radius if math.isfinite(cov.rho0) else 0.5
        need = max(4 * (n + 1), int(math.ceil(40 / -math.log(ratio))) + n + 1)
        samples = 1 << math.ceil(math.log2(need))
    tail = coeffs_from_samples(sample_circle(lambda w: eval_g(cov, w), radius, samples), n)
    if check:
        w = 1.1 * radius * np.exp(2j * np.pi * (np.arange(64) + 0.5) / 64)
        err = float(np.max(np.abs(eval_laurent(tail, w) - eval_g(cov, w)) / np.abs(w)))
        if err > 1e-8:
            raise CoveringError(f"Laurent reconstruction error {err:.3g} exceeds 1e-8")
    return tail


def deck_generators(cov, check=True):
    """Disk generators ``M^{-1} o gamma o M`` of the deck group of ``G``.

    ``gamma`` runs over ``tau -> tau + 2`` and ``tau -> tau / (2 tau + 1)``.
    """
    m = cov.to_half_plane
    gens = tuple((m.inverse() @ g @ m).normalized() for g in modular.GAMMA2_GENERATORS)
    group = DeckGroup(gens)
    if check:
        rng = np.random.default_rng(12345)
        u = 0.6 * np.sqrt(rng.uniform(size=32)) * np.exp(2j * np.pi * rng.uniform(size=32))
        base = cov.G(u)
        for g in group.letters:
            err = np.max(np.abs(cov.G(g(u)) - base) / np.maximum(1, np.abs(base)))
            if not err <= 1e-8:
                raise CoveringError(f"deck invariance violated ({err:.3g})")
    return group


def _letter_matrices(group):
    return np.stack([g.normalized().matrix for g in group.letters])


def reduced_words(group, max_len):
    """All reduced words of length ``<= max_len`` as stacked 2x2 matrices.

    Returns ``(matrices, lengths)``; index 0 is the identity.  Letters are
    ordered ``g1, g1^-1, g2, g2^-1``.
    """
    if max_len > group.word_cap:
        raise ValueError(f"word length {max_len} exceeds the cap {group.word_cap}")
    letters = _letter_matrices(group)
    inverse = np.array([1, 0, 3, 2])
    mats = [np.eye(2, dtype=complex)[None]]
    lengths = [np.zeros(1, dtype=int)]
    cur = letters.copy()
    last = np.arange(4)
    for length in range(1, max_len + 1):
        mats.append(cur)
        lengths.append(np.full(len(cur), length))
        if length == max_len:
            break
        nxt, nlast = [], []
        for i in range(4):
            keep = last != inverse[i]
            nxt.append(cur[keep] @ letters[i])
            nlast.append(np.full(int(keep.sum()), i))
        cur = np.concatenate(nxt)
        last = np.concatenate(nlast)
    return np.concatenate(mats), np.concatenate(lengths)


def apply_stack(mats, u):
    """Apply every matrix in ``mats`` (k, 2, 2) to every point of ``u`` -> (k, n)."""
    u = np.asarray(u, dtype=complex)[None, :]
    return (mats[:, 0, 0, None] * u + mats[:, 0, 1, None]) / (mats[:, 1, 0, None] * u + mats[:, 1, 1, None])


def orbit_of_center(cov, word_len, group=None):
    """Distinct points ``gamma(0)`` over reduced words of length ``<= word_len``.

    These are exactly the disk points where ``G`` takes the value ``a``;
    the nonzero ones correspond to the finite poles of ``g``.
    """
    if word_len < 0 or word_len > MAX_WORD_LEN:
        raise ValueError(f"word_len must lie in [0, {MAX_WORD_LEN}]")
    group = group or deck_generators(cov)
    mats, _ = reduced_words(group, word_len)
    pts = mats[:, 0, 1] / mats[:, 1, 1]
    key = np.round(pts.real * 1e12) + 1j * np.round(pts.imag * 1e12)
    _, idx = np.unique(key, return_index=True)
    pts = pts[np.sort(idx)]
    return pts


def pole_radius(cov, group=None):
    """Largest modulus ``rho0`` of the finite poles of ``g``.

    Equals ``r / min |u|`` over the nonzero center orbit; the minimum is
    required to be stable across word lengths 4, 5 and 6.
    """
    group = group or deck_generators(cov)
    mins = []
    for length in (4, 5, 6):
        pts = orbit_of_center(cov, length, group)
        mins.append(np.min(np.abs(pts[np.abs(pts) > 1e-12])))
    if max(mins) - min(mins) > 1e-12:
        raise CoveringError(f"minimal orbit modulus did not stabilize: {mins}")
    return float(cov.r / mins[-1])


def _c(z):
    return [float(z.real), float(z.imag)]


def covering_to_json(cov):
    return {
        "points": [_c(p) for p in cov.E.points],
        "T": cov.T.to_json(),
        "a": _c(cov.a),
        "tau0": _c(cov.tau0),
        "phase": _c(cov.theta_phase),
        "r": float(cov.r),
        "rho0": float(cov.rho0),
        "tail": tail_to_json(cov.tail) if cov.tail is not None else None,
    }


def covering_from_json(obj):
    pts = [complex(x, y) for x, y in obj["points"]]
    tail = tail_from_json(obj["tail"]) if obj.get("tail") else None
    return CoveringMap(ThreePointSet(*pts), Mobius.from_json(obj["T"]), complex(*obj["a"]),
                       complex(*obj["tau0"]), complex(*obj["phase"]), float(obj["r"]),
                       float(obj["rho0"]), tail)
