"""Value types for truncated Laurent tails, monic polynomials and Moebius maps."""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "INF",
    "is_inf",
    "LaurentTail",
    "MonicPoly",
    "Mobius",
    "CircleSamples",
    "eval_laurent",
    "sample_circle",
    "coeffs_from_samples",
    "mobius_apply",
    "mobius_inverse",
    "default_sample_count",
    "tail_to_json",
    "tail_from_json",
    "poly_to_json",
    "poly_from_json",
]

INF = complex(math.inf, 0.0)
DET_FLOOR = 1e-14


def is_inf(z):
    return cmath.isinf(complex(z))


def _pairs(values):
    return [[float(v.real), float(v.imag)] for v in np.asarray(values, dtype=complex).ravel()]


def _unpairs(pairs):
    if len(pairs) == 0:
        return np.zeros(0, dtype=complex)
    arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
    return arr[:, 0] + 1j * arr[:, 1]


@dataclass(frozen=True, eq=False)
class LaurentTail:
    """Coefficients ``b_0 .. b_N`` of ``g(w) = w + sum_k b_k w^{-k}``.

    ``residual`` is the reconstruction error on the sampling circle when the
    tail was obtained numerically, ``nan`` otherwise.
    """

    coeffs: np.ndarray
    residual: float = math.nan

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise ValueError("Laurent coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, mapping, order=None):
        """Build from ``{k: b_k}``; missing indices are zero."""
        n = max(mapping, default=0) if order is None else order
        c = np.zeros(n + 1, dtype=complex)
        for k, v in mapping.items():
            c[k] = v
        return cls(c)

    @property
    def truncation_order(self):
        return self.coeffs.size - 1

    @property
    def rho0_hat(self):
        k = np.arange(1, self.coeffs.size)
        mag = np.abs(self.coeffs[1:])
        nz = mag > 0
        if not nz.any():
            return 0.0
        return float(np.max(np.exp(np.log(mag[nz]) / k[nz])))

    def coeff(self, k):
        return self.coeffs[k] if 0 <= k < self.coeffs.size else 0j

    def padded(self, n):
        """Coefficients ``b_0 .. b_n``, zero beyond the truncation order."""
        out = np.zeros(n + 1, dtype=complex)
        m = min(n + 1, self.coeffs.size)
        out[:m] = self.coeffs[:m]
        return out

    def derivative(self, w):
        """``g'(w) = 1 - sum_k k b_k w^{-k-1}``."""
        w = np.asarray(w, dtype=complex)
        inv = 1 / w
        acc = np.zeros_like(w)
        for k in range(self.truncation_order, 0, -1):
            acc = (acc + k * self.coeffs[k]) * inv
        return 1 - acc * inv

    def __call__(self, w):
        return eval_laurent(self, w)

    def __eq__(self, other):
        return isinstance(other, LaurentTail) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"LaurentTail(N={self.truncation_order}, rho0_hat={self.rho0_hat:.6g})"


@dataclass(frozen=True, eq=False)
class MonicPoly:
    """Monic polynomial ``z^k + sum_{j<k} c_j z^j`` with ascending ``coeffs``.

    ``hp_coeffs`` optionally carries the same coefficients as an Arb polynomial
    when the polynomial was generated in extended precision.
    """

    coeffs: np.ndarray
    hp_coeffs: tuple = field(default=None, repr=False)
    truncation_order: int = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_full(cls, full, **kw):
        """From ascending coefficients including the (unit) leading one."""
        full = np.asarray(full, dtype=complex)
        lead = full[-1]
        if abs(lead - 1) > 1e-12 * max(1.0, abs(lead)):
            raise ValueError(f"leading coefficient {lead} is not 1")
        return cls(full[:-1], **kw)

    @classmethod
    def from_roots(cls, roots):
        roots = np.asarray(roots, dtype=complex)
        full = np.polynomial.polynomial.polyfromroots(roots) if roots.size else np.ones(1)
        return cls(np.asarray(full, dtype=complex)[:-1])

    @property
    def degree(self):
        return self.coeffs.size

    @property
    def full(self):
        return np.concatenate([self.coeffs, [1.0 + 0j]])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.ones_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc[()] if acc.ndim == 0 else acc

    def __eq__(self, other):
        return isinstance(other, MonicPoly) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"MonicPoly(degree={self.degree})"


class Mobius:
    """The map ``z -> (a z + b) / (c z + d)`` on the extended plane.

    Calling an instance on a scalar honours the point at infinity
    (``m(inf) = a / c`` and ``m(-d/c) = inf``); array calls are plain
    vectorized arithmetic.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d, floor=DET_FLOOR):
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        det = a * d - b * c
        if not abs(det) > floor:
            raise ValueError(f"degenerate Moebius matrix (det={det})")
        self.a, self.b, self.c, self.d = a, b, c, d

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def normalized(self):
        """Scale to unit determinant (branch fixed by the principal root)."""
        s = cmath.sqrt(self.det)
        return Mobius(self.a / s, self.b / s, self.c / s, self.d / s)

    def inverse(self):
        return Mobius(self.d, -self.b, -self.c, self.a)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return self.det / (self.c * z + self.d) ** 2

    def __matmul__(self, other):
        m = self.matrix @ other.matrix
        return Mobius(m[0, 0], m[0, 1], m[1, 0], m[1, 1], floor=0.0)

    def __call__(self, z):
        if np.ndim(z) == 0:
            return mobius_apply(self, z)
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def __eq__(self, other):
        """Projective equality, i.e. equal up to a nonzero scalar."""
        if not isinstance(other, Mobius):
            return NotImplemented
        m, n = self.matrix, other.matrix
        return bool(np.allclose(m[0, 0] * n, n[0, 0] * m) if abs(m[0, 0]) > 0
                    else np.allclose(m[0, 1] * n, n[0, 1] * m))

    __hash__ = None

    def __repr__(self):
        return f"Mobius({self.a}, {self.b}, {self.c}, {self.d})"

    def to_json(self):
        return _pairs([self.a, self.b, self.c, self.d])

    @classmethod
    def from_json(cls, pairs):
        return cls(*_unpairs(pairs))


@dataclass(frozen=True, eq=False)
class CircleSamples:
    radius: float
    values: np.ndarray

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sampling radius must be positive")
        v = np.array(self.values, dtype=complex).ravel()
        m = v.size
        if m < 2 or m & (m - 1):
            raise ValueError(f"sample count {m} is not a power of two")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nodes(self):
        m = self.values.size
        return self.radius * np.exp(2j * np.pi * np.arange(m) / m)


def eval_laurent(tail, w):
    """Evaluate ``w + sum_{k=0}^N b_k w^{-k}`` by Horner's rule in ``1/w``."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise ZeroDivisionError("Laurent tail evaluated at w = 0")
    inv = 1 / w
    acc = np.zeros_like(w)
    for b in tail.coeffs[:0:-1]:
        acc = (acc + b) * inv
    out = w + tail.coeffs[0] + acc
    return out[()] if out.ndim == 0 else out


def default_sample_count(n):
    """Four times ``n`` rounded up to a power of two."""
    return 1 << max(1, math.ceil(math.log2(max(4 * n, 2))))


def sample_circle(func, radius, m):
    """Sample ``func`` at ``m`` equispaced points of ``|w| = radius``."""
    nodes = radius * np.exp(2j * np.pi * np.arange(m) / m)
    return CircleSamples(radius, func(nodes))


def coeffs_from_samples(samples, n):
    """Recover ``b_0 .. b_n`` from samples of ``w + sum b_k w^{-k}``.

    The sample mean of ``values - w`` gives ``b_0``; for ``k >= 1`` the
    coefficient of ``exp(-i k theta)`` is scaled by ``R^k``.  The returned
    tail records the max reconstruction error on the sampling circle.
    """
    m = samples.values.size
    if n < 0 or n > m // 2 - 1:
        raise ValueError(f"truncation order {n} too large for {m} samples")
    w = samples.nodes
    h = samples.values - w
    c = np.fft.ifft(h)
    k = np.arange(n + 1)
    b = c[: n + 1] * samples.radius ** k.astype(float)
    tail = LaurentTail(b)
    resid = float(np.max(np.abs(eval_laurent(tail, w) - samples.values)))
    return LaurentTail(b, residual=resid)


def mobius_apply(m, z):
    """Apply ``m`` to one point of the extended plane."""
    z = complex(z)
    if is_inf(z):
        return m.a / m.c if m.c != 0 else INF
    den = m.c * z + m.d
    if den == 0:
        return INF
    return (m.a * z + m.b) / den


def mobius_inverse(m):
    return m.inverse()


def tail_to_json(tail):
    return {"b": _pairs(tail.coeffs), "N": tail.truncation_order}


def tail_from_json(obj):
    tail = LaurentTail(_unpairs(obj["b"]))
    if "N" in obj and int(obj["N"]) != tail.truncation_order:
        raise ValueError("tail length disagrees with its declared order N")
    return tail


def poly_to_json(p):
    return {"degree": p.degree, "coeffs": _pairs(p.coeffs)}


def poly_from_json(obj):
    p = MonicPoly(_unpairs(obj["coeffs"]))
    if int(obj["degree"]) != p.degree:
        raise ValueError("coefficient count disagrees with degree")
    return p
