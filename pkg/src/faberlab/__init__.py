"""Faber polynomials, Toeplitz zeros and covering maps of three-point complements."""

__version__ = "0.1.0"

from .series import LaurentTail, MonicPoly, Mobius  # noqa: E402
from .faber import faber_polys, toeplitz_pk, pk_values, faber_values  # noqa: E402
from .covering import ThreePointSet, CoveringMap, build_covering  # noqa: E402
from .zeros import ZeroEnsemble, PolylineSet, roots, pk_zeros_via_eigen, zeros_of  # noqa: E402
from .hyperbolic import delta_exact, classify_point, tripod, segment_prediction  # noqa: E402

__all__ = [
    "LaurentTail", "MonicPoly", "Mobius", "faber_polys", "toeplitz_pk", "pk_values",
    "faber_values", "ThreePointSet", "CoveringMap", "build_covering", "ZeroEnsemble",
    "PolylineSet", "roots", "pk_zeros_via_eigen", "zeros_of", "delta_exact",
    "classify_point", "tripod", "segment_prediction",
]
