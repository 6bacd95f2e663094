"""Input checks shared by the estimator wrappers and the command line."""

import numbers

import numpy as np

from .covering import ThreePointSet
from .series import LaurentTail


def check_points(z, name="z"):
    """Complex 1-D array of finite points."""
    arr = np.asarray(z)
    if arr.dtype.kind not in "biufc":
        raise TypeError(f"{name} must be numeric, got dtype {arr.dtype}")
    arr = np.atleast_1d(arr.astype(complex)).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_tail(tail):
    """A ``LaurentTail`` from a tail, a mapping ``{k: b_k}`` or a coefficient array."""
    if isinstance(tail, LaurentTail):
        return tail
    if isinstance(tail, dict):
        return LaurentTail.from_dict({int(k): complex(v) for k, v in tail.items()})
    return LaurentTail(check_points(tail, "tail"))


def check_three_points(E):
    if isinstance(E, ThreePointSet):
        return E
    if isinstance(E, str):
        return ThreePointSet.parse(E)
    pts = check_points(E, "E")
    if pts.size != 3:
        raise ValueError(f"expected three points, got {pts.size}")
    return ThreePointSet(*pts)


def check_degree(k, name="k", minimum=1):
    if not isinstance(k, numbers.Integral) or isinstance(k, bool):
        raise TypeError(f"{name} must be an integer")
    if k < minimum:
        raise ValueError(f"{name} must be at least {minimum}")
    return int(k)


def check_fitted(est, attr):
    if not hasattr(est, attr):
        from sklearn.exceptions import NotFittedError
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")
