"""Estimator-style wrappers with ``fit`` / ``transform`` / ``predict``.

``fit`` takes the defining data (a Laurent tail or a three-point set);
``transform`` and ``predict`` take evaluation points ``z``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import _validation as val
from .covering import build_covering
from .faber import fk_log_abs, pk_log_abs
from .hyperbolic import delta_map, predict as predict_set
from .zeros import hausdorff, zeros_of


class FaberTransformer(TransformerMixin, BaseEstimator):
    """``log|F_k(z)| / k`` (or ``P_k``) features for ``k = 1..K``.

    Parameters
    ----------
    K : int
    source : {"F", "P"}
    """

    def __init__(self, K=20, source="F"):
        self.K = K
        self.source = source

    def fit(self, X, y=None):
        self.tail_ = val.check_tail(X)
        val.check_degree(self.K, "K")
        if self.source not in ("F", "P"):
            raise ValueError("source must be 'F' or 'P'")
        return self

    def transform(self, X):
        val.check_fitted(self, "tail_")
        z = val.check_points(X)
        f = fk_log_abs if self.source == "F" else pk_log_abs
        return (f(self.tail_, z, self.K) / np.arange(1, self.K + 1)[:, None]).T


class ZeroDistribution(BaseEstimator):
    """Zeros of ``P_k`` or ``F_k`` of a fitted tail; ``predict`` gives the potential."""

    def __init__(self, k=50, source="P", precision="standard"):
        self.k = k
        self.source = source
        self.precision = precision

    def fit(self, X, y=None):
        tail = val.check_tail(X)
        k = val.check_degree(self.k)
        self.ensemble_ = zeros_of(tail, k, self.source, self.precision)
        self.zeros_ = self.ensemble_.zeros
        return self

    def predict(self, X):
        """``-(1/k) sum log|z - zeta|`` over the fitted zeros."""
        val.check_fitted(self, "zeros_")
        z = val.check_points(X)
        with np.errstate(divide="ignore"):
            return -np.mean(np.log(np.abs(z[:, None] - self.zeros_[None, :])), axis=1)

    def score(self, target, y=None):
        """Negative directed distance from the zeros to ``target`` (a PolylineSet)."""
        val.check_fitted(self, "zeros_")
        return -hausdorff(self.ensemble_, target)[0]


class CoveringDelta(TransformerMixin, BaseEstimator):
    """``delta(z)`` and maximizer counts of the covering map of a three-point set."""

    def __init__(self, order=512, tie_tol=1e-8):
        self.order = order
        self.tie_tol = tie_tol

    def fit(self, X, y=None):
        self.E_ = val.check_three_points(X)
        self.covering_ = build_covering(self.E_, order=val.check_degree(self.order, "order"))
        return self

    def transform(self, X):
        val.check_fitted(self, "covering_")
        return delta_map(self.covering_, val.check_points(X), self.tie_tol).delta[:, None]

    def predict(self, X):
        """1 where the least-modulus preimage is unique, else the count (>= 2)."""
        val.check_fitted(self, "covering_")
        return delta_map(self.covering_, val.check_points(X), self.tie_tol).count

    def predicted_set(self, h=0.01):
        val.check_fitted(self, "covering_")
        return predict_set(self.covering_, h)
