import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from faberlab.estimators import CoveringDelta, FaberTransformer, ZeroDistribution
from faberlab.series import LaurentTail
from faberlab.zeros import PolylineSet


def test_faber_transformer_shape_and_values():
    X = np.array([2.0, 0.5 + 1j])
    feats = FaberTransformer(K=5).fit({1: 0.25}).transform(X)
    assert feats.shape == (2, 5)
    # F_1(z) = z for this tail
    assert np.allclose(feats[:, 0], np.log(np.abs(X)))


def test_not_fitted():
    with pytest.raises(NotFittedError):
        FaberTransformer().transform([1.0])
    with pytest.raises(NotFittedError):
        ZeroDistribution().predict([1.0])


def test_bad_params():
    with pytest.raises(ValueError):
        FaberTransformer(source="Q").fit([0, 0.25])
    with pytest.raises(TypeError):
        ZeroDistribution(k=2.5).fit([0, 0.25])


def test_clone_keeps_params():
    est = ZeroDistribution(k=7, precision="extended")
    assert clone(est).get_params() == est.get_params()


def test_zero_distribution(segment_tail):
    est = ZeroDistribution(k=30, precision="extended").fit(segment_tail)
    seg = PolylineSet([np.array([-1, 1], dtype=complex)])
    assert est.score(seg) > -1e-12
    # equilibrium potential of [-1,1] is log 2 on the segment
    assert abs(est.predict([0.3])[0] - np.log(2)) < 0.05


def test_covering_delta():
    est = CoveringDelta().fit("-1, 0, 1")
    d = est.transform([0.5 + 0.3j, 2.0])
    assert d.shape == (2, 1) and np.all(d > est.covering_.r)
    assert list(est.predict([0.5, 0.5 + 0.3j])) == [2, 1]
    assert len(est.predicted_set().polylines) == 1
    with pytest.raises(ValueError):
        CoveringDelta().fit([0, 1])
