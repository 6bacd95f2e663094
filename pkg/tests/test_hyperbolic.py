import math

import numpy as np
import pytest

from faberlab.covering import ThreePointSet, eval_g
from faberlab.hyperbolic import (Geodesic, GeometryError, bisector, build_hexagon, classify_point,
                                 delta_exact, delta_map, hyp_dist, predict, ridge_scan,
                                 segment_prediction, six_centers, tripod)
from faberlab.zeros import PolylineSet

ETA = np.exp(2j * np.pi / 3)


def test_hyp_dist_basics():
    assert hyp_dist(0, 0) == 0
    assert hyp_dist(0, 0.5) == pytest.approx(math.log(3))
    with pytest.raises(ValueError):
        hyp_dist(0, 1.0)


def test_bisector_is_equidistant():
    zeta = 0.4 + 0.3j
    g = bisector(zeta)
    a, b = g.ideal_points()
    pts = g.points(0.999 * a, 0.999 * b, np.linspace(0.05, 0.95, 9))
    assert np.allclose(hyp_dist(pts, 0), hyp_dist(pts, zeta), atol=1e-10)


def test_geodesic_through_ideal():
    g = Geodesic.through_ideal(1, 1j)
    assert g.distance(1) < 1e-12 and g.distance(1j) < 1e-12
    with pytest.raises(ValueError):
        Geodesic(2.0, 1.0)
    d = Geodesic.through_ideal(1, -1)
    assert d.is_diameter and d.distance(0.3) < 1e-15


def test_geodesic_intersection():
    a = Geodesic.through_ideal(1, -1)
    b = Geodesic.through_ideal(1j, -1j)
    assert a.intersect(b) == 0
    c = Geodesic.through_ideal(np.exp(0.3j), np.exp(2.5j))
    p = a.intersect(Geodesic.through_ideal(np.exp(-0.5j), np.exp(2.0j)))
    assert p is not None and abs(p) < 1
    assert Geodesic.through_ideal(1, 1j).intersect(Geodesic.through_ideal(-1, -1j)) is None
    assert c.distance(c.ideal_points()[0]) < 1e-12


class TestHexagon:
    def test_six_centers_map_to_a(self, cov_tripod):
        centers = six_centers(cov_tripod)
        assert len(centers) == 6
        vals = cov_tripod.G(np.array(list(centers.values())))
        assert np.max(np.abs(vals - cov_tripod.a)) < 1e-8

    def test_structure(self, cov_skew):
        hexagon = build_hexagon(cov_skew)
        assert len(hexagon.arcs) == 6
        assert all(abs(v) < 1 for v in hexagon.finite_vertices)
        assert all(abs(abs(v) - 1) < 1e-9 for v in hexagon.ideal_vertices)
        assert hexagon.contains(0j)
        assert not hexagon.contains(np.array(list(hexagon.centers.values()))).any()

    def test_finite_vertices_share_an_image(self, cov_skew):
        hexagon = build_hexagon(cov_skew)
        vals = cov_skew.G(np.array(hexagon.finite_vertices))
        assert np.max(np.abs(vals - vals.mean())) < 1e-6

    def test_collinear_rejected(self, cov_collinear):
        with pytest.raises(GeometryError):
            six_centers(cov_collinear)


class TestTripod:
    def test_symmetric_tripod(self, cov_tripod):
        legs = tripod(cov_tripod)
        assert len(legs.polylines) == 3
        assert abs(legs.polylines[0][0]) < 1e-6
        rays = PolylineSet([np.array([0, e]) for e in ETA ** np.arange(3)])
        assert np.max(rays.distance(legs.points)) < 1e-3
        for leg, p in zip(legs.polylines, cov_tripod.E.points):
            assert leg[-1] == p

    def test_spacing(self, cov_skew):
        legs = tripod(cov_skew, h=0.02)
        assert max(np.max(np.abs(np.diff(leg))) for leg in legs.polylines) <= 0.02 + 1e-12

    def test_skew_center_is_inside_hull(self, cov_skew):
        b = tripod(cov_skew).polylines[0][0]
        assert 0 < b.real < 1 and 0 < b.imag < 1

    def test_segment_prediction(self):
        seg = segment_prediction(ThreePointSet(0.5, -1, 1))
        line = seg.polylines[0]
        assert line[0] == -1 and line[-1] == 1
        with pytest.raises(GeometryError):
            segment_prediction(ThreePointSet(0, 1, 1j))

    def test_predict_dispatch(self, cov_collinear):
        assert len(predict(cov_collinear).polylines) == 1


class TestDelta:
    def test_far_points_are_c1(self, cov_skew):
        w = 3 * cov_skew.rho0 * np.exp(1j * np.linspace(0, 6, 8))
        res = delta_map(cov_skew, eval_g(cov_skew, w))
        assert np.allclose(res.delta, np.abs(w), rtol=1e-10)
        assert np.all(res.count == 1)

    def test_delta_at_least_r(self, cov_tripod):
        z = np.random.default_rng(1).uniform(-2, 2, 200) + 1j * np.random.default_rng(2).uniform(-2, 2, 200)
        assert np.all(delta_map(cov_tripod, z).delta >= cov_tripod.r * (1 - 1e-12))

    def test_tripod_center_is_threefold(self, cov_tripod):
        d, count = delta_exact(cov_tripod, 0)
        assert count == 3
        assert classify_point(cov_tripod, 0) == "Cp_multiple"
        assert classify_point(cov_tripod, 2) == "C1"

    def test_symmetric_legs_are_ridges(self, cov_tripod):
        z = 0.5 * ETA
        assert delta_exact(cov_tripod, z)[1] == 2

    def test_collinear_segment_is_ridge(self, cov_collinear):
        assert delta_exact(cov_collinear, 0.5)[1] == 2
        assert delta_exact(cov_collinear, 0.5 + 0.3j)[1] == 1

    def test_points_of_e(self, cov_tripod):
        res = delta_map(cov_tripod, cov_tripod.E.points)
        assert np.all(res.count == 0) and np.allclose(res.delta, cov_tripod.r)
        with pytest.raises(ValueError):
            delta_exact(cov_tripod, 1.0)

    def test_ridge_scan_small(self, cov_collinear):
        z, res, h = ridge_scan(cov_collinear, n=21, window=(-1.5, 1.5, -1, 1))
        ridge = z[res.count >= 2]
        assert ridge.size > 0
        assert np.max(np.abs(ridge.imag)) <= h
