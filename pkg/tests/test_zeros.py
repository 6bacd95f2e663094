import json
import math
from fractions import Fraction

import numpy as np
import pytest

from faberlab import _io
from faberlab.faber import toeplitz_pk
from faberlab.series import LaurentTail, MonicPoly
from faberlab.zeros import (PolylineSet, RootConvergenceError, ZeroEnsemble, arcsine_cdf,
                            cdf_discrepancy, delta_via_limit, extended_poly, fraction_outside,
                            hausdorff, multiset_distance, pk_zeros_via_eigen, potential_estimate,
                            roots, write_zeros_csv, zeros_of)

from conftest import random_tail


def chebyshev_u_zeros(k):
    return np.cos(np.pi * np.arange(1, k + 1) / (k + 1))


class TestEnsemble:
    def test_mass_is_exactly_one(self):
        for k in (1, 3, 7, 120):
            ens = ZeroEnsemble(np.arange(k))
            assert ens.total_mass == 1
            assert ens.weights[0] == Fraction(1, k)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ZeroEnsemble([])


class TestRoots:
    @pytest.mark.parametrize("precision", ["standard", "extended"])
    def test_known_roots(self, precision):
        r = np.array([1, -2, 0.5j, 3 + 1j])
        ens = roots(MonicPoly.from_roots(r), precision)
        assert multiset_distance(ens, r) < 1e-12

    def test_chebyshev_u(self, segment_tail):
        k = 40
        ens = zeros_of(segment_tail, k, "P", "extended")
        assert multiset_distance(ens, chebyshev_u_zeros(k)) < 1e-14

    def test_extended_coefficients_match_double(self, segment_tail):
        p = extended_poly(segment_tail, 20)
        assert np.allclose(p.coeffs, toeplitz_pk(segment_tail, 20).coeffs, atol=1e-15)
        assert p.hp_coeffs is not None

    def test_extended_faber(self, segment_tail):
        # F_k = 2^{1-k} T_k has zeros cos((2j - 1) pi / 2k)
        k = 30
        ens = zeros_of(segment_tail, k, "F", "extended")
        expect = np.cos((2 * np.arange(1, k + 1) - 1) * np.pi / (2 * k))
        assert ens.source == "F"
        assert multiset_distance(ens, expect) < 1e-14

    def test_multiple_root(self):
        ens = roots(MonicPoly.from_roots([2, 2, 2, -1]), "extended")
        assert multiset_distance(ens, [2, 2, 2, -1]) < 1e-10

    def test_zero_polynomial_power(self):
        ens = roots(MonicPoly(np.zeros(5)), "extended")
        assert np.array_equal(ens.zeros, np.zeros(5))

    def test_failure_reports_partial(self):
        with pytest.raises(RootConvergenceError) as info:
            roots(MonicPoly.from_roots(np.arange(1, 21)), "extended", maxsweeps=1)
        assert info.value.partial.size == 20

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            roots(MonicPoly([]))

    def test_bad_precision(self):
        with pytest.raises(ValueError):
            roots(MonicPoly([1]), "quad")

    def test_eigen_route_matches_roots(self):
        rng = np.random.default_rng(11)
        tail = random_tail(rng)
        for k in (5, 15, 25):
            a = pk_zeros_via_eigen(tail, k)
            b = zeros_of(tail, k, "P", "extended")
            assert multiset_distance(a, b) < 1e-8

    def test_extended_eigen_route(self):
        tail = random_tail(np.random.default_rng(12))
        a = pk_zeros_via_eigen(tail, 20, "extended")
        b = zeros_of(tail, 20, "P", "extended")
        assert multiset_distance(a, b) < 1e-14
        assert a.meta["prec"] >= 128


class TestDistances:
    def test_multiset_distance_is_matching(self):
        assert multiset_distance([0, 1], [1.1, 0.1]) == pytest.approx(0.1)
        with pytest.raises(ValueError):
            multiset_distance([0], [0, 1])

    def test_polyline_distance(self):
        seg = PolylineSet([np.array([-1, 1], dtype=complex)])
        d = seg.distance(np.array([0.5j, 2, -1 - 1j]))
        assert np.allclose(d, [0.5, 1, 1])

    def test_spacing_enforced(self):
        with pytest.raises(ValueError):
            PolylineSet([np.array([0, 1, 3])], h=1.0)
        assert PolylineSet([np.array([0, 3])]).refined(0.5).h == 0.5

    def test_hausdorff_both_directions(self):
        seg = PolylineSet([np.array([-1, 1], dtype=complex)])
        to, frm = hausdorff(np.array([0j]), seg)
        assert to == 0
        assert frm == pytest.approx(1.0, abs=1e-9)
        to, frm = hausdorff(np.array([-1, 0, 1]) + 0.1j, seg)
        assert to == pytest.approx(0.1)
        assert frm == pytest.approx(math.hypot(0.5, 0.1), abs=1e-9)

    def test_fraction_outside(self):
        seg = PolylineSet([np.array([0, 1], dtype=complex)])
        assert fraction_outside(np.array([0.5, 0.5 + 0.2j, 3, 0.1]), seg, 0.1) == 0.5

    def test_json_legs(self):
        legs = PolylineSet([np.array([0, 1j]), np.array([0, 1])])
        back = PolylineSet.from_json(json.loads(_io.dumps(legs.to_json())))
        assert all(np.array_equal(a, b) for a, b in zip(back.polylines, legs.polylines))


class TestMeasures:
    def test_arcsine_cdf(self):
        assert arcsine_cdf(0.0) == 0.5
        assert arcsine_cdf(-1) == 0 and arcsine_cdf(1) == 1
        assert arcsine_cdf(3, 2, 4) == 0.5

    def test_discrepancy_of_quantiles(self):
        n = 400
        x = np.cos(np.pi * (np.arange(n) + 0.5) / n)
        assert cdf_discrepancy(x) <= 0.5 / n + 1e-12

    def test_discrepancy_of_point_mass(self):
        assert cdf_discrepancy(np.zeros(10)) == pytest.approx(0.5)

    def test_discrepancy_rejects_complex(self):
        with pytest.raises(ValueError):
            cdf_discrepancy(np.array([0.5j]))


class TestPotential:
    def test_far_field(self):
        rng = np.random.default_rng(2)
        tail = random_tail(rng)
        z = 1e3 * np.exp(1j * np.arange(6))
        for k in (5, 10, 20):
            est = potential_estimate(toeplitz_pk(tail, k), z)
            assert np.max(np.abs(est + np.log(np.abs(z)))) < 0.01

    def test_sentinel_at_zero(self):
        p = MonicPoly.from_roots([1, 2])
        val, hit = potential_estimate(p, np.array([1.0, 0.0]), return_flag=True)
        assert np.isinf(val[0]) and hit[0] and not hit[1]
        assert val[1] == pytest.approx(-math.log(2) / 2)

    def test_delta_via_limit_segment(self, segment_tail):
        # w + 1/(4w) = z: delta(2) = (2 + sqrt 3)/2, and z = 1 is the double root w = 1/2
        vals = delta_via_limit(segment_tail, np.array([2.0, 1.0]), 2000)
        assert abs(vals[-1, 0] - (2 + math.sqrt(3)) / 2) < 1e-3
        assert abs(vals[-1, 1] - 0.5) < 0.01
        assert delta_via_limit(segment_tail, 2.0, 5).shape == (5,)


def test_zeros_csv_sorted_rows(tmp_path):
    ens = [ZeroEnsemble([1, -1, 0.5j], "P"), ZeroEnsemble([2], "F")]
    write_zeros_csv(tmp_path / "z.csv", ens)
    rows = _io.read_csv(tmp_path / "z.csv")
    assert [float(r["re"]) for r in rows] == [-1, 0, 1, 2]
    assert [r["source"] for r in rows] == ["P", "P", "P", "F"]
