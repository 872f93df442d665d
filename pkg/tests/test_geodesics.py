import numpy as np
import pytest

from capillary_hk.exceptions import DomainExitError
from capillary_hk.geodesics import (
    _fd_christoffel,
    christoffel,
    exp_F,
    exp_F_path,
    hyperbolic_geodesic,
    hyperbolic_semicircle,
    integrate_alpha_geodesic,
    polyline_hausdorff,
    randers_spray_geodesic,
    sectional_curvature,
    sphere_convexity,
    sphere_covariant_pairings,
)
from capillary_hk.metrics import MetricSpec, NavigationData, randers_norm


class TestChristoffel:
    def test_hyperbolic_mixed_symbol(self):
        gam = christoffel(MetricSpec("alpha", np.pi / 2), [0.2, 0.1, 0.8])
        assert gam[0, 0, 2] == pytest.approx(-1 / 0.8)
        assert gam[1, 1, 2] == pytest.approx(-1 / 0.8)

    def test_capillary_value(self):
        gam = christoffel(MetricSpec("alpha", np.pi / 3), [0.0, 1.0])
        assert gam[0, 0, 1] == pytest.approx(-4 / 3, rel=1e-14)

    def test_symmetric_and_sparse(self):
        gam = christoffel(MetricSpec("alpha", np.pi / 3), [0.3, -0.2, 0.9])
        assert np.array_equal(gam, np.swapaxes(gam, 1, 2))
        nonzero = {tuple(i) for i in np.argwhere(gam != 0)}
        assert nonzero == {(2, 0, 0), (2, 1, 1), (0, 0, 2), (0, 2, 0), (1, 1, 2), (1, 2, 1), (2, 2, 2)}

    @pytest.mark.parametrize("kind,theta0", [("alpha", np.pi / 3), ("alpha", 2 * np.pi / 3), ("hyperbolic", np.pi / 2)])
    def test_against_metric_differences(self, kind, theta0):
        m = MetricSpec(kind, theta0)
        x = np.array([0.1, 0.4, 1.1])
        assert np.allclose(christoffel(m, x), _fd_christoffel(m.matrix, x, 1e-5), atol=1e-8)


class TestAlphaGeodesics:
    def test_vertical_ray(self):
        m = MetricSpec("hyperbolic")
        path = integrate_alpha_geodesic(m, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0], 1.0)
        assert np.max(np.abs(path.x[:, 2] - np.exp(path.t))) < 1e-10
        assert np.max(np.abs(path.x[:, :2])) == 0.0

    @pytest.mark.parametrize("p,v", [([0.2, 0.5], [1.0, 0.3]), ([-0.3, 0.1, 0.9], [0.4, -0.7, -0.2])])
    def test_semicircle(self, p, v):
        p, v = np.array(p), np.array(v)
        v = v / np.linalg.norm(v) * p[-1]
        path = integrate_alpha_geodesic(MetricSpec("hyperbolic"), p, v, 1.0)
        exact = hyperbolic_geodesic(p, v, path.t)
        assert np.max(np.linalg.norm(path.x - exact, axis=1)) < 1e-6
        centre, radius, _ = hyperbolic_semicircle(p, v)
        assert np.max(np.abs(np.linalg.norm(path.x - centre, axis=1) - radius)) < 1e-6

    def test_euclidean_straight_line(self):
        path = integrate_alpha_geodesic(MetricSpec("euclidean"), [0.0, 1.0], [1.0, -2.0], 1.0)
        assert np.allclose(path.x, np.array([0.0, 1.0]) + path.t[:, None] * [1.0, -2.0], atol=1e-14)

    @pytest.mark.parametrize("theta0", [np.pi / 6, np.pi / 3, 2 * np.pi / 3])
    def test_speed_conservation(self, theta0):
        m = MetricSpec("alpha", theta0)
        p = np.array([0.1, 0.0, abs(np.cos(theta0)) + 0.3])
        path = integrate_alpha_geodesic(m, p, [0.3, 0.2, 0.1], 1.0)
        sp = np.sqrt(np.sum(m.diag(path.x) * path.v ** 2, axis=1))
        assert np.max(np.abs(sp / sp[0] - 1)) <= 1e-8
        assert path.info["richardson_error"] < 1e-9

    def test_domain_exit(self):
        with pytest.raises(DomainExitError) as err:
            integrate_alpha_geodesic(MetricSpec("alpha", np.pi / 3), [0.0, 0.6], [0.0, -1.0], 5.0)
        assert 0 < err.value.exit_time < 5.0

    def test_csv_export(self, tmp_path):
        path = integrate_alpha_geodesic(MetricSpec("hyperbolic"), [0.0, 1.0], [1.0, 0.0], 0.1, step=0.05)
        out = tmp_path / "g.csv"
        path.to_csv(out)
        rows = out.read_text().splitlines()
        assert rows[0] == "t,x1,x2"
        assert len(rows) == len(path.t) + 1


class TestRandersGeodesics:
    def test_free_boundary_is_hyperbolic(self):
        nd = NavigationData.ball(np.pi / 2, 3)
        p = np.array([0.1, -0.2, 0.7])
        zeta = np.array([0.3, 0.1, -0.4])
        zeta /= randers_norm(nd, p, zeta)
        for t in (0.3, 1.0):
            assert np.linalg.norm(exp_F(nd, p, zeta, t) - hyperbolic_geodesic(p, zeta, t)[0]) < 1e-8

    def test_zero_time(self):
        nd = NavigationData.ball(np.pi / 3, 2)
        p = np.array([0.1, 0.9])
        zeta = np.array([1.0, 0.0]) / randers_norm(nd, p, [1.0, 0.0])
        assert np.array_equal(exp_F(nd, p, zeta, 0.0), p)

    def test_requires_unit_direction(self):
        with pytest.raises(ValueError):
            exp_F(NavigationData.ball(np.pi / 3, 2), [0.0, 1.0], [1.0, 0.0], 0.5)

    @pytest.mark.parametrize("theta0", [np.pi / 3, 2 * np.pi / 3])
    def test_spray_oracle_endpoint(self, theta0):
        nd = NavigationData.ball(theta0, 3)
        p = np.array([0.2, 0.1, 0.95])
        zeta = np.array([0.5, -0.2, -0.1])
        zeta /= randers_norm(nd, p, zeta)
        a = exp_F(nd, p, zeta, 0.6)
        b = randers_spray_geodesic(nd, p, zeta, 0.6)
        assert np.linalg.norm(a - b) < 1e-6

    def test_trajectories_coincide(self):
        nd = NavigationData.ball(np.pi / 3, 2)
        p = np.array([0.1, 1.0])
        zeta = np.array([1.0, 0.4])
        zeta /= randers_norm(nd, p, zeta)
        path_a = exp_F_path(nd, p, zeta, 1.0, samples=401)
        path_b = randers_spray_geodesic(nd, p, zeta, 1.0, samples=400)
        assert polyline_hausdorff(path_a.x, path_b.x) < 1e-6
        assert np.max(np.abs(randers_norm(nd, path_b.x, path_b.v) - 1)) < 1e-8

    def test_halfspace_geodesics_are_lines(self):
        nd = NavigationData.halfspace(np.pi / 3, 2)
        p = np.array([0.0, 0.5])
        zeta = np.array([0.6, 0.8]) / randers_norm(nd, p, [0.6, 0.8])
        end = exp_F(nd, p, zeta, 0.7)
        assert np.allclose(end, p + 0.7 * zeta, atol=1e-13)


class TestCurvature:
    @pytest.mark.parametrize("theta0", [np.pi / 6, np.pi / 3, np.pi / 2, 2 * np.pi / 3])
    def test_horizontal_planes(self, theta0):
        x = np.array([0.2, -0.1, abs(np.cos(theta0)) + 0.25])
        rep = sectional_curvature(MetricSpec("alpha", theta0), x, (0, 1))
        assert rep.K_closed_form == pytest.approx(-1.0, abs=1e-12)
        assert rep.K_finite_difference == pytest.approx(-1.0, abs=1e-5)

    def test_hyperbolic_mixed_plane(self):
        rep = sectional_curvature(MetricSpec("alpha", np.pi / 2), np.array([0.0, 0.0, 0.7]), (0, 2))
        assert rep.K_closed_form == pytest.approx(-1.0, abs=1e-12)
        assert rep.K_finite_difference == pytest.approx(-1.0, abs=1e-5)

    def test_capillary_mixed_plane(self):
        rep = sectional_curvature(MetricSpec("alpha", np.pi / 3), np.array([0.0, 0.0, 1.0]), (0, 2))
        assert abs(rep.K_closed_form - rep.K_finite_difference) < 1e-5
        assert rep.K_closed_form < 0 and rep.K_finite_difference < 0

    def test_euclidean_flat(self):
        rep = sectional_curvature(MetricSpec("euclidean"), np.array([0.0, 0.0, 0.5]), (0, 2))
        assert rep.K_closed_form == 0.0
        assert abs(rep.K_finite_difference) < 1e-6

    def test_degenerate_plane(self):
        with pytest.raises(ValueError):
            sectional_curvature(MetricSpec("alpha", 1.0), np.array([0.0, 0.0, 0.9]), (1, 1))
        with pytest.raises(ValueError):
            sectional_curvature(MetricSpec("alpha", 1.0), np.array([0.0, 0.9]), (0, 2))

    def test_grid_negative(self):
        rng = np.random.default_rng(0)
        count = 0
        for _ in range(500):
            theta0 = rng.uniform(0.2, np.pi - 0.2)
            x = np.array([*rng.uniform(-1, 1, 2), abs(np.cos(theta0)) + rng.uniform(0.02, 1.0)])
            for plane in ((0, 1), (1, 2)):
                rep = sectional_curvature(MetricSpec("alpha", theta0), x, plane)
                assert rep.K_closed_form < 0 and rep.K_finite_difference < 0
                count += 1
        assert count == 1000


class TestSphereConvexity:
    def test_free_boundary_coefficient(self):
        assert sphere_convexity(np.pi / 2, np.pi / 4).C == pytest.approx(1.0, rel=1e-15)

    def test_capillary_coefficient(self):
        assert sphere_convexity(np.pi / 3, np.pi / 4).C == pytest.approx(2.0, rel=1e-15)

    @pytest.mark.parametrize("theta0", [np.pi / 6, np.pi / 3, np.pi / 2, 2 * np.pi / 3])
    def test_positive(self, theta0):
        for phi in np.linspace(0.01, min(theta0, np.pi - theta0) - 0.01, 25):
            res = sphere_convexity(theta0, phi)
            assert res.C > 0 and res.II_phiphi > 0 and res.II_betabeta > 0

    def test_normal_is_alpha_orthogonal(self):
        theta0, phi, b = np.pi / 3, 0.6, 1.1
        C = sphere_convexity(theta0, phi).C
        r = np.array([np.sin(phi) * np.cos(b), np.sin(phi) * np.sin(b), np.cos(phi)])
        g = MetricSpec("alpha", theta0).diag(r)
        V = np.array([-C * np.cos(b), -C * np.sin(b), -1.0])
        r_phi = np.array([np.cos(phi) * np.cos(b), np.cos(phi) * np.sin(b), -np.sin(phi)])
        r_beta = np.array([-np.sin(phi) * np.sin(b), np.sin(phi) * np.cos(b), 0.0])
        assert abs(np.sum(g * r_phi * V)) < 1e-14
        assert abs(np.sum(g * r_beta * V)) < 1e-14

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            sphere_convexity(np.pi / 3, np.pi / 3)

    @pytest.mark.parametrize("theta0", [np.pi / 3, 2 * np.pi / 3])
    def test_sphere_is_totally_geodesic_for_alpha(self, theta0):
        # with the connection terms included both pairings vanish
        phi = 0.5 * min(theta0, np.pi - theta0)
        pp, bb = sphere_covariant_pairings(theta0, phi)
        assert abs(pp) < 1e-12 and abs(bb) < 1e-12
        m = MetricSpec("alpha", theta0)
        p = np.array([np.sin(phi), 0.0, np.cos(phi)])
        for v in ([0.0, 1.0, 0.0], [np.cos(phi), 0.5, -np.sin(phi)]):
            path = integrate_alpha_geodesic(m, p, v, 0.05)
            assert np.max(np.abs(np.linalg.norm(path.x, axis=1) - 1)) < 1e-10
