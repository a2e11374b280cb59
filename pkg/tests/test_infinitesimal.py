"""Linearized arrows: differentials, the first-order commutation
constraint, and classification of its solution space."""
import numpy as np
import pytest

from unilab.fields import AnalyticFrameField
from unilab.foliation import null_space_at
from unilab.geometry import christoffel
from unilab.infinitesimal import (
    InfinitesimalKind,
    arrow_differential,
    arrow_map,
    commutation_residual,
    infinitesimal_classification,
)
from unilab.linalg3 import contract_ten3_vec
from unilab.measures import CompositeSpec, measure_case1

IDENTITY = AnalyticFrameField.identity()

ROTATION = AnalyticFrameField.from_strings(
    [
        ["cos((pi/180)*(10*x1 + 30*x2))", "-sin((pi/180)*(10*x1 + 30*x2))", "0"],
        ["sin((pi/180)*(10*x1 + 30*x2))", "cos((pi/180)*(10*x1 + 30*x2))", "0"],
        ["0", "0", "1"],
    ]
)

MIXED = AnalyticFrameField.from_strings(
    [["1", "x2", "0"], ["0", "1", "x3"], ["x1/2", "0", "1"]]
)

LAMINATED = CompositeSpec(
    IDENTITY,
    AnalyticFrameField.from_strings(
        [["1", "x1^2", "0"], ["0", "1", "0"], ["0", "0", "1"]]
    ),
)

FIBERED = CompositeSpec(
    IDENTITY,
    AnalyticFrameField.from_strings(
        [["1", "x1^2", "x2^2"], ["0", "1", "0"], ["0", "0", "1"]]
    ),
)

TOTAL = CompositeSpec(
    IDENTITY,
    AnalyticFrameField.from_strings(
        [["1", "x1^2", "x2^2"], ["0", "1", "x3^2"], ["0", "0", "1"]]
    ),
)

POINT = np.array([0.4, 0.3, 0.7])


class TestArrowMap:
    def test_rotation_arrow_is_angle_difference(self):
        x = np.array([0.0, 0.0, 0.0])
        xp = np.array([1.0, 1.0, 0.0])
        h = arrow_map(ROTATION, x, xp)
        t = np.deg2rad(40.0)
        expected = np.array(
            [[np.cos(t), -np.sin(t), 0], [np.sin(t), np.cos(t), 0], [0, 0, 1]]
        )
        assert np.allclose(h, expected, atol=1e-13)

    def test_unit_and_inverse(self):
        x = np.array([0.2, 0.5, 0.1])
        xp = np.array([0.9, 0.1, 0.4])
        assert np.allclose(arrow_map(MIXED, x, x), np.eye(3), atol=1e-13)
        forward = arrow_map(MIXED, x, xp)
        back = arrow_map(MIXED, xp, x)
        assert np.allclose(forward @ back, np.eye(3), atol=1e-13)

    def test_composition_along_a_third_point(self):
        x = np.array([0.2, 0.5, 0.1])
        y = np.array([0.9, 0.1, 0.4])
        z = np.array([0.3, 0.8, 0.6])
        assert np.allclose(
            arrow_map(MIXED, x, z),
            arrow_map(MIXED, y, z) @ arrow_map(MIXED, x, y),
            atol=1e-12,
        )


class TestArrowDifferential:
    X = np.array([0.2, 0.3, 0.4])
    XP = np.array([0.7, 0.5, 0.6])
    DX = np.array([1.0, -2.0, 0.5])
    DXP = np.array([0.3, 1.0, -1.0])

    def numeric(self, field, t):
        plus = arrow_map(field, self.X + t * self.DX, self.XP + t * self.DXP)
        minus = arrow_map(field, self.X - t * self.DX, self.XP - t * self.DXP)
        return (plus - minus) / (2.0 * t)

    def test_matches_central_difference(self):
        analytic = arrow_differential(MIXED, self.X, self.XP, self.DX, self.DXP)
        numeric = self.numeric(MIXED, 1e-5)
        assert np.allclose(analytic, numeric, atol=1e-8)

    def test_second_order_convergence(self):
        analytic = arrow_differential(MIXED, self.X, self.XP, self.DX, self.DXP)
        err = lambda t: np.max(np.abs(self.numeric(MIXED, t) - analytic))
        ratio = err(2e-3) / err(1e-3)
        assert 3.0 < ratio < 5.0

    def test_collapses_to_connection_at_a_unit(self):
        gamma = christoffel(MIXED, self.X).gamma
        expected = contract_ten3_vec(gamma, self.DX - self.DXP)
        got = arrow_differential(MIXED, self.X, self.X, self.DX, self.DXP)
        assert np.allclose(got, expected, atol=1e-13)


class TestCommutationResidual:
    DX = np.array([1.0, 0.0, 0.0])
    DY = np.array([0.0, 1.0, 0.0])
    DZ = np.array([0.3, 0.4, 1.0])

    def finite_defect(self, spec, x, h):
        """Commutation defect of the finite square spanned by h * dX,dY,dZ."""
        w = np.asarray(x, dtype=float)
        corners = {
            "X": w + h * self.DX,
            "Y": w + h * self.DY,
            "Z": w + h * self.DZ,
        }
        p1, p2 = spec.component1, spec.component2
        s = arrow_map(p1, w, corners["Y"])
        t = arrow_map(p1, corners["X"], corners["Z"])
        s_hat = arrow_map(p2, w, corners["X"])
        t_hat = arrow_map(p2, corners["Y"], corners["Z"])
        return t @ s_hat - t_hat @ s

    def test_matches_finite_defect_to_first_order(self):
        spec = CompositeSpec(MIXED, ROTATION)
        res = commutation_residual(spec, POINT, self.DX, self.DY, self.DZ)
        err = lambda h: np.max(
            np.abs(self.finite_defect(spec, POINT, h) / h - res.residual)
        )
        assert err(1e-4) < 1e-3
        assert err(1e-5) < 1e-4

    def test_contraction_of_the_case_one_measure(self):
        spec = CompositeSpec(MIXED, ROTATION)
        b = measure_case1(spec, POINT)
        res = commutation_residual(spec, POINT, self.DX, self.DY, self.DZ)
        expected = contract_ten3_vec(b, self.DX + self.DY - self.DZ)
        assert np.allclose(res.residual, expected, atol=1e-14)

    def test_linear_in_displacements(self):
        spec = CompositeSpec(IDENTITY, MIXED)
        a = commutation_residual(spec, POINT, self.DX, self.DY, self.DZ)
        b = commutation_residual(spec, POINT, 2 * self.DX, 2 * self.DY, 2 * self.DZ)
        assert np.allclose(b.residual, 2 * a.residual, atol=1e-13)

    def test_parallelogram_closure_gives_zero(self):
        spec = CompositeSpec(IDENTITY, MIXED)
        res = commutation_residual(spec, POINT, self.DX, self.DY, self.DX + self.DY)
        assert np.max(np.abs(res.residual)) < 1e-15

    def test_skew_projection_kills_rotation_families(self):
        spec = CompositeSpec(IDENTITY, ROTATION)
        plain = commutation_residual(spec, POINT, self.DX, self.DY, self.DZ)
        projected = commutation_residual(
            spec, POINT, self.DX, self.DY, self.DZ, project_skew=True
        )
        assert np.max(np.abs(plain.residual)) > 1e-3
        assert np.max(np.abs(projected.residual)) < 1e-14

    def test_skew_projection_keeps_shear_content(self):
        spec = CompositeSpec(IDENTITY, MIXED)
        projected = commutation_residual(
            spec, POINT, self.DX, self.DY, self.DZ, project_skew=True
        )
        assert np.max(np.abs(projected.residual)) > 1e-3


class TestClassification:
    def test_identical_components_are_uniform(self):
        spec = CompositeSpec(MIXED, MIXED)
        got = infinitesimal_classification(spec, POINT)
        assert got.kind is InfinitesimalKind.UNIFORM
        assert got.m == 3
        assert got.basis.shape == (3, 3)

    def test_constant_right_factor_is_uniform(self):
        c = np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 3.0], [0.0, 0.0, 0.5]])
        spec = CompositeSpec(MIXED, MIXED.right_multiplied(c))
        got = infinitesimal_classification(spec, POINT)
        assert got.kind is InfinitesimalKind.UNIFORM

    def test_laminated_annihilator(self):
        got = infinitesimal_classification(LAMINATED, POINT)
        assert got.kind is InfinitesimalKind.ANNIHILATOR
        assert got.m == 2
        # kernel is the plane orthogonal to e1
        assert np.allclose(got.basis @ np.array([1.0, 0.0, 0.0]), 0.0, atol=1e-12)

    def test_fibered_annihilator(self):
        got = infinitesimal_classification(FIBERED, POINT)
        assert got.kind is InfinitesimalKind.ANNIHILATOR
        assert got.m == 1
        assert np.allclose(np.abs(got.basis), [[0.0, 0.0, 1.0]], atol=1e-12)

    def test_totally_constrained(self):
        got = infinitesimal_classification(TOTAL, POINT)
        assert got.kind is InfinitesimalKind.ONLY_DOUBLE_UNIT
        assert got.m == 0
        assert got.basis.shape == (0, 3)

    def test_agrees_with_distribution_kernel(self):
        for x in ([0.4, 0.3, 0.7], [0.8, 0.2, 0.5], [0.25, 0.9, 0.1]):
            cls = infinitesimal_classification(LAMINATED, x)
            sample = null_space_at(LAMINATED, x)
            assert cls.m == sample.m
            proj_cls = cls.basis.T @ cls.basis
            proj_sample = sample.basis.T @ sample.basis
            assert np.allclose(proj_cls, proj_sample, atol=1e-10)

    def test_skew_projection_upgrades_rotations_to_uniform(self):
        spec = CompositeSpec(IDENTITY, ROTATION)
        plain = infinitesimal_classification(spec, POINT)
        assert plain.kind is InfinitesimalKind.ANNIHILATOR
        assert plain.m == 2
        relaxed = infinitesimal_classification(spec, POINT, project_skew=True)
        assert relaxed.kind is InfinitesimalKind.UNIFORM

    def test_uniform_floor_tracks_connection_scale(self):
        spec = CompositeSpec(MIXED, MIXED)
        got = infinitesimal_classification(spec, POINT)
        gamma = christoffel(MIXED, POINT).gamma
        expected = 1e-10 * (1.0 + 2.0 * float(np.max(np.abs(gamma))))
        assert got.abs_floor == pytest.approx(expected)
