"""Projections, dual projections, derivative elements, and their invariants."""

import numpy as np
import pytest

from conic_newton import (
    DimensionMismatchError,
    FreeSpace,
    Orthant,
    Product,
    PsdCone,
    SecondOrder,
    jacobian_element,
    membership,
    project,
    project_dual,
    smat,
    spectral_decomposition,
    svec,
)
from conftest import CONE_CASES, random_point, random_symmetric


class TestVectorization:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for n in (1, 2, 5, 9):
            a = random_symmetric(rng, n)
            back = smat(svec(a))
            np.testing.assert_allclose(back, a, rtol=0, atol=1e-15 * (1 + np.abs(a).max()))

    def test_inner_product_matches_trace(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = random_symmetric(rng, 6)
            b = random_symmetric(rng, 6)
            np.testing.assert_allclose(svec(a) @ svec(b), np.trace(a @ b), rtol=1e-12)

    def test_rejects_bad_lengths(self):
        with pytest.raises(DimensionMismatchError):
            smat(np.zeros(4))  # not a triangular number


class TestSpectralDecomposition:
    def test_orthogonality_and_reconstruction(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            a = random_symmetric(rng, 7, scale=3.0)
            dec = spectral_decomposition(a)
            assert np.all(np.diff(dec.eigvals) <= 0)  # descending
            gram = dec.eigvecs.T @ dec.eigvecs
            np.testing.assert_allclose(gram, np.eye(7), atol=1e-10)
            err = np.linalg.norm(dec.reconstruct() - a)
            assert err <= 1e-8 * (1 + np.linalg.norm(a))


class TestProjection:
    def test_orthant_clamps(self):
        np.testing.assert_array_equal(
            Orthant(3).project([1.0, -2.0, 0.0]), [1.0, 0.0, 0.0]
        )

    def test_soc_closed_form(self):
        np.testing.assert_allclose(
            SecondOrder(3).project([0.0, 3.0, 4.0]), [2.5, 1.5, 2.0]
        )

    def test_soc_against_sampled_minimization(self):
        # crude independent oracle: the projection must beat a dense sample
        # of cone points at minimizing the distance to x
        cone = SecondOrder(3)
        x = np.array([0.0, 3.0, 4.0])
        p = cone.project(x)
        best = np.inf
        for t in np.linspace(0.0, 10.0, 101):
            for phi in np.linspace(0.0, 2 * np.pi, 181):
                y = np.array([t, t * np.cos(phi), t * np.sin(phi)])
                best = min(best, np.linalg.norm(y - x))
        assert np.linalg.norm(p - x) <= best + 1e-6
        assert cone.contains(p, tol=1e-9)

    def test_soc_polar_and_interior(self):
        cone = SecondOrder(3)
        np.testing.assert_array_equal(cone.project([5.0, 1.0, 1.0]), [5.0, 1.0, 1.0])
        np.testing.assert_array_equal(cone.project([-5.0, 1.0, 1.0]), [0.0, 0.0, 0.0])

    def test_psd_eigenvalue_clamp(self):
        out = smat(PsdCone(2).project(svec(np.diag([1.0, -1.0]))))
        np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-12)

    def test_free_space_is_identity(self):
        x = np.array([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(FreeSpace(3).project(x), x)

    def test_product_is_componentwise(self):
        cone = Product((Orthant(2), FreeSpace(1)))
        np.testing.assert_array_equal(
            cone.project([-1.0, 2.0, -3.0]), [0.0, 2.0, -3.0]
        )

    @pytest.mark.parametrize("cone", CONE_CASES)
    def test_idempotent_and_member(self, cone):
        rng = np.random.default_rng(3)
        for _ in range(25):
            x = random_point(cone, rng)
            p = cone.project(x)
            assert cone.contains(p, tol=1e-9)
            np.testing.assert_allclose(cone.project(p), p, atol=1e-12 * (1 + np.abs(p).max()))

    @pytest.mark.parametrize("cone", CONE_CASES)
    def test_nonexpansive(self, cone):
        rng = np.random.default_rng(4)
        for _ in range(50):
            x = random_point(cone, rng)
            y = random_point(cone, rng)
            lhs = np.linalg.norm(cone.project(x) - cone.project(y))
            assert lhs <= np.linalg.norm(x - y) * (1 + 1e-12) + 1e-14

    @pytest.mark.parametrize("cone", CONE_CASES)
    def test_positively_homogeneous(self, cone):
        rng = np.random.default_rng(5)
        for t in (0.0, 0.5, 1.0, 3.7):
            x = random_point(cone, rng)
            np.testing.assert_allclose(
                cone.project(t * x), t * cone.project(x), atol=1e-10
            )

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            Orthant(3).project([1.0, 2.0])
        with pytest.raises(DimensionMismatchError):
            PsdCone(2).jacobian_element(np.zeros(4))


class TestDualProjection:
    def test_orthant_self_dual(self):
        np.testing.assert_array_equal(Orthant(2).project_dual([-1.0, 2.0]), [0.0, 2.0])

    def test_psd_self_dual(self):
        out = smat(PsdCone(2).project_dual(svec(np.diag([-3.0, 1.0]))))
        np.testing.assert_allclose(out, np.diag([0.0, 1.0]), atol=1e-12)

    def test_soc_moreau_arithmetic(self):
        cone = SecondOrder(3)
        x = np.array([0.0, 3.0, 4.0])
        np.testing.assert_allclose(cone.project_dual(-x), [2.5, -1.5, -2.0])

    def test_free_space_dual_is_origin(self):
        np.testing.assert_array_equal(
            FreeSpace(3).project_dual([1.0, -2.0, 3.0]), np.zeros(3)
        )

    @pytest.mark.parametrize("cone", CONE_CASES)
    def test_moreau_identities(self, cone):
        rng = np.random.default_rng(6)
        for _ in range(30):
            x = random_point(cone, rng)
            p = cone.project(x)
            pd = cone.project_dual(-x)
            np.testing.assert_allclose(x, p - pd, atol=1e-9 * (1 + np.abs(x).max()))
            assert abs(np.dot(p, pd)) <= 1e-9 * (1 + np.linalg.norm(p) * np.linalg.norm(pd))


class TestMembership:
    def test_origin(self):
        assert Orthant(2).contains([0.0, 0.0], tol=0.0)

    def test_slightly_indefinite_matrix(self):
        assert not PsdCone(2).contains(svec(np.diag([1.0, -1e-3])), tol=1e-9)

    def test_soc_boundary(self):
        assert SecondOrder(3).contains([5.0, 3.0, 4.0], tol=1e-9)


class TestJacobianElement:
    def test_orthant_activity(self):
        el = Orthant(2).jacobian_element([1.0, -2.0])
        np.testing.assert_array_equal(el.materialize(), np.diag([1.0, 0.0]))
        np.testing.assert_array_equal(el.apply([1.0, -2.0]), [1.0, 0.0])

    def test_soc_boundary_block(self):
        el = SecondOrder(3).jacobian_element([0.0, 3.0, 4.0])
        expected = np.array([[0.5, 0.3, 0.4], [0.3, 0.5, 0.0], [0.4, 0.0, 0.5]])
        np.testing.assert_allclose(el.materialize(), expected, atol=1e-15)
        np.testing.assert_allclose(el.apply([0.0, 3.0, 4.0]), [2.5, 1.5, 2.0])

    def test_soc_origin_uses_identity(self):
        el = SecondOrder(3).jacobian_element(np.zeros(3))
        np.testing.assert_array_equal(el.materialize(), np.eye(3))

    def test_psd_scaling_matrix(self):
        x = svec(np.diag([3.0, -1.0]))
        el = PsdCone(2).jacobian_element(x)
        np.testing.assert_allclose(smat(el.apply(x)), np.diag([3.0, 0.0]), atol=1e-12)
        # scaling entries: positive pair -> 1, cross pair -> 3/4, negative -> 0
        mat = el.materialize()
        applied = smat(mat @ svec(np.array([[0.0, 1.0], [1.0, 0.0]])))
        np.testing.assert_allclose(applied, 0.75 * np.array([[0.0, 1.0], [1.0, 0.0]]), atol=1e-12)

    def test_pattern_keys_discriminate_regions(self):
        cone = SecondOrder(3)
        assert cone.jacobian_element([5.0, 1.0, 0.0]).pattern_key == ("soc", "interior")
        assert cone.jacobian_element([-5.0, 1.0, 0.0]).pattern_key == ("soc", "polar")
        assert cone.jacobian_element([0.0, 3.0, 4.0]).pattern_key == ("soc", "boundary")
        o = Orthant(2)
        assert o.jacobian_element([1.0, -1.0]).pattern_key == o.jacobian_element([2.0, -9.0]).pattern_key
        assert o.jacobian_element([1.0, 1.0]).pattern_key != o.jacobian_element([1.0, -1.0]).pattern_key

    def test_zero_coordinate_counts_inactive(self):
        el = Orthant(3).jacobian_element([0.0, 1.0, -1.0])
        np.testing.assert_array_equal(np.diag(el.materialize()), [0.0, 1.0, 0.0])

    @pytest.mark.parametrize("cone", CONE_CASES)
    def test_reproduces_projection_at_base_point(self, cone):
        rng = np.random.default_rng(7)
        for _ in range(40):
            x = random_point(cone, rng)
            el = cone.jacobian_element(x)
            np.testing.assert_allclose(
                el.apply(x), cone.project(x), atol=1e-8 * (1 + np.linalg.norm(x))
            )

    @pytest.mark.parametrize("cone", CONE_CASES)
    def test_symmetry_and_spectrum(self, cone):
        rng = np.random.default_rng(8)
        for _ in range(40):
            x = random_point(cone, rng)
            mat = cone.jacobian_element(x).materialize()
            assert np.abs(mat - mat.T).max() <= 1e-10
            eigs = np.linalg.eigvalsh(mat)
            assert eigs[0] >= -1e-8
            assert eigs[-1] <= 1 + 1e-8
            assert np.linalg.norm(mat, 2) <= 1 + 1e-8

    @pytest.mark.parametrize("cone", CONE_CASES)
    def test_linearization_bound(self, cone):
        rng = np.random.default_rng(9)
        for _ in range(40):
            x = random_point(cone, rng)
            y = random_point(cone, rng)
            el = cone.jacobian_element(x)
            lhs = np.linalg.norm(cone.project(y) - cone.project(x) - el.apply(y - x))
            assert lhs <= (1 + 1e-8) * np.linalg.norm(y - x)

    def test_product_blocks(self):
        cone = Product((Orthant(2), FreeSpace(2)))
        el = cone.jacobian_element([1.0, -1.0, 5.0, -5.0])
        expected = np.diag([1.0, 0.0, 1.0, 1.0])
        np.testing.assert_array_equal(el.materialize(), expected)
        assert el.pattern_key[0] == "product"


class TestFunctionSurface:
    def test_functions_delegate_to_methods(self):
        cone = Orthant(3)
        x = np.array([1.0, -2.0, 0.0])
        np.testing.assert_array_equal(project(cone, x), cone.project(x))
        np.testing.assert_array_equal(project_dual(cone, x), cone.project_dual(x))
        el = jacobian_element(cone, x)
        np.testing.assert_array_equal(
            el.materialize(), cone.jacobian_element(x).materialize()
        )
        assert membership(cone, np.array([1.0, 0.0, 2.0]), tol=0.0)
        assert not membership(cone, x, tol=1e-9)
