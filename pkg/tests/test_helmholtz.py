"""Tests for the weighted field splitting and its orthogonality certificate."""

import numpy as np
import pytest

import models
import oracles
import wavetriple as wt
from wavetriple.mesh import cell_midpoints, cell_volumes


def unit_interval(n):
    mesh = wt.interval_mesh(n)
    return mesh, cell_midpoints(mesh)[:, 0]


def field_norm(mesh, coeffs, field):
    return np.sqrt(wt.weighted_inner(mesh, coeffs, field, field))


class TestWeightedInner:
    def test_unit_modulus_is_plain_l2(self):
        mesh, mid = unit_interval(4)
        coeffs = wt.sample_coefficients(mesh)
        got = wt.weighted_inner(mesh, coeffs, mid, mid)
        assert got == pytest.approx(np.sum(0.25 * mid * mid), rel=1e-14)

    def test_modulus_two_halves_the_product(self):
        mesh, mid = unit_interval(8)
        one = wt.sample_coefficients(mesh)
        two = wt.sample_coefficients(mesh, modulus=2.0)
        assert wt.weighted_inner(mesh, two, mid, mid) == pytest.approx(
            0.5 * wt.weighted_inner(mesh, one, mid, mid), rel=1e-14
        )

    def test_symmetric_and_positive(self):
        pencil = models.square_pencil(3, 3)
        rng = np.random.default_rng(5)
        f = rng.standard_normal((pencil.mesh.num_cells, 2))
        g = rng.standard_normal((pencil.mesh.num_cells, 2))
        ip = wt.weighted_inner(pencil.mesh, pencil.coeffs, f, g)
        assert ip == pytest.approx(
            wt.weighted_inner(pencil.mesh, pencil.coeffs, g, f), rel=1e-14
        )
        assert wt.weighted_inner(pencil.mesh, pencil.coeffs, f, f) > 0

    def test_rejects_wrong_shape(self):
        mesh, _ = unit_interval(4)
        coeffs = wt.sample_coefficients(mesh)
        with pytest.raises(ValueError, match="shape"):
            wt.weighted_inner(mesh, coeffs, np.ones(3), np.ones(3))


class TestIntervalSplit:
    def test_linear_field_unit_modulus(self):
        # f(x) = x against T = 1: the divergence-free remainder is the mean
        # and the gradient part is what is left.
        mesh, mid = unit_interval(64)
        coeffs = wt.sample_coefficients(mesh)
        grad, div = wt.decompose(mesh, coeffs, mid)
        assert np.abs(div - 0.5).max() <= 1e-10
        assert np.abs(grad[:, 0] - (mid - 0.5)).max() <= 1e-10

    def test_linear_field_modulus_two(self):
        mesh, mid = unit_interval(64)
        coeffs = wt.sample_coefficients(mesh, modulus=2.0)
        grad, div = wt.decompose(mesh, coeffs, mid)
        assert np.abs(div - 0.5).max() <= 1e-10
        assert np.abs(grad[:, 0] - (mid - 0.5)).max() <= 1e-10

    def test_variable_modulus_constant_from_weighted_mean(self):
        mesh, mid = unit_interval(32)
        tvals = 1.0 + mid
        coeffs = wt.sample_coefficients(mesh, modulus=lambda p: 1.0 + p[:, 0])
        want = oracles.weighted_mean(mid, tvals, cell_volumes(mesh))
        _, div = wt.decompose(mesh, coeffs, mid)
        assert np.abs(div - want).max() <= 1e-10

    def test_constant_field_has_no_gradient_part(self):
        mesh, _ = unit_interval(16)
        coeffs = wt.sample_coefficients(mesh)
        grad, div = wt.decompose(mesh, coeffs, np.full(16, 3.0))
        assert np.abs(grad).max() <= 1e-12
        assert np.abs(div - 3.0).max() <= 1e-12

    def test_gradient_input_reproduced(self):
        # T * p' for a potential vanishing at both ends lies in the range
        # of the projection, so the remainder must vanish.
        n = 40
        mesh, mid = unit_interval(n)
        coeffs = wt.sample_coefficients(mesh, modulus=lambda p: 2.0 + p[:, 0])
        nodes = mesh.nodes[:, 0]
        potential = nodes * (1.0 - nodes)
        slope = (potential[1:] - potential[:-1]) * n
        field = (2.0 + mid) * slope
        grad, div = wt.decompose(mesh, coeffs, field)
        assert np.abs(div).max() <= 1e-11
        assert np.abs(grad[:, 0] - field).max() <= 1e-11

    def test_flat_input_shape_accepted(self):
        mesh, mid = unit_interval(8)
        coeffs = wt.sample_coefficients(mesh)
        flat = wt.decompose(mesh, coeffs, mid)
        column = wt.decompose(mesh, coeffs, mid[:, None])
        assert np.array_equal(flat[0], column[0])
        assert np.array_equal(flat[1], column[1])


class TestSplitProperties:
    def cases(self):
        mesh1, mid = unit_interval(24)
        coeffs1 = wt.sample_coefficients(mesh1, modulus=lambda p: 1.0 + p[:, 0])
        square = models.square_pencil(4, 4, seed=7)
        tensor_mesh = wt.rectangle_mesh(3, 5, models.square_partition())
        tensor_coeffs = wt.sample_coefficients(
            tensor_mesh, modulus=np.array([[2.0, 0.5], [0.5, 1.0]])
        )
        rng = np.random.default_rng(11)
        return [
            (mesh1, coeffs1, rng.standard_normal(mesh1.num_cells)),
            (square.mesh, square.coeffs, rng.standard_normal((square.mesh.num_cells, 2))),
            (tensor_mesh, tensor_coeffs, rng.standard_normal((tensor_mesh.num_cells, 2))),
        ]

    def test_reconstruction(self):
        for mesh, coeffs, f in self.cases():
            grad, div = wt.decompose(mesh, coeffs, f)
            full = np.asarray(f, dtype=float).reshape(grad.shape)
            assert np.abs(grad + div - full).max() <= 1e-13 * (1.0 + np.abs(full).max())

    def test_parts_are_orthogonal(self):
        for mesh, coeffs, f in self.cases():
            grad, div = wt.decompose(mesh, coeffs, f)
            cross = wt.weighted_inner(mesh, coeffs, grad, div)
            assert abs(cross) <= 1e-10 * field_norm(mesh, coeffs, f) ** 2

    def test_pythagoras(self):
        for mesh, coeffs, f in self.cases():
            grad, div = wt.decompose(mesh, coeffs, f)
            total = wt.weighted_inner(mesh, coeffs, f, f)
            parts = wt.weighted_inner(mesh, coeffs, grad, grad) + wt.weighted_inner(
                mesh, coeffs, div, div
            )
            assert abs(total - parts) <= 1e-10 * total

    def test_projection_idempotent(self):
        for mesh, coeffs, f in self.cases():
            grad, div = wt.decompose(mesh, coeffs, f)
            grad2, rem = wt.decompose(mesh, coeffs, grad)
            assert np.abs(rem).max() <= 1e-11 * (1.0 + np.abs(grad).max())
            assert np.abs(grad2 - grad).max() <= 1e-11 * (1.0 + np.abs(grad).max())
            grad3, div3 = wt.decompose(mesh, coeffs, div)
            assert np.abs(grad3).max() <= 1e-11 * (1.0 + np.abs(div).max())
            assert np.abs(div3 - div).max() <= 1e-11 * (1.0 + np.abs(div).max())

    def test_linear(self):
        mesh, mid = unit_interval(16)
        coeffs = wt.sample_coefficients(mesh)
        rng = np.random.default_rng(3)
        f, g = rng.standard_normal(16), rng.standard_normal(16)
        gf, df = wt.decompose(mesh, coeffs, f)
        gg, dg = wt.decompose(mesh, coeffs, g)
        gsum, dsum = wt.decompose(mesh, coeffs, 2.0 * f - 3.0 * g)
        assert np.abs(gsum - (2.0 * gf - 3.0 * gg)).max() <= 1e-12 * np.abs(gsum).max()
        assert np.abs(dsum - (2.0 * df - 3.0 * dg)).max() <= 1e-12 * np.abs(dsum).max()


class TestOrthogonalityResidual:
    def test_divfree_part_passes(self):
        for mesh, coeffs, f in TestSplitProperties().cases():
            _, div = wt.decompose(mesh, coeffs, f)
            res = wt.orthogonality_residual(mesh, div)
            assert res <= 1e-11 * (1.0 + field_norm(mesh, coeffs, f))

    def test_gradient_part_fails(self):
        mesh, mid = unit_interval(16)
        coeffs = wt.sample_coefficients(mesh)
        grad, _ = wt.decompose(mesh, coeffs, mid)
        assert wt.orthogonality_residual(mesh, grad) > 1e-4

    def test_single_cell_everything_is_divfree(self):
        mesh = wt.interval_mesh(1)
        coeffs = wt.sample_coefficients(mesh)
        grad, div = wt.decompose(mesh, coeffs, np.array([4.0]))
        assert np.abs(grad).max() == 0.0
        assert div[0] == 4.0
        assert wt.orthogonality_residual(mesh, div) == 0.0
