"""Weighted Helmholtz splitting of cellwise-constant vector fields.

Any L2 vector field splits into a modulus-weighted gradient of a potential
vanishing on the whole boundary, plus a divergence-free remainder; the two
parts are orthogonal in the inner product weighted by the inverse modulus.
Discretely the potential is piecewise linear and zero at every boundary
node, so its weighted gradient is cellwise constant like the input.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .coefficients import CoefficientSet
from .mesh import Mesh, boundary_nodes, cell_volumes


def _as_field(mesh: Mesh, field: np.ndarray) -> np.ndarray:
    arr = np.asarray(field, dtype=float)
    want = (mesh.num_cells, mesh.dim)
    if mesh.dim == 1 and arr.shape == (mesh.num_cells,):
        arr = arr[:, None]
    if arr.shape != want:
        raise ValueError(f"field must have shape {want}, got {arr.shape}")
    return arr


def _tensors(mesh: Mesh, coeffs: CoefficientSet) -> np.ndarray:
    t = coeffs.modulus
    if t.ndim == 1:
        eye = np.eye(mesh.dim)
        return t[:, None, None] * eye
    return t


def weighted_inner(
    mesh: Mesh, coeffs: CoefficientSet, first: np.ndarray, second: np.ndarray
) -> float:
    """Inner product sum_c vol_c * first_c . modulus_c^{-1} second_c."""
    f = _as_field(mesh, first)
    g = _as_field(mesh, second)
    tinv = np.linalg.inv(_tensors(mesh, coeffs))
    return float(np.einsum("c,cab,ca,cb->", cell_volumes(mesh), tinv, f, g))


def _gradient_operator(mesh: Mesh) -> np.ndarray:
    """Cellwise gradients of the nodal basis: shape (ncell, dim, dim + 1)."""
    pts = mesh.nodes[mesh.cells]
    vols = cell_volumes(mesh)
    if mesh.dim == 1:
        h = vols[:, None, None]
        return np.concatenate([-1.0 / h, 1.0 / h], axis=2)
    p0, p1, p2 = pts[:, 0], pts[:, 1], pts[:, 2]
    grads = np.stack(
        [
            np.stack([p1[:, 1] - p2[:, 1], p2[:, 0] - p1[:, 0]], axis=1),
            np.stack([p2[:, 1] - p0[:, 1], p0[:, 0] - p2[:, 0]], axis=1),
            np.stack([p0[:, 1] - p1[:, 1], p1[:, 0] - p0[:, 0]], axis=1),
        ],
        axis=2,
    )
    return grads / (2.0 * vols)[:, None, None]


def project_gradient(mesh: Mesh, coeffs: CoefficientSet, field: np.ndarray) -> np.ndarray:
    """Weighted-gradient component of a cellwise field.

    Solves the potential problem with the modulus-weighted stiffness on
    nodes interior to the whole boundary and returns modulus * grad(p).
    """
    f = _as_field(mesh, field)
    grads = _gradient_operator(mesh)
    tensors = _tensors(mesh, coeffs)
    vols = cell_volumes(mesh)

    flux_basis = np.einsum("cab,cbj->caj", tensors, grads)
    stiff_local = vols[:, None, None] * np.einsum("cai,caj->cij", grads, flux_basis)
    n = mesh.num_nodes
    stiff = np.zeros((n, n))
    rows = mesh.cells[:, :, None]
    cols = mesh.cells[:, None, :]
    np.add.at(stiff, (rows, cols), stiff_local)

    rhs_local = vols[:, None] * np.einsum("ca,caj->cj", f, grads)
    rhs = np.zeros(n)
    np.add.at(rhs, mesh.cells, rhs_local)

    interior = np.setdiff1d(np.arange(n), boundary_nodes(mesh))
    potential = np.zeros(n)
    if interior.size:
        ix = np.ix_(interior, interior)
        potential[interior] = linalg.lu_solve(stiff[ix], rhs[interior])
    grad_p = np.einsum("caj,cj->ca", grads, potential[mesh.cells])
    return np.einsum("cab,cb->ca", tensors, grad_p)


def orthogonality_residual(mesh: Mesh, divfree: np.ndarray) -> float:
    """Largest pairing of a divergence-free part with a test gradient.

    Test potentials run over the nodal basis interior to the whole
    boundary; the unweighted pairing <k, grad(phi_j)> equals the weighted
    one against the weighted gradient, so one number covers both.
    """
    k = _as_field(mesh, divfree)
    grads = _gradient_operator(mesh)
    vols = cell_volumes(mesh)
    paired_local = vols[:, None] * np.einsum("ca,caj->cj", k, grads)
    paired = np.zeros(mesh.num_nodes)
    np.add.at(paired, mesh.cells, paired_local)
    interior = np.setdiff1d(np.arange(mesh.num_nodes), boundary_nodes(mesh))
    if interior.size == 0:
        return 0.0
    return float(np.max(np.abs(paired[interior])))


def decompose(
    mesh: Mesh, coeffs: CoefficientSet, field: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Split a field into (weighted gradient part, divergence-free part).

    The parts sum to the input exactly by construction and are orthogonal
    in the inverse-modulus inner product to solver precision.
    """
    f = _as_field(mesh, field)
    grad_part = project_gradient(mesh, coeffs, f)
    return grad_part, f - grad_part
