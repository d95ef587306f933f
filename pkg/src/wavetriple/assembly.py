"""Finite element assembly of the damped wave model.

Piecewise-linear elements on segments or triangles.  Clamped nodes (those
touching a fixed facet) are eliminated from all matrices; the remaining
"active" nodes carry the state.  A state vector stacks nodal displacement
u on top of nodal velocity v.  Boundary trace data lives on the trace
nodes, the boundary nodes away from every fixed facet.

The assembled first-order system is

    gram @ xdot = dynamics @ x,   gram = blockdiag(S, M),
    dynamics = [[0, S], [-S, -D]],

with S the displacement Gram matrix (stiffness plus boundary spring mass),
M the density-weighted mass matrix and D the boundary damper mass.  The
skew part of dynamics is exact by construction, so dissipation identities
hold to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .coefficients import CoefficientSet
from .errors import CoefficientError, DegenerateEnergyNormError, NotPositiveDefiniteError
from .mesh import (
    BoundaryLabel,
    Mesh,
    cell_volumes,
    clamped_nodes,
    facet_measures,
    trace_nodes,
)

# Consistent P1 mass templates; scaled per cell by measure * weight.
_SEG_MASS = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
_TRI_MASS = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


def _scatter(full: np.ndarray, cells: np.ndarray, local: np.ndarray) -> None:
    rows = cells[:, :, None]
    cols = cells[:, None, :]
    np.add.at(full, (rows, cols), local)


def mass_matrix(mesh: Mesh, weight: np.ndarray) -> np.ndarray:
    """Consistent mass matrix with a cellwise-constant weight."""
    w = np.asarray(weight, dtype=float)
    if w.shape != (mesh.num_cells,):
        raise CoefficientError(f"weight must have one value per cell, got {w.shape}")
    full = np.zeros((mesh.num_nodes, mesh.num_nodes))
    template = _SEG_MASS if mesh.dim == 1 else _TRI_MASS
    local = (w * cell_volumes(mesh))[:, None, None] * template
    _scatter(full, mesh.cells, local)
    return full


def stiffness_matrix(mesh: Mesh, modulus: np.ndarray) -> np.ndarray:
    """Stiffness matrix for a cellwise-constant scalar or tensor modulus."""
    t = np.asarray(modulus, dtype=float)
    full = np.zeros((mesh.num_nodes, mesh.num_nodes))
    vols = cell_volumes(mesh)
    if mesh.dim == 1:
        if t.shape != (mesh.num_cells,):
            raise CoefficientError(f"modulus must have one value per cell, got {t.shape}")
        template = np.array([[1.0, -1.0], [-1.0, 1.0]])
        local = (t / vols)[:, None, None] * template
        _scatter(full, mesh.cells, local)
        return full
    if t.shape == (mesh.num_cells,):
        tensors = t[:, None, None] * np.eye(2)
    elif t.shape == (mesh.num_cells, 2, 2):
        tensors = t
    else:
        raise CoefficientError(f"modulus shape {t.shape} not supported")
    pts = mesh.nodes[mesh.cells]
    p0, p1, p2 = pts[:, 0], pts[:, 1], pts[:, 2]
    # Barycentric gradients, columns of a (ncell, 2, 3) stack.
    grads = np.stack(
        [
            np.stack([p1[:, 1] - p2[:, 1], p2[:, 0] - p1[:, 0]], axis=1),
            np.stack([p2[:, 1] - p0[:, 1], p0[:, 0] - p2[:, 0]], axis=1),
            np.stack([p0[:, 1] - p1[:, 1], p1[:, 0] - p0[:, 0]], axis=1),
        ],
        axis=2,
    ) / (2.0 * vols)[:, None, None]
    flux = np.einsum("cab,cbj->caj", tensors, grads)
    local = vols[:, None, None] * np.einsum("cai,caj->cij", grads, flux)
    # Tie the lower triangle to the upper bit-for-bit so the assembled
    # matrix is exactly symmetric.
    upper = np.triu(local)
    local = upper + np.swapaxes(np.triu(local, 1), 1, 2)
    _scatter(full, mesh.cells, local)
    return full


def boundary_mass(mesh: Mesh, values: np.ndarray) -> np.ndarray:
    """Boundary mass matrix for per-facet coefficients.

    Point masses at endpoint facets in 1-D, consistent edge masses in 2-D.
    Negative coefficients are rejected.
    """
    k = np.asarray(values, dtype=float)
    if k.shape != (mesh.num_facets,):
        raise CoefficientError(f"need one value per boundary facet, got {k.shape}")
    if k.size and k.min() < 0:
        raise CoefficientError(f"boundary coefficient must be nonnegative, min {k.min():.3e}")
    full = np.zeros((mesh.num_nodes, mesh.num_nodes))
    if mesh.dim == 1:
        idx = mesh.boundary_facets[:, 0]
        np.add.at(full, (idx, idx), k)
        return full
    local = (k * facet_measures(mesh))[:, None, None] * _SEG_MASS
    _scatter(full, mesh.boundary_facets, local)
    return full


@dataclass(frozen=True)
class OperatorPencil:
    """Reduced matrices of one wave model, plus the index bookkeeping.

    active: node indices kept after eliminating clamped nodes, sorted.
    trace_slots: positions inside `active` of the trace nodes.
    All matrices are restricted to active nodes; gram and dynamics act on
    stacked [u; v] states of length 2 * num_active.
    """

    mesh: Mesh
    coeffs: CoefficientSet
    active: np.ndarray
    trace_slots: np.ndarray
    mass: np.ndarray
    stiffness: np.ndarray
    boundary_spring: np.ndarray
    boundary_damper: np.ndarray
    displacement_gram: np.ndarray
    gram: np.ndarray
    dynamics: np.ndarray
    damping_active: bool

    @property
    def num_active(self) -> int:
        return self.active.shape[0]

    @property
    def num_trace(self) -> int:
        return self.trace_slots.shape[0]

    @property
    def state_dim(self) -> int:
        return 2 * self.num_active

    def split(self, state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = self.num_active
        if state.shape[-1] != 2 * m:
            raise ValueError(f"state length {state.shape[-1]} != {2 * m}")
        return state[..., :m], state[..., m:]

    def join(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.concatenate([u, v], axis=-1)


def energy_gram(mesh: Mesh, coeffs: CoefficientSet) -> np.ndarray:
    """Gram matrix of the state inner product, blockdiag(S, M), reduced.

    Verifies positive definiteness of both blocks by factorization.  A
    failure of the displacement block with no fixed boundary and no
    boundary spring is reported as DegenerateEnergyNormError.
    """
    pencil = assemble_pencil(mesh, coeffs)
    return pencil.gram


def assemble_pencil(mesh: Mesh, coeffs: CoefficientSet) -> OperatorPencil:
    """Assemble and reduce all model matrices; checks the energy form."""
    mass_full = mass_matrix(mesh, coeffs.density)
    stiff_full = stiffness_matrix(mesh, coeffs.modulus)
    spring_full = boundary_mass(mesh, coeffs.boundary_stiffness)
    damper_full = boundary_mass(mesh, coeffs.boundary_damping)

    clamped = clamped_nodes(mesh)
    active = np.setdiff1d(np.arange(mesh.num_nodes), clamped)
    tr_nodes = trace_nodes(mesh)
    trace_slots = np.searchsorted(active, tr_nodes)

    ix = np.ix_(active, active)
    mass = mass_full[ix]
    stiff = stiff_full[ix]
    spring = spring_full[ix]
    damper = damper_full[ix]
    disp_gram = stiff + spring

    m = active.shape[0]
    gram = np.zeros((2 * m, 2 * m))
    gram[:m, :m] = disp_gram
    gram[m:, m:] = mass
    dynamics = np.zeros((2 * m, 2 * m))
    dynamics[:m, m:] = disp_gram
    dynamics[m:, :m] = -disp_gram
    dynamics[m:, m:] = -damper

    try:
        linalg.cholesky(disp_gram)
    except NotPositiveDefiniteError as exc:
        has_clamp = any(lab is BoundaryLabel.FIXED for lab in mesh.facet_labels)
        spring_mass = float(np.sum(coeffs.boundary_stiffness * facet_measures(mesh)))
        if not has_clamp and spring_mass == 0.0:
            raise DegenerateEnergyNormError(
                "degenerate energy norm: no fixed boundary portion and no boundary spring"
            ) from exc
        raise
    linalg.cholesky(mass)

    damping_active = bool(np.any(coeffs.boundary_damping > 0.0))
    return OperatorPencil(
        mesh=mesh,
        coeffs=coeffs,
        active=active,
        trace_slots=trace_slots,
        mass=mass,
        stiffness=stiff,
        boundary_spring=spring,
        boundary_damper=damper,
        displacement_gram=disp_gram,
        gram=gram,
        dynamics=dynamics,
        damping_active=damping_active,
    )


@dataclass(frozen=True)
class DomainElement:
    """A state with its boundary flux data: (u, v, g).

    displacement and velocity are nodal vectors over active nodes; the
    flux trace g collects the weak normal-stress functionals on the trace
    nodes, indexed like trace_slots.
    """

    displacement: np.ndarray
    velocity: np.ndarray
    flux_trace: np.ndarray


def _check_element(pencil: OperatorPencil, elem: DomainElement) -> None:
    m, ntr = pencil.num_active, pencil.num_trace
    if elem.displacement.shape != (m,) or elem.velocity.shape != (m,):
        raise ValueError(f"element fields must have length {m}")
    if elem.flux_trace.shape != (ntr,):
        raise ValueError(f"flux trace must have length {ntr}")


def lift_trace(pencil: OperatorPencil, values: np.ndarray) -> np.ndarray:
    """Embed trace-node values into a zero-padded active-node vector."""
    out = np.zeros(pencil.num_active)
    out[pencil.trace_slots] = values
    return out


def apply_A(pencil: OperatorPencil, elem: DomainElement) -> np.ndarray:
    """Image of a domain element under the wave generator, as a state.

    The displacement part of the image is the velocity; the velocity part
    solves M vdot = -K u + lift(g), the discrete divergence of the stress
    with its boundary flux.
    """
    _check_element(pencil, elem)
    rhs = -pencil.stiffness @ elem.displacement + lift_trace(pencil, elem.flux_trace)
    vdot = linalg.lu_solve(pencil.mass, rhs)
    return pencil.join(elem.velocity, vdot)


def trace_B1(pencil: OperatorPencil, elem: DomainElement) -> np.ndarray:
    """First boundary map: spring force plus stress flux, on trace nodes.

    Functional-valued (it pairs against nodal data by plain dot product).
    """
    _check_element(pencil, elem)
    spring_force = (pencil.boundary_spring @ elem.displacement)[pencil.trace_slots]
    return spring_force + elem.flux_trace


def trace_B2(pencil: OperatorPencil, elem: DomainElement) -> np.ndarray:
    """Second boundary map: velocity restricted to the trace nodes."""
    _check_element(pencil, elem)
    return elem.velocity[pencil.trace_slots]


def duality_pairing(flux: np.ndarray, values: np.ndarray) -> float:
    """Pair a functional-indexed vector with a nodal-indexed one."""
    return float(np.dot(flux, values))


def state_inner(pencil: OperatorPencil, x: np.ndarray, y: np.ndarray) -> float:
    """Inner product of two states in the energy Gram metric."""
    ux, vx = pencil.split(x)
    uy, vy = pencil.split(y)
    return float(ux @ pencil.displacement_gram @ uy + vx @ pencil.mass @ vy)


def state_norm(pencil: OperatorPencil, x: np.ndarray) -> float:
    """Norm of a state in the energy Gram metric."""
    return float(np.sqrt(max(state_inner(pencil, x, x), 0.0)))


def physical_energy(pencil: OperatorPencil, x: np.ndarray) -> float:
    """Kinetic plus strain energy; omits the boundary spring term."""
    u, v = pencil.split(x)
    return float(u @ pencil.stiffness @ u + v @ pencil.mass @ v)


def element_inner(pencil: OperatorPencil, ex: DomainElement, ey: DomainElement) -> float:
    """State inner product of two domain elements (flux data not involved)."""
    x = pencil.join(ex.displacement, ex.velocity)
    y = pencil.join(ey.displacement, ey.velocity)
    return state_inner(pencil, x, y)


def green_identity_residual(
    pencil: OperatorPencil, ex: DomainElement, ey: DomainElement
) -> float:
    """Defect of the boundary Green identity on a pair of elements.

    Evaluates <Ax, y> + <x, Ay> - <B1 x, B2 y> - <B2 x, B1 y> with the
    velocity-block inner products expanded in weak form, so no linear
    solve enters and the identity holds to rounding.
    """
    _check_element(pencil, ex)
    _check_element(pencil, ey)

    def pair(ea: DomainElement, eb: DomainElement) -> float:
        # <A ea, eb> with M^{-1} cancelled against the mass weight.
        first = ea.velocity @ pencil.displacement_gram @ eb.displacement
        weak = -pencil.stiffness @ ea.displacement + lift_trace(pencil, ea.flux_trace)
        return float(first + weak @ eb.velocity)

    lhs = pair(ex, ey) + pair(ey, ex)
    rhs = duality_pairing(trace_B1(pencil, ex), trace_B2(pencil, ey)) + duality_pairing(
        trace_B2(pencil, ex), trace_B1(pencil, ey)
    )
    return abs(lhs - rhs)


def surjectivity_witness(
    pencil: OperatorPencil,
    flux_target: np.ndarray,
    velocity_target: np.ndarray,
    displacement: np.ndarray | None = None,
) -> DomainElement:
    """Element whose boundary maps hit the given pair exactly.

    The velocity is the lifted velocity target and the flux trace is the
    flux target minus the spring force of the chosen displacement; any
    displacement works, which is the point of the construction.  With the
    default zero displacement, B1 = flux_target and B2 = velocity_target
    with no arithmetic error at all.
    """
    ntr = pencil.num_trace
    flux_target = np.asarray(flux_target, dtype=float)
    velocity_target = np.asarray(velocity_target, dtype=float)
    if flux_target.shape != (ntr,) or velocity_target.shape != (ntr,):
        raise ValueError(f"targets must have length {ntr}")
    if displacement is None:
        displacement = np.zeros(pencil.num_active)
        flux = flux_target.copy()
    else:
        displacement = np.asarray(displacement, dtype=float)
        if displacement.shape != (pencil.num_active,):
            raise ValueError(f"displacement must have length {pencil.num_active}")
        flux = flux_target - (pencil.boundary_spring @ displacement)[pencil.trace_slots]
    return DomainElement(
        displacement=displacement,
        velocity=lift_trace(pencil, velocity_target),
        flux_trace=flux,
    )


def eliminated_flux(pencil: OperatorPencil, state: np.ndarray) -> np.ndarray:
    """Flux trace enforced by the absorbing boundary condition.

    The closed-loop model sets B1 x + k2-weighted B2 x = 0; solving for g
    gives the flux the damper exerts for a given state.
    """
    u, v = pencil.split(state)
    spring = (pencil.boundary_spring @ u)[pencil.trace_slots]
    damper = (pencil.boundary_damper @ v)[pencil.trace_slots]
    return -spring - damper


def closed_loop_element(pencil: OperatorPencil, state: np.ndarray) -> DomainElement:
    """Domain element for a state under the absorbing boundary condition."""
    u, v = pencil.split(state)
    return DomainElement(u.copy(), v.copy(), eliminated_flux(pencil, state))


def triplet_text(mat: np.ndarray) -> str:
    """Serialize a matrix as 'rows cols nnz' plus one 'i j value' per entry.

    Entries appear in row-major order with 17 significant digits, so equal
    matrices serialize to identical bytes.
    """
    mat = np.asarray(mat)
    rows, cols = mat.shape
    ii, jj = np.nonzero(mat)
    lines = [f"{rows} {cols} {ii.size}"]
    for i, j in zip(ii, jj):
        lines.append(f"{i} {j} {mat[i, j]:.17g}")
    return "\n".join(lines) + "\n"
