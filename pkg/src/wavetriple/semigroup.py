"""Time evolution of the assembled model by the Cayley (midpoint) scheme.

One step solves (gram - dt/2 * dyn) x_next = (gram + dt/2 * dyn) x.  The
scheme is A-stable and norm-exact: for a dissipative model the state norm
never grows, and with no damping it is conserved to rounding.  Explicit
schemes are deliberately not offered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .assembly import OperatorPencil, mass_matrix, physical_energy, state_norm
from .errors import ContractionBreachError, SingularMatrixError

# Relative per-step growth beyond which a dissipative run is aborted.
BREACH_RTOL = 1e-10


def perturbation_matrices(pencil: OperatorPencil) -> tuple[np.ndarray, np.ndarray]:
    """Reduced mass matrices weighted by the reaction and damping fields."""
    ix = np.ix_(pencil.active, pencil.active)
    ma = mass_matrix(pencil.mesh, pencil.coeffs.reaction)[ix]
    mb = mass_matrix(pencil.mesh, pencil.coeffs.damping)[ix]
    return ma, mb


def perturbed_dynamics(pencil: OperatorPencil) -> np.ndarray:
    """Dynamics matrix including interior reaction and damping terms.

    Adds [[0, 0], [-Ma, -Mb]] to the boundary-driven dynamics.  With zero
    fields this returns the unperturbed matrix unchanged.
    """
    ma, mb = perturbation_matrices(pencil)
    m = pencil.num_active
    dyn = pencil.dynamics.copy()
    dyn[m:, :m] -= ma
    dyn[m:, m:] -= mb
    return dyn


def provably_dissipative(pencil: OperatorPencil) -> bool:
    """True when the symmetric part of the dynamics is certainly <= 0.

    Requires no reaction term and nonnegative interior damping; boundary
    damper coefficients are nonnegative by construction.
    """
    return bool(
        np.all(pencil.coeffs.reaction == 0.0) and np.all(pencil.coeffs.damping >= 0.0)
    )


class CayleyStepper:
    """Cached-factorization midpoint stepper for one pencil and step size."""

    def __init__(self, pencil: OperatorPencil, dt: float):
        if not dt > 0:
            raise ValueError(f"step size must be positive, got {dt}")
        self.pencil = pencil
        self.dt = float(dt)
        dyn = perturbed_dynamics(pencil)
        half = 0.5 * self.dt
        self._plus = pencil.gram + half * dyn
        self._solver = linalg.LuFactorization(pencil.gram - half * dyn)

    def step(self, state: np.ndarray) -> np.ndarray:
        return self._solver.solve(self._plus @ state)


def cayley_step(pencil: OperatorPencil, state: np.ndarray, dt: float) -> np.ndarray:
    """Single midpoint step; factors the shifted matrix on every call."""
    return CayleyStepper(pencil, dt).step(state)


@dataclass(frozen=True)
class Trajectory:
    """Time history of one run: states plus energy and norm per sample."""

    times: np.ndarray      # (nsteps + 1,)
    states: np.ndarray     # (nsteps + 1, state_dim)
    energy: np.ndarray     # (nsteps + 1,) physical energy
    xnorm: np.ndarray      # (nsteps + 1,) state norm in the gram metric

    def __len__(self) -> int:
        return self.times.shape[0]


def simulate(
    pencil: OperatorPencil,
    x0: np.ndarray,
    dt: float,
    nsteps: int,
    enforce_contraction: bool | None = None,
) -> Trajectory:
    """Run nsteps Cayley steps from x0, recording energy and norm each step.

    When the model is provably dissipative (decided automatically unless
    enforce_contraction is forced), any per-step norm growth beyond a
    rounding allowance aborts with ContractionBreachError.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (pencil.state_dim,):
        raise ValueError(f"initial state must have length {pencil.state_dim}")
    if nsteps < 0:
        raise ValueError("nsteps must be nonnegative")
    if enforce_contraction is None:
        enforce_contraction = provably_dissipative(pencil)
    stepper = CayleyStepper(pencil, dt)

    states = np.zeros((nsteps + 1, pencil.state_dim))
    energy = np.zeros(nsteps + 1)
    xnorm = np.zeros(nsteps + 1)
    states[0] = x0
    energy[0] = physical_energy(pencil, x0)
    xnorm[0] = state_norm(pencil, x0)
    x = x0
    for k in range(1, nsteps + 1):
        x = stepper.step(x)
        states[k] = x
        energy[k] = physical_energy(pencil, x)
        xnorm[k] = state_norm(pencil, x)
        if enforce_contraction and xnorm[k] > xnorm[k - 1] * (1.0 + BREACH_RTOL):
            raise ContractionBreachError(
                f"norm grew from {xnorm[k - 1]:.17g} to {xnorm[k]:.17g} at step {k}"
            )
    times = dt * np.arange(nsteps + 1)
    return Trajectory(times, states, energy, xnorm)


def initial_state(pencil: OperatorPencil, w0, w1) -> np.ndarray:
    """Nodal state from initial displacement and velocity callables.

    Both callables map an (m, dim) array of points to m values.  The
    displacement must vanish at clamped nodes; a violation is a data
    error, not something to silently project away.
    """
    mesh = pencil.mesh
    pts = mesh.nodes[pencil.active]
    u = np.asarray(w0(pts), dtype=float)
    v = np.asarray(w1(pts), dtype=float)
    if u.shape != (pencil.num_active,) or v.shape != (pencil.num_active,):
        raise ValueError("initial data callables must return one value per active node")
    clamped = np.setdiff1d(np.arange(mesh.num_nodes), pencil.active)
    if clamped.size:
        at_clamped = np.asarray(w0(mesh.nodes[clamped]), dtype=float)
        tol = 1e-12 * (1.0 + float(np.abs(u).max(initial=0.0)))
        if np.abs(at_clamped).max() > tol:
            raise ValueError(
                f"initial displacement must vanish on the fixed boundary; "
                f"largest violation {np.abs(at_clamped).max():.3e}"
            )
    return pencil.join(u, v)


def momentum_density(pencil: OperatorPencil, state: np.ndarray) -> np.ndarray:
    """Cellwise momentum rho * velocity at cell midpoints, for output.

    The state stores velocity; the conjugate momentum is recovered by
    weighting with the cellwise density.
    """
    _, v = pencil.split(state)
    full = np.zeros(pencil.mesh.num_nodes)
    full[pencil.active] = v
    at_cells = full[pencil.mesh.cells].mean(axis=1)
    return pencil.coeffs.density * at_cells


def decay_profile(
    pencil: OperatorPencil, image: np.ndarray, dt: float, nsteps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Norm history of the state whose dynamics image is ``image``.

    Solves dynamics @ x0 = gram @ image for the start state, runs the
    stepper from x0, and returns (times, profile) with profile normalized
    by the graph norm sqrt(||x0||^2 + ||image||^2).  No decay-rate law is
    asserted here; the profile is the deliverable.
    """
    image = np.asarray(image, dtype=float)
    dyn = perturbed_dynamics(pencil)
    try:
        x0 = linalg.LuFactorization(dyn).solve(pencil.gram @ image)
    except SingularMatrixError as err:
        raise SingularMatrixError(
            "dynamics matrix is singular: zero is an eigenvalue of the "
            "evolution and the start state is not determined"
        ) from err
    graph = np.sqrt(
        state_norm(pencil, x0) ** 2 + state_norm(pencil, image) ** 2
    )
    traj = simulate(pencil, x0, dt, nsteps)
    if graph == 0.0:
        return traj.times, np.zeros_like(traj.xnorm)
    return traj.times, traj.xnorm / graph


def energy_csv(traj: Trajectory) -> str:
    """CSV text 't,energy,xnorm' with 17 significant digits per field."""
    lines = ["t,energy,xnorm"]
    for t, en, nr in zip(traj.times, traj.energy, traj.xnorm):
        lines.append(f"{t:.17g},{en:.17g},{nr:.17g}")
    return "\n".join(lines) + "\n"
