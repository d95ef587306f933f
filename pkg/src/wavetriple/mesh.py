"""Interval and unit-square meshes with labeled boundary facets.

Nodes are stored as an (N, dim) float array, cells as index tuples into it
(segments in 1-D, counterclockwise triangles in 2-D).  Each boundary facet
(an endpoint in 1-D, an edge in 2-D) carries exactly one behavioral label.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import MeshValidationError

# Tolerance for snapping partition break points onto facet boundaries.
SNAP_TOL = 1e-9


class BoundaryLabel(enum.Enum):
    """What a stretch of boundary does to the wave."""

    FIXED = "fixed"              # displacement pinned to zero
    FREE = "free"                # stress-free, no attachment
    ELASTIC = "elastic"          # linear spring restoring force
    DAMPED = "damped"            # velocity-proportional absorber
    ELASTIC_DAMPED = "elastic_damped"  # spring and absorber together

    @property
    def has_spring(self) -> bool:
        return self in (BoundaryLabel.ELASTIC, BoundaryLabel.ELASTIC_DAMPED)

    @property
    def has_damper(self) -> bool:
        return self in (BoundaryLabel.DAMPED, BoundaryLabel.ELASTIC_DAMPED)


@dataclass(frozen=True)
class Segment:
    """One labeled piece of a square side, in side parameter t in [0, 1]."""

    label: BoundaryLabel
    start: float = 0.0
    stop: float = 1.0


#: Sides of the unit square, each parameterized by its free coordinate
#: increasing (bottom/top by x, left/right by y).
SIDES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class PartitionSpec:
    """Assignment of boundary labels to the four sides of the unit square.

    Each side maps to a tuple of segments that must tile [0, 1] without
    overlap, and every break point must land on a mesh facet boundary.
    """

    sides: Mapping[str, tuple[Segment, ...]] = field(default_factory=dict)

    @staticmethod
    def uniform(label: BoundaryLabel) -> "PartitionSpec":
        return PartitionSpec({side: (Segment(label),) for side in SIDES})

    def segments(self, side: str) -> tuple[Segment, ...]:
        if side not in SIDES:
            raise ValueError(f"unknown side {side!r}")
        if side not in self.sides:
            raise MeshValidationError(f"side {side!r} has no boundary label")
        return tuple(self.sides[side])


@dataclass(frozen=True)
class Mesh:
    """Simplicial mesh with labeled boundary facets.

    dim: 1 or 2.
    nodes: (N, dim) coordinates.
    cells: (ncell, dim + 1) node indices; triangles are counterclockwise.
    boundary_facets: (nf, dim) node indices; 1-D facets are single nodes.
    facet_labels: tuple of BoundaryLabel, one per boundary facet.
    """

    dim: int
    nodes: np.ndarray
    cells: np.ndarray
    boundary_facets: np.ndarray
    facet_labels: tuple[BoundaryLabel, ...]

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def num_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def num_facets(self) -> int:
        return self.boundary_facets.shape[0]


def interval_mesh(
    n: int,
    left: BoundaryLabel = BoundaryLabel.FIXED,
    right: BoundaryLabel = BoundaryLabel.FIXED,
) -> Mesh:
    """Uniform mesh of [0, 1] with n cells and labeled endpoints."""
    if n < 1:
        raise MeshValidationError(f"interval mesh needs at least 1 cell, got {n}")
    nodes = np.linspace(0.0, 1.0, n + 1).reshape(-1, 1)
    cells = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    facets = np.array([[0], [n]])
    return Mesh(1, nodes, cells, facets, (left, right))


def rectangle_mesh(nx: int, ny: int, partition: PartitionSpec) -> Mesh:
    """Criss-cross-free triangulation of the unit square, nx by ny squares.

    Each square is split along its bottom-left to top-right diagonal into
    two counterclockwise triangles.  Boundary edges are labeled from the
    partition; a break point that does not coincide with a facet corner
    raises MeshValidationError.
    """
    if nx < 1 or ny < 1:
        raise MeshValidationError(f"rectangle mesh needs nx, ny >= 1, got {nx}, {ny}")
    xs = np.linspace(0.0, 1.0, nx + 1)
    ys = np.linspace(0.0, 1.0, ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    def nid(i: int, j: int) -> int:
        return i + j * (nx + 1)

    cells = []
    for j in range(ny):
        for i in range(nx):
            a, b = nid(i, j), nid(i + 1, j)
            c, d = nid(i + 1, j + 1), nid(i, j + 1)
            cells.append((a, b, c))
            cells.append((a, c, d))
    cell_arr = np.array(cells)

    facets = []
    labels = []
    side_edges = {
        "bottom": [((nid(i, 0), nid(i + 1, 0)), i / nx, (i + 1) / nx) for i in range(nx)],
        "top": [((nid(i, ny), nid(i + 1, ny)), i / nx, (i + 1) / nx) for i in range(nx)],
        "left": [((nid(0, j), nid(0, j + 1)), j / ny, (j + 1) / ny) for j in range(ny)],
        "right": [((nid(nx, j), nid(nx, j + 1)), j / ny, (j + 1) / ny) for j in range(ny)],
    }
    for side in SIDES:
        segs = partition.segments(side)
        _check_segments(side, segs, [lo for (_, lo, _) in side_edges[side]] + [1.0])
        for (edge, lo, hi) in side_edges[side]:
            mid = 0.5 * (lo + hi)
            seg = next(s for s in segs if s.start - SNAP_TOL <= mid <= s.stop + SNAP_TOL)
            facets.append(edge)
            labels.append(seg.label)
    return Mesh(2, nodes, cell_arr, np.array(facets), tuple(labels))


def _check_segments(side: str, segs: Sequence[Segment], breaks: Sequence[float]) -> None:
    """Segments must tile [0, 1] in order and break only at facet corners."""
    if not segs:
        raise MeshValidationError(f"side {side!r} has no boundary label")
    cursor = 0.0
    for seg in segs:
        if abs(seg.start - cursor) > SNAP_TOL:
            raise MeshValidationError(
                f"side {side!r}: segment starts at {seg.start}, expected {cursor}"
            )
        if seg.stop <= seg.start:
            raise MeshValidationError(f"side {side!r}: empty segment {seg}")
        cursor = seg.stop
    if abs(cursor - 1.0) > SNAP_TOL:
        raise MeshValidationError(f"side {side!r}: segments end at {cursor}, not 1")
    for seg in segs:
        for t in (seg.start, seg.stop):
            if min(abs(t - b) for b in breaks + [0.0]) > SNAP_TOL:
                raise MeshValidationError(
                    f"side {side!r}: break point {t} falls strictly inside a facet"
                )


def cell_volumes(mesh: Mesh) -> np.ndarray:
    """Length of each segment or area of each triangle."""
    pts = mesh.nodes[mesh.cells]
    if mesh.dim == 1:
        return pts[:, 1, 0] - pts[:, 0, 0]
    d1 = pts[:, 1] - pts[:, 0]
    d2 = pts[:, 2] - pts[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def cell_midpoints(mesh: Mesh) -> np.ndarray:
    """Barycenter of each cell, shape (ncell, dim)."""
    return mesh.nodes[mesh.cells].mean(axis=1)


def facet_measures(mesh: Mesh) -> np.ndarray:
    """Measure of each boundary facet: 1 for endpoints, length for edges."""
    if mesh.dim == 1:
        return np.ones(mesh.num_facets)
    pts = mesh.nodes[mesh.boundary_facets]
    return np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)


def facet_midpoints(mesh: Mesh) -> np.ndarray:
    """Midpoint of each boundary facet, shape (nf, dim)."""
    return mesh.nodes[mesh.boundary_facets].mean(axis=1)


def boundary_nodes(mesh: Mesh) -> np.ndarray:
    """Sorted indices of all nodes lying on some boundary facet."""
    return np.unique(mesh.boundary_facets)


def clamped_nodes(mesh: Mesh) -> np.ndarray:
    """Sorted indices of nodes touching at least one FIXED facet."""
    mask = [lab is BoundaryLabel.FIXED for lab in mesh.facet_labels]
    if not any(mask):
        return np.zeros(0, dtype=int)
    return np.unique(mesh.boundary_facets[np.array(mask)])


def trace_nodes(mesh: Mesh) -> np.ndarray:
    """Sorted boundary nodes away from every FIXED facet.

    These carry the boundary trace data of the model: a node shared by a
    FIXED facet and any other facet counts as clamped, not as a trace node.
    """
    return np.setdiff1d(boundary_nodes(mesh), clamped_nodes(mesh))


def validate_mesh(mesh: Mesh) -> None:
    """Raise MeshValidationError listing every structural problem found."""
    problems = mesh_problems(mesh)
    if problems:
        raise MeshValidationError("; ".join(problems))


def mesh_problems(mesh: Mesh) -> list[str]:
    """All structural problems of the mesh, empty when it is consistent."""
    problems: list[str] = []
    n = mesh.num_nodes
    if mesh.dim not in (1, 2):
        return [f"unsupported dimension {mesh.dim}"]
    if mesh.nodes.ndim != 2 or mesh.nodes.shape[1] != mesh.dim:
        return [f"nodes must have shape (N, {mesh.dim})"]
    if mesh.cells.ndim != 2 or mesh.cells.shape[1] != mesh.dim + 1:
        return [f"cells must have shape (ncell, {mesh.dim + 1})"]
    if mesh.boundary_facets.ndim != 2 or mesh.boundary_facets.shape[1] != mesh.dim:
        return [f"boundary facets must have shape (nf, {mesh.dim})"]
    for name, arr in (("cell", mesh.cells), ("facet", mesh.boundary_facets)):
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            problems.append(f"{name} indices out of range 0..{n - 1}")
    if problems:
        return problems
    if len(mesh.facet_labels) != mesh.num_facets:
        problems.append(
            f"{mesh.num_facets} boundary facets but {len(mesh.facet_labels)} labels"
        )
    vols = cell_volumes(mesh)
    for c in np.nonzero(vols <= 0)[0]:
        problems.append(f"cell {c} is degenerate or misoriented (volume {vols[c]:.3e})")
    if mesh.dim == 1:
        problems += _interval_boundary_problems(mesh)
    else:
        problems += _triangle_boundary_problems(mesh)
    return problems


def _interval_boundary_problems(mesh: Mesh) -> list[str]:
    problems = []
    degree = np.zeros(mesh.num_nodes, dtype=int)
    np.add.at(degree, mesh.cells.ravel(), 1)
    expected = set(np.nonzero(degree == 1)[0].tolist())
    listed = [int(f[0]) for f in mesh.boundary_facets]
    if len(set(listed)) != len(listed):
        problems.append("duplicate boundary facet")
    if set(listed) != expected:
        problems.append(
            f"boundary facets {sorted(set(listed))} do not match endpoints {sorted(expected)}"
        )
    return problems


def _triangle_boundary_problems(mesh: Mesh) -> list[str]:
    problems = []
    count: dict[tuple[int, int], int] = {}
    for tri in mesh.cells:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            count[key] = count.get(key, 0) + 1
    hull = {e for e, c in count.items() if c == 1}
    bad = [e for e, c in count.items() if c > 2]
    if bad:
        problems.append(f"{len(bad)} edges shared by more than two triangles")
    listed = [(min(a, b), max(a, b)) for a, b in mesh.boundary_facets]
    if len(set(listed)) != len(listed):
        problems.append("duplicate boundary facet")
    missing = hull - set(listed)
    extra = set(listed) - hull
    if missing:
        problems.append(f"{len(missing)} hull edges lack a boundary label")
    if extra:
        problems.append(f"{len(extra)} labeled facets are not hull edges")
    return problems


def mesh_to_text(mesh: Mesh) -> str:
    """Serialize to a line-based text form; round-trips via mesh_from_text."""
    lines = ["wavetriple-mesh 1", f"dim {mesh.dim}", f"nodes {mesh.num_nodes}"]
    for row in mesh.nodes:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    lines.append(f"cells {mesh.num_cells}")
    for row in mesh.cells:
        lines.append(" ".join(str(int(i)) for i in row))
    lines.append(f"boundary {mesh.num_facets}")
    for row, lab in zip(mesh.boundary_facets, mesh.facet_labels):
        lines.append(" ".join(str(int(i)) for i in row) + " " + lab.value)
    return "\n".join(lines) + "\n"


def mesh_from_text(text: str) -> Mesh:
    """Parse the output of mesh_to_text and validate the result."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise MeshValidationError("unexpected end of mesh text")
        pos += 1
        return lines[pos - 1]

    header = take().split()
    if header[:1] != ["wavetriple-mesh"]:
        raise MeshValidationError(f"bad mesh header {' '.join(header)!r}")
    dim = int(take().split()[1])
    nn = int(take().split()[1])
    nodes = np.array([[float(v) for v in take().split()] for _ in range(nn)])
    nodes = nodes.reshape(nn, dim) if nn else np.zeros((0, dim))
    nc = int(take().split()[1])
    cells = np.array([[int(v) for v in take().split()] for _ in range(nc)], dtype=int)
    cells = cells.reshape(nc, dim + 1) if nc else np.zeros((0, dim + 1), dtype=int)
    nf = int(take().split()[1])
    facets = np.zeros((nf, dim), dtype=int)
    labels = []
    by_value = {lab.value: lab for lab in BoundaryLabel}
    for k in range(nf):
        parts = take().split()
        facets[k] = [int(v) for v in parts[:dim]]
        name = parts[dim]
        if name not in by_value:
            raise MeshValidationError(f"unknown boundary label {name!r}")
        labels.append(by_value[name])
    mesh = Mesh(dim, nodes, cells, facets, tuple(labels))
    validate_mesh(mesh)
    return mesh
