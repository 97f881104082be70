"""P1 finite-element assembly over triangulated meshes.

All element integrals are evaluated in closed form (constant gradients,
exact polynomial mass integrals), so assembled operators carry no quadrature
error. Matrices are returned in CSR format with symmetric entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import BoundaryTag, Mesh


def interpolate(mesh: Mesh, data) -> np.ndarray:
    """Nodal interpolant of a constant or a callable f(x, y)."""
    if callable(data):
        x = mesh.vertices[:, 0]
        y = mesh.vertices[:, 1]
        values = np.asarray(data(x, y), dtype=float)
        return np.broadcast_to(values, (mesh.num_vertices,)).copy()
    return np.full(mesh.num_vertices, float(data))


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """Gradient-gradient operator: entries are exact integrals of P1 gradients."""
    tri = mesh.triangles
    p0 = mesh.vertices[tri[:, 0]]
    p1 = mesh.vertices[tri[:, 1]]
    p2 = mesh.vertices[tri[:, 2]]
    area = mesh.triangle_areas()

    # Gradient of hat function i is (b_i, c_i) / (2 area), cyclic in the
    # opposite edge coordinates.
    b = np.column_stack([p1[:, 1] - p2[:, 1], p2[:, 1] - p0[:, 1], p0[:, 1] - p1[:, 1]])
    c = np.column_stack([p2[:, 0] - p1[:, 0], p0[:, 0] - p2[:, 0], p1[:, 0] - p0[:, 0]])

    nt = tri.shape[0]
    local = np.empty((nt, 3, 3))
    for i in range(3):
        for j in range(3):
            local[:, i, j] = (b[:, i] * b[:, j] + c[:, i] * c[:, j]) / (4.0 * area)

    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    nv = mesh.num_vertices
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    mat.sum_duplicates()
    return mat


def assemble_domain_mass(mesh: Mesh) -> sp.csr_matrix:
    """Consistent P1 mass matrix over the whole square."""
    tri = mesh.triangles
    area = mesh.triangle_areas()
    base = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    local = area[:, None, None] * base[None, :, :]

    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    nv = mesh.num_vertices
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    mat.sum_duplicates()
    return mat


def assemble_boundary_mass(mesh: Mesh, tag: BoundaryTag) -> sp.csr_matrix:
    """1D consistent mass on the edges carrying `tag`, in full vertex dimension."""
    idx = mesh.tagged_edges(tag)
    edges = mesh.boundary_edges[idx]
    lengths = mesh.edge_lengths()[idx]

    ne = edges.shape[0]
    local = np.empty((ne, 2, 2))
    local[:, 0, 0] = local[:, 1, 1] = lengths / 3.0
    local[:, 0, 1] = local[:, 1, 0] = lengths / 6.0

    rows = np.repeat(edges, 2, axis=1).ravel()
    cols = np.tile(edges, (1, 2)).ravel()
    nv = mesh.num_vertices
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    mat.sum_duplicates()
    return mat


def lumped_boundary_mass(mesh: Mesh, tag: BoundaryTag) -> np.ndarray:
    """Row-sum lumping of the tagged boundary mass (diagonal, full dimension)."""
    mass = assemble_boundary_mass(mesh, tag)
    return np.asarray(mass.sum(axis=1)).ravel()


def _edge_values(mesh: Mesh, edge_index: int, data) -> tuple[float, float]:
    """Endpoint values of boundary data on one edge, resolved per side.

    `data` is a constant, a callable f(x, y), or a mapping side -> constant or
    callable. The per-side form can represent fluxes that jump at corners,
    which a single nodal field cannot.
    """
    side = mesh.boundary_sides[edge_index]
    if isinstance(data, dict):
        data = data.get(side, 0.0)
    v0, v1 = mesh.boundary_edges[edge_index]
    if callable(data):
        x0, y0 = mesh.vertices[v0]
        x1, y1 = mesh.vertices[v1]
        return float(data(x0, y0)), float(data(x1, y1))
    return float(data), float(data)


def boundary_functional(mesh: Mesh, tag: BoundaryTag, data) -> np.ndarray:
    """Exact load vector of v -> integral over the tagged boundary of data*v.

    Data is integrated edge by edge as the linear interpolant of its endpoint
    values on that edge, so side-wise linear (possibly corner-discontinuous)
    data is handled without interpolation error.
    """
    load = np.zeros(mesh.num_vertices)
    lengths = mesh.edge_lengths()
    for e in mesh.tagged_edges(tag):
        h = lengths[e]
        a, b = _edge_values(mesh, e, data)
        v0, v1 = mesh.boundary_edges[e]
        load[v0] += h * (2.0 * a + b) / 6.0
        load[v1] += h * (a + 2.0 * b) / 6.0
    return load


def boundary_squared_norm(mesh: Mesh, tag: BoundaryTag, data) -> float:
    """Exact integral over the tagged boundary of data^2 (edge-wise linear data)."""
    total = 0.0
    lengths = mesh.edge_lengths()
    for e in mesh.tagged_edges(tag):
        h = lengths[e]
        a, b = _edge_values(mesh, e, data)
        total += h * (a * a + a * b + b * b) / 3.0
    return total


def assemble_load(mesh: Mesh, g: np.ndarray, q: np.ndarray, robin=None) -> np.ndarray:
    """Load vector M_H g - M_Q q, plus alpha * M_R b for the Robin problem.

    `robin`, when given, is a pair (alpha, b) with b a nodal field on the
    Gamma1 portion.
    """
    g = np.asarray(g, dtype=float)
    q = np.asarray(q, dtype=float)
    load = assemble_domain_mass(mesh) @ g - assemble_boundary_mass(mesh, BoundaryTag.GAMMA2) @ q
    if robin is not None:
        alpha, b = robin
        load = load + alpha * (assemble_boundary_mass(mesh, BoundaryTag.GAMMA1) @ np.asarray(b, dtype=float))
    return load


@dataclass
class DirichletSystem:
    """Reduced SPD system after eliminating Gamma1 vertices, plus the lifting
    needed to re-expand reduced solutions to full nodal fields."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    free: np.ndarray
    constrained: np.ndarray
    lifting: np.ndarray

    def expand(self, x_reduced: np.ndarray) -> np.ndarray:
        full = self.lifting.copy()
        full[self.free] = x_reduced
        return full


def apply_dirichlet(stiffness: sp.csr_matrix, load: np.ndarray, mesh: Mesh,
                    b: np.ndarray) -> DirichletSystem:
    """Eliminate Gamma1 rows/columns and fold the boundary values into the load.

    The lifting is the nodal interpolant of b at Gamma1 vertices, zero
    elsewhere; the reduced right-hand side is load - K * lifting restricted to
    the free vertices.
    """
    constrained = mesh.tagged_vertices(BoundaryTag.GAMMA1)
    mask = np.ones(mesh.num_vertices, dtype=bool)
    mask[constrained] = False
    free = np.flatnonzero(mask)

    lifting = np.zeros(mesh.num_vertices)
    lifting[constrained] = np.asarray(b, dtype=float)[constrained]

    corrected = np.asarray(load, dtype=float) - stiffness @ lifting
    reduced = stiffness[free][:, free].tocsr()
    return DirichletSystem(matrix=reduced, rhs=corrected[free], free=free,
                           constrained=constrained, lifting=lifting)
