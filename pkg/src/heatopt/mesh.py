"""Uniform triangulations of the unit square with tagged boundary edges.

The domain is fixed to (0,1)^2. Every cell of a uniform n-by-n grid is split
along the bottom-left to top-right diagonal, giving a deterministic
triangulation. Boundary edges know which side of the square they lie on and,
after classification, whether they belong to the Gamma1 or Gamma2 portion.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import MeasureZeroBoundaryError

SIDES = ("left", "right", "bottom", "top")


class BoundaryTag(enum.Enum):
    GAMMA1 = "gamma1"
    GAMMA2 = "gamma2"


@dataclass(frozen=True)
class Mesh:
    """Conforming triangulation of the unit square.

    Attributes:
        vertices: (nv, 2) array of vertex coordinates.
        triangles: (nt, 3) array of vertex indices, counterclockwise.
        boundary_edges: (ne, 2) array of vertex index pairs on the boundary.
        boundary_sides: (ne,) array of side names, one per boundary edge.
        boundary_tags: (ne,) array of BoundaryTag, or None before
            classification.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_sides: np.ndarray
    boundary_tags: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.vertices, self.triangles, self.boundary_edges,
                    self.boundary_sides, self.boundary_tags):
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    def triangle_areas(self) -> np.ndarray:
        """Signed areas of all triangles (positive for CCW orientation)."""
        p0 = self.vertices[self.triangles[:, 0]]
        p1 = self.vertices[self.triangles[:, 1]]
        p2 = self.vertices[self.triangles[:, 2]]
        return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                      - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))

    def edge_lengths(self) -> np.ndarray:
        """Lengths of the boundary edges."""
        a = self.vertices[self.boundary_edges[:, 0]]
        b = self.vertices[self.boundary_edges[:, 1]]
        return np.linalg.norm(b - a, axis=1)

    def tagged_edges(self, tag: BoundaryTag) -> np.ndarray:
        """Indices (into boundary_edges) of the edges carrying the given tag."""
        if self.boundary_tags is None:
            raise ValueError("mesh boundary has not been classified")
        return np.flatnonzero(self.boundary_tags == tag)

    def tagged_vertices(self, tag: BoundaryTag) -> np.ndarray:
        """Sorted vertex indices incident to edges carrying the given tag."""
        edges = self.boundary_edges[self.tagged_edges(tag)]
        return np.unique(edges)


def build_unit_square_mesh(n: int) -> Mesh:
    """Triangulate the unit square with n subdivisions per side.

    Produces (n+1)^2 vertices on a uniform grid, 2*n^2 triangles (every cell
    split along the same diagonal) and 4*n boundary edges, all in a fixed
    deterministic order.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"subdivision count must be a positive integer, got {n!r}")
    n = int(n)

    coords = np.linspace(0.0, 1.0, n + 1)
    xs, ys = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.column_stack([xs.ravel(), ys.ravel()])

    def vid(ix, iy):
        return iy * (n + 1) + ix

    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    k = 0
    for iy in range(n):
        for ix in range(n):
            ll = vid(ix, iy)
            lr = vid(ix + 1, iy)
            ur = vid(ix + 1, iy + 1)
            ul = vid(ix, iy + 1)
            triangles[k] = (ll, lr, ur)
            triangles[k + 1] = (ll, ur, ul)
            k += 2

    edges = []
    sides = []
    for i in range(n):
        edges.append((vid(i, 0), vid(i + 1, 0)))
        sides.append("bottom")
    for i in range(n):
        edges.append((vid(n, i), vid(n, i + 1)))
        sides.append("right")
    for i in range(n):
        edges.append((vid(n - i, n), vid(n - i - 1, n)))
        sides.append("top")
    for i in range(n):
        edges.append((vid(0, n - i), vid(0, n - i - 1)))
        sides.append("left")

    return Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=np.asarray(edges, dtype=np.int64),
        boundary_sides=np.asarray(sides, dtype=object),
    )


def classify_boundary(mesh: Mesh, gamma1_sides) -> Mesh:
    """Tag boundary edges: listed sides become Gamma1, the rest Gamma2.

    Both portions must end up with positive length, so the side set has to be
    a nonempty proper subset of {left, right, bottom, top}.
    """
    requested = tuple(gamma1_sides)
    unknown = [s for s in requested if s not in SIDES]
    if unknown:
        raise ValueError(f"unknown sides {unknown}; valid sides are {SIDES}")
    gamma1 = frozenset(requested)
    if not gamma1 or gamma1 == frozenset(SIDES):
        raise MeasureZeroBoundaryError(
            "gamma1_sides must be a nonempty proper subset of the four sides "
            "so that both boundary portions have positive length"
        )
    tags = np.array(
        [BoundaryTag.GAMMA1 if s in gamma1 else BoundaryTag.GAMMA2
         for s in mesh.boundary_sides],
        dtype=object,
    )
    return replace(mesh, boundary_tags=tags)
