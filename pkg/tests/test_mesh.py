import numpy as np
import pytest

from heatopt.errors import MeasureZeroBoundaryError
from heatopt.mesh import BoundaryTag, build_unit_square_mesh, classify_boundary


def all_edges(mesh):
    """Undirected edge set of the triangulation."""
    edges = set()
    for tri in mesh.triangles:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            edges.add(tuple(sorted((tri[a], tri[b]))))
    return edges


@pytest.mark.parametrize("n,nv,nt,ne", [(1, 4, 2, 4), (2, 9, 8, 8), (5, 36, 50, 20)])
def test_counting_formulas(n, nv, nt, ne):
    mesh = build_unit_square_mesh(n)
    assert mesh.num_vertices == nv
    assert mesh.num_triangles == nt
    assert len(mesh.boundary_edges) == ne


@pytest.mark.parametrize("n", [1, 2, 3, 7, 16])
def test_areas_positive_and_partition_unit_square(n):
    mesh = build_unit_square_mesh(n)
    areas = mesh.triangle_areas()
    assert np.all(areas > 0)
    assert abs(areas.sum() - 1.0) <= 1e-14


@pytest.mark.parametrize("n", [1, 3, 8])
def test_euler_relation(n):
    mesh = build_unit_square_mesh(n)
    V = mesh.num_vertices
    E = len(all_edges(mesh))
    F = mesh.num_triangles
    assert V - E + F == 1


@pytest.mark.parametrize("n", [2, 5])
def test_edge_incidence(n):
    mesh = build_unit_square_mesh(n)
    counts = {}
    for tri in mesh.triangles:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = tuple(sorted((tri[a], tri[b])))
            counts[key] = counts.get(key, 0) + 1
    boundary = {tuple(sorted(e)) for e in mesh.boundary_edges.tolist()}
    for edge, count in counts.items():
        assert count == (1 if edge in boundary else 2)
    assert boundary <= set(counts)


def test_determinism():
    a = build_unit_square_mesh(6)
    b = build_unit_square_mesh(6)
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.triangles, b.triangles)
    assert np.array_equal(a.boundary_edges, b.boundary_edges)
    assert list(a.boundary_sides) == list(b.boundary_sides)


def test_invalid_subdivision_count():
    with pytest.raises(ValueError):
        build_unit_square_mesh(0)
    with pytest.raises(ValueError):
        build_unit_square_mesh(-3)


def test_classify_left_side_n2():
    mesh = classify_boundary(build_unit_square_mesh(2), ["left"])
    g1 = mesh.tagged_edges(BoundaryTag.GAMMA1)
    g2 = mesh.tagged_edges(BoundaryTag.GAMMA2)
    lengths = mesh.edge_lengths()
    assert len(g1) == 2 and len(g2) == 6
    assert abs(lengths[g1].sum() - 1.0) <= 1e-14
    assert abs(lengths[g2].sum() - 3.0) <= 1e-14


def test_classify_two_sides_n1():
    mesh = classify_boundary(build_unit_square_mesh(1), ["left", "bottom"])
    assert len(mesh.tagged_edges(BoundaryTag.GAMMA1)) == 2
    assert len(mesh.tagged_edges(BoundaryTag.GAMMA2)) == 2


def test_tagged_lengths_cover_perimeter():
    mesh = classify_boundary(build_unit_square_mesh(4), ["left", "top"])
    lengths = mesh.edge_lengths()
    total = lengths[mesh.tagged_edges(BoundaryTag.GAMMA1)].sum() \
        + lengths[mesh.tagged_edges(BoundaryTag.GAMMA2)].sum()
    assert abs(total - 4.0) <= 1e-14


def test_measure_zero_side_sets_rejected():
    mesh = build_unit_square_mesh(2)
    with pytest.raises(MeasureZeroBoundaryError):
        classify_boundary(mesh, [])
    with pytest.raises(MeasureZeroBoundaryError):
        classify_boundary(mesh, ["left", "right", "bottom", "top"])
    with pytest.raises(ValueError):
        classify_boundary(mesh, ["north"])


@pytest.mark.parametrize("n", [1, 4])
def test_left_vertices_carried_by_gamma1_edges(n):
    mesh = classify_boundary(build_unit_square_mesh(n), ["left"])
    left = np.flatnonzero(mesh.vertices[:, 0] == 0.0)
    tagged = set(mesh.tagged_vertices(BoundaryTag.GAMMA1).tolist())
    assert set(left.tolist()) == tagged
