import numpy as np
import pytest
import scipy.linalg

from heatopt import assembly
from heatopt.mesh import BoundaryTag, Mesh, build_unit_square_mesh, classify_boundary


def single_triangle_mesh():
    """One CCW unit right triangle, legs on the axes."""
    return Mesh(
        vertices=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        triangles=np.array([[0, 1, 2]]),
        boundary_edges=np.array([[0, 1], [1, 2], [2, 0]]),
        boundary_sides=np.array(["bottom", "right", "left"], dtype=object),
    )


def tagged(n, sides=("left",)):
    return classify_boundary(build_unit_square_mesh(n), sides)


def test_element_stiffness_unit_right_triangle():
    # Analytic integration of the constant P1 gradients on this triangle.
    expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
    K = assembly.assemble_stiffness(single_triangle_mesh()).toarray()
    assert np.allclose(K, expected, atol=1e-15)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_stiffness_rows_sum_to_zero(n):
    K = assembly.assemble_stiffness(build_unit_square_mesh(n))
    assert np.abs(np.asarray(K.sum(axis=1))).max() <= 1e-14


@pytest.mark.parametrize("n", [1, 4, 13])
def test_dirichlet_energy_of_linear(n):
    mesh = build_unit_square_mesh(n)
    K = assembly.assemble_stiffness(mesh)
    x = mesh.vertices[:, 0]
    assert abs(x @ (K @ x) - 1.0) <= 1e-13


def test_stiffness_symmetry_exact():
    K = assembly.assemble_stiffness(build_unit_square_mesh(6))
    diff = (K - K.T).tocoo()
    assert len(diff.data) == 0 or np.abs(diff.data).max() == 0.0


def test_element_mass_unit_right_triangle():
    area = 0.5
    expected = (area / 12.0) * np.array([[2.0, 1, 1], [1, 2, 1], [1, 1, 2]])
    M = assembly.assemble_domain_mass(single_triangle_mesh()).toarray()
    assert np.allclose(M, expected, atol=1e-16)


@pytest.mark.parametrize("n", [1, 3, 10])
def test_mass_measures_unit_square(n):
    M = assembly.assemble_domain_mass(build_unit_square_mesh(n))
    assert abs(M.sum() - 1.0) <= 1e-14


def test_mass_positive_definite():
    M = assembly.assemble_domain_mass(build_unit_square_mesh(4)).toarray()
    scipy.linalg.cho_factor(M)  # raises LinAlgError if not SPD


def test_boundary_mass_edge_blocks():
    mesh = tagged(2)
    MQ = assembly.assemble_boundary_mass(mesh, BoundaryTag.GAMMA2).toarray()
    h = 0.5
    # Bottom-right corner vertex (index 2) and its bottom neighbour (index 1)
    # share exactly one Gamma2 edge of length h.
    assert abs(MQ[1, 2] - h / 6) <= 1e-15
    # Vertex 1 lies inside the bottom side: two adjacent edges contribute h/3 each.
    assert abs(MQ[1, 1] - 2 * h / 3) <= 1e-15


@pytest.mark.parametrize("n", [1, 4, 8])
def test_boundary_mass_total_gamma2_length(n):
    mesh = tagged(n)
    MQ = assembly.assemble_boundary_mass(mesh, BoundaryTag.GAMMA2)
    assert abs(MQ.sum() - 3.0) <= 1e-14
    MR = assembly.assemble_boundary_mass(mesh, BoundaryTag.GAMMA1)
    assert abs(MR.sum() - 1.0) <= 1e-14


def test_boundary_mass_interior_rows_zero():
    mesh = tagged(4)
    MQ = assembly.assemble_boundary_mass(mesh, BoundaryTag.GAMMA2)
    on_boundary = set(np.unique(mesh.boundary_edges).tolist())
    interior = [v for v in range(mesh.num_vertices) if v not in on_boundary]
    rows = np.abs(MQ[interior]).sum(axis=1)
    assert np.asarray(rows).max() == 0.0


def test_load_zero_data():
    mesh = tagged(3)
    zero = np.zeros(mesh.num_vertices)
    load = assembly.assemble_load(mesh, zero, zero)
    assert np.all(load == 0.0)


def test_load_constant_internal_energy():
    mesh = tagged(3)
    g = np.ones(mesh.num_vertices)
    load = assembly.assemble_load(mesh, g, np.zeros(mesh.num_vertices))
    assert abs(load.sum() - 1.0) <= 1e-14


def test_load_robin_term_scales_with_alpha():
    mesh = tagged(3)
    zero = np.zeros(mesh.num_vertices)
    b = np.ones(mesh.num_vertices)
    load = assembly.assemble_load(mesh, zero, zero, robin=(5.0, b))
    assert abs(load.sum() - 5.0) <= 1e-13


def test_load_linearity():
    mesh = tagged(3)
    rng = np.random.default_rng(7)
    g1, g2 = rng.standard_normal((2, mesh.num_vertices))
    q1, q2 = rng.standard_normal((2, mesh.num_vertices))
    combined = assembly.assemble_load(mesh, g1 + g2, q1 + q2)
    split = assembly.assemble_load(mesh, g1, q1) + assembly.assemble_load(mesh, g2, q2)
    assert np.allclose(combined, split, rtol=0, atol=1e-14)


def test_boundary_functional_per_side_data():
    mesh = tagged(2)
    load = assembly.boundary_functional(mesh, BoundaryTag.GAMMA2,
                                        {"right": -1.0, "bottom": 0.0, "top": 0.0})
    # Total must integrate -1 over the right side only.
    assert abs(load.sum() + 1.0) <= 1e-14
    # Nothing on the interior of the bottom side away from the corner.
    bottom_mid = np.flatnonzero((mesh.vertices[:, 0] == 0.5) & (mesh.vertices[:, 1] == 0.0))
    assert load[bottom_mid[0]] == 0.0


def test_boundary_squared_norm_per_side():
    mesh = tagged(2)
    value = assembly.boundary_squared_norm(mesh, BoundaryTag.GAMMA2,
                                           {"right": -2.0})
    assert abs(value - 4.0) <= 1e-14


def test_apply_dirichlet_zero_data_restricts_load():
    mesh = tagged(3)
    K = assembly.assemble_stiffness(mesh)
    rng = np.random.default_rng(0)
    load = rng.standard_normal(mesh.num_vertices)
    system = assembly.apply_dirichlet(K, load, mesh, np.zeros(mesh.num_vertices))
    assert np.array_equal(system.rhs, load[system.free])


def test_apply_dirichlet_constant_boundary_value():
    mesh = tagged(4)
    K = assembly.assemble_stiffness(mesh)
    b = np.full(mesh.num_vertices, 2.5)
    system = assembly.apply_dirichlet(K, np.zeros(mesh.num_vertices), mesh, b)
    x = np.linalg.solve(system.matrix.toarray(), system.rhs)
    u = system.expand(x)
    assert np.allclose(u, 2.5, atol=1e-12)


def test_apply_dirichlet_manufactured_linear():
    # Exact solution x with zero source: flux -1 on the right side only.
    mesh = tagged(8)
    K = assembly.assemble_stiffness(mesh)
    load = -assembly.boundary_functional(mesh, BoundaryTag.GAMMA2,
                                         {"right": -1.0})
    system = assembly.apply_dirichlet(K, load, mesh, np.zeros(mesh.num_vertices))
    x = np.linalg.solve(system.matrix.toarray(), system.rhs)
    u = system.expand(x)
    assert np.abs(u - mesh.vertices[:, 0]).max() <= 1e-10


def test_galerkin_consistency_for_linears():
    mesh = build_unit_square_mesh(5)
    K = assembly.assemble_stiffness(mesh)
    rng = np.random.default_rng(11)
    for _ in range(5):
        av, bv, cv = rng.standard_normal(3)
        aw, bw, cw = rng.standard_normal(3)
        v = av * mesh.vertices[:, 0] + bv * mesh.vertices[:, 1] + cv
        w = aw * mesh.vertices[:, 0] + bw * mesh.vertices[:, 1] + cw
        exact = av * aw + bv * bw  # integral of constant gradients over area 1
        assert abs(v @ (K @ w) - exact) <= 1e-13


def test_assembly_determinism():
    mesh = tagged(5)
    K1 = assembly.assemble_stiffness(mesh)
    K2 = assembly.assemble_stiffness(mesh)
    assert np.array_equal(K1.data, K2.data)
    assert np.array_equal(K1.indices, K2.indices)
    M1 = assembly.assemble_boundary_mass(mesh, BoundaryTag.GAMMA2)
    M2 = assembly.assemble_boundary_mass(mesh, BoundaryTag.GAMMA2)
    assert np.array_equal(M1.data, M2.data)


def test_interpolate_constant_and_callable():
    mesh = build_unit_square_mesh(2)
    assert np.all(assembly.interpolate(mesh, 3.0) == 3.0)
    field = assembly.interpolate(mesh, lambda x, y: x + 2 * y)
    assert np.allclose(field, mesh.vertices[:, 0] + 2 * mesh.vertices[:, 1])
