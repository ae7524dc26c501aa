"""Background mesh, point location and fiber mesh tests."""

import numpy as np
import pytest

from fiberfem.errors import CapacityError, OutOfDomainError
from fiberfem.mesh import FACE_LABELS, FiberCurve, FiberNetwork, \
    build_fiber_mesh, build_hex_mesh, locate_point, locate_points


@pytest.mark.parametrize("level,cells,verts", [
    (0, 1, 8),
    (3, 512, 729),
    (4, 4096, 4913),
])
def test_mesh_counts(level, cells, verts):
    mesh = build_hex_mesh(level)
    assert mesh.n_cells == cells
    assert mesh.n_vertices == verts
    assert mesh.cell_vertices.shape == (cells, 8)


def test_capacity_guard():
    with pytest.raises(CapacityError):
        build_hex_mesh(9)
    with pytest.raises(ValueError):
        build_hex_mesh(-1)


@pytest.mark.parametrize("level", [0, 1, 2, 3, 4])
def test_cell_volumes_sum_to_one(level):
    mesh = build_hex_mesh(level)
    assert mesh.n_cells * mesh.h**3 == 1.0


@pytest.mark.parametrize("level", [1, 2, 3])
def test_face_label_partition(level):
    mesh = build_hex_mesh(level)
    expected = (2**level) ** 2
    seen = set()
    for label in FACE_LABELS:
        cells = mesh.boundary_cells(label)
        assert cells.shape[0] == expected
        assert mesh.facet_count(label) == expected
        seen.add(label)
    assert seen == {0, 1, 2, 3, 4, 5}


def test_vertices_on_exact_lattice():
    mesh = build_hex_mesh(2)
    v = mesh.vertices
    assert np.array_equal(v * 4, np.round(v * 4))
    assert v.min() == 0.0 and v.max() == 1.0


def test_locate_interior_point():
    mesh = build_hex_mesh(1)
    loc = locate_point(mesh, (0.25, 0.25, 0.25))
    assert loc.cell == 0
    assert np.allclose(loc.local, 0.5)


def test_locate_tie_break_center():
    # shared facets resolve to the lowest cell index
    mesh = build_hex_mesh(1)
    loc = locate_point(mesh, (0.5, 0.5, 0.5))
    assert loc.cell == 0
    assert np.array_equal(loc.local, [1.0, 1.0, 1.0])


def test_locate_far_corner():
    mesh = build_hex_mesh(2)
    loc = locate_point(mesh, (1.0, 1.0, 1.0))
    assert loc.cell == mesh.n_cells - 1
    assert np.array_equal(loc.local, [1.0, 1.0, 1.0])


def test_locate_out_of_domain():
    mesh = build_hex_mesh(1)
    with pytest.raises(OutOfDomainError):
        locate_point(mesh, (1.2, 0.5, 0.5))
    with pytest.raises(OutOfDomainError):
        locate_points(mesh, np.array([[0.5, 0.5, 0.5], [-0.1, 0.5, 0.5]]))


def test_locate_roundtrip_and_idempotence():
    mesh = build_hex_mesh(3)
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.0, 1.0, size=(200, 3))
    for x in pts:
        loc = locate_point(mesh, x)
        back = mesh.map_local(loc.cell, loc.local)
        assert np.abs(back - x).max() <= 1e-12
        again = locate_point(mesh, back)
        assert again.cell == loc.cell


def test_locate_points_matches_scalar_path():
    mesh = build_hex_mesh(2)
    rng = np.random.default_rng(3)
    pts = np.vstack([rng.uniform(0, 1, size=(50, 3)),
                     [[0.5, 0.25, 1.0], [0.0, 0.0, 0.0]]])
    cells, locs = locate_points(mesh, pts)
    for i, x in enumerate(pts):
        loc = locate_point(mesh, x)
        assert cells[i] == loc.cell
        assert np.array_equal(locs[i], loc.local)


def test_fiber_mesh_single_segment():
    curve = FiberCurve([[0.05, 0.5, 0.5], [0.95, 0.5, 0.5]], radius=0.01)
    assert curve.n_elements == 1
    assert curve.element_lengths[0] == pytest.approx(0.9, abs=1e-15)

    refined = build_fiber_mesh(curve, 2)
    assert refined.n_elements == 4
    assert np.allclose(refined.element_lengths, 0.225)
    assert refined.element_lengths.sum() == pytest.approx(curve.length, rel=1e-12)


def test_fiber_mesh_two_segments():
    curve = FiberCurve([[0.1, 0.1, 0.1], [0.4, 0.1, 0.1], [0.4, 0.5, 0.1]],
                       radius=0.01)
    refined = build_fiber_mesh(curve, 1)
    assert refined.n_elements == 4
    assert np.allclose(refined.element_lengths, [0.15, 0.15, 0.2, 0.2])
    assert refined.element_lengths.sum() == pytest.approx(0.7, rel=1e-12)


def test_fiber_curve_validation():
    with pytest.raises(ValueError):
        FiberCurve([[0.1, 0.1, 0.1], [0.1, 0.1, 0.1]], radius=0.01)
    with pytest.raises(ValueError):
        FiberCurve([[0.1, 0.1, 0.1], [1.4, 0.1, 0.1]], radius=0.01)
    with pytest.raises(ValueError):
        FiberCurve([[0.1, 0.1, 0.1], [0.9, 0.1, 0.1]], radius=0.0)


def test_network_disjoint_parameter_intervals():
    curves = [FiberCurve([[0.1, 0.3, 0.3], [0.9, 0.3, 0.3]], 0.01),
              FiberCurve([[0.1, 0.6, 0.6], [0.9, 0.6, 0.6]], 0.01)]
    net = FiberNetwork(curves)
    (a0, b0), (a1, b1) = (c.param_interval for c in net.curves)
    assert b0 <= a1
    x = net.curves[1].parametrize(a1)
    assert np.allclose(x, [0.1, 0.6, 0.6])


def test_network_beta_accounting():
    curves = [FiberCurve([[0.1, 0.3, 0.3], [0.9, 0.3, 0.3]], 0.02),
              FiberCurve([[0.1, 0.6, 0.6], [0.6, 0.6, 0.6]], 0.02)]
    net = FiberNetwork(curves)
    assert net.beta == pytest.approx(np.pi * 0.02**2 * (0.8 + 0.5), rel=1e-14)


def test_network_rejects_mixed_radius():
    curves = [FiberCurve([[0.1, 0.3, 0.3], [0.9, 0.3, 0.3]], 0.02),
              FiberCurve([[0.1, 0.6, 0.6], [0.9, 0.6, 0.6]], 0.03)]
    with pytest.raises(ValueError):
        FiberNetwork(curves)
