import math

import numpy as np
import pytest

from crelast.mesh import (
    build_lshape_mesh,
    build_unit_square_mesh,
    ancestor_triangles,
    check_mesh,
    edge_lengths,
    edge_midpoints,
    mesh_from_arrays,
    refine_times,
    save_mesh_txt,
    triangle_area,
    triangle_areas,
    uniform_refine,
)

from conftest import canonical_triangles


class TestUnitSquare:
    def test_n1_counts(self):
        m = build_unit_square_mesh(1)
        assert m.n_triangles == 2
        assert m.n_vertices == 4
        assert m.n_edges == 5
        assert m.h == pytest.approx(math.sqrt(2.0), rel=0, abs=0)

    def test_n2_counts_and_euler(self):
        m = build_unit_square_mesh(2)
        assert (m.n_triangles, m.n_vertices, m.n_edges) == (8, 9, 16)
        assert m.n_vertices - m.n_edges + m.n_triangles == 1

    def test_n16_triangle_count_formula(self):
        # cell-count oracle: n*n cells, two triangles each
        n = 16
        m = build_unit_square_mesh(n)
        assert m.n_triangles == 2 * n * n == 512
        assert m.h == pytest.approx(math.sqrt(2.0) / 16, rel=1e-15)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            build_unit_square_mesh(0)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
    def test_invariants_and_area(self, n):
        m = build_unit_square_mesh(n)
        check_mesh(m)
        assert triangle_areas(m).sum() == pytest.approx(1.0, rel=1e-12)

    def test_boundary_edge_count(self):
        m = build_unit_square_mesh(4)
        assert int(m.edge_boundary.sum()) == 16  # 4n


class TestLShape:
    def test_n2_counts(self):
        m = build_lshape_mesh(2)
        assert m.n_triangles == 6  # one of four cells removed
        assert m.n_vertices == 8
        assert m.n_edges == 13
        assert m.n_vertices - m.n_edges + m.n_triangles == 1

    def test_n16_triangle_count_formula(self):
        m = build_lshape_mesh(16)
        assert m.n_triangles == 2 * (16 * 16 * 3 // 4) == 384

    def test_odd_n_rejected(self):
        with pytest.raises(ValueError):
            build_lshape_mesh(3)

    @pytest.mark.parametrize("n", [2, 4, 6, 8])
    def test_invariants_and_area(self, n):
        m = build_lshape_mesh(n)
        check_mesh(m)
        assert triangle_areas(m).sum() == pytest.approx(0.75, rel=1e-12)

    def test_reentrant_corner_is_vertex(self):
        m = build_lshape_mesh(4)
        assert np.any(np.all(np.isclose(m.vertices, [0.5, 0.5]), axis=1))


class TestRefinement:
    def test_refine_is_next_grid(self):
        fine = uniform_refine(build_unit_square_mesh(1))
        assert canonical_triangles(fine) == canonical_triangles(build_unit_square_mesh(2))

    @pytest.mark.parametrize("n", [2, 3])
    def test_refine_isomorphic_to_double(self, n):
        fine = uniform_refine(build_unit_square_mesh(n))
        assert canonical_triangles(fine) == canonical_triangles(build_unit_square_mesh(2 * n))

    def test_counts_quadruple_and_h_halves(self):
        m = build_unit_square_mesh(16)
        f = uniform_refine(m)
        assert f.n_triangles == 4 * m.n_triangles
        assert f.h == m.h / 2  # bit-exact: midpoint halving is exact
        check_mesh(f)

    def test_lshape_refine(self):
        m = build_lshape_mesh(2)
        f = uniform_refine(m)
        check_mesh(f)
        assert canonical_triangles(f) == canonical_triangles(build_lshape_mesh(4))

    def test_ancestor_map(self):
        coarse = build_lshape_mesh(2)
        fine = refine_times(coarse, 2)
        amap = ancestor_triangles(fine, coarse)
        assert amap.shape == (fine.n_triangles,)
        # children centroids must lie inside the ancestor's bounding box
        cent = fine.vertices[fine.triangles].mean(axis=1)
        for t in range(fine.n_triangles):
            anc = coarse.vertices[coarse.triangles[amap[t]]]
            assert cent[t, 0] >= anc[:, 0].min() - 1e-12
            assert cent[t, 0] <= anc[:, 0].max() + 1e-12
            assert cent[t, 1] >= anc[:, 1].min() - 1e-12
            assert cent[t, 1] <= anc[:, 1].max() + 1e-12

    def test_ancestor_requires_refinement_chain(self):
        a = build_unit_square_mesh(2)
        b = build_unit_square_mesh(4)  # same geometry but no parent link
        with pytest.raises(ValueError):
            ancestor_triangles(b, a)

    def test_interior_edges_listed_once_per_triangle(self):
        m = build_lshape_mesh(4)
        for row in m.tri_edges:
            assert len(set(row.tolist())) == 3
        counts = np.bincount(m.tri_edges.ravel(), minlength=m.n_edges)
        assert np.all(counts[~m.edge_boundary] == 2)
        assert np.all(counts[m.edge_boundary] == 1)


class TestGeometryHelpers:
    def test_reference_triangle_area(self):
        m = mesh_from_arrays([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])
        assert triangle_area(m, 0) == pytest.approx(0.5, rel=0, abs=0)

    def test_edge_midpoint(self):
        m = mesh_from_arrays([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])
        mids = edge_midpoints(m)
        e = np.where((m.edges == [0, 1]).all(axis=1))[0][0]
        assert mids[e] == pytest.approx([0.5, 0.0])

    def test_degenerate_triangle_rejected(self):
        with pytest.raises(ValueError):
            mesh_from_arrays([(0, 0), (1, 0), (2, 0)], [(0, 1, 2)])
        with pytest.raises(ValueError):
            mesh_from_arrays([(0, 0), (0, 1), (1, 0)], [(0, 1, 2)])  # clockwise

    def test_h_is_max_edge(self):
        m = build_lshape_mesh(4)
        assert m.h == edge_lengths(m).max()


def test_mesh_txt_export(tmp_path):
    m = build_unit_square_mesh(2)
    path = tmp_path / "mesh.txt"
    save_mesh_txt(m, path)
    verts, tris = [], []
    for line in path.read_text().splitlines():
        kind, *rest = line.split()
        if kind == "v":
            verts.append([float(rest[0]), float(rest[1])])
        else:
            tris.append([int(v) for v in rest])
    assert np.array_equal(np.array(verts), m.vertices)
    assert np.array_equal(np.array(tris), m.triangles)
