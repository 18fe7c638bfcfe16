"""Mesh construction, generators, and the text format round trip."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trefftzvem import mesh as meshmod
from trefftzvem.mesh import (PolygonalMesh, cartesian_mesh, graded_mesh,
                             hole_mesh, hole_mesh_locator, load_mesh,
                             save_mesh)

UNIT_SQUARE = dict(
    vertices=[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
    elements=[[0, 1, 2, 3]],
    boundary_labels={(0, 1): "R", (1, 2): "R", (2, 3): "R", (0, 3): "R"},
)


class TestPolygonalMesh:
    def test_single_square(self):
        m = PolygonalMesh(**UNIT_SQUARE)
        assert m.n_elements == 1
        assert m.h == pytest.approx(np.sqrt(2.0))
        assert m.areas[0] == pytest.approx(1.0)
        assert np.allclose(m.centroids[0], [0.5, 0.5])
        assert len(m.edges) == 4
        assert m.boundary_edge_ids == [0, 1, 2, 3]
        assert m.interior_edge_ids == []

    def test_two_triangles_share_edge(self):
        m = PolygonalMesh(
            vertices=[[0, 0], [1, 0], [1, 1], [0, 1]],
            elements=[[0, 1, 2], [0, 2, 3]],
            boundary_labels={(0, 1): "D", (1, 2): "N", (2, 3): "R", (0, 3): "R"})
        inner = [e for e in m.edges if len(e.elements) == 2]
        assert len(inner) == 1
        assert (inner[0].v0, inner[0].v1) == (0, 2)
        assert inner[0].label is None

    def test_outward_normals(self):
        m = PolygonalMesh(**UNIT_SQUARE)
        # traversal order 0->1->2->3: bottom, right, top, left
        expected = [[0, -1], [1, 0], [0, 1], [-1, 0]]
        assert np.allclose(m.element_normals[0], expected, atol=1e-14)
        for nrm in m.element_normals[0]:
            assert np.hypot(*nrm) == pytest.approx(1.0, abs=1e-14)

    def test_edge_lengths_match_endpoints(self):
        m = cartesian_mesh(3)
        for e, h in zip(m.edges, m.edge_lengths):
            d = m.vertices[e.v1] - m.vertices[e.v0]
            assert h == pytest.approx(np.hypot(*d), abs=1e-15)

    def test_clockwise_element_rejected(self):
        bad = dict(UNIT_SQUARE, elements=[[3, 2, 1, 0]])
        with pytest.raises(ValueError, match="counterclockwise"):
            PolygonalMesh(**bad)

    def test_missing_boundary_label_rejected(self):
        bad = dict(UNIT_SQUARE, boundary_labels={(0, 1): "R"})
        with pytest.raises(ValueError, match="no label"):
            PolygonalMesh(**bad)

    def test_unknown_label_rejected(self):
        labels = dict(UNIT_SQUARE["boundary_labels"])
        labels[(0, 1)] = "X"
        with pytest.raises(ValueError, match="unknown boundary label"):
            PolygonalMesh(UNIT_SQUARE["vertices"], UNIT_SQUARE["elements"],
                          labels)

    def test_label_on_interior_edge_rejected(self):
        with pytest.raises(ValueError, match="non-boundary"):
            PolygonalMesh(
                vertices=[[0, 0], [1, 0], [1, 1], [0, 1]],
                elements=[[0, 1, 2], [0, 2, 3]],
                boundary_labels={(0, 1): "D", (1, 2): "N", (2, 3): "R",
                                 (0, 3): "R", (0, 2): "D"})

    def test_overshared_edge_rejected(self):
        with pytest.raises(ValueError, match="shared by 3"):
            PolygonalMesh(
                vertices=[[0, 0], [1, 0], [0, 1], [1, 1], [-1, 1]],
                elements=[[0, 1, 2], [1, 3, 2], [0, 2, 4], [0, 1, 2]],
                boundary_labels={})

    def test_orphan_vertex_rejected(self):
        bad = dict(UNIT_SQUARE,
                   vertices=UNIT_SQUARE["vertices"] + [[5.0, 5.0]])
        with pytest.raises(ValueError, match="not referenced"):
            PolygonalMesh(**bad)

    def test_repeated_vertex_rejected(self):
        bad = dict(UNIT_SQUARE, elements=[[0, 1, 1, 2, 3]])
        with pytest.raises(ValueError, match="repeats"):
            PolygonalMesh(**bad)


class TestCartesianMesh:
    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_counts_and_area(self, n):
        m = cartesian_mesh(n)
        assert m.n_elements == n * n
        assert m.areas.sum() == pytest.approx(1.0, rel=1e-12)
        assert len(m.boundary_edge_ids) == 4 * n
        assert len(m.edges) == 2 * n * (n + 1)

    def test_default_label(self):
        m = cartesian_mesh(2)
        labels = {e.label for e in m.edges if e.label is not None}
        assert labels == {"R"}

    def test_custom_bounds(self):
        m = cartesian_mesh(2, bounds=((-1.0, 2.0), (3.0, 4.0)))
        assert m.areas.sum() == pytest.approx(8.0, rel=1e-12)
        assert m.vertices[:, 0].min() == -1.0
        assert m.vertices[:, 1].max() == 4.0

    def test_invalid_size(self):
        with pytest.raises(ValueError):
            cartesian_mesh(0)


class TestHoleMesh:
    @pytest.mark.parametrize("level", [0, 1, 2])
    def test_counts_and_area(self, level):
        m = hole_mesh(level)
        assert m.n_elements == 8 * 4**level
        assert m.areas.sum() == pytest.approx(8.0, rel=1e-12)

    def test_labels_split_outer_inner(self):
        m = hole_mesh(1)
        outer = [e for e in m.edges if e.label == "R"]
        inner = [e for e in m.edges if e.label == "Sc"]
        assert len(outer) == 4 * 6
        assert len(inner) == 4 * 2
        for e in inner:
            mid = 0.5 * (m.vertices[e.v0] + m.vertices[e.v1])
            assert 0.0 <= mid[0] <= 1.0 and 1.0 <= mid[1] <= 2.0

    def test_no_orphan_vertices(self):
        # grid points strictly inside the hole must not appear
        for level in (1, 2, 3):
            m = hole_mesh(level)  # validate() raises on orphans
            n = 3 * 2**level
            assert len(m.vertices) == (n + 1) ** 2 - (2**level - 1) ** 2

    def test_locator_roundtrip(self):
        m = hole_mesh(2)
        locate = hole_mesh_locator(2)
        ids = locate(m.centroids)
        assert np.array_equal(ids, np.arange(m.n_elements))

    def test_locator_rejects_hole_point(self):
        locate = hole_mesh_locator(1)
        with pytest.raises(ValueError, match="hole"):
            locate(np.array([[0.5, 1.5]]))


class TestGradedMesh:
    def test_level_zero_is_unit_square(self):
        m, deg = graded_mesh(0, 0.5)
        assert m.n_elements == 1
        assert list(deg) == [1]
        assert m.areas.sum() == pytest.approx(1.0, rel=1e-12)

    def test_level_one_counts_and_degrees(self):
        m, deg = graded_mesh(1, 1.0 / 3.0)
        assert m.n_elements == 6
        assert sorted(deg) == [1, 2, 2, 2, 2, 2]

    def test_level_two_counts_and_degrees(self):
        m, deg = graded_mesh(2, 1.0 / 3.0)
        assert m.n_elements == 11
        assert sorted(deg) == [1] + [2] * 5 + [3] * 5
        assert m.areas.sum() == pytest.approx(1.0, rel=1e-12)

    def test_corner_element_size(self):
        # smallest layer shrinks like mu^n
        for n in (1, 3, 5):
            m, deg = graded_mesh(n, 1.0 / 3.0)
            corner = int(np.argmin(deg))
            verts = m.vertices[m.elements[corner]]
            assert verts[:, 0].max() == pytest.approx((1.0 / 3.0) ** n)
            # grading point on the element's closure
            assert verts[:, 0].min() == 0.0
            assert verts[:, 1].min() <= 0.5 <= verts[:, 1].max()

    def test_hanging_nodes_are_collinear_vertices(self):
        m, _ = graded_mesh(2, 0.5)
        lens = [len(el) for el in m.elements]
        assert max(lens) > 4  # neighbours of refined cells gain vertices

    def test_degrees_grow_outward(self):
        m, deg = graded_mesh(4, 0.5)
        d = np.linalg.norm(m.centroids - [0.0, 0.5], axis=1)
        order = np.argsort(d)
        assert deg[order[0]] == 1
        assert np.all(np.diff(deg[order]) >= -1)  # loosely monotone outward
        assert deg.max() == 5

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            graded_mesh(-1, 0.5)
        with pytest.raises(ValueError):
            graded_mesh(2, 1.5)


class TestMeshIO:
    def test_roundtrip_text_identical(self, tmp_path):
        m, _ = graded_mesh(2, 1.0 / 3.0)
        p1 = tmp_path / "a.txt"
        p2 = tmp_path / "b.txt"
        save_mesh(m, p1)
        m2 = load_mesh(p1)
        save_mesh(m2, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert np.array_equal(m.vertices, m2.vertices)

    def test_roundtrip_preserves_labels(self, tmp_path):
        m = hole_mesh(1)
        path = tmp_path / "m.txt"
        save_mesh(m, path)
        m2 = load_mesh(path)
        assert [e.label for e in m2.edges] == [e.label for e in m.edges]

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text(
            "# a comment\nvertices\n0 0.0 0.0\n1 1.0 0.0\n\n2 0.0 1.0\n"
            "elements\n0 0 1 2  # inline comment\n"
            "boundary\n0 1 D\n1 2 N\n0 2 R\n")
        m = load_mesh(path)
        assert m.n_elements == 1
        assert {e.label for e in m.edges} == {"D", "N", "R"}

    def test_error_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("vertices\n0 0.0\n")
        with pytest.raises(ValueError, match="bad.txt:2"):
            load_mesh(path)

    def test_data_before_section_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 0.0 0.0\n")
        with pytest.raises(ValueError, match="before any section"):
            load_mesh(path)

    def test_gapped_vertex_ids_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("vertices\n0 0 0\n1 1 0\n3 0 1\n"
                        "elements\n0 0 1 3\n")
        with pytest.raises(ValueError, match="without gaps"):
            load_mesh(path)

    def test_missing_sections_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("vertices\n0 0 0\n")
        with pytest.raises(ValueError, match="missing"):
            load_mesh(path)


VORONOI_FILES = [f"data/meshes/voronoi_{n:03d}.txt"
                 for n in (8, 16, 32, 64, 128, 256)]


class TestSuppliedMeshes:
    @pytest.mark.parametrize("path", VORONOI_FILES)
    def test_loads_with_declared_count(self, path):
        m = load_mesh(path)
        assert m.n_elements == int(path.split("_")[1].split(".")[0])
        assert m.areas.sum() == pytest.approx(1.0, rel=1e-10)
        assert {e.label for e in m.edges if e.label} == {"R"}

    def test_sizes_decrease(self):
        hs = [load_mesh(p).h for p in VORONOI_FILES]
        assert all(a > b for a, b in zip(hs, hs[1:]))

    def test_concave_family(self):
        m = load_mesh("data/meshes/concave_008.txt")
        assert m.n_elements == 8
        assert m.areas.sum() == pytest.approx(1.0, rel=1e-10)
        # nonconvex elements present
        def convex(verts):
            v = np.asarray(verts)
            d = np.roll(v, -1, axis=0) - v
            e = np.roll(d, -1, axis=0)
            cross = d[:, 0] * e[:, 1] - d[:, 1] * e[:, 0]
            return np.all(cross > -1e-12)
        assert any(not convex(m.vertices[el]) for el in m.elements)


@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
@settings(max_examples=15, deadline=None)
def test_cartesian_io_roundtrip(n, seed):
    import tempfile, os
    rng = np.random.default_rng(seed)
    lo = rng.uniform(-2.0, 0.0, 2)
    hi = lo + rng.uniform(0.5, 3.0, 2)
    m = cartesian_mesh(n, bounds=(tuple(lo), tuple(hi)))
    fd, path = tempfile.mkstemp(suffix=".txt")
    os.close(fd)
    try:
        save_mesh(m, path)
        m2 = load_mesh(path)
        assert np.array_equal(m.vertices, m2.vertices)
        assert all(np.array_equal(a, b)
                   for a, b in zip(m.elements, m2.elements))
    finally:
        os.unlink(path)
