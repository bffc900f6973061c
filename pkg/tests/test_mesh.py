import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MSH22_SQUARE, MSH22_TRIANGLE, MSH41_TRIANGLE
from nhpd.errors import (
    DegenerateElementError,
    IsolatedNodeError,
    MeshIntegrityError,
    MshParseError,
)
from nhpd.mesh import lump_volumes, parse_msh, write_msh
from nhpd.meshgen import disk_mesh, square_mesh


class TestParse22:
    def test_single_triangle(self):
        mesh = parse_msh(MSH22_TRIANGLE)
        assert mesh.n_nodes == 3
        assert mesh.n_triangles == 1
        assert mesh.total_area() == pytest.approx(0.5)

    def test_unit_square_two_triangles(self):
        mesh = parse_msh(MSH22_SQUARE)
        assert mesh.n_triangles == 2
        assert mesh.total_area() == pytest.approx(1.0)
        assert set(mesh.groups) == {"left", "domain"}
        assert mesh.groups["left"].tolist() == [0, 3]

    def test_unknown_node_reference(self):
        bad = MSH22_TRIANGLE.replace("1 2 2 0 0 1 2 3", "1 2 2 0 0 1 2 99")
        with pytest.raises(MeshIntegrityError, match="99"):
            parse_msh(bad)

    def test_zero_area_triangle(self):
        bad = MSH22_TRIANGLE.replace("3 0 1 0", "3 2 0 0")
        with pytest.raises(DegenerateElementError, match="1"):
            parse_msh(bad)

    def test_binary_rejected(self):
        bad = MSH22_TRIANGLE.replace("2.2 0 8", "2.2 1 8")
        with pytest.raises(MshParseError, match="binary"):
            parse_msh(bad)

    def test_malformed_header_has_line_number(self):
        with pytest.raises(MshParseError, match="line 1"):
            parse_msh("$Garbage\n")

    def test_truncated_nodes(self):
        bad = "\n".join(MSH22_TRIANGLE.splitlines()[:6]) + "\n"
        with pytest.raises(MshParseError):
            parse_msh(bad)

    def test_duplicate_node_ids(self):
        bad = MSH22_TRIANGLE.replace("2 1 0 0", "1 1 0 0")
        with pytest.raises(MeshIntegrityError, match="duplicate"):
            parse_msh(bad)

    def test_orientation_normalized(self):
        flipped = MSH22_TRIANGLE.replace("1 2 2 0 0 1 2 3", "1 2 2 0 0 1 3 2")
        mesh = parse_msh(flipped)
        assert mesh.triangle_areas()[0] > 0.0


class TestParse41:
    def test_triangle_with_groups(self):
        mesh = parse_msh(MSH41_TRIANGLE)
        assert mesh.n_nodes == 3
        assert mesh.n_triangles == 1
        assert mesh.total_area() == pytest.approx(0.5)
        assert mesh.groups["corner"].tolist() == [0]
        assert set(mesh.groups["domain"].tolist()) == {0, 1, 2}

    def test_binary_rejected(self):
        bad = MSH41_TRIANGLE.replace("4.1 0 8", "4.1 1 8")
        with pytest.raises(MshParseError, match="binary"):
            parse_msh(bad)


class TestRoundTrip:
    def _assert_same(self, a, b):
        assert np.array_equal(a.node_ids, b.node_ids)
        assert np.array_equal(a.coords, b.coords)
        assert np.array_equal(a.triangles, b.triangles)
        assert set(a.groups) == set(b.groups)
        for name in a.groups:
            assert np.array_equal(a.groups[name], b.groups[name])

    def test_square_fixture(self):
        mesh = parse_msh(MSH22_SQUARE)
        self._assert_same(mesh, parse_msh(write_msh(mesh)))

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_generated_meshes(self, seed):
        mesh = square_mesh(side=1.0, spacing=0.3, seed=seed)
        self._assert_same(mesh, parse_msh(write_msh(mesh)))

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_orientation_property(self, seed):
        mesh = disk_mesh(radius=1.0, spacing=0.3, seed=seed)
        assert (mesh.triangle_areas() > 0.0).all()


class TestLumpVolumes:
    def test_single_triangle_equal_split(self):
        mesh = parse_msh(MSH22_TRIANGLE)
        _, volume, _ = lump_volumes(mesh, thickness=1.0)
        assert volume == pytest.approx([1.0 / 6.0] * 3)

    def test_unit_square_shared_nodes(self):
        # nodes 0 and 2 sit on both triangles, nodes 1 and 3 on one each
        mesh = parse_msh(MSH22_SQUARE)
        _, volume, _ = lump_volumes(mesh, thickness=1.0)
        assert volume == pytest.approx([1 / 3, 1 / 6, 1 / 3, 1 / 6])
        assert volume.sum() == pytest.approx(1.0)

    def test_thickness_scaling(self):
        mesh = parse_msh(MSH22_TRIANGLE)
        _, v1, _ = lump_volumes(mesh, thickness=1.0)
        _, v2, _ = lump_volumes(mesh, thickness=2.5)
        assert v2 == pytest.approx(2.5 * v1)

    def test_nonpositive_thickness(self):
        mesh = parse_msh(MSH22_TRIANGLE)
        with pytest.raises(ValueError):
            lump_volumes(mesh, thickness=0.0)

    def test_volume_free_node_is_error(self):
        text = MSH22_TRIANGLE.replace("$Nodes\n3", "$Nodes\n4").replace(
            "$EndNodes", "4 5 5 0\n$EndNodes"
        )
        mesh = parse_msh(text)
        with pytest.raises(IsolatedNodeError, match="4"):
            lump_volumes(mesh, thickness=1.0)

    def test_volume_free_node_can_be_dropped(self):
        text = MSH22_TRIANGLE.replace("$Nodes\n3", "$Nodes\n4").replace(
            "$EndNodes", "4 5 5 0\n$EndNodes"
        )
        mesh = parse_msh(text)
        xy, volume, _ = lump_volumes(mesh, thickness=1.0, drop_volume_free=True)
        assert len(xy) == 3
        assert volume.sum() == pytest.approx(0.5)

    def test_group_remap_after_drop(self):
        text = MSH22_SQUARE.replace("$Nodes\n4", "$Nodes\n5").replace(
            "$EndNodes", "5 7 7 0\n$EndNodes"
        ).replace("$Elements\n3", "$Elements\n4").replace(
            "$EndElements", "4 15 2 7 0 5\n$EndElements"
        )
        mesh = parse_msh(text)
        xy, volume, groups = lump_volumes(mesh, thickness=1.0, drop_volume_free=True)
        assert len(xy) == 4
        assert groups["left"].tolist() == [0, 3]

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10_000), thickness=st.floats(0.1, 10.0))
    def test_volume_conservation(self, seed, thickness):
        mesh = square_mesh(side=2.0, spacing=0.4, seed=seed)
        _, volume, _ = lump_volumes(mesh, thickness=thickness)
        total = thickness * mesh.total_area()
        assert abs(volume.sum() - total) <= 1e-12 * total
