import numpy as np
import pytest

from mvfeti.benchmarks import THERMAL_DONUT_GEOMETRY, thermal_donut
from mvfeti.errors import (
    InterfaceMismatch,
    InvalidGeometry,
    NodeNotFound,
    NotElastic,
)
from mvfeti.meshing import annulus_sector_mesh, rectangle_mesh
from mvfeti.problems import (
    PlaneStrain,
    Thermal,
    apply_hinge,
    assemble_stiffness,
    build_donut_pattern,
    build_stand_pattern,
    random_load,
    synthetic_schur_pattern,
)


class TestMesh:
    def test_interfaces_rotation_matched(self):
        mesh = annulus_sector_mesh(3, 1.0, 2.0, 4, 6)
        a = mesh.tagged("interface_a")
        b = mesh.tagged("interface_b")
        assert len(a) == len(b) == 5
        theta = 2.0 * np.pi / 3.0
        c, s = np.cos(theta), np.sin(theta)
        R = np.array([[c, -s], [s, c]])
        np.testing.assert_allclose(mesh.nodes[b], mesh.nodes[a] @ R.T,
                                   atol=1e-12)

    def test_positive_areas(self):
        for mesh in (annulus_sector_mesh(5, 0.5, 4.0, 7, 6),
                     rectangle_mesh(2.0, 1.0, 4, 3)):
            assert np.all(mesh.element_areas() > 0.0)

    def test_invalid_geometry(self):
        with pytest.raises(InvalidGeometry):
            annulus_sector_mesh(2, 1.0, 2.0, 4, 4)
        with pytest.raises(InvalidGeometry):
            annulus_sector_mesh(4, 2.0, 1.0, 4, 4)
        with pytest.raises(InvalidGeometry):
            rectangle_mesh(1.0, 1.0, 0, 3)


class TestDonutPattern:
    def test_benchmark_scale(self):
        # the benchmark pattern: about 2000 dofs, about 100 on the interface
        pat = build_donut_pattern(9, physics=Thermal(), **THERMAL_DONUT_GEOMETRY)
        assert 1800 <= pat.n_free <= 2200
        n_iface = sum(len(p.dofs) for p in pat.ports.values())
        assert 90 <= n_iface <= 110

    def test_unconstrained_row_sums_vanish(self):
        # a constant field costs no energy, so rows of K sum to zero
        pat = build_donut_pattern(4, 1.0, 2.0, 4, 5, Thermal(),
                                  clamp_inner=False)
        sums = pat.K @ np.ones(pat.n_free)
        assert np.abs(sums).max() <= 1e-10 * np.abs(pat.K).max()
        assert pat.kernel_dim == 1

    def test_clamped_thermal_is_definite(self):
        pat = build_donut_pattern(4, 1.0, 2.0, 4, 5, Thermal())
        assert pat.kernel_dim == 0

    def test_dof_partition_covers_free_dofs_once(self):
        pat = build_donut_pattern(4, 1.0, 2.0, 4, 5, Thermal())
        interior, boundary = pat.dof_partition
        assert len(interior) + len(boundary) == pat.n_free
        assert set(interior).isdisjoint(set(boundary))

    def test_assembled_symmetry(self):
        pat = build_donut_pattern(3, 0.5, 2.5, 5, 6, PlaneStrain())
        K = pat.K
        assert np.abs(K - K.T).max() <= 1e-12 * np.abs(K).max()

    def test_element_matrices_psd(self):
        mesh = annulus_sector_mesh(3, 1.0, 2.0, 3, 3)
        for physics in (Thermal(), PlaneStrain()):
            K = assemble_stiffness(mesh, physics).toarray()
            w = np.linalg.eigvalsh(0.5 * (K + K.T))
            assert w.min() >= -1e-12 * w.max()

    def test_rotation_congruence(self):
        # assembling the rotated mesh gives the same thermal stiffness: the
        # basis for sharing one factorization across occurrences
        theta = 2.0 * np.pi / 3.0
        mesh = annulus_sector_mesh(3, 1.0, 2.0, 4, 4)
        K0 = assemble_stiffness(mesh, Thermal()).toarray()
        c, s = np.cos(theta), np.sin(theta)
        rot_nodes = mesh.nodes @ np.array([[c, -s], [s, c]]).T
        from mvfeti.meshing import PatternMesh
        mesh_rot = PatternMesh(rot_nodes, mesh.elements, mesh.boundary_tags)
        K1 = assemble_stiffness(mesh_rot, Thermal()).toarray()
        assert np.abs(K0 - K1).max() <= 1e-10 * np.abs(K0).max()

    def test_rotation_congruence_elastic(self):
        # elastic stiffness of the rotated mesh is congruent under the
        # per-node dof rotation
        theta = 2.0 * np.pi / 5.0
        mesh = annulus_sector_mesh(5, 1.0, 2.0, 3, 3)
        K0 = assemble_stiffness(mesh, PlaneStrain()).toarray()
        c, s = np.cos(theta), np.sin(theta)
        R = np.array([[c, -s], [s, c]])
        from mvfeti.meshing import PatternMesh
        mesh_rot = PatternMesh(mesh.nodes @ R.T, mesh.elements,
                               mesh.boundary_tags)
        K1 = assemble_stiffness(mesh_rot, PlaneStrain()).toarray()
        O = np.kron(np.eye(mesh.n_nodes), R)
        assert np.abs(O @ K0 @ O.T - K1).max() <= 1e-10 * np.abs(K0).max()


class TestStandPattern:
    def test_interface_node_pairing(self):
        pat = build_stand_pattern(1.0, 1.0, (5, 5), Thermal(), attach_nodes=6)
        assert len(pat.ports["top"].dofs) == 6

    def test_interface_mismatch(self):
        with pytest.raises(InterfaceMismatch):
            build_stand_pattern(1.0, 1.0, (5, 5), Thermal(), attach_nodes=7)

    def test_fixed_base_is_definite(self):
        pat = build_stand_pattern(1.0, 1.0, (4, 3), Thermal())
        assert pat.kernel_dim == 0

    def test_free_elastic_stand_has_three_rigid_modes(self):
        pat = build_stand_pattern(1.0, 1.0, (3, 3), PlaneStrain(),
                                  clamp_base=False)
        assert pat.kernel_dim == 3


class TestHinge:
    def test_kernel_dim_one(self):
        pat = build_donut_pattern(3, 1.0, 2.0, 4, 4, PlaneStrain(),
                                  clamp_inner=False)
        hinged = apply_hinge(pat)
        assert hinged.kernel_dim == 1

    def test_thermal_rejected(self):
        pat = build_donut_pattern(3, 1.0, 2.0, 4, 4, Thermal(),
                                  clamp_inner=False)
        with pytest.raises(NotElastic):
            apply_hinge(pat)

    def test_node_not_on_inner_arc(self):
        pat = build_donut_pattern(3, 1.0, 2.0, 4, 4, PlaneStrain(),
                                  clamp_inner=False)
        outer = int(pat.mesh.tagged("outer_arc")[0])
        with pytest.raises(NodeNotFound):
            apply_hinge(pat, node=outer)

    def test_kernel_is_rotation_about_hinge(self):
        pat = build_donut_pattern(3, 1.0, 2.0, 4, 4, PlaneStrain(),
                                  clamp_inner=False)
        inner = pat.mesh.tagged("inner_arc")
        hinge = int(inner[len(inner) // 2])
        hinged = apply_hinge(pat, node=hinge)
        x0, y0 = pat.mesh.nodes[hinge]
        mode = np.empty(hinged.n_free)
        coords = pat.mesh.nodes[hinged.node_of_free[0::2]]
        mode[0::2] = -(coords[:, 1] - y0)
        mode[1::2] = coords[:, 0] - x0
        mode /= np.linalg.norm(mode)
        k = hinged.stiffness_factor.kernel[:, 0]
        if k @ mode < 0:
            k = -k
        np.testing.assert_allclose(k, mode, atol=1e-9)


class TestLoads:
    def test_deterministic(self, small_thermal_ring):
        model, _ = small_thermal_ring
        a = random_load(model, 7)
        b = random_load(model, 7)
        for fa, fb in zip(a.forces, b.forces):
            np.testing.assert_array_equal(fa, fb)

    def test_seed_changes_load(self, small_thermal_ring):
        model, _ = small_thermal_ring
        a = random_load(model, 1)
        b = random_load(model, 2)
        assert any(not np.array_equal(fa, fb)
                   for fa, fb in zip(a.forces, b.forces))

    def test_not_periodic(self, small_thermal_ring):
        # periodic replication would make every occurrence's load identical
        # in the pattern frame; the random load is not
        model, _ = small_thermal_ring
        loads = random_load(model, 3)
        f0 = model.rotate_free(0, loads[0], forward=False)
        for s in range(1, len(model.occurrences)):
            fs = model.rotate_free(s, loads[s], forward=False)
            assert np.linalg.norm(fs - f0) > 1e-3 * np.linalg.norm(f0)


class TestSyntheticPattern:
    def test_spd_with_spectrum(self):
        rng = np.random.default_rng(5)
        pat = synthetic_schur_pattern({"a": 8, "b": 8}, rng,
                                      spectrum=(1e-2, 1e2))
        w = np.linalg.eigvalsh(pat.K)
        assert w.min() >= 1e-2 * 0.99 and w.max() <= 1e2 * 1.01
        assert pat.kernel_dim == 0
        assert [len(p.dofs) for p in pat.ports.values()] == [8, 8]

    def test_seeded(self):
        a = synthetic_schur_pattern({"a": 5}, np.random.default_rng(0))
        b = synthetic_schur_pattern({"a": 5}, np.random.default_rng(0))
        np.testing.assert_array_equal(a.K, b.K)


def test_thermal_donut_benchmark_interface_count():
    model, _ = thermal_donut(3, radial_divs=4, angular_divs=3)
    # clamped innermost node drops one dof per interface side
    assert model.n_lambda == 3 * 4
