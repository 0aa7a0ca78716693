import numpy as np
import pytest

from mvfeti.benchmarks import donut_with_stands, synthetic_ring
from mvfeti.errors import TopologyMismatch
from mvfeti.model import rotate_pairs
from mvfeti.multivector import ColumnRecipe, MultivectorMap, expand, identity_map
from mvfeti.problems import Thermal


def slot(model, v, idx):
    return v[model.interface_slices[idx]]


class TestPeriodicExpansion:
    def test_three_sector_permutation(self, small_thermal_ring):
        # (a, b, c) expands into the three cyclic columns
        model, mv_map = small_thermal_ring
        dim = model.interface_slices[0].stop
        rng = np.random.default_rng(0)
        a, b, c = (rng.standard_normal(dim) for _ in range(3))
        W = expand(model, mv_map, np.concatenate([a, b, c]))
        assert W.shape[1] == 3
        np.testing.assert_array_equal(W[:, 0], np.concatenate([a, b, c]))
        np.testing.assert_array_equal(W[:, 1], np.concatenate([b, c, a]))
        np.testing.assert_array_equal(W[:, 2], np.concatenate([c, a, b]))

    def test_identity_recipe_bitwise(self, small_elastic_ring):
        model, mv_map = small_elastic_ring
        v = np.random.default_rng(1).standard_normal(model.n_lambda)
        np.testing.assert_array_equal(expand(model, mv_map, v)[:, 0], v)

    def test_elastic_transport_fixes_symmetric_data(self, small_elastic_ring):
        # interface data that is the trace of a rotationally symmetric field
        # must be reproduced identically by every recipe
        model, mv_map = small_elastic_ring
        dim = model.interface_slices[0].stop
        base = np.random.default_rng(2).standard_normal(dim)
        v = np.empty(model.n_lambda)
        for idx, iface in enumerate(model.interfaces):
            owner = iface.sides()[0][0]
            angle = model.occurrences[owner].angle
            v[model.interface_slices[idx]] = rotate_pairs(base, angle,
                                                          forward=True)
        W = expand(model, mv_map, v)
        for k in range(1, mv_map.width):
            np.testing.assert_allclose(W[:, k], v, atol=1e-14)


class TestStandExpansion:
    def test_one_stand_constant_row(self):
        model, mv_map = donut_with_stands(3, physics=Thermal(), radial_divs=6,
                                          angular_divs=9, stand_divs=2)
        assert mv_map.width == 3
        v = np.random.default_rng(3).standard_normal(model.n_lambda)
        W = expand(model, mv_map, v)
        stand_slot = 3
        for k in range(3):
            np.testing.assert_array_equal(slot(model, W[:, k], stand_slot),
                                          slot(model, v, stand_slot))
        np.testing.assert_array_equal(slot(model, W[:, 1], 0),
                                      slot(model, v, 1))

    def test_two_stands_swap(self):
        model, mv_map = synthetic_ring(3, 4, "two_stands", seed=0)
        assert mv_map.width == 6
        v = np.random.default_rng(4).standard_normal(model.n_lambda)
        W = expand(model, mv_map, v)
        s0, s1 = 3, 4          # the two stand interface slots
        for k in range(3):     # plain cyclic recipes keep the stand rows
            np.testing.assert_array_equal(slot(model, W[:, k], s0),
                                          slot(model, v, s0))
            np.testing.assert_array_equal(slot(model, W[:, k], s1),
                                          slot(model, v, s1))
        for k in range(3, 6):  # enriched recipes exchange them
            np.testing.assert_array_equal(slot(model, W[:, k], s0),
                                          slot(model, v, s1))
            np.testing.assert_array_equal(slot(model, W[:, k], s1),
                                          slot(model, v, s0))
        # ring slots still cycle in the enriched half
        np.testing.assert_array_equal(slot(model, W[:, 4], 0),
                                      slot(model, v, 1))


class TestValidation:
    def test_identity_map(self, small_thermal_ring):
        model, _ = small_thermal_ring
        m = identity_map(model)
        assert m.width == 1

    def test_recipe_zero_must_be_identity(self, small_thermal_ring):
        model, _ = small_thermal_ring
        n = len(model.interfaces)
        bad = ColumnRecipe(tuple((i + 1) % n for i in range(n)),
                           tuple(0.0 for _ in range(n)))
        with pytest.raises(TopologyMismatch):
            MultivectorMap(model, [bad])

    def test_wrong_recipe_length_rejected(self, small_thermal_ring):
        model, _ = small_thermal_ring
        short = ColumnRecipe((0, 1), (0.0, 0.0))
        with pytest.raises(TopologyMismatch):
            MultivectorMap(model, [short])

    def test_size_mismatch_rejected(self):
        # stand interfaces are smaller than ring interfaces here; a recipe
        # feeding a ring slot from the stand slot must be refused
        from mvfeti.model import Interface, Occurrence, StructureModel
        from mvfeti.problems import synthetic_schur_pattern
        rng = np.random.default_rng(5)
        ring = synthetic_schur_pattern({"a": 3, "b": 3, "attach": 2}, rng)
        stand = synthetic_schur_pattern({"top": 2}, rng)
        model = StructureModel(
            [ring, stand],
            [Occurrence(0), Occurrence(0), Occurrence(0), Occurrence(1)],
            [Interface(0, "a", 1, "b"), Interface(1, "a", 2, "b"),
             Interface(2, "a", 0, "b"), Interface(2, "attach", 3, "top")])
        ident = ColumnRecipe((0, 1, 2, 3), (0.0,) * 4)
        bad = ColumnRecipe((3, 1, 2, 0), (0.0,) * 4)
        with pytest.raises(TopologyMismatch):
            MultivectorMap(model, [ident, bad])
