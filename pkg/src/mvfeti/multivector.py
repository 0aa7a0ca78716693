"""Block search-direction recipes: permutations of interface partitions.

One preconditioned residual is expanded into several descent directions by
relabeling interface slots according to the structure's repetitions; for
elasticity the copied data is transported into the target interface's frame
by the placement-angle difference of the owning occurrences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TopologyMismatch
from .model import rotate_pairs


@dataclass(frozen=True)
class ColumnRecipe:
    """Per-interface source slot and frame-transport angle for one column."""
    sources: tuple
    angles: tuple


class MultivectorMap:
    """An ordered set of column recipes; recipe 0 is always the identity."""

    def __init__(self, model, recipes):
        self.recipes = list(recipes)
        if not self.recipes:
            raise TopologyMismatch("a multivector map needs at least one recipe")
        n_ifaces = len(model.interfaces)
        ident = self.recipes[0]
        if (tuple(ident.sources) != tuple(range(n_ifaces))
                or any(a != 0.0 for a in ident.angles)):
            raise TopologyMismatch("recipe 0 must be the identity")
        for r in self.recipes:
            if len(r.sources) != n_ifaces or len(r.angles) != n_ifaces:
                raise TopologyMismatch("recipe does not cover every interface")
            for tgt, src in enumerate(r.sources):
                tgt_sl = model.interface_slices[tgt]
                src_sl = model.interface_slices[src]
                if (tgt_sl.stop - tgt_sl.start) != (src_sl.stop - src_sl.start):
                    raise TopologyMismatch(
                        f"recipe maps interface {src} ({src_sl}) onto "
                        f"{tgt} ({tgt_sl}) of different size")
                if model.interface_dpn[tgt] != model.interface_dpn[src]:
                    raise TopologyMismatch("recipe mixes dof layouts")

    @property
    def width(self):
        return len(self.recipes)


def expand(model, mv_map, v):
    """Expand one interface vector into a block of search directions.

    Column ``k`` applies recipe ``k``: every interface slot receives the data
    of its source slot, frame-transported for vector-valued interfaces.
    Column 0 is ``v`` itself, bit for bit.
    """
    v = np.asarray(v, dtype=float)
    out = np.empty((model.n_lambda, mv_map.width))
    for k, recipe in enumerate(mv_map.recipes):
        for tgt, src in enumerate(recipe.sources):
            vals = v[model.interface_slices[src]]
            angle = recipe.angles[tgt]
            if model.interface_dpn[tgt] == 2 and angle != 0.0:
                vals = rotate_pairs(vals, angle, forward=True)
            out[model.interface_slices[tgt], k] = vals
    return out


def _transport_angle(model, target, source):
    """Placement-angle difference of the positively-signed owners."""
    occ_t = model.interfaces[target].sides()[0][0]
    occ_s = model.interfaces[source].sides()[0][0]
    return model.occurrences[occ_t].angle - model.occurrences[occ_s].angle


def _recipe(model, sources):
    angles = tuple(0.0 if tgt == src else _transport_angle(model, tgt, src)
                   for tgt, src in enumerate(sources))
    return ColumnRecipe(tuple(sources), angles)


def identity_map(model):
    return MultivectorMap(model, [_recipe(model, range(len(model.interfaces)))])


def cyclic_map(model, ring):
    """Recipes cycling the ``ring`` interface slots; other slots stay put.

    With ``n`` ring slots this yields the ``n`` recipes of the cyclic group;
    non-ring slots (a stand interface, say) repeat their own data in every
    column.
    """
    ring = list(ring)
    n_ifaces = len(model.interfaces)
    recipes = []
    for k in range(len(ring)):
        sources = list(range(n_ifaces))
        for pos, slot in enumerate(ring):
            sources[slot] = ring[(pos + k) % len(ring)]
        recipes.append(_recipe(model, sources))
    return MultivectorMap(model, recipes)


def cyclic_swap_map(model, ring, pair):
    """Cyclic ring recipes enriched with the swap of two equivalent slots.

    Produces ``2 n`` recipes: the plain cyclic ones, then the cyclic ones
    with the paired (stand) slots exchanged.
    """
    ring = list(ring)
    a, b = pair
    n_ifaces = len(model.interfaces)
    recipes = []
    for swap in (False, True):
        for k in range(len(ring)):
            sources = list(range(n_ifaces))
            for pos, slot in enumerate(ring):
                sources[slot] = ring[(pos + k) % len(ring)]
            if swap:
                sources[a], sources[b] = b, a
            recipes.append(_recipe(model, sources))
    return MultivectorMap(model, recipes)
