"""Benchmark structures: donut rings, donuts with stands, academic rings.

Every builder returns ``(model, mv_map)``: the placed structure together
with the multivector recipes matching its repetition pattern.  Ring
occurrences are placed clockwise so that occurrence ``k`` shares its
interface ``k`` (positive side, port ``a``) with occurrence ``k+1``
(negative side, port ``b``).
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidGeometry
from .model import Interface, Occurrence, StructureModel
from .multivector import cyclic_map, cyclic_swap_map
from .problems import (
    PlaneStrain,
    Thermal,
    apply_hinge,
    build_donut_pattern,
    build_stand_pattern,
    synthetic_schur_pattern,
)

# Defaults sized to the benchmark scale (pattern about 2000 dofs, about 100
# of them on the interface); radii chosen so the iterative engines land on
# the reference iteration counts.
THERMAL_DONUT_GEOMETRY = dict(r_inner=0.5, r_outer=4.0, radial_divs=50,
                              angular_divs=39)
ELASTIC_DONUT_GEOMETRY = dict(r_inner=1.0, r_outer=3.0, radial_divs=25,
                              angular_divs=39)
SYNTHETIC_SPECTRUM = (2e-2, 10.0)
SYNTHETIC_STAND_STIFFNESS = 100.0


def _geometry(defaults, r_inner, r_outer, radial_divs, angular_divs):
    geo = dict(defaults)
    for key, val in (("r_inner", r_inner), ("r_outer", r_outer),
                     ("radial_divs", radial_divs),
                     ("angular_divs", angular_divs)):
        if val is not None:
            geo[key] = val
    return geo


def _ring(pattern_idx, n, theta):
    occurrences = [Occurrence(pattern_idx, angle=-k * theta) for k in range(n)]
    interfaces = [Interface(k, "a", (k + 1) % n, "b") for k in range(n)]
    return occurrences, interfaces


def thermal_donut(n, r_inner=None, r_outer=None, radial_divs=None,
                  angular_divs=None):
    """Clamped scalar donut split into ``n`` identical sectors."""
    geo = _geometry(THERMAL_DONUT_GEOMETRY, r_inner, r_outer, radial_divs,
                    angular_divs)
    pattern = build_donut_pattern(n, physics=Thermal(), **geo)
    occs, ifaces = _ring(0, n, 2.0 * np.pi / n)
    model = StructureModel([pattern], occs, ifaces)
    return model, cyclic_map(model, range(n))


def elastic_donut(n, hinged=False, young=1.0, poisson=0.3, r_inner=None,
                  r_outer=None, radial_divs=None, angular_divs=None):
    """Plane-strain donut; hinged variants float on one rotation mode each."""
    geo = _geometry(ELASTIC_DONUT_GEOMETRY, r_inner, r_outer, radial_divs,
                    angular_divs)
    physics = PlaneStrain(young=young, poisson=poisson)
    pattern = build_donut_pattern(n, physics=physics, clamp_inner=not hinged, **geo)
    if hinged:
        pattern = apply_hinge(pattern)
    occs, ifaces = _ring(0, n, 2.0 * np.pi / n)
    model = StructureModel([pattern], occs, ifaces)
    return model, cyclic_map(model, range(n))


def donut_with_stands(n, n_stands=1, physics=None, r_inner=None, r_outer=None,
                      radial_divs=None, angular_divs=None, stand_divs=4):
    """Donut ring plus one or two identical stands hung on the outer arc.

    The stand pattern pairs node for node with an outer-arc segment of its
    host occurrence; one stand hangs under the last ring occurrence, a second
    one under the first two occurrences, mirroring the enriched-multivector
    topology.
    """
    if n_stands not in (1, 2):
        raise InvalidGeometry("only one or two stands are supported")
    physics = physics or Thermal()
    geo = _geometry(THERMAL_DONUT_GEOMETRY if physics.dofs_per_node == 1
                    else ELASTIC_DONUT_GEOMETRY,
                    r_inner, r_outer, radial_divs, angular_divs)
    ad = geo["angular_divs"]
    j0, j1 = ad // 3, 2 * ad // 3
    ring_pat = build_donut_pattern(n, physics=physics, attach_arc=(j0, j1), **geo)

    theta = 2.0 * np.pi / n
    arc_len = geo["r_outer"] * theta * (j1 - j0) / ad
    stand_pat = build_stand_pattern(arc_len, 0.5 * (geo["r_outer"] - geo["r_inner"]),
                                    (j1 - j0, stand_divs), physics,
                                    attach_nodes=j1 - j0 + 1)

    occs, ifaces = _ring(0, n, theta)
    hosts = [n - 1] if n_stands == 1 else [1, 0]
    stand_slots = []
    for i, host in enumerate(hosts):
        stand_idx = n + i
        occs.append(Occurrence(1, angle=occs[host].angle))
        stand_slots.append(len(ifaces))
        ifaces.append(Interface(host, "attach", stand_idx, "top"))
    model = StructureModel([ring_pat, stand_pat], occs, ifaces)
    if n_stands == 1:
        mv_map = cyclic_map(model, range(n))
    else:
        mv_map = cyclic_swap_map(model, range(n), (stand_slots[1], stand_slots[0]))
    return model, mv_map


def synthetic_ring(n, interface_dim=20, topology="periodic", seed=0,
                   spectrum=SYNTHETIC_SPECTRUM,
                   stand_stiffness=SYNTHETIC_STAND_STIFFNESS):
    """Academic benchmark: the pattern operator is a seeded random SPD matrix.

    ``periodic`` repeats one two-port pattern around a ring; the stand
    topologies add an attachment port to the ring pattern plus a one-port
    stand pattern with its own random operator, ``stand_stiffness`` times
    stiffer than the ring (a support is stiffer than what it carries).
    """
    rng = np.random.default_rng(seed)
    m = int(interface_dim)
    if topology == "periodic":
        pattern = synthetic_schur_pattern({"a": m, "b": m}, rng,
                                          spectrum=spectrum)
        occs, ifaces = _ring(0, n, 0.0)
        model = StructureModel([pattern], occs, ifaces)
        return model, cyclic_map(model, range(n))
    if topology not in ("one_stand", "two_stands"):
        raise InvalidGeometry(f"unknown synthetic topology {topology!r}")
    ring_pat = synthetic_schur_pattern({"a": m, "b": m, "attach": m}, rng,
                                       spectrum=spectrum)
    stand_pat = synthetic_schur_pattern(
        {"top": m}, rng,
        spectrum=(spectrum[0] * stand_stiffness, spectrum[1] * stand_stiffness),
        label="academic stand")
    occs, ifaces = _ring(0, n, 0.0)
    hosts = [n - 1] if topology == "one_stand" else [1, 0]
    stand_slots = []
    for i, host in enumerate(hosts):
        occs.append(Occurrence(1))
        stand_slots.append(len(ifaces))
        ifaces.append(Interface(host, "attach", n + i, "top"))
    model = StructureModel([ring_pat, stand_pat], occs, ifaces)
    if topology == "one_stand":
        mv_map = cyclic_map(model, range(n))
    else:
        mv_map = cyclic_swap_map(model, range(n), (stand_slots[1], stand_slots[0]))
    return model, mv_map
