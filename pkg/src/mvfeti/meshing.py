"""Structured 2-D triangle meshes for the benchmark patterns."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGeometry

BOUNDARY_TAGS = ("inner_arc", "outer_arc", "interface_a", "interface_b",
                 "stand_base", "other")


@dataclass(frozen=True)
class PatternMesh:
    """Linear-triangle mesh of one pattern.

    ``boundary_tags`` maps a tag name to the node indices carrying it; a node
    may carry several tags (arc/interface corners).
    """

    nodes: np.ndarray                 # (n_nodes, 2)
    elements: np.ndarray              # (n_elements, 3) int
    boundary_tags: dict = field(default_factory=dict)

    def tagged(self, tag):
        return self.boundary_tags.get(tag, np.empty(0, dtype=np.intp))

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    def element_areas(self):
        p = self.nodes[self.elements]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))


def _grid_triangles(n_rows, n_cols, node_id):
    """Split each quad of a structured (n_rows x n_cols) grid into 2 triangles."""
    tris = []
    for i in range(n_rows):
        for j in range(n_cols):
            n00 = node_id(i, j)
            n10 = node_id(i + 1, j)
            n01 = node_id(i, j + 1)
            n11 = node_id(i + 1, j + 1)
            tris.append((n00, n10, n11))
            tris.append((n00, n11, n01))
    return np.asarray(tris, dtype=np.intp)


def _oriented(nodes, tris):
    """Flip triangles with negative area; reject degenerate ones."""
    p = nodes[tris]
    area2 = ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
             - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
    flip = area2 < 0
    tris[flip] = tris[flip][:, ::-1]
    if np.any(np.abs(area2) <= 0.0):
        raise InvalidGeometry("mesh contains a zero-area element")
    return tris


def annulus_sector_mesh(n_sectors, r_inner, r_outer, radial_divs, angular_divs):
    """Structured mesh of an annulus sector of angle 2*pi/n_sectors.

    ``interface_a`` sits at angle 0, ``interface_b`` at the sector angle;
    both edges carry the same radial discretization so they map onto each
    other under rotation by the sector angle.
    """
    if n_sectors < 3:
        raise InvalidGeometry("at least 3 sectors are required")
    if not (0.0 < r_inner < r_outer):
        raise InvalidGeometry("need 0 < r_inner < r_outer")
    if radial_divs < 1 or angular_divs < 1:
        raise InvalidGeometry("divisions must be >= 1")

    theta = 2.0 * np.pi / n_sectors
    nr, na = radial_divs, angular_divs
    radii = np.linspace(r_inner, r_outer, nr + 1)
    angles = np.linspace(0.0, theta, na + 1)

    def node_id(i, j):
        return i * (na + 1) + j

    nodes = np.empty(((nr + 1) * (na + 1), 2))
    for i, r in enumerate(radii):
        for j, a in enumerate(angles):
            nodes[node_id(i, j)] = (r * np.cos(a), r * np.sin(a))

    tris = _oriented(nodes, _grid_triangles(nr, na, node_id))
    rows = np.arange(nr + 1, dtype=np.intp)
    tags = {
        "inner_arc": np.array([node_id(0, j) for j in range(na + 1)], dtype=np.intp),
        "outer_arc": np.array([node_id(nr, j) for j in range(na + 1)], dtype=np.intp),
        "interface_a": np.array([node_id(i, 0) for i in rows], dtype=np.intp),
        "interface_b": np.array([node_id(i, na) for i in rows], dtype=np.intp),
    }
    return PatternMesh(nodes, tris, tags)


def rectangle_mesh(width, height, nx, ny):
    """Structured rectangle; top edge at y = 0, base at y = -height.

    Tagged for the stand pattern: ``interface_a`` is the top edge (ordered by
    increasing x), ``stand_base`` the bottom edge.
    """
    if width <= 0 or height <= 0:
        raise InvalidGeometry("stand width and height must be positive")
    if nx < 1 or ny < 1:
        raise InvalidGeometry("divisions must be >= 1")
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, -height, ny + 1)

    def node_id(i, j):
        return i * (nx + 1) + j

    nodes = np.empty(((nx + 1) * (ny + 1), 2))
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            nodes[node_id(i, j)] = (x, y)

    tris = _oriented(nodes, _grid_triangles(ny, nx, node_id))
    tags = {
        "interface_a": np.array([node_id(0, j) for j in range(nx + 1)], dtype=np.intp),
        "stand_base": np.array([node_id(ny, j) for j in range(nx + 1)], dtype=np.intp),
    }
    return PatternMesh(nodes, tris, tags)


def dump_mesh(mesh, path):
    """Plain-text mesh dump (node table, element table) for inspection."""
    with open(path, "w") as fh:
        fh.write(f"# nodes {mesh.n_nodes}\n")
        for i, (x, y) in enumerate(mesh.nodes):
            fh.write(f"{i} {x!r} {y!r}\n")
        fh.write(f"# elements {len(mesh.elements)}\n")
        for i, (a, b, c) in enumerate(mesh.elements):
            fh.write(f"{i} {a} {b} {c}\n")
        for tag in sorted(mesh.boundary_tags):
            ids = " ".join(str(v) for v in mesh.boundary_tags[tag])
            fh.write(f"# tag {tag}: {ids}\n")
