"""Benchmark problem generation: pattern stiffness matrices and load cases.

A pattern couples a mesh with a physics (scalar diffusion or plane-strain
elasticity), eliminated Dirichlet conditions, and named interface ports whose
degrees of freedom are the currency of the interface problem.  The academic
benchmarks use mesh-free patterns whose operator is a synthetic SPD matrix
standing in for a condensed interface operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import InvalidGeometry, InterfaceMismatch, NodeNotFound, NotElastic
from .linalg import factor_sym
from .meshing import annulus_sector_mesh, rectangle_mesh


@dataclass(frozen=True)
class Thermal:
    """Scalar diffusion with unit conductivity."""
    conductivity: float = 1.0

    dofs_per_node = 1


@dataclass(frozen=True)
class PlaneStrain:
    """2-D plane-strain elasticity."""
    young: float = 1.0
    poisson: float = 0.3

    dofs_per_node = 2


@dataclass(frozen=True)
class SyntheticOperator:
    """Marker physics for mesh-free academic patterns (scalar unknowns)."""

    dofs_per_node = 1


@dataclass(frozen=True)
class Port:
    """One interface side of a pattern: ordered free dofs plus their nodes."""
    tag: str
    dofs: np.ndarray        # indices into the pattern's free-dof numbering
    nodes: np.ndarray       # owning mesh nodes, one per dofs_per_node dofs


def _tri_gradients(p):
    """Shape-function gradients and area of one linear triangle."""
    x, y = p[:, 0], p[:, 1]
    area2 = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0])
    b = np.array([y[1] - y[2], y[2] - y[0], y[0] - y[1]]) / area2
    c = np.array([x[2] - x[1], x[0] - x[2], x[1] - x[0]]) / area2
    return b, c, 0.5 * area2


def _element_stiffness(p, physics):
    b, c, area = _tri_gradients(p)
    if isinstance(physics, Thermal):
        return physics.conductivity * area * (np.outer(b, b) + np.outer(c, c))
    E, nu = physics.young, physics.poisson
    D = (E / ((1.0 + nu) * (1.0 - 2.0 * nu))) * np.array([
        [1.0 - nu, nu, 0.0],
        [nu, 1.0 - nu, 0.0],
        [0.0, 0.0, 0.5 - nu],
    ])
    B = np.zeros((3, 6))
    B[0, 0::2] = b
    B[1, 1::2] = c
    B[2, 0::2] = c
    B[2, 1::2] = b
    return area * (B.T @ D @ B)


def assemble_stiffness(mesh, physics):
    """Assemble the full (unconstrained) stiffness as a sparse matrix."""
    dpn = physics.dofs_per_node
    rows, cols, vals = [], [], []
    for tri in mesh.elements:
        Ke = _element_stiffness(mesh.nodes[tri], physics)
        edofs = np.concatenate([[n * dpn + k for k in range(dpn)] for n in tri])
        r, c = np.meshgrid(edofs, edofs, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(Ke.ravel())
    n = mesh.n_nodes * dpn
    K = sp.coo_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n)).tocsr()
    return K


class PatternStiffness:
    """One pattern: mesh (optional), physics, stiffness, ports, constraints.

    The stored stiffness ``K`` acts on the free dofs only (Dirichlet rows and
    columns eliminated).  ``ports`` lists the interface sides in a canonical
    order; their concatenation is the pattern's boundary partition.  The
    object is immutable; factorizations are computed lazily and cached.
    """

    def __init__(self, mesh, physics, K_full, dirichlet_nodes, port_nodes,
                 label=""):
        self.mesh = mesh
        self.physics = physics
        self.label = label
        dpn = physics.dofs_per_node
        self.dofs_per_node = dpn

        n_full = K_full.shape[0]
        dirichlet_nodes = np.asarray(sorted(set(map(int, dirichlet_nodes))),
                                     dtype=np.intp)
        fixed = np.zeros(n_full, dtype=bool)
        for node in dirichlet_nodes:
            fixed[node * dpn:(node + 1) * dpn] = True
        self.dirichlet_nodes = dirichlet_nodes
        self.dirichlet_dofs = np.nonzero(fixed)[0]
        self.free_dofs = np.nonzero(~fixed)[0]
        self.n_free = len(self.free_dofs)

        full_to_free = -np.ones(n_full, dtype=np.intp)
        full_to_free[self.free_dofs] = np.arange(self.n_free)
        self._full_to_free = full_to_free

        K_full = sp.csr_matrix(K_full)
        self.K_csr = K_full[self.free_dofs][:, self.free_dofs].tocsr()
        self.K = self.K_csr.toarray()

        # free dofs of every node are all-or-nothing, so per-node rotation
        # blocks stay contiguous
        self.node_of_free = self.free_dofs // dpn
        if dpn == 2:
            pairs = self.node_of_free.reshape(-1, 2)
            if not np.all(pairs[:, 0] == pairs[:, 1]):
                raise InvalidGeometry("partially constrained node on a pattern")

        ports = []
        for tag, nodes in port_nodes.items():
            nodes = np.asarray(nodes, dtype=np.intp)
            keep, dofs = [], []
            for node in nodes:
                fdofs = full_to_free[node * dpn:(node + 1) * dpn]
                if np.all(fdofs >= 0):
                    keep.append(node)
                    dofs.extend(fdofs)
                elif np.any(fdofs >= 0):
                    raise InvalidGeometry(
                        f"port {tag!r} touches a partially constrained node")
            ports.append(Port(tag, np.asarray(dofs, dtype=np.intp),
                              np.asarray(keep, dtype=np.intp)))
        self.ports = {p.tag: p for p in ports}

    # -- canonical interior/boundary partition --------------------------------

    @cached_property
    def boundary_dofs(self):
        if not self.ports:
            return np.empty(0, dtype=np.intp)
        return np.concatenate([p.dofs for p in self.ports.values()])

    @cached_property
    def interior_dofs(self):
        mask = np.ones(self.n_free, dtype=bool)
        mask[self.boundary_dofs] = False
        return np.nonzero(mask)[0]

    @property
    def dof_partition(self):
        """(interior, boundary) free-dof index lists of the canonical split."""
        return self.interior_dofs, self.boundary_dofs

    @cached_property
    def stiffness_factor(self):
        """Pivoted factorization of K, kernel included (the local pseudo-inverse)."""
        return factor_sym(self.K)

    @cached_property
    def interior_factor(self):
        """Factorization of the interior block for the canonical partition."""
        ii = self.interior_dofs
        return factor_sym(self.K[np.ix_(ii, ii)])

    @property
    def kernel_dim(self):
        return self.stiffness_factor.kernel_dim

    def with_extra_constraints(self, nodes, label=None):
        """New pattern with additional fully constrained nodes."""
        port_nodes = {p.tag: p.nodes for p in self.ports.values()}
        return PatternStiffness(self.mesh, self.physics, self._K_full(),
                                np.concatenate([self.dirichlet_nodes,
                                                np.asarray(nodes, dtype=np.intp)]),
                                port_nodes, label=label or self.label)

    @classmethod
    def from_operator(cls, S, port_dims, label=""):
        """Mesh-free pattern defined by a dense symmetric operator.

        All dofs are interface dofs, split into the given ports; stands in
        for a pattern that is only known through its condensed operator.
        """
        S = np.asarray(S, dtype=float)
        n = S.shape[0]
        if n != int(sum(port_dims.values())):
            raise InvalidGeometry("port dimensions do not cover the operator")
        pat = cls.__new__(cls)
        pat.mesh = None
        pat.physics = SyntheticOperator()
        pat.label = label
        pat.dofs_per_node = 1
        pat.dirichlet_nodes = np.empty(0, dtype=np.intp)
        pat.dirichlet_dofs = np.empty(0, dtype=np.intp)
        pat.free_dofs = np.arange(n)
        pat.n_free = n
        pat._full_to_free = np.arange(n)
        pat.K = S
        pat.K_csr = sp.csr_matrix(S)
        pat.node_of_free = np.arange(n)
        ports, start = {}, 0
        for tag, dim in port_dims.items():
            idx = np.arange(start, start + int(dim), dtype=np.intp)
            ports[tag] = Port(tag, idx, idx)
            start += int(dim)
        pat.ports = ports
        return pat

    def _K_full(self):
        dpn = self.dofs_per_node
        n_full = self.mesh.n_nodes * dpn
        K = sp.lil_matrix((n_full, n_full))
        K[np.ix_(self.free_dofs, self.free_dofs)] = self.K_csr
        return K.tocsr()


def build_donut_pattern(n_sectors, r_inner, r_outer, radial_divs, angular_divs,
                        physics, clamp_inner=True, attach_arc=None):
    """Annulus-sector pattern with interface ports on both straight edges.

    With ``clamp_inner`` the inner arc is Dirichlet-fixed (the clamped donut
    variants); without it the pattern floats until a hinge is applied.
    ``attach_arc = (j0, j1)`` adds an ``attach`` port on the outer-arc nodes
    with angular indices ``j0..j1``, for hanging a stand.
    """
    mesh = annulus_sector_mesh(n_sectors, r_inner, r_outer, radial_divs,
                               angular_divs)
    K_full = assemble_stiffness(mesh, physics)
    dirichlet = mesh.tagged("inner_arc") if clamp_inner else []
    port_nodes = {
        "a": mesh.tagged("interface_a"),
        "b": mesh.tagged("interface_b"),
    }
    if attach_arc is not None:
        j0, j1 = attach_arc
        if not (0 < j0 < j1 < angular_divs):
            raise InvalidGeometry("attachment arc must sit inside the outer arc")
        port_nodes["attach"] = mesh.tagged("outer_arc")[j0:j1 + 1]
    label = f"donut[{n_sectors}]"
    return PatternStiffness(mesh, physics, K_full, dirichlet, port_nodes, label)


def build_stand_pattern(width, height, divisions, physics,
                        attach_nodes=None, clamp_base=True):
    """Rectangular stand: clamped base, interface port on the top edge.

    ``attach_nodes`` cross-checks the top-edge discretization against the
    segment the stand hangs from.  An unclamped elastic stand floats on its
    three rigid modes.
    """
    nx, ny = divisions
    mesh = rectangle_mesh(width, height, nx, ny)
    if attach_nodes is not None and attach_nodes != nx + 1:
        raise InterfaceMismatch(
            f"stand top edge has {nx + 1} nodes, attachment segment has "
            f"{attach_nodes}")
    K_full = assemble_stiffness(mesh, physics)
    port_nodes = {"top": mesh.tagged("interface_a")}
    dirichlet = mesh.tagged("stand_base") if clamp_base else []
    return PatternStiffness(mesh, physics, K_full, dirichlet, port_nodes,
                            label="stand")


def apply_hinge(pattern, node=None):
    """Constrain both displacement dofs of one inner-arc node.

    The returned pattern has a one-dimensional stiffness kernel: the
    linearized rotation about the hinge.  Defaults to the central node of the
    inner ring.
    """
    if pattern.dofs_per_node != 2:
        raise NotElastic("a hinge requires elasticity physics")
    inner = pattern.mesh.tagged("inner_arc")
    if node is None:
        node = int(inner[len(inner) // 2])
    if node not in set(map(int, inner)):
        raise NodeNotFound(f"node {node} is not on the inner arc")
    return pattern.with_extra_constraints([node],
                                          label=pattern.label + "+hinge")


def synthetic_schur_pattern(port_dims, rng, spectrum=(2e-2, 10.0), label="academic"):
    """Mesh-free pattern whose operator is a random SPD matrix.

    ``port_dims`` maps port tags to dof counts; the operator covers the
    concatenation of all ports (no interior).  The spectrum is log-uniform
    between the given bounds.
    """
    n = int(sum(port_dims.values()))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lo, hi = spectrum
    lam = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
    S = Q @ (lam[:, None] * Q.T)
    S = 0.5 * (S + S.T)
    return PatternStiffness.from_operator(S, port_dims, label=label)


@dataclass(frozen=True)
class LoadCase:
    """Per-occurrence generalized forces on the pattern free dofs (structure frame)."""
    forces: tuple
    seed: int | None = None

    def __getitem__(self, s):
        return self.forces[s]

    def __len__(self):
        return len(self.forces)


def random_load(model, seed):
    """Random non-periodic load: independent uniform [-1, 1] per free dof.

    Deterministic for a fixed seed (PCG64 stream).  Forces on constrained
    dofs never exist because load vectors live on free dofs only.
    """
    rng = np.random.default_rng(seed)
    forces = tuple(rng.uniform(-1.0, 1.0, size=model.patterns[occ.pattern].n_free)
                   for occ in model.occurrences)
    return LoadCase(forces=forces, seed=seed)
