"""Pattern/occurrence structure model and interface bookkeeping.

A structure is a set of occurrences (placed instances) of shared patterns,
connected pairwise through interfaces.  Interface unknowns live in one global
vector ordered by interface; the block view groups the same information as
per-occurrence columns of port-stacked traces so that every occurrence of a
pattern can be fed to one shared factorization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InterfaceMismatch, TopologyMismatch


@dataclass(frozen=True)
class Occurrence:
    """A placed instance of a pattern (rotation in radians, then translation)."""
    pattern: int
    angle: float = 0.0
    translation: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class Interface:
    """A matched pair of occurrence sides.

    The ``plus`` side carries the interface value with positive sign, the
    ``minus`` side with negative sign; ``orientation = -1`` swaps the roles.
    """
    occ_plus: int
    port_plus: str
    occ_minus: int
    port_minus: str
    orientation: int = 1

    def sides(self):
        s = float(self.orientation)
        return ((self.occ_plus, self.port_plus, s),
                (self.occ_minus, self.port_minus, -s))


@dataclass(frozen=True)
class Link:
    """One occurrence side: which port feeds which interface, with which sign."""
    port: str
    interface: int
    sign: float


@dataclass
class InterfaceBlock:
    """Interface data stored as per-occurrence columns of port-stacked traces.

    ``per_pattern[p]`` has one column per occurrence of pattern ``p`` (in
    global occurrence order) and one row block per declared port of the
    pattern.  Values are kept in the structure frame; transport to the
    pattern frame is a separate explicit step so that scatter/gather round
    trips are exact.
    """
    per_pattern: list = field(default_factory=list)


def rotate_pairs(values, angle, forward=True):
    """Rotate (x, y) component pairs of node-major rows by ``angle``.

    ``forward`` maps pattern-frame values to the structure frame.  Works on
    vectors or column blocks; every column is transformed independently by
    elementwise operations, so results do not depend on the block width.
    """
    c, s = np.cos(angle), np.sin(angle)
    x = values[0::2]
    y = values[1::2]
    out = np.empty_like(values)
    if forward:
        out[0::2] = c * x - s * y
        out[1::2] = s * x + c * y
    else:
        out[0::2] = c * x + s * y
        out[1::2] = -s * x + c * y
    return out


class StructureModel:
    """Occurrences of patterns plus their interface topology and scaling."""

    def __init__(self, patterns, occurrences, interfaces):
        self.patterns = list(patterns)
        self.occurrences = list(occurrences)
        self.interfaces = list(interfaces)
        self._group_cache = {}

        for occ in self.occurrences:
            if not 0 <= occ.pattern < len(self.patterns):
                raise TopologyMismatch(f"occurrence references pattern {occ.pattern}")

        # interface sizes and the global multiplier layout
        dims = []
        self.interface_dpn = []
        seen_sides = set()
        for idx, iface in enumerate(self.interfaces):
            side_dims = []
            dpns = []
            for occ_idx, port_tag, _ in iface.sides():
                if not 0 <= occ_idx < len(self.occurrences):
                    raise TopologyMismatch(f"interface {idx} references occurrence {occ_idx}")
                pat = self.patterns[self.occurrences[occ_idx].pattern]
                if port_tag not in pat.ports:
                    raise TopologyMismatch(
                        f"interface {idx}: pattern has no port {port_tag!r}")
                if (occ_idx, port_tag) in seen_sides:
                    raise TopologyMismatch(
                        f"side ({occ_idx}, {port_tag!r}) used by two interfaces")
                seen_sides.add((occ_idx, port_tag))
                side_dims.append(len(pat.ports[port_tag].dofs))
                dpns.append(pat.dofs_per_node)
            if side_dims[0] != side_dims[1]:
                raise InterfaceMismatch(
                    f"interface {idx} pairs sides of {side_dims[0]} and "
                    f"{side_dims[1]} dofs")
            if dpns[0] != dpns[1]:
                raise InterfaceMismatch(f"interface {idx} mixes dof layouts")
            dims.append(side_dims[0])
            self.interface_dpn.append(dpns[0])

        offsets = np.concatenate([[0], np.cumsum(dims)]).astype(np.intp)
        self.interface_slices = [slice(int(offsets[i]), int(offsets[i + 1]))
                                 for i in range(len(dims))]
        self.n_lambda = int(offsets[-1])

        # per-occurrence links, derived from the interface list
        self.links = [[] for _ in self.occurrences]
        for idx, iface in enumerate(self.interfaces):
            for occ_idx, port_tag, sign in iface.sides():
                self.links[occ_idx].append(Link(port_tag, idx, sign))

        # multiplicity scaling: every interface dof is shared by two sides
        mult = np.zeros(self.n_lambda)
        for idx in range(len(self.interfaces)):
            mult[self.interface_slices[idx]] += 2.0
        self.scaling_weights = 1.0 / mult if self.n_lambda else mult

        # occurrences of each pattern, in global occurrence order
        self.pattern_occurrences = [[] for _ in self.patterns]
        for s, occ in enumerate(self.occurrences):
            self.pattern_occurrences[occ.pattern].append(s)

        # port-stack row layout of the block format, one layout per pattern
        self.port_stack = []
        for pat in self.patterns:
            layout, start = {}, 0
            for tag, port in pat.ports.items():
                layout[tag] = slice(start, start + len(port.dofs))
                start += len(port.dofs)
            self.port_stack.append((layout, start))

    # -- block format ----------------------------------------------------------

    def scatter(self, v):
        """Spread an interface vector into per-occurrence signed columns.

        Values stay in the structure frame; the sign convention makes the two
        copies of each interface value opposite, matching the redundant
        two-sided storage of the block format.
        """
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n_lambda,):
            raise DimensionMismatch(
                f"expected interface vector of length {self.n_lambda}")
        blocks = []
        for p in range(len(self.patterns)):
            layout, rows = self.port_stack[p]
            W = np.zeros((rows, len(self.pattern_occurrences[p])))
            for col, s in enumerate(self.pattern_occurrences[p]):
                for link in self.links[s]:
                    W[layout[link.port], col] = link.sign * v[self.interface_slices[link.interface]]
            blocks.append(W)
        return InterfaceBlock(blocks)

    def gather(self, block, combine="average"):
        """Assemble per-occurrence columns back into an interface vector.

        ``sum`` adds the two signed sides of each interface (the assembly
        operator); ``average`` halves the sum, undoing the redundant storage
        so that ``gather(scatter(v)) == v`` exactly.
        """
        if combine not in ("average", "sum"):
            raise ValueError(f"unknown combine mode {combine!r}")
        if len(block.per_pattern) != len(self.patterns):
            raise DimensionMismatch("block does not match the model's patterns")
        v = np.zeros(self.n_lambda)
        for p in range(len(self.patterns)):
            layout, rows = self.port_stack[p]
            W = block.per_pattern[p]
            expected = (rows, len(self.pattern_occurrences[p]))
            if W.shape != expected:
                raise DimensionMismatch(
                    f"pattern {p} block has shape {W.shape}, expected {expected}")
            for col, s in enumerate(self.pattern_occurrences[p]):
                for link in self.links[s]:
                    v[self.interface_slices[link.interface]] += link.sign * W[layout[link.port], col]
        if combine == "average":
            v *= 0.5
        return v

    # -- frame transport ---------------------------------------------------------

    def to_pattern_frame(self, block):
        """Rotate a block's columns from the structure frame to pattern frames."""
        return self._transport(block, forward=False)

    def to_structure_frame(self, block):
        """Rotate a block's columns from pattern frames to the structure frame."""
        return self._transport(block, forward=True)

    def _transport(self, block, forward):
        blocks = []
        for p in range(len(self.patterns)):
            W = block.per_pattern[p].copy()
            if self.patterns[p].dofs_per_node == 2:
                for col, s in enumerate(self.pattern_occurrences[p]):
                    angle = self.occurrences[s].angle
                    if angle != 0.0:
                        W[:, col] = rotate_pairs(W[:, col], angle, forward=forward)
            blocks.append(W)
        return InterfaceBlock(blocks)

    # -- occurrence-level helpers ---------------------------------------------

    def pattern_of(self, s):
        return self.patterns[self.occurrences[s].pattern]

    def rotate_free(self, s, values, forward=True):
        """Rotate full free-dof data of occurrence ``s`` between frames."""
        pat = self.pattern_of(s)
        angle = self.occurrences[s].angle
        if pat.dofs_per_node != 2 or angle == 0.0:
            return values.copy()
        return rotate_pairs(values, angle, forward=forward)

    def occurrence_interface_dofs(self, s):
        """Global multiplier indices seen by occurrence ``s``, port-stacked."""
        out = []
        for link in self.links[s]:
            sl = self.interface_slices[link.interface]
            out.append(np.arange(sl.start, sl.stop, dtype=np.intp))
        return np.concatenate(out) if out else np.empty(0, dtype=np.intp)

    # -- operator groups ----------------------------------------------------------

    def operator_groups(self):
        """Occurrences grouped by (pattern, linked port set).

        Occurrences in one group share the same interior/boundary splitting,
        hence the same condensed interface operator; preconditioner solves
        batch within a group.
        """
        order = {}
        for s, occ in enumerate(self.occurrences):
            tags = tuple(tag for tag in self.patterns[occ.pattern].ports
                         if any(l.port == tag for l in self.links[s]))
            order.setdefault((occ.pattern, tags), []).append(s)
        groups = []
        for (p, tags), occs in order.items():
            groups.append(self._get_group(p, tags, occs))
        return groups

    def _get_group(self, p, tags, occs):
        key = (p, tags)
        if key not in self._group_cache:
            self._group_cache[key] = OperatorGroup(self, p, tags, occs)
        group = self._group_cache[key]
        group.occs = occs
        return group


class OperatorGroup:
    """Interior/boundary partition shared by occurrences with equal port sets."""

    def __init__(self, model, pattern_idx, tags, occs):
        self.pattern_idx = pattern_idx
        self.tags = tags
        self.occs = occs
        pat = model.patterns[pattern_idx]
        self.b_dofs = (np.concatenate([pat.ports[t].dofs for t in tags])
                       if tags else np.empty(0, dtype=np.intp))
        mask = np.ones(pat.n_free, dtype=bool)
        mask[self.b_dofs] = False
        self.i_dofs = np.nonzero(mask)[0]
        K = pat.K
        self.K_bb = K[np.ix_(self.b_dofs, self.b_dofs)]
        self.K_bi = K[np.ix_(self.b_dofs, self.i_dofs)]
        self._pattern = pat
        self._interior_factor = None

    @property
    def interior_factor(self):
        if self._interior_factor is None:
            if (len(self.i_dofs) == len(self._pattern.interior_dofs)
                    and np.array_equal(self.i_dofs, self._pattern.interior_dofs)):
                self._interior_factor = self._pattern.interior_factor
            else:
                from .linalg import factor_sym
                self._interior_factor = factor_sym(
                    self._pattern.K[np.ix_(self.i_dofs, self.i_dofs)])
        return self._interior_factor

    def condensed_apply(self, kind, x):
        """Apply the chosen interface-operator approximation to one column.

        ``dirichlet`` realizes the exact condensed operator
        ``K_bb x - K_bi Kii^{-1} K_ib x`` without forming it densely.
        """
        if kind == "identity":
            return x.copy()
        if kind == "superlumped":
            return np.diag(self.K_bb) * x
        if kind == "lumped":
            return self.K_bb @ x
        if kind == "dirichlet":
            y = self.K_bb @ x
            if len(self.i_dofs):
                y -= self.K_bi @ self.interior_factor.pseudo_solve(self.K_bi.T @ x)
            return y
        raise ValueError(f"unknown preconditioner kind {kind!r}")
