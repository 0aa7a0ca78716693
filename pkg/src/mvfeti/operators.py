"""Interface-level operators assembled from pattern-scale solves.

All multi-column applications run their per-column numerics through the same
code path as single-vector applications; batching changes how solves are
grouped and counted, never the floating-point results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MixedPatterns
from .model import rotate_pairs

PRECONDITIONER_KINDS = ("dirichlet", "lumped", "superlumped", "identity")


@dataclass
class SolveCounter:
    """Counts batched applications of the pattern stiffness pseudo-inverses."""
    neumann_batches: int = 0


def _as_block(B):
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        return B[:, None], True
    return B, False


def _occurrence_trace_columns(model, s, B):
    """Signed, port-stacked, pattern-frame trace columns seen by occurrence ``s``."""
    pat = model.pattern_of(s)
    angle = model.occurrences[s].angle
    cols = np.zeros((pat.n_free, B.shape[1]))
    for link in model.links[s]:
        port = pat.ports[link.port]
        vals = link.sign * B[model.interface_slices[link.interface], :]
        if pat.dofs_per_node == 2 and angle != 0.0:
            vals = rotate_pairs(vals, angle, forward=False)
        cols[port.dofs, :] = vals
    return cols


def _accumulate_traces(model, s, sol_cols, out):
    """Add occurrence ``s``'s signed structure-frame traces into ``out``."""
    pat = model.pattern_of(s)
    angle = model.occurrences[s].angle
    for link in model.links[s]:
        port = pat.ports[link.port]
        vals = sol_cols[port.dofs, :]
        if pat.dofs_per_node == 2 and angle != 0.0:
            vals = rotate_pairs(vals, angle, forward=True)
        out[model.interface_slices[link.interface], :] += link.sign * vals


def apply_dual_operator(model, B, counter=None, batched=True):
    """Interface flexibility applied to interface columns.

    Scatters to signed pattern-frame traces, runs one multi-RHS Neumann solve
    per pattern (or one per occurrence when ``batched`` is off), and gathers
    the signed response traces.  Contributions are summed in a fixed
    (pattern, occurrence) order, so both paths give bit-identical results.
    """
    B, was_vec = _as_block(B)
    k = B.shape[1]
    out = np.zeros_like(B)
    for p in range(len(model.patterns)):
        occs = model.pattern_occurrences[p]
        if not occs:
            continue
        pat = model.patterns[p]
        if batched:
            rhs = np.zeros((pat.n_free, len(occs) * k))
            for li, s in enumerate(occs):
                rhs[:, li * k:(li + 1) * k] = _occurrence_trace_columns(model, s, B)
            sol = pat.stiffness_factor.pseudo_solve_block(rhs)
            if counter is not None:
                counter.neumann_batches += 1
            for li, s in enumerate(occs):
                _accumulate_traces(model, s, sol[:, li * k:(li + 1) * k], out)
        else:
            for s in occs:
                rhs = _occurrence_trace_columns(model, s, B)
                sol = pat.stiffness_factor.pseudo_solve_block(rhs)
                if counter is not None:
                    counter.neumann_batches += 1
                _accumulate_traces(model, s, sol, out)
    return out[:, 0] if was_vec else out


def apply_preconditioner(model, kind, B):
    """Scaled assembly of condensed interface operators.

    Realizes the weighted sum over occurrences of the chosen local operator
    (exact condensed operator, its boundary block, that block's diagonal, or
    the identity), applied between the multiplicity scalings.
    """
    if kind not in PRECONDITIONER_KINDS:
        raise ValueError(f"unknown preconditioner kind {kind!r}")
    B, was_vec = _as_block(B)
    w = model.scaling_weights[:, None] * B
    out = np.zeros_like(B)
    for group in model.operator_groups():
        pat = model.patterns[group.pattern_idx]
        rows = {}
        start = 0
        for tag in group.tags:
            rows[tag] = slice(start, start + len(pat.ports[tag].dofs))
            start += len(pat.ports[tag].dofs)
        for s in group.occs:
            angle = model.occurrences[s].angle
            x = np.zeros((start, w.shape[1]))
            for link in model.links[s]:
                vals = link.sign * w[model.interface_slices[link.interface], :]
                if pat.dofs_per_node == 2 and angle != 0.0:
                    vals = rotate_pairs(vals, angle, forward=False)
                x[rows[link.port], :] = vals
            y = np.empty_like(x)
            for c in range(x.shape[1]):
                y[:, c] = group.condensed_apply(kind, x[:, c])
            for link in model.links[s]:
                vals = y[rows[link.port], :]
                if pat.dofs_per_node == 2 and angle != 0.0:
                    vals = rotate_pairs(vals, angle, forward=True)
                out[model.interface_slices[link.interface], :] += link.sign * vals
    out *= model.scaling_weights[:, None]
    return out[:, 0] if was_vec else out


def natural_rhs(model, loads, counter=None, batched=True):
    """Condensed interface right-hand side of the dual problem.

    One multi-RHS Neumann solve per pattern turns the per-occurrence loads
    into boundary response traces, assembled with signs.
    """
    d = np.zeros((model.n_lambda, 1))
    for p in range(len(model.patterns)):
        occs = model.pattern_occurrences[p]
        if not occs:
            continue
        pat = model.patterns[p]
        if batched:
            rhs = np.empty((pat.n_free, len(occs)))
            for li, s in enumerate(occs):
                rhs[:, li] = model.rotate_free(s, loads[s], forward=False)
            sol = pat.stiffness_factor.pseudo_solve_block(rhs)
            if counter is not None:
                counter.neumann_batches += 1
            for li, s in enumerate(occs):
                _accumulate_traces(model, s, sol[:, li:li + 1], d)
        else:
            for s in occs:
                rhs = model.rotate_free(s, loads[s], forward=False)[:, None]
                sol = pat.stiffness_factor.pseudo_solve_block(rhs)
                if counter is not None:
                    counter.neumann_batches += 1
                _accumulate_traces(model, s, sol, d)
    return d[:, 0]


def kernel_trace_matrix(model):
    """Signed interface traces of every floating occurrence's kernel modes.

    Returns ``(G, slices)`` where ``slices[i] = (occurrence, column slice)``;
    columns are grouped by occurrence.  G is empty without floating
    occurrences.
    """
    widths = []
    slices = []
    total = 0
    for s, occ in enumerate(model.occurrences):
        kd = model.patterns[occ.pattern].kernel_dim
        if kd:
            slices.append((s, slice(total, total + kd)))
            widths.append(kd)
            total += kd
    G = np.zeros((model.n_lambda, total))
    for s, cols in slices:
        pat = model.pattern_of(s)
        angle = model.occurrences[s].angle
        R = pat.stiffness_factor.kernel
        for link in model.links[s]:
            port = pat.ports[link.port]
            vals = R[port.dofs, :]
            if pat.dofs_per_node == 2 and angle != 0.0:
                vals = rotate_pairs(vals, angle, forward=True)
            G[model.interface_slices[link.interface], cols] += link.sign * vals
    return G, slices


def kernel_work(model, loads):
    """Work of the per-occurrence loads on the kernel modes (matches the
    column grouping of ``kernel_trace_matrix``)."""
    parts = []
    for s, occ in enumerate(model.occurrences):
        pat = model.patterns[occ.pattern]
        if pat.kernel_dim:
            f_pat = model.rotate_free(s, loads[s], forward=False)
            parts.append(pat.stiffness_factor.kernel.T @ f_pat)
    return np.concatenate(parts) if parts else np.empty(0)


def kernel_traces(model, loads):
    """Constraint matrix and right-hand side of the self-equilibrium condition."""
    G, _ = kernel_trace_matrix(model)
    return G, kernel_work(model, loads)


def build_g_block(model):
    """Pattern-frame kernel-trace block of the single floating pattern.

    Column groups: the kernel traced on the whole interface, then on each
    port alone.  Raises ``MixedPatterns`` when floating occurrences span
    several patterns; returns an empty block when nothing floats.
    """
    floating = sorted({model.occurrences[s].pattern
                       for s in range(len(model.occurrences))
                       if model.pattern_of(s).kernel_dim})
    if not floating:
        return np.empty((0, 0))
    if len(floating) > 1:
        raise MixedPatterns("floating occurrences span several patterns")
    pat = model.patterns[floating[0]]
    layout, rows = model.port_stack[floating[0]]
    R = pat.stiffness_factor.kernel
    kd = R.shape[1]
    ports = list(pat.ports.values())
    block = np.zeros((rows, kd * (1 + len(ports))))
    for i, port in enumerate(ports):
        block[layout[port.tag], :kd] = R[port.dofs, :]
        block[layout[port.tag], (1 + i) * kd:(2 + i) * kd] = R[port.dofs, :]
    return block


def coarse_gram_from_pattern(model, kind, G, slices):
    """Coarse operator assembled from pattern-scale condensed products.

    Every occurrence contributes the condensed-operator response to its
    pattern-frame, scaled view of the kernel traces; the model-size operator
    is never applied.  Valid whenever a single pattern carries all kernels
    (``MixedPatterns`` otherwise); must equal ``G.T @ M~ @ G``.
    """
    floating = sorted({model.occurrences[s].pattern for s, _ in slices})
    if len(floating) > 1:
        raise MixedPatterns("floating occurrences span several patterns")
    total = G.shape[1]
    gram = np.zeros((total, total))
    for group in model.operator_groups():
        pat = model.patterns[group.pattern_idx]
        rows = {}
        start = 0
        for tag in group.tags:
            rows[tag] = slice(start, start + len(pat.ports[tag].dofs))
            start += len(pat.ports[tag].dofs)
        for s in group.occs:
            angle = model.occurrences[s].angle
            X = np.zeros((start, total))
            for link in model.links[s]:
                sl = model.interface_slices[link.interface]
                vals = link.sign * (model.scaling_weights[sl, None] * G[sl, :])
                if pat.dofs_per_node == 2 and angle != 0.0:
                    vals = rotate_pairs(vals, angle, forward=False)
                X[rows[link.port], :] = vals
            Y = np.empty_like(X)
            for c in range(total):
                Y[:, c] = group.condensed_apply(kind, X[:, c])
            gram += X.T @ Y
    return gram


def dense_dual_operator(model, counter=None):
    """Dense interface flexibility, built column by column (test helper)."""
    return apply_dual_operator(model, np.eye(model.n_lambda), counter)


def interface_jump(model, displacements):
    """Signed sum of interface traces: the discontinuity driven to zero."""
    jump = np.zeros(model.n_lambda)
    for s in range(len(model.occurrences)):
        pat = model.pattern_of(s)
        u = displacements[s]
        for link in model.links[s]:
            port = pat.ports[link.port]
            jump[model.interface_slices[link.interface]] += link.sign * u[port.dofs]
    return jump
