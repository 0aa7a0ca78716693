"""Shared fixtures and independent dense reference implementations.

The reference operators below are deliberately naive: dense occurrence-by-
occurrence assembly with numpy pseudo-inverses and solves, no pattern
batching, no shared factorizations.  They are the oracles the production
paths are checked against.
"""

import numpy as np
import pytest

from mvfeti.benchmarks import elastic_donut, thermal_donut
from mvfeti.model import rotate_pairs


def occurrence_force_map(model, s):
    """Dense map from an interface vector to occurrence ``s``'s generalized
    forces in the pattern frame (selection, sign, frame transport)."""
    pat = model.pattern_of(s)
    angle = model.occurrences[s].angle
    A = np.zeros((pat.n_free, model.n_lambda))
    for link in model.links[s]:
        port = pat.ports[link.port]
        sl = model.interface_slices[link.interface]
        block = link.sign * np.eye(sl.stop - sl.start)
        if pat.dofs_per_node == 2 and angle != 0.0:
            block = rotate_pairs(block, angle, forward=False)
        A[port.dofs, sl] = block
    return A


def dense_dual_reference(model):
    """Sum of occurrence flexibilities with numpy pseudo-inverses."""
    F = np.zeros((model.n_lambda, model.n_lambda))
    for s in range(len(model.occurrences)):
        pat = model.pattern_of(s)
        A = occurrence_force_map(model, s)
        F += A.T @ np.linalg.pinv(pat.K, rcond=1e-12) @ A
    return F


def dense_schur(K, b_dofs, i_dofs):
    Kbb = K[np.ix_(b_dofs, b_dofs)]
    if len(i_dofs) == 0:
        return Kbb.copy()
    Kbi = K[np.ix_(b_dofs, i_dofs)]
    Kii = K[np.ix_(i_dofs, i_dofs)]
    return Kbb - Kbi @ np.linalg.solve(Kii, Kbi.T)


def dense_preconditioner_reference(model, kind):
    """Scaled assembly of dense local operators, occurrence by occurrence."""
    D = np.diag(model.scaling_weights)
    M = np.zeros((model.n_lambda, model.n_lambda))
    for group in model.operator_groups():
        pat = model.patterns[group.pattern_idx]
        if kind == "dirichlet":
            S = dense_schur(pat.K, group.b_dofs, group.i_dofs)
        elif kind == "lumped":
            S = group.K_bb
        elif kind == "superlumped":
            S = np.diag(np.diag(group.K_bb))
        else:
            S = np.eye(len(group.b_dofs))
        for s in group.occs:
            A = occurrence_force_map(model, s)[group.b_dofs, :]
            M += D @ A.T @ S @ A @ D
    return M


def dense_rhs_reference(model, loads):
    d = np.zeros(model.n_lambda)
    for s in range(len(model.occurrences)):
        pat = model.pattern_of(s)
        A = occurrence_force_map(model, s)
        f_pat = model.rotate_free(s, loads[s], forward=False)
        d += A.T @ (np.linalg.pinv(pat.K, rcond=1e-12) @ f_pat)
    return d


@pytest.fixture(scope="session")
def small_thermal_ring():
    """3-sector thermal donut, a few dofs per interface."""
    model, mv_map = thermal_donut(3, radial_divs=4, angular_divs=3)
    return model, mv_map


@pytest.fixture(scope="session")
def small_thermal_ring5():
    model, mv_map = thermal_donut(5, radial_divs=5, angular_divs=4)
    return model, mv_map


@pytest.fixture(scope="session")
def small_elastic_ring():
    model, mv_map = elastic_donut(3, radial_divs=4, angular_divs=4)
    return model, mv_map


@pytest.fixture(scope="session")
def small_hinged_ring():
    model, mv_map = elastic_donut(3, hinged=True, radial_divs=4, angular_divs=4)
    return model, mv_map
