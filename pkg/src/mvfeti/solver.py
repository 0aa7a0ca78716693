"""Iterative engines for the dual interface problem.

Three variants share one iteration skeleton: the classical preconditioned
conjugate gradient, the same iteration with per-pattern batched local solves
(identical history, cheaper accounting), and the multivector version that
widens every preconditioned residual into a block of permuted search
directions, normalized so the direction Gram matrix is the identity.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BreakdownZeroDenominator,
    MaxIterationsExceeded,
    MixedPatterns,
    SingularCoarseGram,
    TotalRankCollapse,
)
from .linalg import factor_sym, inv_sqrt_sym
from .model import rotate_pairs
from .multivector import expand, identity_map
from .operators import (
    SolveCounter,
    apply_dual_operator,
    apply_preconditioner,
    coarse_gram_from_pattern,
    kernel_trace_matrix,
    kernel_work,
    natural_rhs,
)

DEFAULT_TOL = 1e-8
DEFAULT_RANK_TOL = 1e-8
DEFAULT_MAX_ITER = 500


class CoarseProblem:
    """Self-equilibrium constraint of floating occurrences.

    Holds the kernel-trace matrix, its preconditioned image and the
    factorized Gram; provides the projector pair keeping every iterate on the
    constraint manifold, plus the admissible initial multiplier.
    """

    def __init__(self, model, kind="identity"):
        self.model = model
        self.kind = kind
        G, slices = kernel_trace_matrix(model)
        self.kernel_traces = G
        self.mode_slices = slices
        if G.shape[1]:
            self.preconditioned_traces = apply_preconditioner(model, kind, G)
            try:
                gram = coarse_gram_from_pattern(model, kind, G, slices)
            except MixedPatterns:
                gram = G.T @ self.preconditioned_traces
            self.gram = gram
            fact = factor_sym(gram)
            if fact.kernel_dim:
                raise SingularCoarseGram(
                    "coarse Gram is rank deficient: redundant kernel modes")
            self._gram_factor = fact
        else:
            self.preconditioned_traces = np.empty((model.n_lambda, 0))
            self.gram = np.empty((0, 0))
            self._gram_factor = None

    @property
    def has_modes(self):
        return self.kernel_traces.shape[1] > 0

    def _gram_solve(self, x):
        if x.ndim == 1:
            return self._gram_factor.pseudo_solve(x)
        return self._gram_factor.pseudo_solve_block(x)

    def project(self, x):
        """Range-side projector applied to directions."""
        if not self.has_modes:
            return x.copy()
        return x - self.preconditioned_traces @ self._gram_solve(self.kernel_traces.T @ x)

    def project_t(self, x):
        """Transposed projector applied to residuals."""
        if not self.has_modes:
            return x.copy()
        return x - self.kernel_traces @ self._gram_solve(self.preconditioned_traces.T @ x)

    def initial_multipliers(self, work):
        """Admissible start satisfying the constraint (free part zero)."""
        if not self.has_modes:
            return np.zeros(self.model.n_lambda)
        return self.preconditioned_traces @ self._gram_solve(work)

    def rigid_amplitudes(self, unprojected_residual):
        """Kernel amplitudes closing the interface jump at convergence."""
        if not self.has_modes:
            return np.empty(0)
        return -self._gram_solve(
            self.preconditioned_traces.T @ unprojected_residual)

    def constraint_residual(self, lam, work):
        if not self.has_modes:
            return 0.0
        return float(np.abs(self.kernel_traces.T @ lam - work).max())


def build_coarse(model, precond_kind="identity"):
    """Factorized coarse problem for the chosen preconditioner kind."""
    return CoarseProblem(model, precond_kind)


@dataclass
class ConvergenceRecord:
    """Per-iteration history of a solve; row 0 describes the initial state."""
    method: str
    residual_norms: list = field(default_factory=list)
    active_directions: list = field(default_factory=list)
    cum_batches: list = field(default_factory=list)
    wall_ms: list = field(default_factory=list)
    dropped_directions: list = field(default_factory=list)
    coarse_residuals: list = field(default_factory=list)
    normalization_errors: list = field(default_factory=list)
    direction_history: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.residual_norms) - 1

    def rows(self):
        for j in range(len(self.residual_norms)):
            yield (j, self.residual_norms[j], self.active_directions[j],
                   self.cum_batches[j], self.wall_ms[j])


@dataclass
class SolveResult:
    multipliers: np.ndarray
    displacements: list
    rigid_amplitudes: np.ndarray
    record: ConvergenceRecord
    coarse: CoarseProblem


def recover_solution(model, loads, lam, coarse, rhs=None, counter=None,
                     batched=True):
    """Per-occurrence solution fields for a converged multiplier.

    Each occurrence solves its Neumann problem under load minus interface
    reactions; floating occurrences add the kernel amplitudes chosen by the
    coarse problem to close the interface jump.
    """
    if rhs is None:
        rhs = natural_rhs(model, loads, counter, batched)
    if coarse.has_modes:
        unprojected = rhs - apply_dual_operator(model, lam, counter, batched)
        alpha = coarse.rigid_amplitudes(unprojected)
    else:
        alpha = np.empty(0)

    displacements = [None] * len(model.occurrences)
    amplitude_of = dict(coarse.mode_slices)
    for p in range(len(model.patterns)):
        occs = model.pattern_occurrences[p]
        if not occs:
            continue
        pat = model.patterns[p]
        rhs_cols = np.empty((pat.n_free, len(occs)))
        for li, s in enumerate(occs):
            f_pat = model.rotate_free(s, loads[s], forward=False)
            for link in model.links[s]:
                port = pat.ports[link.port]
                vals = link.sign * lam[model.interface_slices[link.interface]]
                if pat.dofs_per_node == 2 and model.occurrences[s].angle != 0.0:
                    vals = rotate_pairs(vals, model.occurrences[s].angle,
                                        forward=False)
                f_pat[port.dofs] -= vals
            rhs_cols[:, li] = f_pat
        sol = pat.stiffness_factor.pseudo_solve_block(rhs_cols)
        if counter is not None:
            counter.neumann_batches += 1
        for li, s in enumerate(occs):
            u_pat = sol[:, li]
            if s in amplitude_of:
                u_pat = u_pat + pat.stiffness_factor.kernel @ alpha[amplitude_of[s]]
            displacements[s] = model.rotate_free(s, u_pat, forward=True)
    return displacements, alpha


def _start_record(method, coarse, work, lam, res0, counter, t0):
    rec = ConvergenceRecord(method=method)
    rec.residual_norms.append(res0)
    rec.active_directions.append(0)
    rec.cum_batches.append(counter.neumann_batches)
    rec.wall_ms.append(1e3 * (time.perf_counter() - t0))
    rec.dropped_directions.append(0)
    rec.normalization_errors.append(0.0)
    rec.coarse_residuals.append(coarse.constraint_residual(lam, work))
    return rec


def _setup(model, loads, precond_kind, coarse_kind, counter, batched):
    coarse = build_coarse(model, coarse_kind)
    work = kernel_work(model, loads)
    rhs = natural_rhs(model, loads, counter, batched)
    lam = coarse.initial_multipliers(work)
    if coarse.has_modes:
        r = coarse.project_t(rhs - apply_dual_operator(model, lam, counter, batched))
    else:
        r = rhs.copy()
    return coarse, work, rhs, lam, r


def _finish(model, loads, lam, coarse, rhs, counter, batched, rec):
    displacements, alpha = recover_solution(model, loads, lam, coarse, rhs,
                                            counter, batched)
    return SolveResult(lam, displacements, alpha, rec, coarse)


def _classical_engine(model, loads, method, batched, precond_kind, tol,
                      max_iter, reorthogonalize, coarse_kind):
    t0 = time.perf_counter()
    counter = SolveCounter()
    coarse, work, rhs, lam, r = _setup(model, loads, precond_kind, coarse_kind,
                                       counter, batched)
    res0 = float(np.linalg.norm(r))
    rec = _start_record(method, coarse, work, lam, res0, counter, t0)

    w = coarse.project(apply_preconditioner(model, precond_kind, r))
    history = rec.direction_history
    while rec.residual_norms[-1] > tol * res0 and res0 > 0.0:
        if rec.iterations >= max_iter:
            rec.converged = False
            result = _finish(model, loads, lam, coarse, rhs, counter, batched, rec)
            raise MaxIterationsExceeded(
                f"{method}: no convergence within {max_iter} iterations",
                result=result)
        p = coarse.project_t(apply_dual_operator(model, w, counter, batched))
        wtp = float(w @ p)
        if wtp <= 1e-14 * float(np.linalg.norm(w) * np.linalg.norm(p)):
            raise BreakdownZeroDenominator(
                f"{method}: direction energy {wtp:.3e} is not positive")
        alpha = float(w @ r) / wtp
        lam = lam + alpha * w
        r = r - alpha * p
        history.append((w, p, wtp))

        rec.residual_norms.append(float(np.linalg.norm(r)))
        rec.active_directions.append(1)
        rec.cum_batches.append(counter.neumann_batches)
        rec.wall_ms.append(1e3 * (time.perf_counter() - t0))
        rec.dropped_directions.append(0)
        rec.normalization_errors.append(0.0)
        rec.coarse_residuals.append(coarse.constraint_residual(lam, work))

        z = coarse.project(apply_preconditioner(model, precond_kind, r))
        if reorthogonalize:
            w = z.copy()
            for wk, pk, wtpk in history:
                w -= (float(pk @ z) / wtpk) * wk
        else:
            beta = -float(p @ z) / wtp
            w = z + beta * w
    rec.converged = True
    return _finish(model, loads, lam, coarse, rhs, counter, batched, rec)


def solve_classical(model, loads, precond_kind="dirichlet", tol=DEFAULT_TOL,
                    max_iter=DEFAULT_MAX_ITER, reorthogonalize=False,
                    coarse_kind="identity"):
    """Classical FETI conjugate gradient; one local solve per occurrence."""
    return _classical_engine(model, loads, "classical", False, precond_kind,
                             tol, max_iter, reorthogonalize, coarse_kind)


def solve_classical_mrhs(model, loads, precond_kind="dirichlet",
                         tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                         reorthogonalize=False, coarse_kind="identity"):
    """Classical iteration with local solves batched per pattern.

    Same iterates as ``solve_classical`` bit for bit; only the local-solve
    grouping (and hence the batch accounting) changes.
    """
    return _classical_engine(model, loads, "mrhs", True, precond_kind, tol,
                             max_iter, reorthogonalize, coarse_kind)


def _probe_commutation(model, mv_map, precond_kind, coarse, counter,
                       rtol=1e-8, n_probes=2):
    """Do all recipes commute with the operator, preconditioner and projector?

    Decides whether the cheaper single-vector orthogonalization-then-expand
    path is admissible (truly periodic structures).
    """
    if mv_map.width == 1:
        return True
    rng = np.random.default_rng(0x5EED)
    for _ in range(n_probes):
        v = rng.standard_normal(model.n_lambda)
        X = expand(model, mv_map, v)
        FX = apply_dual_operator(model, X, counter)
        ref = expand(model, mv_map, FX[:, 0])
        if np.linalg.norm(FX - ref) > rtol * max(np.linalg.norm(FX), 1e-30):
            return False
        MX = apply_preconditioner(model, precond_kind, X)
        ref = expand(model, mv_map, MX[:, 0])
        if np.linalg.norm(MX - ref) > rtol * max(np.linalg.norm(MX), 1e-30):
            return False
        if coarse.has_modes:
            QX = coarse.project(X)
            ref = expand(model, mv_map, QX[:, 0])
            if np.linalg.norm(QX - ref) > rtol * max(np.linalg.norm(QX), 1e-30):
                return False
    return True


def solve_multivector(model, loads, mv_map=None, precond_kind="dirichlet",
                      tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                      rank_tol=DEFAULT_RANK_TOL, reorthogonalize=True,
                      coarse_kind="identity"):
    """Block FETI iteration on permutation-expanded search directions.

    Every iteration expands one preconditioned residual into a block,
    normalizes it so the direction Gram is the identity (filtering redundant
    columns at ``rank_tol``), and minimizes over all block directions at
    once.  On truly periodic structures the next residual is orthogonalized
    as a single vector before expansion; otherwise the whole expanded block
    is orthogonalized against the stored history.
    """
    t0 = time.perf_counter()
    counter = SolveCounter()
    if mv_map is None:
        mv_map = identity_map(model)
    coarse, work, rhs, lam, r = _setup(model, loads, precond_kind, coarse_kind,
                                       counter, True)
    res0 = float(np.linalg.norm(r))
    single_orth = _probe_commutation(model, mv_map, precond_kind, coarse,
                                     counter)
    rec = _start_record("multivector", coarse, work, lam, res0, counter, t0)
    blocks = rec.direction_history
    z = coarse.project(apply_preconditioner(model, precond_kind, r))
    while rec.residual_norms[-1] > tol * res0 and res0 > 0.0:
        if rec.iterations >= max_iter:
            rec.converged = False
            result = _finish(model, loads, lam, coarse, rhs, counter, True, rec)
            raise MaxIterationsExceeded(
                f"multivector: no convergence within {max_iter} iterations",
                result=result)
        Z = expand(model, mv_map, z)
        if not single_orth:
            # non-commuting recipes can leave the constraint manifold and
            # the stored conjugacy; re-project and re-orthogonalize the block
            if coarse.has_modes:
                Z = coarse.project(Z)
            against = blocks if reorthogonalize else blocks[-1:]
            for Wk, Pk in against:
                Z = Z - Wk @ (Pk.T @ Z)
        P = coarse.project_t(apply_dual_operator(model, Z, counter))
        eta = P.T @ Z
        eta = 0.5 * (eta + eta.T)
        N, rank = inv_sqrt_sym(eta, rank_tol)
        if rank == 0:
            rec.converged = False
            raise TotalRankCollapse(
                "every expanded direction was filtered out before convergence")
        W = Z @ N
        P = P @ N
        blocks.append((W, P))

        coeff = W.T @ r
        lam = lam + W @ coeff
        r = r - P @ coeff

        rec.residual_norms.append(float(np.linalg.norm(r)))
        rec.active_directions.append(int(rank))
        rec.cum_batches.append(counter.neumann_batches)
        rec.wall_ms.append(1e3 * (time.perf_counter() - t0))
        rec.dropped_directions.append(mv_map.width - int(rank))
        rec.normalization_errors.append(
            float(np.abs(P.T @ W - np.eye(rank)).max()))
        rec.coarse_residuals.append(coarse.constraint_residual(lam, work))

        z = coarse.project(apply_preconditioner(model, precond_kind, r))
        if single_orth:
            against = blocks if reorthogonalize else blocks[-1:]
            for Wk, Pk in against:
                z = z - Wk @ (Pk.T @ z)
    rec.converged = True
    return _finish(model, loads, lam, coarse, rhs, counter, True, rec)
