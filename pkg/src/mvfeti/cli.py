"""Command-line front end: configure, run, verify and report experiments.

Configuration is one TOML file, overridable from the command line::

    solve --config donut.toml --method classical,multivector --tol 1e-8

Exit codes: 0 converged and oracle passed, 1 configuration error,
2 non-convergence, 3 oracle failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:                         # Python 3.10
    import tomli as tomllib

from . import benchmarks
from .errors import ConfigError, MaxIterationsExceeded, MvFetiError
from .meshing import dump_mesh
from .operators import interface_jump
from .oracle import direct_solve, relative_error
from .problems import PlaneStrain, Thermal, random_load
from .solver import solve_classical, solve_classical_mrhs, solve_multivector

PROBLEM_KINDS = ("thermal_donut", "elastic_donut", "donut_one_stand",
                 "donut_two_stands", "hinged_elastic_donut", "synthetic_spd")
METHODS = ("classical", "mrhs", "multivector")
ORACLE_RTOL = 1e-6
CSV_HEADER = "iter,residual_norm,active_directions,cum_local_solve_batches,wall_ms"


@dataclass
class ExperimentConfig:
    problem: str
    n_repetitions: int
    seed: int = 0
    geometry: dict = field(default_factory=dict)
    physics: dict = field(default_factory=dict)
    synthetic: dict = field(default_factory=dict)
    methods: tuple = METHODS
    preconditioner: str = "dirichlet"
    coarse_preconditioner: str = "identity"
    tol: float = 1e-8
    max_iter: int = 500
    rank_tol: float = 1e-8
    out_dir: str = "out"
    dump_meshes: bool = False

    def validate(self):
        if self.problem not in PROBLEM_KINDS:
            raise ConfigError(f"problem.kind: unknown problem {self.problem!r}")
        if self.problem != "synthetic_spd" and self.n_repetitions < 3:
            raise ConfigError(
                f"problem.n_repetitions: donut problems need at least 3 "
                f"repetitions, got {self.n_repetitions}")
        if self.problem == "synthetic_spd" and self.n_repetitions < 2:
            raise ConfigError("problem.n_repetitions: need at least 2")
        for name in ("tol", "rank_tol"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"solver.{name}: must be positive")
        if self.max_iter < 1:
            raise ConfigError("solver.max_iter: must be at least 1")
        if self.preconditioner not in ("dirichlet", "lumped", "superlumped",
                                       "identity"):
            raise ConfigError(
                f"solver.preconditioner: unknown kind {self.preconditioner!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"solver.methods: unknown method {m!r}")
        return self


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: invalid TOML: {exc}") from exc
    problem = raw.get("problem", {})
    solver = raw.get("solver", {})
    output = raw.get("output", {})
    if "kind" not in problem:
        raise ConfigError("problem.kind: missing")
    if "n_repetitions" not in problem:
        raise ConfigError("problem.n_repetitions: missing")
    cfg = ExperimentConfig(
        problem=problem["kind"],
        n_repetitions=int(problem["n_repetitions"]),
        seed=int(problem.get("seed", 0)),
        geometry=dict(raw.get("geometry", {})),
        physics=dict(raw.get("physics", {})),
        synthetic=dict(raw.get("synthetic", {})),
        methods=tuple(solver.get("methods", list(METHODS))),
        preconditioner=solver.get("preconditioner", "dirichlet"),
        coarse_preconditioner=solver.get("coarse_preconditioner", "identity"),
        tol=float(solver.get("tol", 1e-8)),
        max_iter=int(solver.get("max_iter", 500)),
        rank_tol=float(solver.get("rank_tol", 1e-8)),
        out_dir=output.get("dir", "out"),
        dump_meshes=bool(output.get("dump_mesh", False)),
    )
    return cfg.validate()


def build_problem(cfg):
    """Instantiate the configured structure and its multivector recipes."""
    geo = cfg.geometry
    n = cfg.n_repetitions
    if cfg.problem == "thermal_donut":
        return benchmarks.thermal_donut(
            n, r_inner=geo.get("r_inner"), r_outer=geo.get("r_outer"),
            radial_divs=geo.get("radial_divs"),
            angular_divs=geo.get("angular_divs"))
    if cfg.problem in ("elastic_donut", "hinged_elastic_donut"):
        return benchmarks.elastic_donut(
            n, hinged=cfg.problem == "hinged_elastic_donut",
            young=cfg.physics.get("young", 1.0),
            poisson=cfg.physics.get("poisson", 0.3),
            r_inner=geo.get("r_inner"), r_outer=geo.get("r_outer"),
            radial_divs=geo.get("radial_divs"),
            angular_divs=geo.get("angular_divs"))
    if cfg.problem in ("donut_one_stand", "donut_two_stands"):
        if cfg.physics.get("young") is not None:
            physics = PlaneStrain(cfg.physics.get("young", 1.0),
                                  cfg.physics.get("poisson", 0.3))
        else:
            physics = Thermal()
        return benchmarks.donut_with_stands(
            n, n_stands=1 if cfg.problem == "donut_one_stand" else 2,
            physics=physics,
            r_inner=geo.get("r_inner"), r_outer=geo.get("r_outer"),
            radial_divs=geo.get("radial_divs"),
            angular_divs=geo.get("angular_divs"),
            stand_divs=geo.get("stand_divs", 4))
    if cfg.problem == "synthetic_spd":
        syn = cfg.synthetic
        return benchmarks.synthetic_ring(
            n, interface_dim=syn.get("interface_dim", 20),
            topology=syn.get("topology", "periodic"), seed=cfg.seed,
            spectrum=tuple(syn.get("spectrum", benchmarks.SYNTHETIC_SPECTRUM)),
            stand_stiffness=syn.get("stand_stiffness",
                                    benchmarks.SYNTHETIC_STAND_STIFFNESS))
    raise ConfigError(f"problem.kind: unknown problem {cfg.problem!r}")


def _run_method(method, model, loads, mv_map, cfg):
    kwargs = dict(precond_kind=cfg.preconditioner, tol=cfg.tol,
                  max_iter=cfg.max_iter, coarse_kind=cfg.coarse_preconditioner)
    if method == "classical":
        return solve_classical(model, loads, **kwargs)
    if method == "mrhs":
        return solve_classical_mrhs(model, loads, **kwargs)
    return solve_multivector(model, loads, mv_map, rank_tol=cfg.rank_tol,
                             **kwargs)


def write_csv(path, record):
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for j, res, ndir, batches, wall in record.rows():
            fh.write(f"{j},{res!r},{ndir},{batches},{wall:.3f}\n")


def run_experiment(cfg, verbose=True):
    """Run the configured methods, verify them against the direct solve.

    Returns the process exit status; convergence CSVs and a summary table are
    written to the output directory.
    """
    say = print if verbose else (lambda *a, **k: None)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model, mv_map = build_problem(cfg)
    loads = random_load(model, cfg.seed)
    if cfg.dump_meshes:
        for i, pat in enumerate(model.patterns):
            if pat.mesh is not None:
                dump_mesh(pat.mesh, out_dir / f"pattern_{i}.txt")

    u_ref = direct_solve(model, loads)
    ref_norm = np.linalg.norm(np.concatenate(u_ref))

    results = {}
    status = 0
    for method in cfg.methods:
        t0 = time.perf_counter()
        try:
            res = _run_method(method, model, loads, mv_map, cfg)
            converged = True
        except MaxIterationsExceeded as exc:
            res = exc.result
            converged = False
            status = max(status, 2)
        wall = time.perf_counter() - t0
        results[method] = (res, converged, wall)
        stem = f"{cfg.problem}_n{cfg.n_repetitions}_{method}"
        write_csv(out_dir / f"{stem}.csv", res.record)

    say(f"problem {cfg.problem}, {cfg.n_repetitions} repetitions, "
        f"seed {cfg.seed}, preconditioner {cfg.preconditioner}, tol {cfg.tol:g}")
    say(f"{'method':<14}{'iterations':>12}{'wall (s)':>12}")
    for method, (res, converged, wall) in results.items():
        note = "" if converged else "  (no convergence)"
        say(f"{method:<14}{res.record.iterations:>12}{wall:>12.2f}{note}")

    oracle_ok = True
    max_err = 0.0
    for method, (res, converged, _) in results.items():
        err = relative_error(res.displacements, u_ref)
        jump = np.linalg.norm(interface_jump(model, res.displacements))
        u_norm = np.linalg.norm(np.concatenate(res.displacements))
        jump_ok = jump <= 10.0 * cfg.tol * max(u_norm, 1e-300)
        ok = converged and err <= ORACLE_RTOL and jump_ok
        oracle_ok = oracle_ok and ok
        max_err = max(max_err, err)
        say(f"oracle {method}: {'pass' if ok else 'FAIL'} "
            f"(rel error {err:.3e}, interface jump {jump / max(u_norm, 1e-300):.3e})")
    if not oracle_ok and status == 0:
        status = 3

    summary = out_dir / f"{cfg.problem}_n{cfg.n_repetitions}_summary.txt"
    with open(summary, "w") as fh:
        fh.write(f"problem {cfg.problem} n={cfg.n_repetitions} seed={cfg.seed}\n")
        for method, (res, converged, wall) in results.items():
            fh.write(f"{method}: iterations={res.record.iterations} "
                     f"wall_s={wall:.3f} converged={converged}\n")
        fh.write(f"oracle: {'pass' if oracle_ok else 'fail'} "
                 f"max_rel_error={max_err:.3e} reference_norm={ref_norm:.6e}\n")
    say(f"exit status {status}")
    return status


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="solve",
        description="Substructured solver benchmarks for repeated-pattern "
                    "structures")
    parser.add_argument("--config", required=True, help="TOML experiment file")
    parser.add_argument("--method", help="comma-separated subset of "
                                         "classical,mrhs,multivector")
    parser.add_argument("--tol", type=float, help="convergence tolerance")
    parser.add_argument("--seed", type=int, help="load-case / operator seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.method:
            cfg.methods = tuple(m.strip() for m in args.method.split(","))
        if args.tol is not None:
            cfg.tol = args.tol
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out
        cfg.validate()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        return run_experiment(cfg, verbose=not args.quiet)
    except MvFetiError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
