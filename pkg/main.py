import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from config.settings import H_FACTOR, LOG_FORMAT, LOG_LEVEL, OUTPUT_DIR
from models.Config import ProblemConfig
from models.DirichletProblem import DirichletProblem
from models.Domain import Grid
from models.SweepSpec import AuditSpec, SweepSpec
from services.energyService import EnergyService
from services.errors import FracsoftError
from services.harnessService import AUDIT_COLUMNS, HarnessService, write_csv
from services.limitService import LimitService
from services.minimizeService import NUCLEATION_MODES, MinimizeService
from services.quadratureService import QuadratureService
from services.runService import RunService
from services.slicingService import SlicingService

logger = logging.getLogger("fracsoft")

ENERGY_COLUMNS = ["eps", "p", "h", "strategy", "total", "n_balls", "n_directions", "wall_ms"]
EXPLORE_COLUMNS = ["ball", "xi_index", "mu_xi", "mu_hat_p", "I_u1"]
DENSITY_COLUMNS = ["matrix", "entries", "p", "phi_verbatim", "phi_empirical", "beta_verbatim", "beta_empirical",
                   "p1_bulk_density"]
TRACE_COLUMNS = ["iteration", "eps", "energy", "grad_norm", "step"]


def _load_json(path: str) -> dict:
    with open(path) as f:
        return json.load(f)


def _session(args):
    if not args.db:
        return None
    from database.connection import SessionLocal, init_db
    init_db()
    return SessionLocal()


def _output(args, default: str) -> Path:
    return Path(args.out) if args.out else OUTPUT_DIR / default


# -- handlers ------------------------------------------------------------------

def cmd_energy(args) -> int:
    problem = ProblemConfig.model_validate(_load_json(args.field))
    domain, u = problem.to_domain(), problem.to_field()
    rule = QuadratureService.from_config(problem.quad.model_dump()).direction_rule(domain.dimension)
    grid = Grid.for_field(domain, args.h or args.eps / H_FACTOR, u)
    service = EnergyService(rule, workers=args.workers)
    if args.strategy:
        report = service.fp_eps(u, args.eps, args.p, args.strategy, grid, domain, variant=args.variant)
    else:
        report = service.f_eps(u, domain, args.eps, grid)
    row = {"eps": args.eps, "p": report.p, "h": report.grid_h, "strategy": report.strategy,
           "total": report.total, "n_balls": report.n_balls, "n_directions": report.n_directions,
           "wall_ms": report.wall_ms}
    path = write_csv(_output(args, "energy.csv"), [row], ENERGY_COLUMNS)
    db = _session(args)
    if db is not None:
        runs = RunService(db)
        run = runs.create_run("energy", {"field": problem.model_dump(), "eps": args.eps, "p": args.p}, str(path))
        runs.add_point(run.id, args.eps, report.grid_h, report.total, grid.size, report.n_directions)
        runs.finish_run(run.id)
        db.close()
    print(f"{report.total:.12g}")
    return 0


def cmd_p1_explore(args) -> int:
    problem = ProblemConfig.model_validate(_load_json(args.field))
    domain, u = problem.to_domain(), problem.to_field()
    sphere = QuadratureService.from_config(problem.quad.model_dump()).sphere_rule(domain.dimension)
    slicing = SlicingService(args.lines)
    mu_hat, family = slicing.mu_hat_p(u, domain, args.p, sphere, args.strategy)
    rows: List[dict] = []
    for b, ball in enumerate(family):
        for i, xi in enumerate(sphere.nodes):
            rows.append({"ball": b, "xi_index": i, "mu_xi": slicing.mu_xi(u, xi, ball)})
        rows.append({"ball": b, "xi_index": "", "I_u1": slicing.i_u1(u, ball, sphere)})
    rows.append({"ball": "", "xi_index": "", "mu_hat_p": mu_hat})
    write_csv(_output(args, "p1_explore.csv"), rows, EXPLORE_COLUMNS)
    print(f"mu_hat_p >= {mu_hat:.10g} ({len(family)} bolas)")
    return 0


def cmd_density_table(args) -> int:
    service = LimitService(QuadratureService(angular_order=args.angular_order).direction_rule(args.dim))
    if args.matrices:
        matrices = [np.asarray(A, dtype=float) for A in _load_json(args.matrices)]
    else:
        rng = np.random.default_rng(args.seed)
        matrices = [rng.standard_normal((args.dim, args.dim)) for _ in range(args.count)]
    rows = service.density_table(matrices, args.p)
    write_csv(_output(args, "density_table.csv"), rows, DENSITY_COLUMNS)
    return 0


def cmd_minimize(args) -> int:
    prob = DirichletProblem.bar(args.load, args.eps, h=args.h, n=args.dim)
    service = MinimizeService(workers=args.workers)
    trace = service.minimize_dirichlet(prob, max_iter=args.max_iter, gtol=args.gtol,
                                       continuation=args.continuation, nucleation=args.nucleation, seed=args.seed)
    out = _output(args, "trace.csv")
    write_csv(out, trace.rows(), TRACE_COLUMNS)
    final = trace.final
    n = final.dimension
    columns = ["cell"] + [f"x{j}" for j in range(n)] + [f"u{j}" for j in range(n)]
    rows = []
    for k in range(final.grid.size):
        row = {"cell": k}
        row.update({f"x{j}": float(final.grid.centers[k, j]) for j in range(n)})
        row.update({f"u{j}": float(final.values[k, j]) for j in range(n)})
        rows.append(row)
    write_csv(out.with_name(out.stem + "_final_field.csv"), rows, columns)
    db = _session(args)
    if db is not None:
        runs = RunService(db)
        run = runs.create_run("minimize", vars_config(args), str(out))
        runs.finish_run(run.id, trace.energy, None, trace.gap)
        db.close()
    print(f"F = {trace.energy:.10g}, parada = {trace.stop_reason.value}, hueco = {trace.gap}")
    return 0


def cmd_gamma_study(args) -> int:
    spec = SweepSpec.model_validate(_load_json(args.spec))
    db = _session(args)
    try:
        result, _ = HarnessService(db).run_sweep(spec, output=args.out)
    finally:
        if db is not None:
            db.close()
    print(f"extrapolado = {result.extrapolated:.10g}, objetivo = {result.target:.10g}, "
          f"error relativo = {result.relative_error:.4%}")
    return 0


def cmd_audit(args) -> int:
    spec = AuditSpec.model_validate(_load_json(args.spec)) if args.spec else AuditSpec()
    db = _session(args)
    try:
        report = HarnessService(db).audit_inequalities(spec, output=args.out)
    finally:
        if db is not None:
            db.close()
    for row in report.failures():
        print("FALLO " + ", ".join(f"{c}={row[c]}" for c in AUDIT_COLUMNS), file=sys.stderr)
    print(f"{len(report.rows)} comprobaciones, {len(report.failures())} fallos")
    return 0 if report.passed else 1


def cmd_runs(args) -> int:
    args.db = True
    db = _session(args)
    try:
        service = RunService(db)
        runs = service.get_runs_by_kind(args.kind) if args.kind else service.get_all_runs()
        for run in runs:
            print(f"{run.id}\t{run.kind}\t{run.status}\t{run.created_at:%Y-%m-%d %H:%M}\t"
                  f"{run.relative_error if run.relative_error is not None else ''}\t{run.output_path or ''}")
    finally:
        db.close()
    return 0


def vars_config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "handler" and isinstance(v, (int, float, str, bool))}


HANDLERS: Dict[str, Callable] = {
    "energy": cmd_energy,
    "p1-explore": cmd_p1_explore,
    "density-table": cmd_density_table,
    "minimize": cmd_minimize,
    "gamma-study": cmd_gamma_study,
    "audit": cmd_audit,
    "runs": cmd_runs,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracsoft", description="Energías no locales de fractura y sus límites")
    parser.add_argument("--verbose", action="store_true", help="registro a nivel DEBUG")
    parser.add_argument("--db", action="store_true", help="registrar la ejecución en la base de datos")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", help="F_eps o F^p_eps de un campo analítico")
    p.add_argument("--field", required=True, help="documento JSON {domain, field, quad}")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--strategy", default=None, help="dyadic:L o greedy:K (activa F^p_eps)")
    p.add_argument("--variant", choices=["standard", "prime"], default="standard")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("p1-explore", help="medidas por rebanadas mu^xi, mu_hat^p e I_{u,1}")
    p.add_argument("--field", required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--strategy", default="dyadic:1")
    p.add_argument("--lines", type=int, default=200)
    p.add_argument("--out", default=None)

    p = sub.add_parser("density-table", help="phi_p y beta_p en ambas convenciones")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--p", type=float, nargs="+", default=[1.0, 2.0])
    p.add_argument("--matrices", default=None, help="JSON con una lista de matrices n x n")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--angular-order", type=int, default=32)
    p.add_argument("--out", default=None)

    p = sub.add_parser("minimize", help="descenso con Dirichlet sobre la barra traccionada")
    p.add_argument("--load", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.02)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--continuation", type=int, default=0)
    p.add_argument("--nucleation", choices=NUCLEATION_MODES, default="notch")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--gtol", type=float, default=1e-6)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("gamma-study", help="barrido en eps con extrapolación de Richardson")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("audit", help="desigualdades sobre campos 1D aleatorios")
    p.add_argument("--spec", default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("runs", help="lista las ejecuciones registradas")
    p.add_argument("--kind", default=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else LOG_LEVEL, format=LOG_FORMAT)
    try:
        return HANDLERS[args.command](args)
    except (FracsoftError, ValidationError, json.JSONDecodeError, FileNotFoundError) as e:
        logger.error(f"{args.command}: {str(e)}")
        print(f"error: {str(e)}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
