import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sqlalchemy.orm import Session

from models.Domain import BoxDomain, Grid
from models.Field import Affine, AnalyticField, PlaneJump, Ramp, Sum
from models.GriffithValue import Convention
from models.SweepSpec import AuditSpec, ExtrapolationResult, SweepSpec
from services.energyService import EnergyService
from services.errors import ParameterError
from services.limitService import griffith_energy
from services.quadratureService import QuadratureService, build_direction_rule
from services.runService import RunService
from services.slicingService import SlicingService, f1d, lower_bound_1d, ms_1d, section

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["eps", "h", "p", "energy", "method", "strategy", "total", "n_cells", "n_directions",
                 "partitions", "rule"]
SUMMARY_COLUMNS = ["extrapolated", "target", "relative_error", "raw_smallest", "raw_relative_error"]
AUDIT_COLUMNS = ["inequality", "field", "params", "lhs", "rhs", "margin", "passed"]


def write_csv(path, rows: Iterable[dict], columns: Sequence[str]) -> Path:
    """CSV con columnas fijas; los flotantes se escriben con repr para que la salida sea reproducible"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def richardson(eps: Sequence[float], values: Sequence[float]) -> float:
    """Extrapolación de orden 1 en eps con los dos eps más pequeños"""
    if len(eps) < 2:
        raise ParameterError("Richardson necesita al menos dos valores de eps")
    e0, e1 = eps[-2], eps[-1]
    r = e0 / e1
    return (r * values[-1] - values[-2]) / (r - 1.0)


@dataclass
class AuditReport:
    rows: List[dict] = field(default_factory=list)
    constant: float = 0.0
    reference_ratio: float = 0.0

    def add(self, inequality: str, field_name: str, params: str, lhs: float, rhs: float, tol: float):
        margin = rhs - lhs
        self.rows.append({
            "inequality": inequality, "field": field_name, "params": params,
            "lhs": float(lhs), "rhs": float(rhs), "margin": float(margin),
            "passed": bool(margin >= -tol),
        })

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.rows)

    def failures(self) -> List[dict]:
        return [r for r in self.rows if not r["passed"]]


def translation_constant(deltas: Sequence[float], volume: float) -> float:
    """
    C_E de la estimación de traslaciones, medida sobre el campo de dos
    estados con salto d: sup_d min(|d|, pi) / (delta + arctan(d^2 / delta)).
    """
    jumps = np.append(np.geomspace(1e-6, 1e3, 4001), np.pi)
    worst = max(float(np.max(np.minimum(jumps, np.pi) / (delta + np.arctan(jumps ** 2 / delta))))
                for delta in deltas)
    return 1.01 * worst * max(volume, 1.0)


def random_piecewise_field(rng: np.random.Generator) -> AnalyticField:
    """Campo 1D afín a trozos con 1 a 3 saltos de amplitud en [0.5, 3] y pendientes en [-2, 2]"""
    terms: List[AnalyticField] = [Affine([[rng.uniform(-1.0, 1.0)]], [rng.uniform(-1.0, 1.0)])]
    for _ in range(int(rng.integers(1, 4))):
        amp = rng.uniform(0.5, 3.0) * rng.choice([-1.0, 1.0])
        terms.append(PlaneJump([1.0], rng.uniform(0.1, 0.9), [0.0], [amp]))
    start = rng.uniform(0.1, 0.6)
    length = rng.uniform(0.1, 0.3)
    terms.append(Ramp([1.0], start, start + length, [rng.uniform(-1.0, 1.0) * length]))
    return Sum(terms)


class HarnessService:
    """Barridos en eps, extrapolación y auditoría de desigualdades"""

    def __init__(self, db: Optional[Session] = None):
        self.runs = RunService(db) if db is not None else None

    # -- barridos -----------------------------------------------------------

    def run_sweep(self, spec: SweepSpec, output: Optional[str] = None) -> Tuple[ExtrapolationResult, List[dict]]:
        """Evalúa la energía para cada eps, extrapola y compara con la energía de Griffith"""
        domain = spec.problem.to_domain()
        u = spec.problem.to_field()
        rule = QuadratureService.from_config(spec.problem.quad.model_dump()).direction_rule(domain.dimension)
        service = EnergyService(rule, workers=spec.workers)
        slicing = SlicingService()
        target = spec.target
        if target is None:
            target = griffith_energy(u, domain, spec.p, Convention(spec.convention), rule).total
        output = output or spec.output
        run = self.runs.create_run("gamma-study", spec.model_dump(), output) if self.runs else None

        rows, values, hs = [], [], []
        try:
            for eps in spec.eps_list:
                grid = Grid.for_field(domain, eps / spec.h_factor, u)
                if spec.method == "sliced":
                    report = slicing.f_eps_sliced(u, domain, eps, rule)
                elif spec.energy == "f_eps":
                    report = service.f_eps(u, domain, eps, grid)
                else:
                    report = service.fp_eps(u, eps, spec.p, spec.strategy, grid, domain)
                values.append(report.total)
                hs.append(grid.h)
                rows.append({
                    "eps": eps, "h": grid.h, "p": spec.p, "energy": spec.energy, "method": spec.method,
                    "strategy": spec.strategy if spec.energy == "fp_eps" else "",
                    "total": report.total, "n_cells": grid.size if spec.method == "grid" else 0,
                    "n_directions": report.n_directions,
                    "partitions": report.partitions, "rule": report.rule_meta,
                })
                logger.info(f"eps={eps:.4g} h={grid.h:.4g}: {spec.energy} = {report.total:.10g}")
                if run is not None:
                    self.runs.add_point(run.id, eps, grid.h, report.total, grid.size, report.n_directions)
        except Exception:
            if run is not None:
                self.runs.fail_run(run.id)
            raise

        result = ExtrapolationResult(eps=list(spec.eps_list), values=values,
                                     extrapolated=richardson(spec.eps_list, values),
                                     target=float(target), raw_smallest=values[-1], h=hs)
        logger.info(f"extrapolado {result.extrapolated:.8g}, objetivo {result.target:.8g}, "
                    f"error relativo {result.relative_error:.3%}")
        if output:
            write_csv(output, rows, SWEEP_COLUMNS)
            write_csv(Path(output).with_suffix(".summary.csv"), [self.summary_row(result)], SUMMARY_COLUMNS)
        if run is not None:
            self.runs.finish_run(run.id, result.extrapolated, result.target, result.relative_error)
        return result, rows

    @staticmethod
    def summary_row(result: ExtrapolationResult) -> dict:
        return {
            "extrapolated": result.extrapolated, "target": result.target,
            "relative_error": result.relative_error, "raw_smallest": result.raw_smallest,
            "raw_relative_error": result.raw_relative_error,
        }

    # -- auditoría ----------------------------------------------------------

    def audit_inequalities(self, spec: Optional[AuditSpec] = None, fields: Optional[List[AnalyticField]] = None,
                           output: Optional[str] = None) -> AuditReport:
        """
        Cota inferior en intervalos, estimación de traslaciones, desigualdad
        de m pasos y cota superior por Mumford-Shah, sobre campos 1D.
        """
        spec = spec or AuditSpec()
        rng = np.random.default_rng(spec.seed)
        fields = fields if fields is not None else [random_piecewise_field(rng) for _ in range(spec.fields)]
        omega = BoxDomain((0.0,), (1.0,))
        inner = BoxDomain((0.2,), (0.8,))
        rule = build_direction_rule(1)
        slicing = SlicingService()
        report = AuditReport(constant=translation_constant(spec.translation_delta, inner.volume()))
        run = self.runs.create_run("audit", spec.model_dump(), output or spec.output) if self.runs else None

        reference = Affine([[1.0]])
        ratios = []
        for delta in spec.translation_delta:
            lhs = slicing.translation_defect(reference, inner, delta, [1.0])
            ratios.append(lhs / (delta * (1.0 + slicing.f_eps_xi_sliced(reference, inner, delta, [1.0]))))
        report.reference_ratio = float(max(ratios))

        for k, u in enumerate(fields):
            name = f"campo_{k}"
            v = section(u, [1.0], [0.0])
            self._audit_lower(report, name, v, spec, rng)
            self._audit_translation(report, name, u, inner, slicing, spec)
            self._audit_steps(report, name, u, omega, inner, rule, slicing, spec)
            self._audit_upper(report, name, v, spec)

        logger.info(f"auditoría: {len(report.rows)} comprobaciones, {len(report.failures())} fallos, "
                    f"C_E = {report.constant:g} (cociente medido {report.reference_ratio:.4g})")
        target = output or spec.output
        if target:
            write_csv(target, report.rows, AUDIT_COLUMNS)
        if run is not None:
            self.runs.finish_run(run.id, None, None, None)
        return report

    def _audit_lower(self, report: AuditReport, name: str, v, spec: AuditSpec, rng: np.random.Generator):
        eps = spec.lower_eps
        for _ in range(100):
            a, b = np.sort(rng.uniform(0.05, 0.95, size=2))
            if b - a < 0.1:
                continue
            if v.breakpoints.size and min(np.min(np.abs(v.breakpoints - a)), np.min(np.abs(v.breakpoints - b))) < 2 * eps:
                continue
            value = f1d(v, (a, b), eps)
            bound = lower_bound_1d(v, a, b)
            report.add("lower_bound", name, f"a={a:.6f};b={b:.6f};eps={eps:g}", bound, value,
                       spec.lower_tol * (1.0 + bound))
            return
        raise ParameterError("no se encontró un intervalo con extremos de Lebesgue")

    def _audit_translation(self, report: AuditReport, name: str, u, inner: BoxDomain,
                           slicing: SlicingService, spec: AuditSpec):
        for delta in spec.translation_delta:
            for xi in (1.0, -1.0, 2.0):
                lhs = slicing.translation_defect(u, inner, delta, [xi])
                rhs = report.constant * delta * (1.0 + slicing.f_eps_xi_sliced(u, inner, delta, [xi]))
                report.add("translation", name, f"delta={delta:g};xi={xi:g}", lhs, rhs, 1e-9 * (1.0 + rhs))

    def _audit_steps(self, report: AuditReport, name: str, u, omega: BoxDomain, inner: BoxDomain,
                     rule, slicing: SlicingService, spec: AuditSpec, eps: float = 0.01, radius: float = 3.0):
        keep = np.flatnonzero(rule.norms <= radius)
        gap = float(min(inner.lo[0] - omega.lo[0], omega.hi[0] - inner.hi[0]))
        for m in spec.steps:
            if m * eps * radius >= gap:
                raise ParameterError(f"m eps sup|xi| debe ser menor que dist(E, borde): m={m}")
            lhs = rhs = 0.0
            for i in keep:
                xi = rule.nodes[i]
                lhs += rule.weights[i] * slicing.f_eps_xi_sliced(u, inner, m * eps, xi)
                rhs += rule.weights[i] * slicing.f_eps_xi_sliced(u, omega, eps, xi)
            report.add("m_step", name, f"m={m};eps={eps:g}", lhs, rhs, 1e-9 * (1.0 + rhs))

    def _audit_upper(self, report: AuditReport, name: str, v, spec: AuditSpec):
        bound = 0.5 * np.pi * ms_1d(v, (0.0, 1.0), 2.0 / np.pi)
        for eps in spec.eps_list:
            value = f1d(v, (0.0, 1.0 - eps), eps)
            report.add("upper_bound", name, f"eps={eps:g}", value, bound, 1e-9 * (1.0 + bound))
