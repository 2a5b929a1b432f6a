import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import ARMIJO_C, CHUNK_POINTS, NOTCH_FRACTION, NUCLEATION_AMPLITUDE, WORKERS
from models.DescentTrace import DescentTrace, StopReason
from models.DirectionRule import DirectionRule
from models.DirichletProblem import DirichletProblem
from models.Field import SampledField
from services.energyService import _contains, check_resolution
from services.errors import GridCapabilityError, ParameterError
from services.quadratureService import build_direction_rule, support_mask

logger = logging.getLogger(__name__)

NUCLEATION_MODES = ("none", "random", "notch", "candidates")


class _Pairs:
    """Pares (x, x + eps xi_i) de la energía discreta sobre toda la malla, por bloques de direcciones"""

    def __init__(self, grid, eps: float, rule: DirectionRule, chunk_points: int):
        self.grid = grid
        self.eps = eps
        domain = grid.domain
        self.cells = np.flatnonzero(grid.inside_mask)
        node_idx = np.flatnonzero(support_mask(rule, domain.minkowski_support(eps)))
        self.nodes = rule.nodes[node_idx]
        self.weights = rule.weights[node_idx]
        corners = 1 << grid.dimension
        self.step = max(1, chunk_points // max(1, self.cells.size * corners))
        self._cache: Optional[List[tuple]] = None
        if self.cells.size * corners * self.nodes.shape[0] <= chunk_points:
            self._cache = list(self._build())

    def _build(self) -> Iterator[tuple]:
        x = self.grid.centers[self.cells]
        for start in range(0, self.nodes.shape[0], self.step):
            xi = self.nodes[start:start + self.step]
            w = self.weights[start:start + self.step]
            y = x[None, :, :] + self.eps * xi[:, None, :]
            mask = _contains(self.grid.domain, y)
            idx, wts = self.grid.stencil(y)
            yield xi, w, idx, wts, mask

    def chunks(self) -> Iterator[tuple]:
        return iter(self._cache) if self._cache is not None else self._build()


class MinimizeService:
    """
    Gradiente de F_eps(., Omega') discreto y descenso con backtracking
    sobre las celdas libres de un problema de Dirichlet.
    """

    def __init__(self, rule: Optional[DirectionRule] = None, workers: int = WORKERS,
                 chunk_points: int = CHUNK_POINTS, armijo: float = ARMIJO_C):
        self.rule = rule
        self.workers = max(1, int(workers))
        self.chunk_points = max(1, int(chunk_points))
        self.armijo = armijo
        self._pairs: Optional[_Pairs] = None

    def _rule(self, n: int) -> DirectionRule:
        if self.rule is None or self.rule.dimension != n:
            self.rule = build_direction_rule(n)
        return self.rule

    def _pairs_for(self, grid, eps: float) -> _Pairs:
        check_resolution(grid, eps)
        if self._pairs is None or self._pairs.grid is not grid or self._pairs.eps != eps:
            self._pairs = _Pairs(grid, eps, self._rule(grid.dimension), self.chunk_points)
        return self._pairs

    # -- energía y gradiente --------------------------------------------

    def _chunk(self, values: np.ndarray, pairs: _Pairs, chunk: tuple, with_grad: bool):
        xi, w, idx, wts, mask = chunk
        eps = pairs.eps
        scale = pairs.grid.cell_volume / eps
        ux = values[pairs.cells]
        uy = np.einsum("dmk,dmkj->dmj", wts, values[idx])
        s = np.einsum("dmj,dj->dm", uy - ux[None, :, :], xi)
        energy = float(np.sum(w * scale * np.sum(np.where(mask, np.arctan(s * s / eps), 0.0), axis=1)))
        if not with_grad:
            return energy, None
        coef = np.where(mask, (2.0 * s / eps) / (1.0 + s ** 4 / eps ** 2), 0.0) * (w * scale)[:, None]
        size = values.shape[0]
        grad = np.zeros_like(values)
        cells = np.broadcast_to(pairs.cells, coef.shape)
        for j in range(values.shape[1]):
            c = coef * xi[:, j][:, None]
            grad[:, j] += np.bincount(idx.ravel(), weights=(c[..., None] * wts).ravel(), minlength=size)
            grad[:, j] -= np.bincount(cells.ravel(), weights=c.ravel(), minlength=size)
        return energy, grad

    def _evaluate(self, u: SampledField, eps: float, with_grad: bool) -> Tuple[float, Optional[np.ndarray]]:
        pairs = self._pairs_for(u.grid, eps)
        chunks = list(pairs.chunks()) if self.workers > 1 else pairs.chunks()
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                parts = list(pool.map(lambda c: self._chunk(u.values, pairs, c, with_grad), chunks))
        else:
            parts = [self._chunk(u.values, pairs, c, with_grad) for c in chunks]
        # buffers privados sumados en orden fijo
        energy = 0.0
        grad = np.zeros_like(u.values) if with_grad else None
        for e, g in parts:
            energy += e
            if with_grad:
                grad += g
        if with_grad:
            grad[u.dirichlet_mask] = 0.0
        return energy, grad

    def energy(self, u: SampledField, eps: float) -> float:
        """F_eps(u, Omega') con Omega' = dominio de la malla"""
        return self._evaluate(u, eps, with_grad=False)[0]

    def grad_f_eps(self, u: SampledField, eps: float) -> np.ndarray:
        """Derivada de F_eps respecto de los valores por celda; cero en las celdas congeladas"""
        return self._evaluate(u, eps, with_grad=True)[1]

    # -- candidatos -------------------------------------------------------

    def _planes(self, prob: DirichletProblem) -> np.ndarray:
        """Planos x_1 = c a mitad de camino entre columnas de celdas de Omega"""
        x1 = prob.grid.centers[:, 0]
        axis = np.unique(x1[~prob.frozen])
        return 0.5 * (axis[:-1] + axis[1:])

    def _crack(self, prob: DirichletProblem, c: float) -> SampledField:
        """Dato de la izquierda para x_1 < c y de la derecha para x_1 > c; celdas congeladas intactas"""
        datum = prob.sampled_datum()
        grid = prob.grid
        left_pts = grid.centers.copy()
        left_pts[:, 0] = grid.centers[prob.frozen, 0].min()
        right_pts = grid.centers.copy()
        right_pts[:, 0] = grid.centers[prob.frozen, 0].max()
        values = np.where((grid.centers[:, 0] < c)[:, None], prob.datum.evaluate(left_pts),
                          prob.datum.evaluate(right_pts))
        values[prob.frozen] = datum.values[prob.frozen]
        return datum.with_values(values)

    def candidates(self, prob: DirichletProblem, max_planes: int = 64) -> Iterator[Tuple[str, SampledField]]:
        """Interpolante elástico y grietas únicas en los planos x_1 = c entre celdas de Omega"""
        yield "elastic", prob.sampled_datum()
        planes = self._planes(prob)
        if planes.size > max_planes:
            planes = planes[np.linspace(0, planes.size - 1, max_planes).round().astype(int)]
        for c in planes:
            yield f"crack@{c:.6g}", self._crack(prob, c)

    def best_candidate(self, prob: DirichletProblem, eps: Optional[float] = None) -> Tuple[str, SampledField, float]:
        eps = prob.eps if eps is None else eps
        best = None
        for name, field in self.candidates(prob):
            value = self.energy(field, eps)
            if best is None or value < best[2]:
                best = (name, field, value)
        return best

    def quasi_min_gap(self, u: SampledField, prob: DirichletProblem, eps: Optional[float] = None) -> float:
        """F_eps(u) - min sobre los candidatos, recortado a 0"""
        eps = prob.eps if eps is None else eps
        _, _, reference = self.best_candidate(prob, eps)
        return max(0.0, self.energy(u, eps) - reference)

    # -- descenso ---------------------------------------------------------

    def _initial(self, prob: DirichletProblem, nucleation: str, seed: int) -> SampledField:
        u = prob.sampled_datum()
        if nucleation == "none":
            return u
        if nucleation == "notch":
            # entalla: una fracción del salto del dato se abre en el plano central de Omega
            planes = self._planes(prob)
            middle = 0.5 * (prob.inner.lo[0] + prob.inner.hi[0])
            c = planes[np.argmin(np.abs(planes - middle))]
            crack = self._crack(prob, c)
            logger.info(f"nucleación por entalla en x_1 = {c:.6g} (fracción {NOTCH_FRACTION:g})")
            return u.with_values((1.0 - NOTCH_FRACTION) * u.values + NOTCH_FRACTION * crack.values)
        if nucleation == "candidates":
            name, field, value = self.best_candidate(prob)
            logger.info(f"nucleación por candidatos: {name} (F = {value:.8g})")
            return field.copy()
        rng = np.random.default_rng(seed)
        values = u.values.copy()
        free = u.free_mask
        values[free] += NUCLEATION_AMPLITUDE * rng.standard_normal((int(free.sum()), u.dimension))
        return u.with_values(values)

    def minimize_dirichlet(self, prob: DirichletProblem, max_iter: int = 500, gtol: float = 1e-6,
                           continuation: int = 0, nucleation: str = "none", seed: int = 0,
                           eps_schedule: Optional[Sequence[float]] = None,
                           snapshot_every: int = 0) -> DescentTrace:
        """
        Descenso de gradiente con backtracking de Armijo (mitades) sobre las
        celdas libres. Con continuation = k se resuelve en eps, eps/2, ..., eps/2^k
        reutilizando la solución anterior.

        El iterado inicial es el dato muestreado; nucleation = "random" le suma
        ruido gaussiano en las celdas libres y "notch" abre una fracción
        NOTCH_FRACTION del salto del dato en el plano central de Omega.
        "candidates" arranca del mejor candidato de quasi-minimalidad y sirve
        solo para contrastar el hueco.
        """
        if nucleation not in NUCLEATION_MODES:
            raise ParameterError(f"nucleación desconocida: {nucleation}")
        if max_iter < 1:
            raise ParameterError(f"max_iter debe ser >= 1: {max_iter}")
        schedule = list(eps_schedule) if eps_schedule else [prob.eps / 2 ** k for k in range(continuation + 1)]
        trace = DescentTrace()
        u = self._initial(prob, nucleation, seed)
        vol = u.grid.cell_volume
        free = u.free_mask

        for eps in schedule:
            try:
                energy, grad = self._evaluate(u, eps, with_grad=True)
            except GridCapabilityError as e:
                logger.warning(f"continuación detenida en eps={eps:.4g}: {str(e)}")
                trace.stop_reason = StopReason.GRID_CAPABILITY
                break
            step = 1.0
            trace.record(energy, np.sqrt(np.sum(grad ** 2) / vol), 0.0, eps)
            trace.stop_reason = StopReason.MAX_ITER
            for iteration in range(max_iter):
                direction = grad / vol
                slope = float(np.sum(grad * direction))
                grad_norm = np.sqrt(slope)
                if grad_norm <= gtol:
                    trace.stop_reason = StopReason.CONVERGED
                    break
                accepted = False
                while step > 1e-16:
                    values = u.values.copy()
                    values[free] -= step * direction[free]
                    candidate = u.with_values(values)
                    trial = self.energy(candidate, eps)
                    if trial <= energy - self.armijo * step * slope:
                        accepted = True
                        break
                    step *= 0.5
                if not accepted:
                    trace.stop_reason = StopReason.LINE_SEARCH_FAILED
                    break
                u = candidate
                energy, grad = self._evaluate(u, eps, with_grad=True)
                trace.record(energy, np.sqrt(np.sum(grad ** 2) / vol), step, eps)
                if snapshot_every and iteration % snapshot_every == 0:
                    trace.snapshots.append(u.values.copy())
                logger.debug(f"eps={eps:.4g} it={iteration} F={energy:.10g} |g|={grad_norm:.3e} paso={step:.3e}")
                step = min(2.0 * step, 1.0)
            logger.info(f"nivel eps={eps:.4g}: F={energy:.8g}, parada={trace.stop_reason.value}")
            if trace.stop_reason is StopReason.LINE_SEARCH_FAILED:
                break

        trace.final = u
        trace.converged = trace.stop_reason is StopReason.CONVERGED
        trace.gap = self.quasi_min_gap(u, prob, trace.eps_levels[-1]) if trace.iterates else None
        return trace
