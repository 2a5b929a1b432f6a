import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterator, List, Optional, Sequence, Union

import numpy as np

from config.settings import CHUNK_POINTS, MIN_H_FACTOR, WORKERS
from models.BallFamily import BallFamily, BallStrategy
from models.DirectionRule import DirectionRule
from models.Domain import Ball, BoxDomain, Grid
from models.EnergyReport import EnergyReport
from models.Field import AnalyticField, SampledField
from services.errors import GridCapabilityError, ParameterError
from services.quadratureService import integrate_values, support_mask

logger = logging.getLogger(__name__)

Region = Union[BoxDomain, Ball]
FieldLike = Union[AnalyticField, SampledField]


class FieldView:
    """Acceso uniforme a un campo analítico (evaluación exacta) o muestreado (interpolación)"""

    def __init__(self, u: FieldLike, grid: Optional[Grid] = None):
        if isinstance(u, SampledField):
            self.grid = u.grid
            self.cell_values = u.values
            self._at = u.at
        else:
            if grid is None:
                raise ParameterError("un campo analítico necesita una malla")
            if u.hits_jump_plane(grid.centers):
                grid = Grid(grid.domain, grid.h, shift=grid.h / 7.0)
            self.grid = grid
            self.cell_values = u.evaluate(grid.centers)
            self._at = u.evaluate
        self.field = u

    def at(self, points: np.ndarray) -> np.ndarray:
        return self._at(points)

    def active_cells(self, region: Region) -> np.ndarray:
        return np.flatnonzero(self.grid.inside_mask & region.contains(self.grid.centers))


def check_resolution(grid: Grid, eps: float):
    if eps <= 0:
        raise ParameterError(f"eps debe ser positivo: {eps}")
    if grid.h > eps / MIN_H_FACTOR * (1.0 + 1e-9):
        raise GridCapabilityError(f"la malla no resuelve eps: h = {grid.h:.4g} > eps/{MIN_H_FACTOR} = {eps / MIN_H_FACTOR:.4g}")


def _contains(region: Region, points: np.ndarray) -> np.ndarray:
    n = points.shape[-1]
    return region.contains(points.reshape(-1, n)).reshape(points.shape[:-1])


def ball_candidates(domain: BoxDomain, strategy: Union[BallStrategy, str]) -> Iterator[BallFamily]:
    """Familias candidatas para el supremo en F^p_eps"""
    if isinstance(strategy, str):
        strategy = BallStrategy.parse(strategy)
    if strategy.kind == "dyadic":
        yield from _dyadic_families(domain, strategy.size)
    else:
        yield from _greedy_families(domain, strategy.size, strategy.shrink)


def _dyadic_families(domain: BoxDomain, levels: int) -> Iterator[BallFamily]:
    lo, sides = domain.lo, domain.sides
    for level in range(levels + 1):
        m = 2 ** level
        sub = sides / m
        radius = float(sub.min() / 2.0)
        balls = []
        for idx in itertools.product(range(m), repeat=domain.dimension):
            center = lo + (np.asarray(idx) + 0.5) * sub
            ball = Ball(tuple(float(c) for c in center), radius)
            if domain.contains_ball(ball):
                balls.append(ball)
        if balls:
            yield BallFamily(tuple(balls))


def _greedy_families(domain: BoxDomain, count: int, shrink: float, max_levels: int = 8) -> Iterator[BallFamily]:
    accepted: List[Ball] = []
    radius = float(domain.sides.min() / 2.0)
    for _ in range(max_levels):
        added = False
        axes = [np.arange(domain.lower[i] + radius, domain.upper[i] - radius + 1e-12, 2 * radius)
                for i in range(domain.dimension)]
        for center in itertools.product(*axes):
            if len(accepted) >= count:
                break
            ball = Ball(tuple(float(c) for c in center), radius)
            if not domain.contains_ball(ball):
                continue
            if all(np.linalg.norm(np.subtract(center, b.center)) >= radius + b.radius - 1e-12 for b in accepted):
                accepted.append(ball)
                added = True
        if added:
            yield BallFamily(tuple(accepted))
        if len(accepted) >= count:
            return
        radius *= shrink


class EnergyService:
    """
    Energías no locales F_{eps,xi}, F_eps (forma por rebanadas y doble
    integral) y F^p_eps con supremo sobre familias de bolas.
    """

    def __init__(self, rule: DirectionRule, workers: int = WORKERS, chunk_points: int = CHUNK_POINTS):
        self.rule = rule
        self.workers = max(1, int(workers))
        self.chunk_points = max(1, int(chunk_points))

    # -- núcleo ---------------------------------------------------------

    def _directional(self, view: FieldView, cells: np.ndarray, region: Region, eps: float,
                     nodes: np.ndarray) -> np.ndarray:
        """F_{eps,xi}(u, region) para cada fila de `nodes`"""
        out = np.zeros(nodes.shape[0])
        if cells.size == 0 or nodes.shape[0] == 0:
            return out
        x = view.grid.centers[cells]
        ux = view.cell_values[cells]
        vol = view.grid.cell_volume
        step = max(1, self.chunk_points // cells.size)
        for start in range(0, nodes.shape[0], step):
            xi = nodes[start:start + step]
            y = x[None, :, :] + eps * xi[:, None, :]
            mask = _contains(region, y)
            s = np.einsum("dmj,dj->dm", view.at(y) - ux[None, :, :], xi)
            vals = np.where(mask, np.arctan(s * s / eps), 0.0)
            out[start:start + step] = vol * np.sum(vals, axis=1) / eps
        return out

    def _directional_partitioned(self, view: FieldView, cells: np.ndarray, region: Region, eps: float,
                                 node_idx: np.ndarray) -> np.ndarray:
        parts = [p for p in np.array_split(node_idx, self.workers) if p.size]
        if len(parts) <= 1:
            return self._directional(view, cells, region, eps, self.rule.nodes[node_idx])
        with ThreadPoolExecutor(max_workers=len(parts)) as pool:
            chunks = list(pool.map(lambda p: self._directional(view, cells, region, eps, self.rule.nodes[p]), parts))
        # reducción en el orden fijo de las particiones
        return np.concatenate(chunks)

    # -- operaciones ----------------------------------------------------

    def f_eps_xi(self, u: FieldLike, region: Region, eps: float, xi: Sequence[float],
                 grid: Optional[Grid] = None) -> float:
        """F_{eps,xi}(u, E) = (1/eps) int_{E n (E - eps xi)} arctan(((u(x+eps xi) - u(x)).xi)^2 / eps) dx"""
        view = FieldView(u, grid)
        check_resolution(view.grid, eps)
        xi = np.asarray(xi, dtype=float).reshape(1, -1)
        return float(self._directional(view, view.active_cells(region), region, eps, xi)[0])

    def f_eps(self, u: FieldLike, region: Region, eps: float, grid: Optional[Grid] = None,
              support: Optional[BoxDomain] = None) -> EnergyReport:
        """F_eps(u, E): promedio gaussiano de F_{eps,xi} sobre (E - E)/eps"""
        started = time.perf_counter()
        view = FieldView(u, grid)
        check_resolution(view.grid, eps)
        support = region.minkowski_support(eps) if support is None else support
        node_idx = np.flatnonzero(support_mask(self.rule, support))
        values = np.zeros(self.rule.size)
        values[node_idx] = self._directional_partitioned(view, view.active_cells(region), region, eps, node_idx)
        total = integrate_values(self.rule, values, support)
        logger.debug(f"F_eps(eps={eps}) = {total:.10g} sobre {node_idx.size} direcciones")
        return EnergyReport(
            total=total, eps=eps, p=1.0,
            per_direction={int(i): float(values[i]) for i in node_idx},
            grid_h=view.grid.h, rule_meta=self.rule.descriptor(),
            partitions=min(self.workers, max(1, node_idx.size)), n_directions=int(node_idx.size),
            wall_ms=1e3 * (time.perf_counter() - started),
        )

    def f_eps_double(self, u: FieldLike, region: BoxDomain, eps: float, grid: Optional[Grid] = None) -> float:
        """
        Forma de doble integral:
        (1/eps^{n+1}) sum_{x, x'} h^{2n} arctan(((u(x') - u(x)).(x' - x))^2 / eps^3) e^{-|x' - x|^2 / eps^2},
        con corte |x' - x| <= R_max eps.
        """
        view = FieldView(u, grid)
        check_resolution(view.grid, eps)
        g = view.grid
        n = g.dimension
        active = (g.inside_mask & region.contains(g.centers)).reshape(g.shape)
        vals = view.cell_values.reshape(g.shape + (n,))
        cutoff = self.rule.truncation_radius * eps
        reach = [int(np.floor(cutoff / g.spacing[i])) for i in range(n)]
        total = 0.0
        for k in itertools.product(*[range(-r, r + 1) for r in reach]):
            k = np.asarray(k)
            disp = k * g.spacing
            dist2 = float(disp @ disp)
            if dist2 == 0.0 or dist2 > cutoff * cutoff:
                continue
            src = tuple(slice(max(0, -k[i]), g.shape[i] - max(0, k[i])) for i in range(n))
            dst = tuple(slice(max(0, k[i]), g.shape[i] - max(0, -k[i])) for i in range(n))
            both = active[src] & active[dst]
            if not np.any(both):
                continue
            s = np.tensordot(vals[dst] - vals[src], disp, axes=([-1], [0]))
            total += float(np.sum(np.where(both, np.arctan(s * s / eps ** 3), 0.0))) * np.exp(-dist2 / eps ** 2)
        return total * g.cell_volume ** 2 / eps ** (n + 1)

    def fp_eps(self, u: FieldLike, eps: float, p: float, strategy: Union[BallStrategy, str],
               grid: Optional[Grid] = None, domain: Optional[BoxDomain] = None,
               variant: str = "standard") -> EnergyReport:
        """
        F^p_eps: máximo sobre las familias candidatas de
        sum_B (int F_{eps,xi}(u, B)^p e^{-|xi|^2} dxi)^{1/p}.
        Es una cota inferior del supremo sobre todas las familias.
        """
        if p < 1:
            raise ParameterError(f"p debe ser >= 1: {p}")
        if variant not in ("standard", "prime"):
            raise ParameterError(f"variante desconocida: {variant}")
        started = time.perf_counter()
        view = FieldView(u, grid)
        check_resolution(view.grid, eps)
        omega = domain or view.grid.domain
        families = list(ball_candidates(omega, strategy))
        if not families:
            raise ParameterError(f"la estrategia {strategy} no produce ninguna familia dentro de Omega")

        cache: Dict[Ball, np.ndarray] = {}
        omega_support = omega.minkowski_support(eps)

        def per_direction(ball: Ball) -> np.ndarray:
            if ball not in cache:
                support = omega_support if variant == "standard" else ball.minkowski_support(eps)
                node_idx = np.flatnonzero(support_mask(self.rule, support))
                vals = np.zeros(self.rule.size)
                vals[node_idx] = self._directional_partitioned(view, view.active_cells(ball), ball, eps, node_idx)
                cache[ball] = vals
            return cache[ball]

        def ball_value(ball: Ball) -> float:
            support = omega_support if variant == "standard" else ball.minkowski_support(eps)
            return integrate_values(self.rule, per_direction(ball) ** p, support) ** (1.0 / p)

        best_value, best_family = -np.inf, families[0]
        for family in families:
            value = float(sum(ball_value(b) for b in family))
            logger.debug(f"familia {family.describe()} -> {value:.8g}")
            if value > best_value:
                best_value, best_family = value, family

        per_ball = {i: ball_value(b) for i, b in enumerate(best_family)}
        summed = np.sum([per_direction(b) for b in best_family], axis=0)
        return EnergyReport(
            total=float(sum(per_ball[i] for i in sorted(per_ball))), eps=eps, p=float(p),
            per_direction={int(i): float(summed[i]) for i in np.flatnonzero(summed)},
            grid_h=view.grid.h, rule_meta=self.rule.descriptor(),
            per_ball=per_ball, family=best_family, partitions=self.workers,
            n_directions=int(np.count_nonzero(support_mask(self.rule, omega_support))),
            strategy=str(strategy), variant=variant,
            wall_ms=1e3 * (time.perf_counter() - started),
            extras={"families": float(len(families))},
        )
