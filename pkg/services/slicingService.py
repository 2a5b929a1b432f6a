import logging
import time
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import null_space

from config.settings import TRANSVERSE_LINES
from models.BallFamily import BallFamily, BallStrategy
from models.DirectionRule import DirectionRule
from models.EnergyReport import EnergyReport
from models.Domain import Ball, BoxDomain
from models.Field import AnalyticField
from models.Section1D import Section1D, SliceMeasureValue
from services.energyService import ball_candidates
from services.errors import DomainError, ParameterError
from services.quadratureService import integrate_values, support_mask

logger = logging.getLogger(__name__)

Region = Union[BoxDomain, Ball]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


# -- integración exacta de arctan(d(t)^2 / c) con d afín a trozos ---------

def _g(s: np.ndarray, c: float) -> np.ndarray:
    """int_0^s sigma^2 / (sigma^4 + c^2) dsigma"""
    a = np.sqrt(c)
    r = s / a
    small = np.abs(r) < 1e-2
    r_safe = np.where(small, 1.0, r)
    closed = (np.log((r_safe ** 2 - np.sqrt(2) * r_safe + 1) / (r_safe ** 2 + np.sqrt(2) * r_safe + 1)) / (4 * np.sqrt(2))
              + (np.arctan(np.sqrt(2) * r_safe + 1) + np.arctan(np.sqrt(2) * r_safe - 1)) / (2 * np.sqrt(2))) / a
    series = (r ** 3 / 3.0 - r ** 7 / 7.0) / a
    return np.where(small, series, closed)


def _phi(s: np.ndarray, c: float) -> np.ndarray:
    """Primitiva int_0^s arctan(sigma^2 / c) dsigma"""
    return s * np.arctan(s * s / c) - 2.0 * c * _g(s, c)


def _linear_pieces(v: Section1D, lo: float, hi: float, shift: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Subintervalos de (lo, hi) donde d(t) = v(t + shift) - v(t) = alpha + beta t"""
    cuts = np.concatenate((v.breakpoints, v.breakpoints - shift))
    cuts = cuts[(cuts > lo) & (cuts < hi)]
    edges = np.unique(np.concatenate(([lo], cuts, [hi])))
    mid = 0.5 * (edges[:-1] + edges[1:])
    i = v.piece_index(mid)
    j = v.piece_index(mid + shift)
    beta = v.slopes[j] - v.slopes[i]
    alpha = v.intercepts[j] + v.slopes[j] * shift - v.intercepts[i]
    return edges, alpha, beta


def arctan_integral(v: Section1D, lo: float, hi: float, shift: float, scale: float) -> float:
    """int_lo^hi arctan((v(t + shift) - v(t))^2 / scale) dt, exacto trozo a trozo"""
    if hi <= lo:
        return 0.0
    edges, alpha, beta = _linear_pieces(v, lo, hi, shift)
    t0, t1 = edges[:-1], edges[1:]
    length = t1 - t0
    s_mid = alpha + beta * 0.5 * (t0 + t1)
    flat = np.abs(beta) * length < 1e-3 * (np.abs(s_mid) + np.sqrt(scale))
    total = 0.0
    if np.any(~flat):
        b = beta[~flat]
        s0 = alpha[~flat] + b * t0[~flat]
        s1 = alpha[~flat] + b * t1[~flat]
        total += float(np.sum((_phi(s1, scale) - _phi(s0, scale)) / b))
    if np.any(flat):
        # trozos casi constantes: Gauss-Legendre
        half = 0.5 * length[flat]
        centre = 0.5 * (t0[flat] + t1[flat])
        tt = centre[:, None] + half[:, None] * _GL_X[None, :]
        s = alpha[flat][:, None] + beta[flat][:, None] * tt
        total += float(np.sum(half[:, None] * _GL_W[None, :] * np.arctan(s * s / scale)))
    return total


def _piecewise_quadrature(v: Section1D, lo: float, hi: float, shift: float, integrand) -> float:
    """int_lo^hi integrand(v(t), v(t + shift)) dt con Gauss-Legendre en cada trozo suave"""
    if hi <= lo:
        return 0.0
    edges, alpha, beta = _linear_pieces(v, lo, hi, shift)
    # los ceros de d(t) son esquinas de |arctan v(t+shift) - arctan v(t)|
    with np.errstate(divide="ignore", invalid="ignore"):
        roots = np.where(beta != 0, -alpha / beta, np.nan)
    inside = roots[(roots > lo) & (roots < hi)]
    edges = np.unique(np.concatenate((edges, inside)))
    half = 0.5 * np.diff(edges)
    centre = 0.5 * (edges[:-1] + edges[1:])
    tt = (centre[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    vals = integrand(v.value(tt), v.value(tt + shift)).reshape(centre.size, -1)
    return float(np.sum(half[:, None] * _GL_W[None, :] * vals))


# -- rebanadas de campos analíticos ----------------------------------------

def _transverse_points(region: Region, direction: np.ndarray, lines: int) -> Tuple[np.ndarray, float]:
    """Puntos medios de una malla en Pi^xi que cubre la proyección de la región"""
    n = direction.size
    lo, hi = region.bounds()
    centre = 0.5 * (lo + hi)
    radius = 0.5 * float(np.linalg.norm(hi - lo)) if isinstance(region, BoxDomain) else region.radius
    if n == 1:
        return centre[None, :], 1.0
    basis = null_space(direction[None, :])
    per_axis = lines if n == 2 else max(8, lines // 10)
    h = 2.0 * radius / per_axis
    coords = -radius + (np.arange(per_axis) + 0.5) * h
    grids = np.meshgrid(*([coords] * (n - 1)), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=-1)
    return centre[None, :] + offsets @ basis.T, h ** (n - 1)


def _lines(u: AnalyticField, region: Region, xi: np.ndarray, lines: int) -> Iterator[Tuple[Section1D, float, float, float]]:
    """(traza de u.xi a lo largo de la recta, t0, t1, peso transversal) para cada recta que corta la región"""
    norm = float(np.linalg.norm(xi))
    d = xi / norm
    points, weight = _transverse_points(region, d, lines)
    for y in points:
        chord = region.chord(y, d)
        if chord is None:
            continue
        v = u.trace(y, d)
        yield v.scaled(norm), chord[0], chord[1], weight


def section(u: AnalyticField, xi: Sequence[float], y: Sequence[float], region: Optional[Region] = None) -> Section1D:
    """Traza t -> u(y + t xi) . xi; con `region` se restringe a la cuerda correspondiente"""
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        raise ParameterError("xi debe ser no nulo")
    v = u.trace(np.asarray(y, dtype=float), xi)
    if region is not None:
        chord = region.chord(y, xi)
        if chord is None:
            raise DomainError("la recta no corta la región")
        v = v.restrict(*chord)
    return v


def f1d(v: Section1D, interval: Union[Tuple[float, float], Sequence[Tuple[float, float]]], eps: float) -> float:
    """F_eps(v, A) = (1/eps) int_A arctan((v(t + eps) - v(t))^2 / eps) dt"""
    if eps <= 0:
        raise ParameterError(f"eps debe ser positivo: {eps}")
    pieces = [interval] if np.isscalar(interval[0]) else list(interval)
    total = 0.0
    for a, b in pieces:
        if not v.covers(a, b + eps):
            raise DomainError(f"({a}, {b}) no está contenido en Dom(v) n (Dom(v) - eps)")
        total += arctan_integral(v, a, b, eps, eps)
    return total / eps


def ms_1d(v: Section1D, interval: Tuple[float, float], gamma: float) -> float:
    """MS_gamma(v, I) = gamma int_I |v'|^2 + #(J_v n I)"""
    a, b = interval
    starts = np.concatenate(([-np.inf], v.breakpoints))
    ends = np.concatenate((v.breakpoints, [np.inf]))
    overlap = np.clip(np.minimum(ends, b) - np.maximum(starts, a), 0.0, None)
    jumps_at, _ = v.jump_points()
    count = int(np.count_nonzero((jumps_at > a) & (jumps_at < b)))
    return gamma * float(np.sum(v.slopes ** 2 * overlap)) + count


def gobbino_project(v: Section1D, a: float, j: int, interval: Optional[Tuple[float, float]] = None) -> Section1D:
    """
    Proyección sobre la malla a + z/j: en cada I_z interpolante afín si
    j Delta^2 <= pi/2, si no dos constantes con un salto en el punto medio.
    """
    if j < 1:
        raise ParameterError(f"j debe ser un entero positivo: {j}")
    lo, hi = interval if interval is not None else v.span()
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise DomainError("gobbino_project necesita un intervalo acotado")
    z0 = int(np.ceil((lo - a) * j - 1e-12))
    z1 = int(np.floor((hi - a) * j + 1e-12))
    if z1 <= z0:
        raise DomainError("el intervalo no contiene ningún I_z completo")
    nodes = a + np.arange(z0, z1 + 1) / j
    vals = v.value(nodes)
    starts, slopes, intercepts = [], [], []
    for k in range(nodes.size - 1):
        delta = vals[k + 1] - vals[k]
        if j * delta ** 2 <= np.pi / 2:
            slope = delta * j
            starts.append(nodes[k])
            slopes.append(slope)
            intercepts.append(vals[k] - slope * nodes[k])
        else:
            mid = 0.5 * (nodes[k] + nodes[k + 1])
            starts.extend([nodes[k], mid])
            slopes.extend([0.0, 0.0])
            intercepts.extend([vals[k], vals[k + 1]])
    return Section1D(starts[1:], slopes, intercepts, domain=((nodes[0], nodes[-1]),))


def gobbino_interval_energy(v: Section1D, a: float, j: int, z: int) -> float:
    """(pi/2) MS_{2/pi} de la proyección sobre I_z"""
    return 0.5 * np.pi * ms_1d(v, (a + z / j, a + (z + 1) / j), 2.0 / np.pi)


def lower_bound_1d(v: Section1D, a: float, b: float, h: Optional[float] = None) -> float:
    """min{pi/2, (v(b) - v(a))^2 / (b - a)}"""
    if b <= a:
        raise ParameterError("se necesita a < b")
    shift = (h if h is not None else 1e-3 * (b - a)) / 7.0
    if np.any(np.isclose(v.breakpoints, a, rtol=0.0, atol=1e-14)):
        a += shift
    if np.any(np.isclose(v.breakpoints, b, rtol=0.0, atol=1e-14)):
        b -= shift
    delta = float(v.value(b) - v.value(a))
    return min(0.5 * np.pi, delta ** 2 / (b - a))


def slice_measure(v: Section1D, lo: float, hi: float) -> SliceMeasureValue:
    """|Dv|((lo, hi) \\ J^1) y H^0((lo, hi) n J^1), J^1 = saltos de amplitud > 1"""
    if v.degenerate or hi <= lo:
        return SliceMeasureValue(0.0, 0)
    starts = np.concatenate(([-np.inf], v.breakpoints))
    ends = np.concatenate((v.breakpoints, [np.inf]))
    overlap = np.clip(np.minimum(ends, hi) - np.maximum(starts, lo), 0.0, None)
    ac = float(np.sum(np.abs(v.slopes) * overlap))
    at, amp = v.jump_points()
    inside = (at > lo) & (at < hi)
    big = inside & (np.abs(amp) > 1.0)
    ac += float(np.sum(np.abs(amp[inside & ~big])))
    return SliceMeasureValue(ac, int(np.count_nonzero(big)))


class SlicingService:
    """Medidas por rebanadas mu^xi_u, mu_hat^p_u, I_{u,1} y energías direccionales exactas"""

    def __init__(self, lines: int = TRANSVERSE_LINES):
        self.lines = lines

    def mu_xi(self, u: AnalyticField, xi: Sequence[float], region: Region) -> float:
        xi = np.asarray(xi, dtype=float)
        xi = xi / np.linalg.norm(xi)
        total = 0.0
        for v, t0, t1, weight in _lines(u, region, xi, self.lines):
            total += weight * slice_measure(v, t0, t1).total
        return total

    def mu_hat_p(self, u: AnalyticField, domain: BoxDomain, p: float, sphere_rule: DirectionRule,
                 strategy: Union[BallStrategy, str]) -> Tuple[float, BallFamily]:
        """Cota inferior de mu_hat^p_u(Omega) sobre las familias candidatas"""
        if p < 1:
            raise ParameterError(f"p debe ser >= 1: {p}")
        best, best_family = -np.inf, None
        for family in ball_candidates(domain, strategy):
            value = 0.0
            for ball in family:
                mus = np.array([self.mu_xi(u, xi, ball) for xi in sphere_rule.nodes])
                value += float(np.sum(sphere_rule.weights * mus ** p)) ** (1.0 / p)
            if value > best:
                best, best_family = value, family
        if best_family is None:
            raise ParameterError(f"la estrategia {strategy} no produce ninguna familia")
        logger.info(f"mu_hat_p (p={p}) >= {best:.8g} con {len(best_family)} bolas")
        return best, best_family

    def i_u1(self, u: AnalyticField, region: Region, sphere_rule: DirectionRule) -> float:
        """I_{u,1}(B) = int_S int_Pi sum (|[v]| ^ 1)"""
        total = 0.0
        for xi, w in zip(sphere_rule.nodes, sphere_rule.weights):
            inner = 0.0
            for v, t0, t1, weight in _lines(u, region, xi, self.lines):
                if v.degenerate:
                    continue
                at, amp = v.jump_points()
                inside = (at > t0) & (at < t1)
                inner += weight * float(np.sum(np.minimum(np.abs(amp[inside]), 1.0)))
            total += w * inner
        return total

    def f_eps_xi_sliced(self, u: AnalyticField, region: Region, eps: float, xi: Sequence[float]) -> float:
        """F_{eps,xi}(u, E) integrando exactamente a lo largo de las rectas paralelas a xi"""
        if eps <= 0:
            raise ParameterError(f"eps debe ser positivo: {eps}")
        xi = np.asarray(xi, dtype=float)
        norm = float(np.linalg.norm(xi))
        if norm == 0.0:
            return 0.0
        shift = eps * norm
        total = 0.0
        for v, t0, t1, weight in _lines(u, region, xi, self.lines):
            total += weight * arctan_integral(v, t0, t1 - shift, shift, eps)
        return total / eps

    def translation_defect(self, u: AnalyticField, region: Region, delta: float, xi: Sequence[float]) -> float:
        """int_{E n (E - delta xi)} |arctan(u(x + delta xi).xi) - arctan(u(x).xi)| dx"""
        xi = np.asarray(xi, dtype=float)
        norm = float(np.linalg.norm(xi))
        if norm == 0.0:
            return 0.0
        shift = delta * norm
        total = 0.0
        for v, t0, t1, weight in _lines(u, region, xi, self.lines):
            total += weight * _piecewise_quadrature(
                v, t0, t1 - shift, shift, lambda a, b: np.abs(np.arctan(b) - np.arctan(a)))
        return total

    def f_eps_sliced(self, u: AnalyticField, region: Region, eps: float, rule: DirectionRule,
                     support: Optional[BoxDomain] = None) -> EnergyReport:
        """
        F_eps(u, E) con la integral en x hecha por rebanadas.

        En n = 1 es exacta: no hay redondeo en el número de celdas que
        atraviesan un salto, que es la fuente de error de la malla.
        """
        started = time.perf_counter()
        if support is None:
            support = region.minkowski_support(eps)
        active = np.flatnonzero(support_mask(rule, support))
        values = np.zeros(rule.size)
        for i in active:
            values[i] = self.f_eps_xi_sliced(u, region, eps, rule.nodes[i])
        total = integrate_values(rule, values, support)
        return EnergyReport(total=total, eps=eps, p=1.0,
                            per_direction={int(i): float(values[i]) for i in active},
                            grid_h=0.0, rule_meta=rule.descriptor(), n_directions=int(active.size),
                            strategy="sliced", wall_ms=1e3 * (time.perf_counter() - started))
