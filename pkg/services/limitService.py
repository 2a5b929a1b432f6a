import itertools
import logging
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad

from config.settings import JUMP_TOL
from models.DirectionRule import DirectionRule
from models.Domain import BoxDomain, Grid
from models.Field import AnalyticField
from models.GriffithValue import Convention, GriffithValue
from services.errors import ParameterError
from services.quadratureService import build_direction_rule, gaussian_moment, integrate, sphere_area

logger = logging.getLogger(__name__)

ConventionLike = Union[Convention, str]


def _convention(value: ConventionLike) -> Convention:
    return value if isinstance(value, Convention) else Convention(value)


def _check_p(p: float):
    if p < 1:
        raise ParameterError(f"p debe ser >= 1: {p}")


def sym(A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return 0.5 * (A + A.T)


def phi_p(A, p: float, rule: DirectionRule, convention: ConventionLike = Convention.EMPIRICAL) -> float:
    """
    Densidad de volumen phi_p(A) = (int |A xi . xi|^{2p} |xi|^p e^{-|xi|^2})^{1/p}.
    La convención empírica omite el factor |xi|^p; solo cuenta sym(A).
    """
    _check_p(p)
    S = sym(A)
    verbatim = _convention(convention) is Convention.VERBATIM

    def integrand(xi: np.ndarray) -> np.ndarray:
        q = np.abs(np.einsum("mi,ij,mj->m", xi, S, xi)) ** (2 * p)
        return q * np.linalg.norm(xi, axis=1) ** p if verbatim else q

    return integrate(rule, integrand) ** (1.0 / p)


def beta_p(p: float, n: int, rule: DirectionRule, convention: ConventionLike = Convention.EMPIRICAL,
           normal: Optional[Sequence[float]] = None) -> float:
    """beta_p = (pi/2) (int |nu . xi|^p |xi|^p e^{-|xi|^2})^{1/p}; la convención empírica omite |xi|^p"""
    _check_p(p)
    nu = np.eye(n)[0] if normal is None else np.asarray(normal, dtype=float)
    nu = nu / np.linalg.norm(nu)
    verbatim = _convention(convention) is Convention.VERBATIM

    def integrand(xi: np.ndarray) -> np.ndarray:
        q = np.abs(xi @ nu) ** p
        return q * np.linalg.norm(xi, axis=1) ** p if verbatim else q

    return 0.5 * np.pi * integrate(rule, integrand) ** (1.0 / p)


def beta_oracle(n: int, p: float = 1.0) -> float:
    """beta_p empírica con integrales 1D adaptativas (e^{-|xi|^2} factoriza en coordenadas)"""
    _check_p(p)
    half, _ = quad(lambda t: t ** p * np.exp(-t * t), 0.0, np.inf, epsabs=1e-14, epsrel=1e-13)
    transverse, _ = quad(lambda t: np.exp(-t * t), 0.0, np.inf, epsabs=1e-14, epsrel=1e-13)
    return 0.5 * np.pi * (2.0 * half * (2.0 * transverse) ** (n - 1)) ** (1.0 / p)


def p1_bulk_density(A) -> float:
    """(pi^{n/2}/2) (|sym A|^2 + tr(A)^2 / 2)"""
    S = sym(A)
    n = S.shape[0]
    return 0.5 * np.pi ** (n / 2) * (float(np.sum(S * S)) + 0.5 * float(np.trace(S)) ** 2)


def plane_area(domain: BoxDomain, normal: Sequence[float], offset: float) -> float:
    """H^{n-1} del corte {x . nu = c} con la caja abierta, n <= 3"""
    nu = np.asarray(normal, dtype=float)
    n = domain.dimension
    lo, hi = domain.lo, domain.hi
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    levels = corners @ nu - offset
    if levels.min() >= 0 or levels.max() <= 0:
        return 0.0
    if n == 1:
        return 1.0
    if n == 2:
        point = offset * nu
        tangent = np.array([-nu[1], nu[0]])
        chord = domain.chord(point, tangent)
        return 0.0 if chord is None else float(chord[1] - chord[0])
    if n != 3:
        raise ParameterError(f"área de planos solo para n <= 3: n={n}")
    # polígono: cortes del plano con las 12 aristas de la caja
    vertices = []
    for a, b in itertools.combinations(range(len(corners)), 2):
        if np.count_nonzero(corners[a] != corners[b]) != 1:
            continue
        la, lb = levels[a], levels[b]
        if la == 0.0:
            vertices.append(corners[a])
        if (la < 0 < lb) or (lb < 0 < la):
            vertices.append(corners[a] + la / (la - lb) * (corners[b] - corners[a]))
    pts = np.unique(np.round(np.array(vertices), 14), axis=0)
    if len(pts) < 3:
        return 0.0
    centre = pts.mean(axis=0)
    e1 = pts[0] - centre
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(nu / np.linalg.norm(nu), e1)
    angles = np.arctan2((pts - centre) @ e2, (pts - centre) @ e1)
    ring = pts[np.argsort(angles)] - centre
    cross = np.cross(ring, np.roll(ring, -1, axis=0))
    return 0.5 * float(np.linalg.norm(cross.sum(axis=0)))


def griffith_energy(u: AnalyticField, domain: BoxDomain, p: float = 1.0,
                    convention: ConventionLike = Convention.EMPIRICAL,
                    rule: Optional[DirectionRule] = None, cells: int = 200) -> GriffithValue:
    """
    Energía límite: phi_p integrada sobre las regiones de gradiente constante
    más beta_p por el área de los planos de salto dentro de Omega.
    """
    _check_p(p)
    convention = _convention(convention)
    n = domain.dimension
    rule = rule or build_direction_rule(n)

    # regiones de gradiente constante
    h = float(domain.sides.max()) / max(8, cells // 2 ** (n - 1))
    grid = Grid(domain, h)
    grads = u.gradient(grid.centers).reshape(grid.size, n, n)
    keys, counts = np.unique(np.round(grads.reshape(grid.size, -1), 12), axis=0, return_counts=True)
    bulk = 0.0
    for key, count in zip(keys, counts):
        if np.any(key):
            bulk += phi_p(key.reshape(n, n), p, rule, convention) * count * grid.cell_volume

    # planos de salto agrupados por (nu, c)
    planes = {}
    for nu, c, amplitude in u.jump_planes():
        key = tuple(np.round(np.append(nu, c), 12))
        planes[key] = planes.get(key, 0.0) + amplitude
    area = 0.0
    for key, amplitude in planes.items():
        if np.linalg.norm(amplitude) > JUMP_TOL:
            area += plane_area(domain, key[:-1], key[-1])
    surface = beta_p(p, n, rule, convention) * area if area else 0.0
    logger.debug(f"Griffith: bulk={bulk:.8g}, area={area:.8g}, surface={surface:.8g}")
    return GriffithValue(bulk=float(bulk), surface=float(surface), convention=convention)


def threshold_load(n: int, p: float = 1.0, convention: ConventionLike = Convention.EMPIRICAL,
                   rule: Optional[DirectionRule] = None) -> float:
    """Carga t* en que las ramas elástica (phi t^2) y fracturada (beta) de la barra se cruzan"""
    rule = rule or build_direction_rule(n)
    A = np.zeros((n, n))
    A[0, 0] = 1.0
    return float(np.sqrt(beta_p(p, n, rule, convention) / phi_p(A, p, rule, convention)))


def annulus_bound(n: int, lam: float) -> float:
    """int_{B_4 \\ B_{1/4}} lam / (1 + lam^2 eta_1^2) d eta, acotado uniformemente en lam"""
    if n < 1:
        raise ParameterError(f"dimensión inválida: {n}")
    if lam < 0:
        raise ParameterError(f"lambda debe ser no negativo: {lam}")

    def inner(rho: float) -> float:
        outer = np.arctan(lam * np.sqrt(max(0.0, 16.0 - rho * rho)))
        hole = np.arctan(lam * np.sqrt(max(0.0, 1.0 / 16.0 - rho * rho)))
        return 2.0 * (outer - hole)

    if n == 1:
        return inner(0.0)
    measure = sphere_area(n - 1)
    value, _ = quad(lambda rho: measure * rho ** (n - 2) * inner(rho), 0.0, 4.0, points=[0.25], limit=200)
    return float(value)


class LimitService:
    """Tablas de densidades y constantes para una regla fija"""

    def __init__(self, rule: DirectionRule):
        self.rule = rule

    @property
    def dimension(self) -> int:
        return self.rule.dimension

    def density_table(self, matrices: Iterable, ps: Iterable[float]) -> List[dict]:
        rows = []
        for k, A in enumerate(matrices):
            A = np.atleast_2d(np.asarray(A, dtype=float))
            for p in ps:
                rows.append({
                    "matrix": k,
                    "entries": " ".join(f"{a:.6g}" for a in A.ravel()),
                    "p": float(p),
                    "phi_verbatim": phi_p(A, p, self.rule, Convention.VERBATIM),
                    "phi_empirical": phi_p(A, p, self.rule, Convention.EMPIRICAL),
                    "beta_verbatim": beta_p(p, self.dimension, self.rule, Convention.VERBATIM),
                    "beta_empirical": beta_p(p, self.dimension, self.rule, Convention.EMPIRICAL),
                    "p1_bulk_density": p1_bulk_density(A),
                })
        logger.info(f"tabla de densidades: {len(rows)} filas (n={self.dimension})")
        return rows

    def moment_check(self, k: float) -> float:
        """Error relativo de la regla sobre |xi|^k frente al oráculo de la función Gamma"""
        exact = gaussian_moment(self.dimension, k)
        approx = integrate(self.rule, lambda xi: np.linalg.norm(xi, axis=1) ** k)
        return abs(approx - exact) / exact
