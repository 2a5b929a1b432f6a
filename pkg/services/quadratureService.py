import logging
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gamma

from config.settings import ANGULAR_ORDER, R_MAX, RADIAL_ORDER, RULE_TOLERANCE
from models.DirectionRule import DirectionRule
from models.Domain import BoxDomain
from services.errors import EvaluationError, ParameterError, RuleQualityError

logger = logging.getLogger(__name__)


def gauss_legendre(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodos y pesos de Gauss-Legendre en [a, b].

    Parameters
    ----------
    a, b : float
        Extremos del intervalo.
    n : int
        Número de nodos.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def sphere_area(n: int) -> float:
    """H^{n-1}(S^{n-1})"""
    return float(2.0 * np.pi ** (n / 2) / gamma(n / 2))


def gaussian_moment(n: int, alpha: Union[float, Sequence[int]]) -> float:
    """
    Momento exacto de la gaussiana e^{-|xi|^2} en R^n.

    Con `alpha` escalar k devuelve el momento radial int |xi|^k e^{-|xi|^2};
    con una tupla de enteros devuelve el momento tensorial prod_i int xi_i^{a_i} e^{-xi_i^2}.
    """
    if np.isscalar(alpha):
        k = float(alpha)
        if k < 0:
            raise ParameterError(f"exponente radial negativo: {k}")
        return sphere_area(n) * float(gamma((k + n) / 2.0)) / 2.0
    exps = [int(a) for a in alpha]
    if len(exps) != n or any(a < 0 for a in exps):
        raise ParameterError(f"multi-exponente inválido para n={n}: {exps}")
    value = 1.0
    for a in exps:
        if a % 2:
            return 0.0
        value *= float(gamma((a + 1) / 2.0))
    return value


def _angular_nodes(n: int, angular_order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Regla en S^{n-1} con simetría antipodal; los pesos suman |S^{n-1}|"""
    if n == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])
    if n == 2:
        m = angular_order
        theta = (2 * np.arange(m) + 1) * np.pi / m
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1), np.full(m, 2 * np.pi / m)
    # n == 3: Gauss-Legendre en cos(theta) por ángulos uniformes en phi
    mu, w_mu = gauss_legendre(-1.0, 1.0, angular_order)
    m_phi = 2 * angular_order
    phi = (2 * np.arange(m_phi) + 1) * np.pi / m_phi
    sin_t = np.sqrt(1.0 - mu ** 2)
    nodes = np.stack([
        np.repeat(sin_t, m_phi) * np.tile(np.cos(phi), angular_order),
        np.repeat(sin_t, m_phi) * np.tile(np.sin(phi), angular_order),
        np.repeat(mu, m_phi),
    ], axis=-1)
    weights = np.repeat(w_mu, m_phi) * (2 * np.pi / m_phi)
    return nodes, weights


def _check_parameters(n: int, angular_order: int):
    if n not in (1, 2, 3):
        raise ParameterError(f"dimensión no soportada: {n}")
    if angular_order < 2:
        raise ParameterError(f"angular_order debe ser >= 2: {angular_order}")


@lru_cache(maxsize=32)
def build_direction_rule(n: int, radial_order: int = RADIAL_ORDER, angular_order: int = ANGULAR_ORDER,
                         r_max: float = R_MAX, tolerance: float = RULE_TOLERANCE) -> DirectionRule:
    """
    Regla producto radial x angular para int f(xi) e^{-|xi|^2} dxi.

    La parte radial es Gauss-Legendre en (0, R_max) aplicada a r^{n-1} e^{-r^2} f;
    para n = 1 se refleja a (-R_max, R_max).
    """
    _check_parameters(n, angular_order)
    if radial_order < 2:
        raise ParameterError(f"radial_order debe ser >= 2: {radial_order}")
    if r_max < 3:
        raise ParameterError(f"R_max debe ser >= 3: {r_max}")

    r, w = gauss_legendre(0.0, r_max, radial_order)
    w_radial = w * r ** (n - 1) * np.exp(-r ** 2)
    if n == 1:
        nodes = np.concatenate((-r[::-1], r))[:, None]
        weights = np.concatenate((w_radial[::-1], w_radial))
    else:
        dirs, w_ang = _angular_nodes(n, angular_order)
        nodes = (r[:, None, None] * dirs[None, :, :]).reshape(-1, n)
        weights = (w_radial[:, None] * w_ang[None, :]).reshape(-1)

    target = gaussian_moment(n, 0)
    total = float(np.sum(weights))
    if abs(total - target) > tolerance * target:
        raise RuleQualityError(
            f"normalización fallida: sum(w) = {total:.12g}, esperado {target:.12g} (R_max={r_max}, orden={radial_order})")
    second = float(np.sum(weights * np.sum(nodes ** 2, axis=1)))
    logger.debug(f"regla n={n}: {weights.size} nodos, sum(w)={total:.15g}, "
                 f"error momento 2 = {abs(second - gaussian_moment(n, 2)):.3e}")
    meta = {"radial_order": radial_order, "angular_order": angular_order if n > 1 else 0, "kind": "gauss"}
    return DirectionRule(n, nodes, weights, float(r_max), meta)


@lru_cache(maxsize=16)
def build_sphere_rule(n: int, angular_order: int = ANGULAR_ORDER) -> DirectionRule:
    """Regla en S^{n-1} (medida de Hausdorff), usada por mu_hat_p e I_u1"""
    _check_parameters(n, angular_order)
    nodes, weights = _angular_nodes(n, angular_order)
    meta = {"radial_order": 0, "angular_order": angular_order if n > 1 else 0, "kind": "sphere"}
    return DirectionRule(n, nodes, weights, 1.0, meta)


def support_mask(rule: DirectionRule, support: Optional[BoxDomain]) -> np.ndarray:
    if support is None:
        return np.ones(rule.size, dtype=bool)
    return support.contains(rule.nodes)


def integrate_values(rule: DirectionRule, values: np.ndarray, support: Optional[BoxDomain] = None) -> float:
    """Suma sum_{xi_i en support} w_i v_i en orden creciente de nodo"""
    values = np.asarray(values, dtype=float)
    mask = support_mask(rule, support)
    bad = np.flatnonzero(mask & ~np.isfinite(values))
    if bad.size:
        raise EvaluationError(f"integrando no finito en el nodo {int(bad[0])}", int(bad[0]))
    return float(np.sum(rule.weights[mask] * values[mask]))


def integrate(rule: DirectionRule, f: Callable[[np.ndarray], np.ndarray],
              support: Optional[BoxDomain] = None) -> float:
    """
    Integra f contra e^{-|xi|^2}. `f` recibe los nodos (M, n) y devuelve (M,);
    los nodos fuera de `support` aportan 0 y no se evalúan.
    """
    mask = support_mask(rule, support)
    values = np.zeros(rule.size)
    if np.any(mask):
        values[mask] = np.asarray(f(rule.nodes[mask]), dtype=float).reshape(-1)
    return integrate_values(rule, values, support)


class QuadratureService:
    def __init__(self, radial_order: int = RADIAL_ORDER, angular_order: int = ANGULAR_ORDER, r_max: float = R_MAX):
        self.radial_order = radial_order
        self.angular_order = angular_order
        self.r_max = r_max

    @classmethod
    def from_config(cls, quad: Optional[dict]) -> "QuadratureService":
        quad = quad or {}
        return cls(quad.get("radial_order", RADIAL_ORDER), quad.get("angular_order", ANGULAR_ORDER),
                   quad.get("r_max", R_MAX))

    def direction_rule(self, n: int) -> DirectionRule:
        """Obtiene la regla de direcciones para la dimensión n"""
        return build_direction_rule(n, self.radial_order, self.angular_order, self.r_max)

    def sphere_rule(self, n: int) -> DirectionRule:
        """Obtiene la regla en la esfera para la dimensión n"""
        return build_sphere_rule(n, self.angular_order)
