from dataclasses import dataclass, field
from typing import Dict

import numpy as np


@dataclass(frozen=True)
class DirectionRule:
    """
    Nodos y pesos para integrales del tipo int f(xi) e^{-|xi|^2} dxi.

    Atributos:
        dimension (int): n
        nodes (ndarray): nodos xi_i, forma (M, n)
        weights (ndarray): pesos positivos w_i (el factor gaussiano ya incluido)
        truncation_radius (float): R_max, todos los nodos cumplen |xi_i| <= R_max
        meta (dict): radial_order, angular_order, kind

    Validaciones:
        - sum(w_i) ~ pi^{n/2} (se comprueba al construir la regla)
    """
    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    truncation_radius: float
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.nodes, axis=1)

    def descriptor(self) -> str:
        return (f"{self.meta.get('kind', 'gauss')}:n={self.dimension}"
                f":radial={self.meta.get('radial_order')}:angular={self.meta.get('angular_order')}"
                f":rmax={self.truncation_radius:g}")

    def rotated(self, angle: float) -> "DirectionRule":
        """Gira todos los nodos en el plano (x1, x2) un mismo ángulo"""
        if self.dimension < 2:
            return self
        c, s = np.cos(angle), np.sin(angle)
        rot = np.eye(self.dimension)
        rot[:2, :2] = [[c, -s], [s, c]]
        return DirectionRule(self.dimension, self.nodes @ rot.T, self.weights, self.truncation_radius, dict(self.meta))
