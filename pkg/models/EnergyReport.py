from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from models.BallFamily import BallFamily


@dataclass
class EnergyReport:
    """
    Resultado de una evaluación de energía.

    total se reconstruye del desglose: suma ponderada por direcciones para
    F_eps, suma de normas p por bola para F^p_eps.
    """
    total: float
    eps: float
    p: float
    per_direction: Dict[int, float]
    grid_h: float
    rule_meta: str
    per_ball: Optional[Dict[int, float]] = None
    family: Optional[BallFamily] = None
    partitions: int = 1
    n_directions: int = 0
    strategy: str = ""
    variant: str = "standard"
    wall_ms: float = 0.0
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def n_balls(self) -> int:
        return len(self.family) if self.family is not None else 0

    def reduce_directions(self, weights: np.ndarray) -> float:
        """Reconstruye sum_i w_i F_{eps,xi_i} a partir de per_direction"""
        keys = sorted(self.per_direction)
        return float(np.sum(weights[keys] * np.array([self.per_direction[k] for k in keys])))

    def reduce_balls(self) -> float:
        return float(sum(self.per_ball[k] for k in sorted(self.per_ball))) if self.per_ball else 0.0

    def __repr__(self):
        return f"EnergyReport(total={self.total:.6g}, eps={self.eps}, p={self.p}, balls={self.n_balls})"
