from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from models.Field import SampledField


class StopReason(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    LINE_SEARCH_FAILED = "line_search_failed"
    GRID_CAPABILITY = "grid_capability"


@dataclass
class DescentTrace:
    """
    Historia del descenso. iterates[k], grad_norms[k], step_sizes[k] y
    eps_levels[k] describen el k-ésimo iterado aceptado.
    """
    iterates: List[float] = field(default_factory=list)
    grad_norms: List[float] = field(default_factory=list)
    step_sizes: List[float] = field(default_factory=list)
    eps_levels: List[float] = field(default_factory=list)
    final: Optional[SampledField] = None
    converged: bool = False
    stop_reason: StopReason = StopReason.MAX_ITER
    snapshots: List[np.ndarray] = field(default_factory=list)
    gap: Optional[float] = None

    def record(self, energy: float, grad_norm: float, step: float, eps: float):
        self.iterates.append(float(energy))
        self.grad_norms.append(float(grad_norm))
        self.step_sizes.append(float(step))
        self.eps_levels.append(float(eps))

    @property
    def energy(self) -> float:
        return self.iterates[-1] if self.iterates else float("nan")

    def is_monotone(self) -> bool:
        """Energía no creciente dentro de cada nivel de eps"""
        for k in range(1, len(self.iterates)):
            if self.eps_levels[k] == self.eps_levels[k - 1] and self.iterates[k] > self.iterates[k - 1]:
                return False
        return True

    def rows(self) -> List[dict]:
        return [
            {"iteration": k, "eps": self.eps_levels[k], "energy": self.iterates[k],
             "grad_norm": self.grad_norms[k], "step": self.step_sizes[k]}
            for k in range(len(self.iterates))
        ]
