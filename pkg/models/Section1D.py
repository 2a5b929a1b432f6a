from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from config.settings import JUMP_TOL


class Section1D:
    """
    Traza unidimensional t -> u(y + t*xi) . xi, afín a trozos con saltos.

    Atributos:
        breakpoints (ndarray): puntos de quiebre t_k, estrictamente crecientes
        slopes (ndarray): pendiente de cada trozo (K + 1 valores)
        intercepts (ndarray): ordenada en t = 0 de cada trozo
        domain (tuple): unión de intervalos abiertos donde vive la traza
        degenerate (bool): la recta corre dentro del conjunto de salto
        kind (str): "piecewise" o "sampled"
    """

    def __init__(self, breakpoints: Sequence[float], slopes: Sequence[float], intercepts: Sequence[float],
                 domain: Tuple[Tuple[float, float], ...] = ((-np.inf, np.inf),),
                 degenerate: bool = False, kind: str = "piecewise"):
        self.breakpoints = np.asarray(breakpoints, dtype=float).reshape(-1)
        self.slopes = np.asarray(slopes, dtype=float).reshape(-1)
        self.intercepts = np.asarray(intercepts, dtype=float).reshape(-1)
        if self.slopes.size != self.breakpoints.size + 1 or self.intercepts.size != self.slopes.size:
            raise ValueError("se necesitan K + 1 trozos para K puntos de quiebre")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("los puntos de quiebre deben ser estrictamente crecientes")
        if not np.all(np.isfinite(self.slopes)):
            raise ValueError("pendientes no finitas")
        self.domain = tuple((float(a), float(b)) for a, b in domain)
        self.degenerate = degenerate
        self.kind = kind

    @classmethod
    def constant(cls, value: float, **kwargs) -> "Section1D":
        return cls([], [0.0], [value], **kwargs)

    @classmethod
    def affine(cls, intercept: float, slope: float, **kwargs) -> "Section1D":
        return cls([], [slope], [intercept], **kwargs)

    @classmethod
    def sampled(cls, t: Sequence[float], values: Sequence[float]) -> "Section1D":
        """Interpolante lineal de muestras (t_i, v_i)"""
        t = np.asarray(t, dtype=float)
        v = np.asarray(values, dtype=float)
        slopes = np.diff(v) / np.diff(t)
        intercepts = v[:-1] - slopes * t[:-1]
        return cls(t[1:-1], slopes, intercepts, domain=((t[0], t[-1]),), kind="sampled")

    def piece_index(self, t) -> np.ndarray:
        # en un punto de quiebre se toma el trozo de la derecha
        return np.searchsorted(self.breakpoints, t, side="right")

    def value(self, t):
        k = self.piece_index(t)
        return self.intercepts[k] + self.slopes[k] * np.asarray(t, dtype=float)

    def left_value(self, t):
        k = np.searchsorted(self.breakpoints, t, side="left")
        return self.intercepts[k] + self.slopes[k] * np.asarray(t, dtype=float)

    @property
    def jumps(self) -> np.ndarray:
        bp = self.breakpoints
        right = self.intercepts[1:] + self.slopes[1:] * bp
        left = self.intercepts[:-1] + self.slopes[:-1] * bp
        return right - left

    def jump_points(self) -> Tuple[np.ndarray, np.ndarray]:
        """Puntos de quiebre con salto no nulo y sus amplitudes"""
        jumps = self.jumps
        scale = 1.0 + np.max(np.abs(self.intercepts), initial=0.0)
        keep = np.abs(jumps) > JUMP_TOL * scale
        return self.breakpoints[keep], jumps[keep]

    def span(self) -> Tuple[float, float]:
        return self.domain[0][0], self.domain[-1][1]

    def covers(self, lo: float, hi: float) -> bool:
        return any(a <= lo and hi <= b for a, b in self.domain)

    def restrict(self, lo: float, hi: float) -> "Section1D":
        return Section1D(self.breakpoints, self.slopes, self.intercepts, domain=((lo, hi),),
                         degenerate=self.degenerate, kind=self.kind)

    def scaled(self, factor: float) -> "Section1D":
        return Section1D(self.breakpoints, factor * self.slopes, factor * self.intercepts, domain=self.domain,
                         degenerate=self.degenerate, kind=self.kind)

    def __add__(self, other: "Section1D") -> "Section1D":
        bp = np.union1d(self.breakpoints, other.breakpoints)
        if bp.size:
            reps = np.concatenate(([bp[0] - 1.0], 0.5 * (bp[:-1] + bp[1:]), [bp[-1] + 1.0]))
        else:
            reps = np.array([0.0])
        ka, kb = self.piece_index(reps), other.piece_index(reps)
        lo = max(self.span()[0], other.span()[0])
        hi = min(self.span()[1], other.span()[1])
        return Section1D(bp, self.slopes[ka] + other.slopes[kb], self.intercepts[ka] + other.intercepts[kb],
                         domain=((lo, hi),), degenerate=self.degenerate or other.degenerate, kind=self.kind)

    def __repr__(self):
        return f"Section1D(kind={self.kind}, breakpoints={len(self.breakpoints)}, domain={self.domain})"


@dataclass(frozen=True)
class SliceMeasureValue:
    """mu^xi de una rebanada: parte continua + número de saltos de amplitud > 1"""
    ac_part: float
    jump_count: int

    @property
    def total(self) -> float:
        return self.ac_part + self.jump_count
