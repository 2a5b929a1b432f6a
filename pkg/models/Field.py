from typing import List, Optional, Sequence, Tuple

import numpy as np

from models.Domain import Grid
from models.Section1D import Section1D
from services.errors import ParameterError, SideConventionError


class AnalyticField:
    """
    Desplazamiento en forma cerrada. Las subclases implementan evaluate,
    gradient, jump_planes y trace; eval/sample se construyen encima.
    """

    dimension: int

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jump_planes(self) -> List[Tuple[np.ndarray, float, np.ndarray]]:
        """Lista de (nu, c, [u]) con [u] = value_plus - value_minus"""
        return []

    def trace(self, y: np.ndarray, direction: np.ndarray) -> Section1D:
        raise NotImplementedError

    def hits_jump_plane(self, points: np.ndarray) -> bool:
        pts = np.atleast_2d(points)
        for nu, c, _ in self.jump_planes():
            if np.any(np.abs(pts @ nu - c) <= 1e-12 * (1.0 + abs(c))):
                return True
        return False

    def eval(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        for nu, c, _ in self.jump_planes():
            if float(x @ nu) == c:
                raise SideConventionError(f"punto {x.tolist()} sobre el plano de salto x.nu = {c}")
        return self.evaluate(x[None, :])[0]

    def sample(self, grid: Grid, dirichlet_mask: Optional[np.ndarray] = None) -> "SampledField":
        if self.hits_jump_plane(grid.centers):
            grid = Grid(grid.domain, grid.h, shift=grid.h / 7.0)
        return SampledField(grid, self.evaluate(grid.centers), dirichlet_mask)

    def __add__(self, other: "AnalyticField") -> "Sum":
        return Sum([self, other])


class Affine(AnalyticField):
    def __init__(self, A, b=None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ParameterError(f"A debe ser cuadrada: {self.A.shape}")
        self.b = np.zeros(n) if b is None else np.asarray(b, dtype=float).reshape(n)
        self.dimension = n

    @property
    def symmetric_gradient(self) -> np.ndarray:
        return 0.5 * (self.A + self.A.T)

    def evaluate(self, points):
        return np.atleast_2d(points) @ self.A.T + self.b

    def gradient(self, points):
        pts = np.atleast_2d(points)
        return np.broadcast_to(self.A, pts.shape[:-1] + self.A.shape).copy()

    def trace(self, y, direction):
        d = np.asarray(direction, dtype=float)
        y = np.asarray(y, dtype=float)
        return Section1D.affine(float((self.A @ y + self.b) @ d), float((self.A @ d) @ d))

    def __repr__(self):
        return f"Affine(A={self.A.tolist()}, b={self.b.tolist()})"


class PlaneJump(AnalyticField):
    def __init__(self, normal, offset: float, value_minus, value_plus):
        self.normal = np.asarray(normal, dtype=float).reshape(-1)
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-9:
            raise ParameterError(f"la normal debe ser unitaria: {self.normal.tolist()}")
        self.offset = float(offset)
        self.value_minus = np.asarray(value_minus, dtype=float).reshape(-1)
        self.value_plus = np.asarray(value_plus, dtype=float).reshape(-1)
        self.dimension = self.normal.size

    @property
    def amplitude(self) -> np.ndarray:
        return self.value_plus - self.value_minus

    def evaluate(self, points):
        pts = np.atleast_2d(points)
        plus = (pts @ self.normal > self.offset)[..., None]
        return np.where(plus, self.value_plus, self.value_minus)

    def gradient(self, points):
        pts = np.atleast_2d(points)
        return np.zeros(pts.shape[:-1] + (self.dimension, self.dimension))

    def jump_planes(self):
        return [(self.normal, self.offset, self.amplitude)]

    def trace(self, y, direction):
        d = np.asarray(direction, dtype=float)
        s0 = float(np.asarray(y, dtype=float) @ self.normal)
        a = float(d @ self.normal)
        vm, vp = float(self.value_minus @ d), float(self.value_plus @ d)
        if a == 0.0:
            # recta paralela al plano
            return Section1D.constant(vp if s0 > self.offset else vm, degenerate=(s0 == self.offset))
        t_star = (self.offset - s0) / a
        left, right = (vm, vp) if a > 0 else (vp, vm)
        return Section1D([t_star], [0.0, 0.0], [left, right])

    def __repr__(self):
        return f"PlaneJump(nu={self.normal.tolist()}, c={self.offset}, [u]={self.amplitude.tolist()})"


class Ramp(AnalyticField):
    """u(x) = value * clamp((x.nu - start) / (end - start), 0, 1)"""

    def __init__(self, normal, start: float, end: float, value):
        self.normal = np.asarray(normal, dtype=float).reshape(-1)
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-9:
            raise ParameterError(f"la normal debe ser unitaria: {self.normal.tolist()}")
        if end <= start:
            raise ParameterError("end debe ser mayor que start")
        self.start, self.end = float(start), float(end)
        self.value = np.asarray(value, dtype=float).reshape(-1)
        self.dimension = self.normal.size

    def _fraction(self, pts):
        return np.clip((pts @ self.normal - self.start) / (self.end - self.start), 0.0, 1.0)

    def evaluate(self, points):
        pts = np.atleast_2d(points)
        return self._fraction(pts)[..., None] * self.value

    def gradient(self, points):
        pts = np.atleast_2d(points)
        s = pts @ self.normal
        inside = ((s > self.start) & (s < self.end))[..., None, None]
        slope = np.outer(self.value, self.normal) / (self.end - self.start)
        return np.where(inside, slope, 0.0)

    def trace(self, y, direction):
        d = np.asarray(direction, dtype=float)
        s0 = float(np.asarray(y, dtype=float) @ self.normal)
        a = float(d @ self.normal)
        wd = float(self.value @ d)
        length = self.end - self.start
        if a == 0.0:
            return Section1D.constant(wd * float(np.clip((s0 - self.start) / length, 0.0, 1.0)))
        t0, t1 = sorted(((self.start - s0) / a, (self.end - s0) / a))
        low, high = (0.0, wd) if a > 0 else (wd, 0.0)
        return Section1D([t0, t1], [0.0, wd * a / length, 0.0],
                         [low, wd * (s0 - self.start) / length, high])

    def __repr__(self):
        return f"Ramp(nu={self.normal.tolist()}, start={self.start}, end={self.end}, value={self.value.tolist()})"


class Sum(AnalyticField):
    def __init__(self, terms: Sequence[AnalyticField]):
        flat: List[AnalyticField] = []
        for term in terms:
            flat.extend(term.terms if isinstance(term, Sum) else [term])
        if not flat:
            raise ParameterError("Sum necesita al menos un término")
        dims = {t.dimension for t in flat}
        if len(dims) != 1:
            raise ParameterError(f"dimensiones incompatibles: {sorted(dims)}")
        self.terms = flat
        self.dimension = dims.pop()

    def evaluate(self, points):
        return sum(t.evaluate(points) for t in self.terms)

    def gradient(self, points):
        return sum(t.gradient(points) for t in self.terms)

    def jump_planes(self):
        return [plane for t in self.terms for plane in t.jump_planes()]

    def trace(self, y, direction):
        section = self.terms[0].trace(y, direction)
        for term in self.terms[1:]:
            section = section + term.trace(y, direction)
        return section

    def __repr__(self):
        return f"Sum({self.terms})"


class SampledField:
    """
    Valores nodales en los centros de una malla.

    Atributos:
        grid (Grid): malla
        values (ndarray): desplazamiento por celda, forma (N, n)
        dirichlet_mask (ndarray): celdas congeladas (dato de Dirichlet)
    """

    def __init__(self, grid: Grid, values: np.ndarray, dirichlet_mask: Optional[np.ndarray] = None):
        self.grid = grid
        self.values = np.array(values, dtype=float).reshape(grid.size, grid.dimension)
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("valores no finitos en el campo muestreado")
        if dirichlet_mask is None:
            dirichlet_mask = np.zeros(grid.size, dtype=bool)
        self.dirichlet_mask = np.asarray(dirichlet_mask, dtype=bool).reshape(grid.size)

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    @property
    def free_mask(self) -> np.ndarray:
        return ~self.dirichlet_mask

    def at(self, points: np.ndarray) -> np.ndarray:
        idx, wts = self.grid.stencil(points)
        return np.einsum("...k,...kj->...j", wts, self.values[idx])

    def with_values(self, values: np.ndarray) -> "SampledField":
        return SampledField(self.grid, values, self.dirichlet_mask)

    def copy(self) -> "SampledField":
        return SampledField(self.grid, self.values.copy(), self.dirichlet_mask.copy())

    def __repr__(self):
        return f"SampledField({self.grid}, frozen={int(self.dirichlet_mask.sum())})"
