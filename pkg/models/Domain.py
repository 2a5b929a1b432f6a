from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from services.errors import DomainError, GridCapabilityError, ParameterError
from config.settings import MAX_CELLS


@dataclass(frozen=True)
class PlaneSegment:
    """
    Pedazo de hiperplano {x[axis] = offset} recortado a la caja [lower, upper]
    en las demás coordenadas (la coordenada `axis` de lower/upper se ignora).
    """
    axis: int
    offset: float
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def distance(self, point: Sequence[float]) -> float:
        p = np.asarray(point, dtype=float)
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        q = np.clip(p, lo, hi)
        q[self.axis] = self.offset
        return float(np.linalg.norm(p - q))

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        """Puntos a distancia <= tol del plano, dentro del recorte en las demás coordenadas"""
        pts = np.atleast_2d(points)
        on = np.abs(pts[:, self.axis] - self.offset) <= tol
        for j in range(pts.shape[1]):
            if j == self.axis:
                continue
            on &= (pts[:, j] >= self.lower[j]) & (pts[:, j] <= self.upper[j])
        return on

    def area(self) -> float:
        sides = [self.upper[j] - self.lower[j] for j in range(len(self.lower)) if j != self.axis]
        return float(np.prod(sides)) if sides else 1.0


@dataclass(frozen=True)
class Ball:
    center: Tuple[float, ...]
    radius: float

    @property
    def dimension(self) -> int:
        return len(self.center)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        c = np.asarray(self.center, dtype=float)
        return np.sum((pts - c) ** 2, axis=-1) < self.radius ** 2

    def minkowski_support(self, eps: float) -> "BoxDomain":
        # (B - B)/eps es la bola de radio 2r/eps; su caja circunscrita basta
        if eps <= 0:
            raise ParameterError(f"eps debe ser positivo: {eps}")
        half = 2.0 * self.radius / eps
        n = self.dimension
        return BoxDomain(tuple([-half] * n), tuple([half] * n))

    def chord(self, y: np.ndarray, direction: np.ndarray) -> Optional[Tuple[float, float]]:
        """Intervalo de t con y + t*direction dentro de la bola"""
        c = np.asarray(self.center, dtype=float)
        d = np.asarray(direction, dtype=float)
        w = np.asarray(y, dtype=float) - c
        a = float(d @ d)
        b = float(w @ d)
        disc = b * b - a * (float(w @ w) - self.radius ** 2)
        if disc <= 0.0:
            return None
        root = np.sqrt(disc)
        return ((-b - root) / a, (-b + root) / a)

    def volume(self) -> float:
        from scipy.special import gamma
        n = self.dimension
        return float(np.pi ** (n / 2) / gamma(n / 2 + 1) * self.radius ** n)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center, dtype=float)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class BoxDomain:
    """
    Caja abierta prod_i (lower_i, upper_i), opcionalmente menos una lista
    de pregrietas planas.

    Validaciones:
        - lower[i] < upper[i] para todo i
        - las pregrietas quedan dentro de la caja cerrada
    """
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    precrack: Tuple[PlaneSegment, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "precrack", tuple(self.precrack))
        if len(self.lower) != len(self.upper) or not self.lower:
            raise DomainError("lower y upper deben tener la misma dimensión")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise DomainError(f"caja vacía: {self.lower} / {self.upper}")
        for seg in self.precrack:
            if len(seg.lower) != self.dimension or not 0 <= seg.axis < self.dimension:
                raise DomainError("pregrieta con dimensión incorrecta")
            if not self.lower[seg.axis] <= seg.offset <= self.upper[seg.axis]:
                raise DomainError("pregrieta fuera de la caja")
            for j in range(self.dimension):
                if j != seg.axis and not (self.lower[j] <= seg.lower[j] <= seg.upper[j] <= self.upper[j]):
                    raise DomainError("pregrieta fuera de la caja")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float)

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo

    def volume(self) -> float:
        return float(np.prod(self.sides))

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.lo, self.hi

    def minkowski_support(self, eps: float) -> "BoxDomain":
        return minkowski_support(self, eps)

    def contains(self, points: np.ndarray, crack_tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(points)
        inside = np.all((pts > self.lo) & (pts < self.hi), axis=-1)
        # la pregrieta se resta de Omega solo en el test de pertenencia
        for seg in self.precrack:
            inside &= ~seg.contains(pts, crack_tol)
        return inside

    def contains_ball(self, ball: Ball) -> bool:
        c = np.asarray(ball.center, dtype=float)
        if np.any(c - ball.radius < self.lo - 1e-12) or np.any(c + ball.radius > self.hi + 1e-12):
            return False
        return all(seg.distance(c) >= ball.radius for seg in self.precrack)

    def inset(self, eta: float) -> "BoxDomain":
        return BoxDomain(tuple(self.lo + eta), tuple(self.hi - eta))

    def contains_box(self, other: "BoxDomain") -> bool:
        return bool(np.all(other.lo >= self.lo) and np.all(other.hi <= self.hi))

    def chord(self, y: np.ndarray, direction: np.ndarray) -> Optional[Tuple[float, float]]:
        """Intervalo de t con y + t*direction dentro de la caja abierta"""
        y = np.asarray(y, dtype=float)
        d = np.asarray(direction, dtype=float)
        t0, t1 = -np.inf, np.inf
        for i in range(self.dimension):
            if d[i] == 0.0:
                if not self.lower[i] < y[i] < self.upper[i]:
                    return None
                continue
            a = (self.lower[i] - y[i]) / d[i]
            b = (self.upper[i] - y[i]) / d[i]
            t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
        if t1 <= t0:
            return None
        return (t0, t1)

    def __repr__(self):
        return f"BoxDomain(lower={self.lower}, upper={self.upper}, precrack={len(self.precrack)})"


def minkowski_support(domain: BoxDomain, eps: float) -> BoxDomain:
    """Caja (Omega - Omega)/eps"""
    if eps <= 0:
        raise ParameterError(f"eps debe ser positivo: {eps}")
    half = domain.sides / eps
    return BoxDomain(tuple(-half), tuple(half))


class Grid:
    """
    Malla de celdas centradas que recubre la caja de `domain`.

    Atributos:
        spacing (ndarray): paso por eje (side / shape)
        shape (tuple): número de celdas por eje
        centers (ndarray): centros de celda, orden C, forma (N, n)
        inside_mask (ndarray): centro dentro de Omega (pregrietas incluidas)
    """

    def __init__(self, domain: BoxDomain, h: float, shift: float = 0.0):
        if h <= 0:
            raise ParameterError(f"h debe ser positivo: {h}")
        self.domain = domain
        self.shift = float(shift)
        self.shape = tuple(max(1, int(round(s / h))) for s in domain.sides)
        n_cells = int(np.prod(self.shape))
        if n_cells > MAX_CELLS:
            raise GridCapabilityError(f"la malla tendría {n_cells} celdas (máximo {MAX_CELLS})")
        self.spacing = domain.sides / np.asarray(self.shape, dtype=float)
        self.h = float(self.spacing.max())
        self.origin = domain.lo + self.shift
        axes = [self.origin[i] + (np.arange(m) + 0.5) * self.spacing[i] for i, m in enumerate(self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        self.centers = np.stack([m.ravel() for m in mesh], axis=-1)
        # una pregrieta quita la capa de celdas a menos de h/2 de su plano
        self.inside_mask = domain.contains(self.centers, crack_tol=0.5 * self.h)

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def size(self) -> int:
        return self.centers.shape[0]

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @classmethod
    def for_field(cls, domain: BoxDomain, h: float, field=None) -> "Grid":
        """Malla que evita que los centros caigan sobre un plano de salto"""
        grid = cls(domain, h)
        if field is not None and field.hits_jump_plane(grid.centers):
            grid = cls(domain, h, shift=grid.h / 7.0)
        return grid

    def stencil(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Índices y pesos de la interpolación multilineal en los puntos dados.
        Fuera del casco de los centros se extrapola linealmente.
        """
        pts = np.atleast_2d(points)
        n = self.dimension
        q = (pts - self.origin) / self.spacing - 0.5
        shape = np.asarray(self.shape)
        i0 = np.clip(np.floor(q), 0, np.maximum(shape - 2, 0)).astype(np.int64)
        t = np.where(shape > 1, q - i0, 0.0)
        n_corners = 1 << n
        idx = np.zeros(pts.shape[:-1] + (n_corners,), dtype=np.int64)
        wts = np.ones(pts.shape[:-1] + (n_corners,), dtype=float)
        for corner in range(n_corners):
            flat = np.zeros(pts.shape[:-1], dtype=np.int64)
            for axis in range(n):
                bit = (corner >> (n - 1 - axis)) & 1
                ia = np.minimum(i0[..., axis] + bit, shape[axis] - 1)
                flat = flat * shape[axis] + ia
                wts[..., corner] *= t[..., axis] if bit else 1.0 - t[..., axis]
            idx[..., corner] = flat
        return idx, wts

    def __repr__(self):
        return f"Grid(shape={self.shape}, h={self.h:.6g}, shift={self.shift:.3g})"
