from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from models.Domain import Ball, BoxDomain


@dataclass(frozen=True)
class BallStrategy:
    """
    Estrategia de búsqueda de familias de bolas: "dyadic:L" (niveles 0..L)
    o "greedy:K" (hasta K bolas, radios decrecientes por `shrink`).
    """
    kind: str
    size: int
    shrink: float = 0.5

    def __post_init__(self):
        if self.kind not in ("dyadic", "greedy"):
            raise ValueError(f"estrategia desconocida: {self.kind}")
        if self.size < 0 or (self.kind == "greedy" and self.size < 1):
            raise ValueError(f"tamaño de estrategia inválido: {self.size}")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink debe estar en (0, 1)")

    @classmethod
    def parse(cls, text: str) -> "BallStrategy":
        kind, _, size = text.partition(":")
        return cls(kind.strip(), int(size) if size else (2 if kind.strip() == "dyadic" else 8))

    def __str__(self):
        return f"{self.kind}:{self.size}"


@dataclass(frozen=True)
class BallFamily:
    """
    Familia finita de bolas abiertas disjuntas contenidas en Omega.

    Validaciones:
        - |c_i - c_j| >= r_i + r_j (bolas abiertas disjuntas)
    """
    balls: Tuple[Ball, ...]

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))
        if not self.is_disjoint():
            raise ValueError("las bolas de la familia deben ser disjuntas")

    def is_disjoint(self) -> bool:
        for i, a in enumerate(self.balls):
            for b in self.balls[i + 1:]:
                gap = np.linalg.norm(np.subtract(a.center, b.center))
                if gap < a.radius + b.radius - 1e-12:
                    return False
        return True

    def inside(self, domain: BoxDomain) -> bool:
        return all(domain.contains_ball(b) for b in self.balls)

    def __iter__(self) -> Iterator[Ball]:
        return iter(self.balls)

    def __len__(self) -> int:
        return len(self.balls)

    def describe(self) -> str:
        return ";".join(f"{tuple(round(c, 6) for c in b.center)}:{b.radius:.6g}" for b in self.balls)

    def __repr__(self):
        return f"BallFamily({len(self.balls)} bolas)"
