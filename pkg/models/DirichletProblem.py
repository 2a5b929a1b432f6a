from typing import Optional

import numpy as np

from config.settings import H_FACTOR
from models.Domain import BoxDomain, Grid
from models.Field import AnalyticField, Ramp, SampledField
from services.errors import DomainError, ParameterError


class DirichletProblem:
    """
    Problema con condición de Dirichlet relajada: u = f en Omega' \\ Omega.

    Atributos:
        outer (BoxDomain): Omega'
        inner (BoxDomain): Omega, estrictamente contenido en Omega'
        datum (AnalyticField): dato f
        eps (float): escala inicial
        p (float): exponente con que se informa F^p_eps a posteriori
        grid (Grid): malla sobre Omega'
    """

    def __init__(self, outer: BoxDomain, inner: BoxDomain, datum: AnalyticField, eps: float,
                 p: float = 1.0, h: Optional[float] = None):
        if eps <= 0:
            raise ParameterError(f"eps debe ser positivo: {eps}")
        if p < 1:
            raise ParameterError(f"p debe ser >= 1: {p}")
        if outer.dimension != inner.dimension or datum.dimension != outer.dimension:
            raise DomainError("dimensiones incompatibles entre Omega', Omega y el dato")
        if not (np.all(inner.lo > outer.lo) and np.all(inner.hi < outer.hi)):
            raise DomainError("Omega debe estar estrictamente contenido en Omega'")
        self.outer = outer
        self.inner = inner
        self.datum = datum
        self.eps = float(eps)
        self.p = float(p)
        self.grid = Grid.for_field(outer, h if h is not None else eps / H_FACTOR, datum)
        self.frozen = ~inner.contains(self.grid.centers)
        if not np.all(np.isfinite(datum.evaluate(self.grid.centers[self.frozen]))):
            raise DomainError("el dato no es finito en Omega' \\ Omega")

    @classmethod
    def bar(cls, load: float, eps: float, h: Optional[float] = None, n: int = 1,
            margin: float = 0.1) -> "DirichletProblem":
        """Barra traccionada: 0 a la izquierda de Omega = (0,1)^n, load * e1 a la derecha"""
        e1 = np.eye(n)[0]
        outer = BoxDomain(tuple([-margin] * n), tuple([1.0 + margin] * n))
        inner = BoxDomain(tuple([0.0] * n), tuple([1.0] * n))
        return cls(outer, inner, Ramp(e1, 0.0, 1.0, load * e1), eps, h=h)

    @property
    def dimension(self) -> int:
        return self.outer.dimension

    def sampled_datum(self) -> SampledField:
        return SampledField(self.grid, self.datum.evaluate(self.grid.centers), self.frozen)

    def __repr__(self):
        return f"DirichletProblem(outer={self.outer}, inner={self.inner}, eps={self.eps}, grid={self.grid})"
