from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from config.settings import H_FACTOR
from models.Config import ProblemConfig


class SweepSpec(BaseModel):
    """
    Barrido en eps para un campo analítico.

    Validaciones:
        - eps_list estrictamente decreciente y positiva
        - h = eps / h_factor con h_factor >= 4
        - p >= 1
        - method "sliced" solo con energy "f_eps"
    """
    problem: ProblemConfig
    eps_list: List[float] = Field(min_length=2)
    h_factor: int = Field(default=H_FACTOR, ge=4)
    p: float = Field(default=1.0, ge=1.0)
    energy: Literal["f_eps", "fp_eps"] = "f_eps"
    method: Literal["grid", "sliced"] = "grid"
    strategy: str = "dyadic:2"
    convention: Literal["empirical-calibrated", "lemma-limite-verbatim"] = "empirical-calibrated"
    target: Optional[float] = None
    output: Optional[str] = None
    workers: int = Field(default=1, ge=1)

    @field_validator("eps_list")
    @classmethod
    def decreasing(cls, v):
        if any(e <= 0 for e in v):
            raise ValueError("todos los eps deben ser positivos")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("eps_list debe ser estrictamente decreciente")
        return v

    @model_validator(mode="after")
    def sliced_only_for_f_eps(self):
        if self.method == "sliced" and self.energy != "f_eps":
            raise ValueError("method=sliced solo admite energy=f_eps")
        return self


class AuditSpec(BaseModel):
    """Parámetros del conjunto de desigualdades sobre campos 1D aleatorios"""
    fields: int = Field(default=10, ge=1)
    seed: int = 0
    eps_list: List[float] = Field(default_factory=lambda: [0.1, 0.01])
    steps: List[int] = Field(default_factory=lambda: [2, 3, 5])
    lower_eps: float = Field(default=1e-4, gt=0)
    lower_tol: float = Field(default=1e-3, gt=0)
    translation_delta: List[float] = Field(default_factory=lambda: [0.01, 0.05, 0.1])
    output: Optional[str] = None

    @field_validator("steps")
    @classmethod
    def positive_steps(cls, v):
        if any(m < 1 for m in v):
            raise ValueError("los pasos m deben ser >= 1")
        return v


@dataclass
class ExtrapolationResult:
    """
    Valores por eps, límite extrapolado (Richardson de orden 1) y error
    relativo |R - target| / (1 + |target|).
    """
    eps: List[float]
    values: List[float]
    extrapolated: float
    target: float
    raw_smallest: float
    h: List[float] = field(default_factory=list)
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def relative_error(self) -> float:
        return abs(self.extrapolated - self.target) / (1.0 + abs(self.target))

    @property
    def raw_relative_error(self) -> float:
        return abs(self.raw_smallest - self.target) / (1.0 + abs(self.target))

    def passed(self, tolerance: float) -> bool:
        return self.relative_error <= tolerance
