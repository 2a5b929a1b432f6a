from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from config.settings import ANGULAR_ORDER, R_MAX, RADIAL_ORDER
from models.Domain import BoxDomain, PlaneSegment
from models.Field import Affine, AnalyticField, PlaneJump, Ramp, Sum
from services.errors import DomainError


class PrecrackConfig(BaseModel):
    axis: int = Field(ge=0)
    offset: float
    lower: List[float]
    upper: List[float]


class DomainConfig(BaseModel):
    """Caja prod (lower_i, upper_i) con pregrietas opcionales"""
    lower: List[float] = Field(min_length=1, max_length=3)
    upper: List[float] = Field(min_length=1, max_length=3)
    precrack: List[PrecrackConfig] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_box(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower y upper deben tener la misma longitud")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("caja vacía")
        return self

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def to_domain(self) -> BoxDomain:
        cracks = tuple(PlaneSegment(c.axis, c.offset, tuple(c.lower), tuple(c.upper)) for c in self.precrack)
        return BoxDomain(tuple(self.lower), tuple(self.upper), cracks)


class AffineConfig(BaseModel):
    kind: Literal["affine"] = "affine"
    A: List[List[float]]
    b: Optional[List[float]] = None

    def build(self) -> AnalyticField:
        return Affine(self.A, self.b)


class PlaneJumpConfig(BaseModel):
    kind: Literal["plane_jump"] = "plane_jump"
    normal: List[float]
    offset: float
    value_minus: List[float]
    value_plus: List[float]

    @field_validator("normal")
    @classmethod
    def unit_normal(cls, v):
        if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
            raise ValueError("la normal debe ser unitaria")
        return v

    def build(self) -> AnalyticField:
        return PlaneJump(self.normal, self.offset, self.value_minus, self.value_plus)


class RampConfig(BaseModel):
    kind: Literal["ramp"] = "ramp"
    normal: List[float]
    start: float
    end: float
    value: List[float]

    @model_validator(mode="after")
    def check_slab(self):
        if self.end <= self.start:
            raise ValueError("end debe ser mayor que start")
        return self

    def build(self) -> AnalyticField:
        return Ramp(self.normal, self.start, self.end, self.value)


class SumConfig(BaseModel):
    kind: Literal["sum"] = "sum"
    terms: List["FieldConfig"] = Field(min_length=1)

    def build(self) -> AnalyticField:
        return Sum([t.build() for t in self.terms])


FieldConfig = Annotated[Union[AffineConfig, PlaneJumpConfig, RampConfig, SumConfig], Field(discriminator="kind")]
SumConfig.model_rebuild()


class QuadConfig(BaseModel):
    radial_order: int = Field(default=RADIAL_ORDER, ge=2)
    angular_order: int = Field(default=ANGULAR_ORDER, ge=2)
    r_max: float = Field(default=R_MAX, ge=3.0)


class ProblemConfig(BaseModel):
    """Documento {"domain": ..., "field": ..., "quad": ...}"""
    domain: DomainConfig
    field: FieldConfig
    quad: QuadConfig = Field(default_factory=QuadConfig)

    def to_domain(self) -> BoxDomain:
        return self.domain.to_domain()

    def to_field(self) -> AnalyticField:
        u = self.field.build()
        if u.dimension != self.domain.dimension:
            raise DomainError(f"el campo tiene dimensión {u.dimension} y el dominio {self.domain.dimension}")
        return u
