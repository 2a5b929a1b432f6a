from dataclasses import dataclass
from enum import Enum


class Convention(str, Enum):
    """Normalización de las constantes phi_p y beta_p"""
    VERBATIM = "lemma-limite-verbatim"
    EMPIRICAL = "empirical-calibrated"


@dataclass(frozen=True)
class GriffithValue:
    """
    Energía de Griffith de un campo analítico: volumen + superficie.

    Atributos:
        bulk (float): int phi_p(e(u)) dx
        surface (float): beta_p * H^{n-1}(J_u)
        convention (Convention): normalización usada
    """
    bulk: float
    surface: float
    convention: Convention = Convention.EMPIRICAL

    def __post_init__(self):
        if self.bulk < 0 or self.surface < 0:
            raise ValueError("las partes de la energía deben ser no negativas")

    @property
    def total(self) -> float:
        return self.bulk + self.surface

    def to_dict(self) -> dict:
        return {
            "bulk": self.bulk,
            "surface": self.surface,
            "total": self.total,
            "convention": self.convention.value,
        }
