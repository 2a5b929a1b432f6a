class FracsoftError(ValueError):
    """Error base del paquete"""


class ParameterError(FracsoftError):
    """Parámetro fuera de rango (eps <= 0, p < 1, órdenes, dimensión...)"""


class RuleQualityError(FracsoftError):
    """La regla de direcciones no pasa el control de normalización"""


class SideConventionError(FracsoftError):
    """Evaluación puntual sobre un hiperplano de salto"""


class DomainError(FracsoftError):
    """Conjunto de integración fuera del dominio permitido"""


class EvaluationError(FracsoftError):
    def __init__(self, message: str, node_index: int = -1):
        super().__init__(message)
        self.node_index = node_index


class GridCapabilityError(FracsoftError):
    """La malla no resuelve eps (h > eps/4) o es demasiado grande"""
