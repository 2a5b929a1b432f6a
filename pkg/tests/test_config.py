import pytest
from pydantic import ValidationError

from models.Config import ProblemConfig
from models.Field import PlaneJump, Sum
from services.errors import DomainError


def _problem(field, lower=(0.0, 0.0), upper=(1.0, 1.0), **extra):
    return ProblemConfig.model_validate({"domain": {"lower": list(lower), "upper": list(upper), **extra},
                                         "field": field})


JUMP = {"kind": "plane_jump", "normal": [1.0, 0.0], "offset": 0.5,
        "value_minus": [0.0, 0.0], "value_plus": [1.0, 0.0]}


def test_nested_sum_is_built():
    field = {"kind": "sum", "terms": [
        {"kind": "affine", "A": [[1.0, 0.0], [0.0, 0.5]], "b": [0.1, 0.2]},
        {"kind": "sum", "terms": [JUMP, {"kind": "ramp", "normal": [0.0, 1.0], "start": 0.2, "end": 0.4,
                                         "value": [0.0, 0.3]}]},
    ]}
    problem = _problem(field)
    u = problem.to_field()
    assert isinstance(u, Sum)
    assert u.dimension == 2
    assert len(u.jump_planes()) == 1
    assert problem.quad.radial_order == 32


def test_precrack_and_quadrature_options():
    problem = ProblemConfig.model_validate({
        "domain": {"lower": [0.0, 0.0], "upper": [1.0, 1.0],
                   "precrack": [{"axis": 0, "offset": 0.4, "lower": [0.0], "upper": [0.45]}]},
        "field": JUMP,
        "quad": {"radial_order": 16, "angular_order": 24},
    })
    domain = problem.to_domain()
    assert len(domain.precrack) == 1
    assert problem.quad.angular_order == 24
    assert isinstance(problem.to_field(), PlaneJump)


def test_invalid_documents():
    with pytest.raises(ValidationError):
        _problem({**JUMP, "normal": [1.0, 1.0]})
    with pytest.raises(ValidationError):
        _problem({"kind": "ramp", "normal": [1.0, 0.0], "start": 0.5, "end": 0.5, "value": [1.0, 0.0]})
    with pytest.raises(ValidationError):
        _problem({"kind": "spline", "knots": []})
    with pytest.raises(ValidationError):
        _problem(JUMP, lower=(0.0, 1.0), upper=(1.0, 1.0))
    with pytest.raises(ValidationError):
        _problem(JUMP, lower=(0.0,), upper=(1.0, 1.0))
    with pytest.raises(ValidationError):
        ProblemConfig.model_validate({"domain": {"lower": [0.0], "upper": [1.0]},
                                      "field": {"kind": "affine", "A": [[1.0]]}, "quad": {"r_max": 2.0}})


def test_dimension_mismatch_is_a_domain_error():
    problem = _problem({"kind": "affine", "A": [[1.0]]})
    with pytest.raises(DomainError):
        problem.to_field()
