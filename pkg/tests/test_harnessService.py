import csv

import numpy as np
import pytest
from pydantic import ValidationError

from models.SweepSpec import AuditSpec, SweepSpec
from services.errors import GridCapabilityError, ParameterError
from services.harnessService import (AUDIT_COLUMNS, SWEEP_COLUMNS, AuditReport, HarnessService,
                                     random_piecewise_field, richardson, translation_constant)
from services.limitService import beta_oracle, p1_bulk_density
from services.runService import RunService


def _spec(field: dict, eps_list, lower=(0.0,), upper=(1.0,), **kwargs) -> SweepSpec:
    problem = {"domain": {"lower": list(lower), "upper": list(upper)}, "field": field}
    return SweepSpec.model_validate({"problem": problem, "eps_list": list(eps_list), **kwargs})


def _read(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_richardson_removes_first_order_term():
    eps = [0.1, 0.05, 0.025]
    assert richardson(eps, [1.0 + 2.0 * e for e in eps]) == pytest.approx(1.0, abs=1e-12)
    assert richardson([0.3, 0.1], [4.0 - 0.3, 4.0 - 0.1]) == pytest.approx(4.0, abs=1e-12)
    with pytest.raises(ParameterError):
        richardson([0.1], [1.0])


def test_constant_field_sweep_is_exact(tmp_path):
    spec = _spec({"kind": "affine", "A": [[0.0]], "b": [1.0]}, [0.1, 0.05])
    out = tmp_path / "constante.csv"
    result, rows = HarnessService().run_sweep(spec, output=str(out))
    assert result.values == [0.0, 0.0]
    assert result.target == 0.0
    assert result.relative_error == 0.0
    assert [r["eps"] for r in rows] == [0.1, 0.05]
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 3
    summary = _read(tmp_path / "constante.summary.csv")
    assert float(summary[0]["relative_error"]) == 0.0


@pytest.mark.slow
@pytest.mark.parametrize("a,tol", [(0.5, 0.02), (1.0, 0.02), (2.0, 0.03)])
def test_affine_sweep_converges_to_bulk_energy(a, tol):
    spec = _spec({"kind": "affine", "A": [[a]]}, [0.08, 0.04, 0.02, 0.01])
    result, _ = HarnessService().run_sweep(spec)
    assert result.target == pytest.approx(0.75 * np.sqrt(np.pi) * a ** 2, rel=1e-8)
    assert result.passed(tol)


@pytest.mark.slow
def test_jump_sweep_on_the_grid_converges_to_surface_energy():
    field = {"kind": "plane_jump", "normal": [1.0], "offset": 0.5, "value_minus": [0.0], "value_plus": [10.0]}
    spec = _spec(field, [0.08, 0.04, 0.02, 0.01])
    result, rows = HarnessService().run_sweep(spec)
    assert result.target == pytest.approx(np.pi / 2, rel=1e-8)
    assert all(r["method"] == "grid" and r["n_cells"] > 0 for r in rows)
    assert [r["h"] for r in rows] == pytest.approx([e / 8 for e in spec.eps_list])
    assert result.passed(0.02)


@pytest.mark.slow
def test_sliced_jump_sweep_converges_to_surface_energy():
    field = {"kind": "plane_jump", "normal": [1.0], "offset": 0.5, "value_minus": [0.0], "value_plus": [3.0]}
    spec = _spec(field, [0.08, 0.04, 0.02, 0.01], method="sliced")
    result, rows = HarnessService().run_sweep(spec)
    assert result.target == pytest.approx(np.pi / 2, rel=1e-8)
    assert all(r["n_cells"] == 0 and r["method"] == "sliced" for r in rows)
    assert result.passed(0.02)


@pytest.mark.slow
def test_two_dimensional_sweep_with_bulk_and_jump():
    A = [[0.3, 0.1], [0.1, 0.2]]
    field = {"kind": "sum", "terms": [
        {"kind": "affine", "A": A},
        {"kind": "plane_jump", "normal": [1.0, 0.0], "offset": 0.5, "value_minus": [0.0, 0.0],
         "value_plus": [10.0, 0.0]},
    ]}
    spec = _spec(field, [0.08, 0.04, 0.02], lower=(0.0, 0.0), upper=(1.0, 1.0), h_factor=6, workers=2)
    result, _ = HarnessService().run_sweep(spec)
    assert result.target == pytest.approx(p1_bulk_density(A) + beta_oracle(2), rel=5e-3)
    assert result.passed(0.05)


def _deterministic_pair(tmp_path, spec):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    HarnessService().run_sweep(spec, output=str(first))
    HarnessService().run_sweep(spec, output=str(second))
    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / "a.summary.csv").read_bytes() == (tmp_path / "b.summary.csv").read_bytes()


def test_sweep_output_is_deterministic(tmp_path):
    field = {"kind": "sum", "terms": [
        {"kind": "affine", "A": [[0.2, 0.0], [0.1, -0.3]]},
        {"kind": "plane_jump", "normal": [0.0, 1.0], "offset": 0.4, "value_minus": [0.0, 0.0],
         "value_plus": [0.0, 1.0]},
    ]}
    _deterministic_pair(tmp_path, _spec(field, [0.2, 0.1], lower=(0.0, 0.0), upper=(1.0, 1.0),
                                        h_factor=4, workers=2))


@pytest.mark.slow
def test_two_dimensional_sweep_csv_is_bit_identical(tmp_path):
    field = {"kind": "sum", "terms": [
        {"kind": "affine", "A": [[0.3, 0.1], [0.1, 0.2]]},
        {"kind": "plane_jump", "normal": [1.0, 0.0], "offset": 0.5, "value_minus": [0.0, 0.0],
         "value_plus": [10.0, 0.0]},
    ]}
    _deterministic_pair(tmp_path, _spec(field, [0.08, 0.04, 0.02], lower=(0.0, 0.0), upper=(1.0, 1.0),
                                        h_factor=6, workers=2))


def test_sweep_is_recorded(db):
    spec = _spec({"kind": "affine", "A": [[1.0]]}, [0.2, 0.1])
    result, _ = HarnessService(db).run_sweep(spec)
    runs = RunService(db).get_runs_by_kind("gamma-study")
    assert len(runs) == 1
    assert runs[0].status == "completed"
    assert runs[0].extrapolated == pytest.approx(result.extrapolated)
    assert [p.eps for p in runs[0].points] == [0.2, 0.1]


def test_failed_sweep_is_marked(db):
    spec = _spec({"kind": "affine", "A": [[1.0]]}, [0.1, 1e-6])
    with pytest.raises(GridCapabilityError):
        HarnessService(db).run_sweep(spec)
    run = RunService(db).get_runs_by_kind("gamma-study")[0]
    assert run.status == "failed"
    assert len(run.points) == 1


def test_sweep_spec_validation():
    field = {"kind": "affine", "A": [[1.0]]}
    with pytest.raises(ValidationError):
        _spec(field, [0.1, 0.2])
    with pytest.raises(ValidationError):
        _spec(field, [0.1])
    with pytest.raises(ValidationError):
        _spec(field, [0.1, -0.05])
    with pytest.raises(ValidationError):
        _spec(field, [0.1, 0.05], h_factor=3)
    with pytest.raises(ValidationError):
        _spec(field, [0.1, 0.05], energy="fp_eps", method="sliced")
    assert _spec(field, [0.1, 0.05], energy="fp_eps", p=2.0).strategy == "dyadic:2"


def test_random_fields_are_reproducible():
    a = random_piecewise_field(np.random.default_rng(5))
    b = random_piecewise_field(np.random.default_rng(5))
    x = np.linspace(0.0, 1.0, 101)[:, None]
    np.testing.assert_array_equal(a.evaluate(x), b.evaluate(x))
    assert 1 <= len(a.jump_planes()) <= 3


def test_audit_report_flags_violations():
    report = AuditReport()
    report.add("upper_bound", "campo_0", "eps=0.1", 1.0, 2.0, 1e-9)
    assert report.passed
    report.add("upper_bound", "campo_1", "eps=0.1", 2.0, 1.0, 1e-9)
    assert not report.passed
    assert [r["field"] for r in report.failures()] == ["campo_1"]
    assert report.failures()[0]["margin"] == -1.0


def test_translation_constant_peaks_at_a_jump_of_pi():
    delta = 0.01
    expected = 1.01 * np.pi / (delta + np.arctan(np.pi ** 2 / delta))
    assert translation_constant([delta], 0.6) == pytest.approx(expected, rel=1e-12)
    assert translation_constant([delta], 2.0) == pytest.approx(2.0 * expected, rel=1e-12)
    assert translation_constant([0.01, 0.1], 0.6) == pytest.approx(expected, rel=1e-12)
    assert translation_constant([0.01, 0.05, 0.1], 0.6) < 4.0


def test_audit_passes_on_random_fields(tmp_path, db):
    out = tmp_path / "audit.csv"
    report = HarnessService(db).audit_inequalities(AuditSpec(fields=10, seed=0), output=str(out))
    assert report.passed, report.failures()
    assert report.constant == translation_constant([0.01, 0.05, 0.1], 0.6)
    assert 0.0 < report.reference_ratio <= report.constant
    kinds = {r["inequality"] for r in report.rows}
    assert kinds == {"lower_bound", "translation", "m_step", "upper_bound"}
    rows = _read(out)
    assert list(rows[0].keys()) == AUDIT_COLUMNS
    assert len(rows) == len(report.rows)
    assert RunService(db).get_runs_by_kind("audit")[0].status == "completed"


def test_audit_rejects_steps_reaching_the_boundary():
    with pytest.raises(ParameterError):
        HarnessService().audit_inequalities(AuditSpec(fields=1, steps=[10]))
