import json

import pytest
from sqlalchemy.exc import IntegrityError

from models.SweepRun import SweepPoint
from services.runService import RunService


def test_run_lifecycle(db):
    service = RunService(db)
    run = service.create_run("gamma-study", {"eps_list": [0.1, 0.05]}, "salida/barrido.csv")
    assert run.id is not None
    assert run.status == "running"
    assert json.loads(run.config_json) == {"eps_list": [0.1, 0.05]}

    service.add_point(run.id, 0.1, 0.0125, 1.31, n_cells=80, n_directions=64)
    service.add_point(run.id, 0.05, 0.00625, 1.32, n_cells=160, n_directions=64)
    done = service.finish_run(run.id, 1.33, 1.329, 0.0004)
    assert done.status == "completed"
    assert done.finished_at is not None
    assert [p.eps for p in done.points] == [0.1, 0.05]
    assert service.get_run_by_id(run.id).relative_error == pytest.approx(0.0004)


def test_runs_by_kind(db):
    service = RunService(db)
    service.create_run("audit", {})
    service.create_run("minimize", {"load": 1.3})
    service.create_run("audit", {"seed": 1})
    assert [r.kind for r in service.get_all_runs()] == ["audit", "minimize", "audit"]
    assert len(service.get_runs_by_kind("audit")) == 2
    assert service.get_runs_by_kind("energy") == []


def test_failed_run(db):
    service = RunService(db)
    run = service.create_run("energy", {})
    assert service.fail_run(run.id).status == "failed"
    assert service.fail_run(9999) is None
    assert service.finish_run(9999) is None


def test_delete_cascades_to_points(db):
    service = RunService(db)
    run = service.create_run("gamma-study", {})
    service.add_point(run.id, 0.1, 0.01, 2.0)
    assert service.delete_run(run.id)
    assert service.get_run_by_id(run.id) is None
    assert db.query(SweepPoint).count() == 0
    assert not service.delete_run(run.id)


def test_constraints_are_enforced(db):
    service = RunService(db)
    with pytest.raises(IntegrityError):
        service.create_run("plot", {})
    run = service.create_run("energy", {})
    with pytest.raises(IntegrityError):
        service.add_point(run.id, -0.1, 0.01, 1.0)
    # la sesión sigue usable tras el rollback
    assert service.get_run_by_id(run.id).kind == "energy"
