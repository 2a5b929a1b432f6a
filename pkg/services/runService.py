import json
import logging
from datetime import datetime
from typing import List, Optional

from sqlalchemy.orm import Session

from models.SweepRun import SweepPoint, SweepRun

logger = logging.getLogger(__name__)


class RunService:
    def __init__(self, db: Session):
        self.db = db

    def get_all_runs(self) -> List[SweepRun]:
        """Obtiene todas las ejecuciones"""
        return self.db.query(SweepRun).order_by(SweepRun.id).all()

    def get_run_by_id(self, run_id: int) -> Optional[SweepRun]:
        """Obtiene una ejecución por su ID"""
        return self.db.query(SweepRun).filter(SweepRun.id == run_id).first()

    def get_runs_by_kind(self, kind: str) -> List[SweepRun]:
        return self.db.query(SweepRun).filter(SweepRun.kind == kind).order_by(SweepRun.id).all()

    def create_run(self, kind: str, config: dict, output_path: Optional[str] = None) -> SweepRun:
        """Registra una ejecución en estado 'running'"""
        try:
            run = SweepRun(kind=kind, status='running', config_json=json.dumps(config, sort_keys=True),
                           output_path=output_path)
            self.db.add(run)
            self.db.commit()
            self.db.refresh(run)
            return run
        except Exception as e:
            self.db.rollback()
            logger.error(f"Error creando la ejecución: {str(e)}")
            raise

    def add_point(self, run_id: int, eps: float, h: float, total: float,
                  n_cells: int = 0, n_directions: int = 0) -> SweepPoint:
        try:
            point = SweepPoint(run_id=run_id, eps=eps, h=h, total=total, n_cells=n_cells, n_directions=n_directions)
            self.db.add(point)
            self.db.commit()
            return point
        except Exception as e:
            self.db.rollback()
            logger.error(f"Error guardando el punto eps={eps}: {str(e)}")
            raise

    def finish_run(self, run_id: int, extrapolated: Optional[float] = None, target: Optional[float] = None,
                   relative_error: Optional[float] = None) -> Optional[SweepRun]:
        run = self.get_run_by_id(run_id)
        if run:
            try:
                run.status = 'completed'
                run.extrapolated = extrapolated
                run.target = target
                run.relative_error = relative_error
                run.finished_at = datetime.utcnow()
                self.db.commit()
                self.db.refresh(run)
            except Exception as e:
                self.db.rollback()
                logger.error(f"Error cerrando la ejecución {run_id}: {str(e)}")
                raise
        return run

    def fail_run(self, run_id: int) -> Optional[SweepRun]:
        run = self.get_run_by_id(run_id)
        if run:
            run.status = 'failed'
            run.finished_at = datetime.utcnow()
            self.db.commit()
        return run

    def delete_run(self, run_id: int) -> bool:
        """Elimina una ejecución y sus puntos"""
        run = self.get_run_by_id(run_id)
        if run:
            self.db.delete(run)
            self.db.commit()
            return True
        return False
