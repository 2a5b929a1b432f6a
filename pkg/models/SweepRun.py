from datetime import datetime

from sqlalchemy import CheckConstraint, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from database.connection import Base


class SweepRun(Base):
    """
    Ejecución registrada (energía, barrido en eps, auditoría o minimización).

    Validaciones:
        - kind en ('energy', 'gamma-study', 'audit', 'minimize')
        - status en ('running', 'completed', 'failed')
    """
    __tablename__ = 'sweep_runs'

    id = Column(Integer, primary_key=True)
    kind = Column(String, nullable=False)
    status = Column(String, nullable=False, default='running')
    config_json = Column(Text, nullable=False, default='{}')
    output_path = Column(String)
    extrapolated = Column(Float)
    target = Column(Float)
    relative_error = Column(Float)
    created_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime)

    points = relationship('SweepPoint', back_populates='run', cascade="all, delete-orphan",
                          order_by='SweepPoint.id')

    __table_args__ = (
        CheckConstraint(
            "kind IN ('energy', 'gamma-study', 'audit', 'minimize')",
            name='check_valid_kind'
        ),
        CheckConstraint(
            "status IN ('running', 'completed', 'failed')",
            name='check_valid_status'
        ),
    )

    def __repr__(self):
        return f"Ejecución(id={self.id}, kind={self.kind}, status={self.status})"


class SweepPoint(Base):
    """Un valor de energía para un eps del barrido"""
    __tablename__ = 'sweep_points'

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('sweep_runs.id'), nullable=False)
    eps = Column(Float, nullable=False)
    h = Column(Float, nullable=False)
    total = Column(Float, nullable=False)
    n_cells = Column(Integer, default=0)
    n_directions = Column(Integer, default=0)

    run = relationship('SweepRun', back_populates='points')

    __table_args__ = (
        CheckConstraint('eps > 0', name='check_eps_positive'),
        CheckConstraint('h > 0', name='check_h_positive'),
    )

    def __repr__(self):
        return f"Punto(run={self.run_id}, eps={self.eps}, total={self.total:.6g})"
