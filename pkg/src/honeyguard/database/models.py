"""
Database models for the replay run registry
"""

import json
from enum import Enum
from typing import Any, Dict

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship
from sqlalchemy.sql import func

Base = declarative_base()


class RunStatus(Enum):
    """Run status enumeration"""
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class ReplayRun(Base):
    """One replay (or sweep point) and its headline results"""
    __tablename__ = 'replay_runs'

    id = Column(Integer, primary_key=True)
    status = Column(String(50), default=RunStatus.RUNNING.value)
    source = Column(String(500), nullable=False)
    policy = Column(String(10), nullable=False)
    t_duration = Column(Float, nullable=False)  # inf for unbounded DUM
    t_update = Column(Float, nullable=True)
    algorithm = Column(String(10), nullable=False)
    seed = Column(Integer, default=0)
    eval_window = Column(Float, nullable=False)

    # Timestamps
    created_at = Column(DateTime, default=func.now())
    completed_at = Column(DateTime, nullable=True)

    # Results
    windows = Column(Integer, default=0)
    deferred_windows = Column(Integer, default=0)
    mean_f1 = Column(Float, nullable=True)
    flagged_hosts = Column(Integer, default=0)
    output_directory = Column(String(500), nullable=True)

    configuration = Column(Text)  # JSON string
    error_message = Column(Text, nullable=True)

    updates = relationship("UpdateRecord", back_populates="run", cascade="all, delete-orphan",
                           order_by="UpdateRecord.t")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return {
            'id': self.id,
            'status': self.status,
            'source': self.source,
            'policy': self.policy,
            't_duration': self.t_duration,
            't_update': self.t_update,
            'algorithm': self.algorithm,
            'seed': self.seed,
            'eval_window': self.eval_window,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'completed_at': self.completed_at.isoformat() if self.completed_at else None,
            'windows': self.windows,
            'deferred_windows': self.deferred_windows,
            'mean_f1': self.mean_f1,
            'flagged_hosts': self.flagged_hosts,
            'output_directory': self.output_directory,
            'configuration': json.loads(self.configuration) if self.configuration else {},
            'error_message': self.error_message,
        }


class UpdateRecord(Base):
    """One UpdateEvent of a run"""
    __tablename__ = 'update_records'

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('replay_runs.id'), nullable=False)

    t = Column(Float, nullable=False)
    window_start = Column(Float, nullable=False)
    window_end = Column(Float, nullable=False)
    rows = Column(Integer, default=0)
    benign = Column(Integer, default=0)
    malicious = Column(Integer, default=0)
    train_seconds = Column(Float, default=0.0)
    published = Column(Boolean, default=False)
    skip_reason = Column(String(255), nullable=True)

    run = relationship("ReplayRun", back_populates="updates")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'run_id': self.run_id,
            't': self.t,
            'window_start': self.window_start,
            'window_end': self.window_end,
            'rows': self.rows,
            'benign': self.benign,
            'malicious': self.malicious,
            'train_seconds': self.train_seconds,
            'published': self.published,
            'skip_reason': self.skip_reason,
        }
