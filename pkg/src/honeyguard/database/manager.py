"""
Run registry backed by SQLite through SQLAlchemy
"""

import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from sqlalchemy import create_engine, desc, func
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session, sessionmaker

from ..core.config import config
from ..core.logger import logger
from .models import Base, ReplayRun, RunStatus, UpdateRecord


class RunRegistry:
    """Records replay runs and their update logs"""

    def __init__(self, db_path: Optional[str] = None):
        self.db_path = db_path or config.get('database.path', 'data/honeyguard.db')
        self.engine = None
        self.SessionLocal = None
        self._initialize_database()

    def _initialize_database(self) -> None:
        """Initialize database connection and create tables"""
        try:
            if self.db_path != ':memory:':
                Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)

            self.engine = create_engine(
                f'sqlite:///{self.db_path}',
                echo=bool(config.get('database.echo', False)),
            )
            self.SessionLocal = sessionmaker(
                autocommit=False,
                autoflush=False,
                expire_on_commit=False,
                bind=self.engine
            )
            Base.metadata.create_all(bind=self.engine)
            logger.debug("Run registry initialized", db_path=self.db_path)

        except (SQLAlchemyError, OSError) as e:
            logger.error("Run registry initialization failed", error=str(e))
            raise

    def get_session(self) -> Session:
        return self.SessionLocal()

    def create_run(self, source: str, params: Dict[str, Any],
                   configuration: Optional[Dict[str, Any]] = None) -> ReplayRun:
        """Register a run in the running state; params come from EvaluationReport.params"""
        t_duration = params.get('t_duration')
        with self.get_session() as session:
            try:
                run = ReplayRun(
                    source=source,
                    policy=params['policy'],
                    t_duration=math.inf if t_duration == 'inf' else float(t_duration),
                    t_update=params.get('t_update'),
                    algorithm=params['algorithm'],
                    seed=int(params.get('seed', 0)),
                    eval_window=float(params['eval_window']),
                    configuration=json.dumps(configuration or {}, default=str),
                    status=RunStatus.RUNNING.value,
                )
                session.add(run)
                session.commit()
                session.refresh(run)
                logger.info("Run registered", run_id=run.id, policy=run.policy,
                            algorithm=run.algorithm)
                return run

            except SQLAlchemyError as e:
                session.rollback()
                logger.error("Failed to register run", error=str(e))
                raise

    def complete_run(self, run_id: int, report, output_directory: Optional[str] = None) -> bool:
        """Store headline results and the update log of a finished EvaluationReport"""
        with self.get_session() as session:
            try:
                run = session.get(ReplayRun, run_id)
                if run is None:
                    return False
                run.status = RunStatus.COMPLETED.value
                run.completed_at = datetime.now()
                run.windows = len(report.windows)
                run.deferred_windows = report.deferred_windows
                run.mean_f1 = report.mean_f1()
                run.flagged_hosts = len(report.malicious_list)
                run.output_directory = output_directory
                for event in report.updates:
                    run.updates.append(UpdateRecord(
                        t=event.t,
                        window_start=event.window.start,
                        window_end=event.window.end,
                        rows=event.rows,
                        benign=event.benign,
                        malicious=event.malicious,
                        train_seconds=event.train_seconds,
                        published=event.published,
                        skip_reason=event.skip_reason,
                    ))
                session.commit()
                logger.info("Run completed", run_id=run_id, mean_f1=run.mean_f1)
                return True

            except SQLAlchemyError as e:
                session.rollback()
                logger.error("Failed to complete run", run_id=run_id, error=str(e))
                return False

    def fail_run(self, run_id: int, message: str) -> bool:
        with self.get_session() as session:
            try:
                run = session.get(ReplayRun, run_id)
                if run is None:
                    return False
                run.status = RunStatus.FAILED.value
                run.completed_at = datetime.now()
                run.error_message = message
                session.commit()
                logger.warning("Run failed", run_id=run_id, error=message)
                return True

            except SQLAlchemyError as e:
                session.rollback()
                logger.error("Failed to mark run failed", run_id=run_id, error=str(e))
                return False

    def get_run(self, run_id: int) -> Optional[ReplayRun]:
        with self.get_session() as session:
            return session.get(ReplayRun, run_id)

    def get_runs(self, status: Optional[str] = None, limit: int = 50,
                 offset: int = 0) -> List[ReplayRun]:
        """Most recent runs first"""
        with self.get_session() as session:
            query = session.query(ReplayRun)
            if status:
                query = query.filter(ReplayRun.status == status)
            return query.order_by(desc(ReplayRun.id)).offset(offset).limit(limit).all()

    def get_updates(self, run_id: int) -> List[UpdateRecord]:
        with self.get_session() as session:
            return (session.query(UpdateRecord)
                    .filter(UpdateRecord.run_id == run_id)
                    .order_by(UpdateRecord.t)
                    .all())

    def delete_run(self, run_id: int) -> bool:
        with self.get_session() as session:
            try:
                run = session.get(ReplayRun, run_id)
                if run is None:
                    return False
                session.delete(run)
                session.commit()
                logger.info("Run deleted", run_id=run_id)
                return True

            except SQLAlchemyError as e:
                session.rollback()
                logger.error("Failed to delete run", run_id=run_id, error=str(e))
                return False

    def get_statistics(self) -> Dict[str, Any]:
        """Run counts by status plus mean F1 per (policy, algorithm)"""
        with self.get_session() as session:
            try:
                total = session.query(ReplayRun).count()
                by_status = dict(session.query(ReplayRun.status, func.count(ReplayRun.id))
                                 .group_by(ReplayRun.status).all())
                mean_f1 = {
                    f"{policy}/{algorithm}": value
                    for policy, algorithm, value in (
                        session.query(ReplayRun.policy, ReplayRun.algorithm,
                                      func.avg(ReplayRun.mean_f1))
                        .filter(ReplayRun.status == RunStatus.COMPLETED.value)
                        .group_by(ReplayRun.policy, ReplayRun.algorithm)
                        .all())
                }
                return {
                    'total_runs': total,
                    'completed_runs': by_status.get(RunStatus.COMPLETED.value, 0),
                    'failed_runs': by_status.get(RunStatus.FAILED.value, 0),
                    'running_runs': by_status.get(RunStatus.RUNNING.value, 0),
                    'mean_f1': mean_f1,
                }

            except SQLAlchemyError as e:
                logger.error("Failed to get run statistics", error=str(e))
                return {}
