import os
import time
from datetime import datetime
from typing import Any, Dict, Iterable, Optional, Tuple, Union
from uuid import UUID, uuid4

import celery
from billiard.exceptions import SoftTimeLimitExceeded
from django.db import close_old_connections
from django.db.transaction import atomic
from django.db.utils import OperationalError

from game_theory import defaults, models, runs
from game_theory.celery import app
from game_theory.utils import LoggerMixin

SolverRun = models.SolverRun


class SolveGame(LoggerMixin, celery.Task):
    """ Solver run processing task."""
    routing_key = 'game_theory'
    autoretry_for = (OperationalError,)
    infinite_retry_for = (OperationalError,)
    retry_backoff = True

    def retry(self,
              args: Optional[Iterable[Any]] = None,
              kwargs: Optional[Dict[str, Any]] = None,
              exc: Optional[Exception] = None,
              throw: bool = True,
              eta: Optional[datetime] = None,
              countdown: Optional[Union[float, int]] = None,
              max_retries: Optional[int] = None,
              **options: Any) -> Any:
        if isinstance(exc, self.infinite_retry_for):
            # increment max_retries by one to achieve unlimited retries
            # for infrastructure errors
            max_retries = (max_retries or self.max_retries) + 1
        return super().retry(args, kwargs, exc, throw, eta, countdown,
                             max_retries, **options)

    def run(self, run_id: int) -> Optional[str]:
        """
        Process solver run.

        1. Locks run changing status from QUEUED to PROCESS
        2. Iterates the solver, storing trace points and artifacts
        3. Changes run status to DONE, stores final NashConv and policy
        4. On errors changes run status ERROR, stores error message

        :param run_id: SolverRun id.
        """
        status = SolverRun.DONE
        error = result = None
        solver_run = self.lock_run(run_id)
        try:
            result = self.process_run(solver_run)
        except SoftTimeLimitExceeded as e:
            self.logger.debug("Received SIGUSR1, return run to queue")
            # celery graceful shutdown
            status = SolverRun.QUEUED
            error = repr(e)
            raise self.retry(countdown=10)
        except Exception as e:
            status = SolverRun.ERROR
            error = repr(e)
            self.logger.exception("Processing error %s", error)
        finally:
            # Close possible stale connections after long operation
            close_old_connections()
            self.unlock_run(run_id, status, error, result)
        return error

    def select_for_update(self, run_id: int,
                          status: int) -> models.SolverRun:
        """ Lock run in DB for current task.

        :param run_id: SolverRun primary key
        :param status: expected run status
        :returns: SolverRun object from db

        :raises models.SolverRun.DoesNotExist: in case of missing or locked
            SolverRun for primary key
        :raises ValueError: in case of unexpected status or task_id

        """
        try:
            solver_run = SolverRun.objects.select_for_update(
                skip_locked=True, of=('self',)).get(pk=run_id)
        except SolverRun.DoesNotExist:
            self.logger.error("Can't lock run %s", run_id)
            raise

        if solver_run.task_id != UUID(self.request.id):
            self.logger.error("Unexpected run %s task_id %s",
                              solver_run.id, solver_run.task_id)
            raise ValueError(solver_run.task_id)

        if solver_run.status != status:
            self.logger.error("Unexpected run %s status %s",
                              solver_run.id, solver_run.get_status_display())
            raise ValueError(solver_run.status)
        return solver_run

    @atomic
    def lock_run(self, run_id: int) -> models.SolverRun:
        """
        Gets run in QUEUED status from DB and changes status to PROCESS.

        :param run_id: SolverRun primary key
        :returns: SolverRun object
        :raises Retry: in case of unexpected run status or task_id
        """
        if defaults.GAME_THEORY_WAIT:  # pragma: no cover
            # Handle database replication and transaction commit related delay
            time.sleep(defaults.GAME_THEORY_WAIT)
        try:
            solver_run = self.select_for_update(run_id, SolverRun.QUEUED)
        except (SolverRun.DoesNotExist, ValueError) as e:
            # if run is locked or task_id is not equal to current task, retry.
            raise self.retry(exc=e)
        if solver_run.basename is None:
            solver_run.basename = uuid4()
        solver_run.change_status(SolverRun.PROCESS,
                                 basename=solver_run.basename)
        return solver_run

    @atomic
    def unlock_run(self, run_id: int, status: int, error: Optional[str],
                   result: Optional[Tuple[Optional[float], str]],
                   ) -> None:
        """
        Marks run with final status.

        :param run_id: SolverRun primary key
        :param status: final run status (SolverRun.DONE, SolverRun.ERROR)
        :param error: error message
        :param result: final metric value and policy text
        :raises RuntimeError: in case of unexpected run status or task id
        """
        try:
            solver_run = self.select_for_update(run_id, SolverRun.PROCESS)
        except (SolverRun.DoesNotExist, ValueError) as e:
            # if run is locked or task_id differs from current task, do
            # nothing because run is modified somewhere else.
            raise RuntimeError("Can't unlock locked run %s: %s",
                               run_id, repr(e))
        fields: Dict[str, Any] = {'error': error}
        if result is not None:
            fields['nash_conv'], fields['policy'] = result
        solver_run.change_status(status, **fields)

    def process_run(self, solver_run: models.SolverRun,
                    ) -> Tuple[Optional[float], str]:
        """
        Runs the solver, storing every trace row as it is reported.

        :returns: final metric value and policy text.
        """
        basename = solver_run.basename
        if basename is None:  # pragma: no cover
            raise RuntimeError("basename not set")
        output = os.path.join(defaults.GAME_THEORY_RESULTS_DIR, basename.hex)
        config = solver_run.get_run_config(output)
        solver_run.trace.all().delete()

        def on_report(row: runs.TraceRow) -> None:
            models.TracePoint.objects.create(
                run=solver_run, iteration=row.iteration, metric=row.metric,
                value=row.value, seconds=row.seconds)

        result = self.init_run(config, on_report)()
        return result.final_value, result.policy.to_text()

    @staticmethod
    def init_run(config: runs.RunConfig,
                 on_report: runs.ReportCallback) -> runs.Run:
        return runs.init_run(config, on_report)


solve_game: SolveGame = app.register_task(SolveGame())  # type: ignore
