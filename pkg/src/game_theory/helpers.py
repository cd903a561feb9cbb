from celery.result import AsyncResult

from game_theory import defaults, models
from game_theory import tasks


def send_solve_task(solver_run: models.SolverRun) -> AsyncResult:
    """
    Send a solver task.

    If task is successfully sent to broker, SolverRun status is changed to
    QUEUED, Celery task identifier is saved and results of a previous
    attempt are cleared.

    :param solver_run: solver run object
    :type solver_run: game_theory.models.SolverRun
    :returns: Celery task result
    :rtype: celery.result.AsyncResult
    """
    result = tasks.solve_game.apply_async(
        args=(solver_run.pk,),
        countdown=defaults.GAME_THEORY_COUNTDOWN)
    solver_run.change_status(solver_run.QUEUED, task_id=result.task_id,
                             error=None, nash_conv=None)
    return result
