from typing import Any

import celery
from celery.signals import task_postrun, task_prerun
from django.core.signals import request_finished, request_started
from django.db import transaction
from django.db.models.signals import post_save
from django.dispatch import receiver

from game_theory import helpers, models


# noinspection PyUnusedLocal
@receiver(post_save, sender=models.SolverRun)
def queue_new_run(sender: Any, *, instance: models.SolverRun,
                  created: bool, **kw: Any) -> None:
    """
    Queues runs created as new; runs saved with another status, e.g. loaded
    from a fixture of finished results, stay as they are.
    """
    if not created or instance.status != models.SolverRun.CREATED:
        return
    transaction.on_commit(lambda: helpers.send_solve_task(instance))


# noinspection PyUnusedLocal
@task_prerun.connect
@task_postrun.connect
def emulate_request(task: celery.Task, signal: Any, **kwargs: Any) -> None:
    """
    Wraps each task into request_started and request_finished signals, so
    that Django closes stale database connections around solver runs.
    """
    django_signal = (request_started if signal is task_prerun
                     else request_finished)
    django_signal.send(sender=task.__class__, request=task.request)
