import os
import signal
from typing import Any

from celery import Celery
from celery import signals
from celery.utils.log import get_logger
from django.conf import settings

from game_theory import defaults
from game_theory.engine import kernel

app = Celery(defaults.CELERY_APP_NAME)
app.config_from_object(defaults.GAME_THEORY_CELERY_CONF)
app.autodiscover_tasks(lambda: settings.INSTALLED_APPS)

logger = get_logger(__name__)


# noinspection PyUnusedLocal
@signals.worker_init.connect
def lead_process_group(**kwargs: Any) -> None:
    """ Solver processes join the worker's group to be signalled at once."""
    os.setpgrp()
    logger.info("Solver process group is %s", os.getpgid(os.getpid()))


# noinspection PyUnusedLocal
@signals.worker_process_init.connect
def load_game_registry(**kwargs: Any) -> None:
    """ Imports all game modules before the first solve task arrives."""
    games = kernel.registered_games()
    logger.debug("Process %s knows %d games", os.getpid(), len(games))


# noinspection PyUnusedLocal
@signals.worker_shutting_down.connect
def requeue_solver_runs(**kwargs: Any) -> None:
    """
    SIGUSR1 raises SoftTimeLimitExceeded inside running solve tasks, which
    put their runs back to the queue.
    """
    logger.warning("Worker shutdown, interrupting solver processes")
    try:
        os.killpg(os.getpid(), signal.SIGUSR1)
    except ProcessLookupError:
        logger.error("No solver process group for %s", os.getpid())
