from typing import Any

from django.db import models
from django.utils.translation import gettext_lazy as _
from model_utils import Choices
from model_utils.models import TimeStampedModel

from game_theory import runs

ALGORITHM_CHOICES = [(name, name) for name in sorted(runs.ALGORITHMS)]


class SolverRun(TimeStampedModel):
    """ Equilibrium solver run executed by a Celery worker."""
    STATUS = Choices(
        (0, 'CREATED', _('new')),  # Run created in db
        (1, 'QUEUED', _('queued')),  # Solve task is sent to broker
        (2, 'PROCESS', _('process')),  # Celery worker started solving
        (3, 'DONE', _('done')),  # Solver finished successfully
        (4, 'ERROR', _('error')),  # Solver error
    )
    CREATED = STATUS.CREATED
    QUEUED = STATUS.QUEUED
    PROCESS = STATUS.PROCESS
    DONE = STATUS.DONE
    ERROR = STATUS.ERROR
    status = models.SmallIntegerField(default=STATUS.CREATED, choices=STATUS,
                                      verbose_name=_('Status'))
    error = models.TextField(blank=True, null=True, verbose_name=_('Error'))
    task_id = models.UUIDField(blank=True, null=True,
                               verbose_name=_('Task ID'))
    game = models.CharField(max_length=255, verbose_name=_('Game'),
                            help_text=_('e.g. goofspiel(num_cards=3)'))
    algorithm = models.CharField(max_length=32, choices=ALGORITHM_CHOICES,
                                 default='cfr', verbose_name=_('Algorithm'))
    iterations = models.PositiveIntegerField(default=1000,
                                             verbose_name=_('Iterations'))
    report_every = models.PositiveIntegerField(
        default=100, verbose_name=_('Report every'))
    seed = models.IntegerField(default=0, verbose_name=_('Seed'))
    params = models.JSONField(default=dict, blank=True,
                              verbose_name=_('params'))
    basename = models.UUIDField(blank=True, null=True,
                                verbose_name=_('Basename'))
    nash_conv = models.FloatField(blank=True, null=True,
                                  verbose_name=_('NashConv'))
    policy = models.TextField(blank=True, null=True,
                              verbose_name=_('Policy'))

    class Meta:
        verbose_name = _('Solver run')
        verbose_name_plural = _('Solver runs')

    def __str__(self) -> str:
        return (f'{self.algorithm} {self.game} '
                f'({self.get_status_display()})')

    def change_status(self, status: int, **fields: Any) -> None:
        """
        Changes run status.

        Also saves another model fields and always updates `modified` value.

        :param status: one of statuses for SolverRun.status
        :param fields: dict with model field values.
        """
        self.status = status
        update_fields = {'status', 'modified'}
        for k, v in fields.items():
            setattr(self, k, v)
            update_fields.add(k)
        # suppress mypy [no-untyped-calls]
        self.save(update_fields=tuple(update_fields))  # type: ignore

    def get_run_config(self, output: str) -> runs.RunConfig:
        return runs.RunConfig(command=runs.SOLVE,
                              game=self.game,
                              algorithm=self.algorithm,
                              iterations=self.iterations,
                              report_every=self.report_every,
                              seed=self.seed,
                              params=dict(self.params or {}),
                              output=output)


class TracePoint(models.Model):
    """ One convergence measurement of a solver run."""
    run = models.ForeignKey(SolverRun, models.CASCADE,
                            related_name='trace',
                            verbose_name=_('run'))
    iteration = models.PositiveIntegerField(verbose_name=_('Iteration'))
    metric = models.CharField(max_length=32, verbose_name=_('Metric'))
    value = models.FloatField(verbose_name=_('Value'))
    seconds = models.FloatField(verbose_name=_('Seconds'))

    class Meta:
        unique_together = (('run', 'iteration', 'metric'),)
        ordering = ['iteration']
        verbose_name = _('Trace point')
        verbose_name_plural = _('Trace points')

    def __str__(self) -> str:
        return f'{self.iteration}: {self.metric}={self.value:g}'
