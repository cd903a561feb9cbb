import os
from unittest import mock
from uuid import UUID, uuid4

from billiard.exceptions import SoftTimeLimitExceeded
from celery.exceptions import Retry

from game_theory import models, runs, tasks
from game_theory.engine.policy import TabularPolicy
from game_theory.tests import base


class SolveTaskRunStateTestCase(base.BaseTestCase):
    """ Tests SolverRun status handling in solve task."""

    def setUp(self):
        super().setUp()
        self.solver_run = models.SolverRun.objects.create(
            status=models.SolverRun.QUEUED,
            task_id=uuid4(),
            game='kuhn_poker')
        cls = "game_theory.tasks.SolveGame"
        self.handle_patcher = mock.patch(
            f'{cls}.process_run',
            return_value=(0.001, "0|J|\t0=1.0\n"))
        self.handle_mock: mock.MagicMock = self.handle_patcher.start()
        self.retry_patcher = mock.patch(f'{cls}.retry',
                                        side_effect=Retry)
        self.retry_mock = self.retry_patcher.start()

    def tearDown(self):
        super().tearDown()
        self.handle_patcher.stop()
        self.retry_patcher.stop()

    def run_task(self):
        result = tasks.solve_game.apply(
            task_id=str(self.solver_run.task_id),
            args=(self.solver_run.id,),
            throw=True)
        return result

    def test_lock_run(self):
        """
        Solving starts with status PROCESS and finishes with DONE.
        """
        self.solver_run.error = "my error"
        self.solver_run.save()

        result = self.run_task()

        solver_run = self.handle_mock.call_args[0][0]
        self.assertEqual(solver_run.status, models.SolverRun.PROCESS)

        self.solver_run.refresh_from_db()
        self.assertEqual(self.solver_run.status, models.SolverRun.DONE)
        self.assertIsNone(self.solver_run.error)
        self.assertEqual(self.solver_run.task_id, UUID(result.task_id))
        self.assertIsNotNone(self.solver_run.basename)
        self.assertEqual(self.solver_run.nash_conv, 0.001)
        self.assertEqual(self.solver_run.policy, "0|J|\t0=1.0\n")

    def test_mark_error(self):
        """
        Solver failure sets ERROR status and saves error message.
        """
        error = RuntimeError("my error " * 100)
        self.handle_mock.side_effect = error

        self.run_task()

        self.solver_run.refresh_from_db()
        self.assertEqual(self.solver_run.status, models.SolverRun.ERROR)
        self.assertEqual(self.solver_run.error, repr(error))
        self.assertIsNone(self.solver_run.policy)

    def test_skip_incorrect_status(self):
        """
        Unexpected run statuses lead to task retry.
        """
        self.solver_run.status = models.SolverRun.ERROR
        self.solver_run.save()

        with self.assertRaises(Retry):
            self.run_task()

        self.solver_run.refresh_from_db()
        self.assertEqual(self.solver_run.status, models.SolverRun.ERROR)
        self.handle_mock.assert_not_called()

    def test_skip_locked(self):
        """
        Locked run leads to task retry.
        """
        # skip_locked=True makes a locked row look missing
        self.solver_run.pk += 1

        with self.assertRaises(Retry):
            self.run_task()

        self.handle_mock.assert_not_called()

    def test_skip_unlock_incorrect_status(self):
        """
        Run status is not changed in db if run was modified somewhere else.
        """

        # noinspection PyUnusedLocal
        def change_status(solver_run, *args, **kwargs):
            solver_run.change_status(models.SolverRun.QUEUED)

        self.handle_mock.side_effect = change_status

        with self.assertRaises(RuntimeError):
            self.run_task()

        self.solver_run.refresh_from_db()
        self.assertEqual(self.solver_run.status, models.SolverRun.QUEUED)

    def test_skip_unlock_foreign_task_id(self):
        """
        Run status is not changed in db if it was locked by another task.
        """
        task_id = uuid4()

        # noinspection PyUnusedLocal
        def change_status(solver_run, *args, **kwargs):
            solver_run.task_id = task_id
            solver_run.save()

        self.handle_mock.side_effect = change_status

        with self.assertRaises(RuntimeError):
            self.run_task()

        self.solver_run.refresh_from_db()
        self.assertEqual(self.solver_run.task_id, task_id)
        self.assertEqual(self.solver_run.status, models.SolverRun.PROCESS)

    def test_retry_task_on_worker_shutdown(self):
        """
        For graceful restart run status is reverted to queued on task retry.
        """
        exc = SoftTimeLimitExceeded()
        self.handle_mock.side_effect = exc

        with self.assertRaises(Retry):
            self.run_task()

        self.solver_run.refresh_from_db()
        self.assertEqual(self.solver_run.status, models.SolverRun.QUEUED)
        self.assertEqual(self.solver_run.error, repr(exc))
        self.retry_mock.assert_called_once_with(countdown=10)


class ProcessRunTestCase(base.TempDirMixin, base.BaseTestCase):
    """ Solver run processing writes trace points and artifacts."""

    def setUp(self):
        super().setUp()
        self.solver_run = models.SolverRun.objects.create(
            status=models.SolverRun.PROCESS,
            task_id=uuid4(),
            basename=uuid4(),
            game='matrix_rps',
            algorithm='cfr',
            iterations=10,
            report_every=4)
        self.results_patcher = mock.patch(
            'game_theory.defaults.GAME_THEORY_RESULTS_DIR', self.temp_dir)
        self.results_patcher.start()

    def tearDown(self):
        super().tearDown()
        self.results_patcher.stop()

    def test_process_run(self):
        """
        Trace points are stored at every report and the final policy is
        returned with the last metric value.
        """
        value, text = tasks.solve_game.process_run(self.solver_run)

        points = list(self.solver_run.trace.all())
        self.assertListEqual([p.iteration for p in points], [4, 8, 10])
        self.assertTrue(all(p.metric == runs.NASHCONV for p in points))
        self.assertEqual(value, points[-1].value)
        policy = TabularPolicy.from_text(text)
        self.assertSetEqual(set(policy), {'p0', 'p1'})

        output = os.path.join(self.temp_dir, self.solver_run.basename.hex)
        with open(os.path.join(output, 'policy.txt')) as f:
            self.assertEqual(f.read(), text)
        with open(os.path.join(output, 'trace.csv')) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], runs.TRACE_HEADER)
        self.assertEqual(len(lines), 4)

    def test_process_run_replaces_trace(self):
        """ Trace points of a previous attempt are dropped."""
        models.TracePoint.objects.create(
            run=self.solver_run, iteration=1, metric=runs.NASHCONV,
            value=9.0, seconds=0.0)

        tasks.solve_game.process_run(self.solver_run)

        self.assertFalse(self.solver_run.trace.filter(iteration=1).exists())
