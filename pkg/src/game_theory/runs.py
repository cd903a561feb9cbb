import abc
import dataclasses
import json
import time
from dataclasses import dataclass, field
from types import TracebackType
from typing import (Any, Callable, Dict, List, Mapping, Optional, Sequence,
                    Type)

from game_theory import defaults
from game_theory.engine import analysis, br_iter, errors, kernel, regret, rl
from game_theory.engine import workspace
from game_theory.engine.policy import TabularPolicy, merge_policies
from game_theory.engine.solver import Solver
from game_theory.utils import LoggerMixin

NASHCONV = 'nashconv'
EXPLOITABILITY = 'exploitability'
MEAN_RETURN = 'mean_return'
METRICS = (NASHCONV, EXPLOITABILITY, MEAN_RETURN)

TRACE_HEADER = 'iteration,metric,value,seconds'

SOLVE = 'solve'
QLEARN = 'qlearn'

ALGORITHMS: Dict[str, Type[Solver]] = {**regret.SOLVERS, **br_iter.SOLVERS}


@dataclass
class RunConfig:
    """
    Everything needed to repeat a solver or learning run.
    """
    command: str
    game: str
    algorithm: str = 'cfr'
    iterations: int = 1000
    report_every: int = defaults.REPORT_EVERY
    seed: int = defaults.DEFAULT_SEED
    metric: str = NASHCONV
    params: Dict[str, Any] = field(default_factory=dict)
    """ Algorithm hyperparameters."""
    output: Optional[str] = None
    """ Directory for config, trace and policy files."""
    evaluated_policy: Optional[str] = None
    """ Which policy the metric was measured on, filled in by the run."""

    def __post_init__(self) -> None:
        if self.command not in (SOLVE, QLEARN):
            raise errors.InvalidParameterError('command')
        if self.command == SOLVE and self.algorithm not in ALGORITHMS:
            raise errors.InvalidParameterError('algorithm')
        if self.metric not in METRICS:
            raise errors.InvalidParameterError('metric')
        if self.iterations < 0:
            raise errors.InvalidParameterError('iterations')
        if self.report_every < 1:
            raise errors.InvalidParameterError('report_every')

    def to_native(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_native(cls, data: Mapping[str, Any]) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise errors.InvalidParameterError(', '.join(sorted(unknown)))
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_native(), sort_keys=True, indent=2) + '\n'

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_native(json.loads(text))


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    metric: str
    value: float
    seconds: float

    def to_csv(self) -> str:
        return (f'{self.iteration},{self.metric},{self.value!r},'
                f'{self.seconds:.3f}')


@dataclass
class ConvergenceTrace:
    rows: List[TraceRow] = field(default_factory=list)

    def add(self, row: TraceRow) -> None:
        """
        :raises errors.InvalidParameterError: unknown metric or an iteration
            not after the previous one.
        """
        if row.metric not in METRICS:
            raise errors.InvalidParameterError('metric')
        if self.rows and row.iteration <= self.rows[-1].iteration:
            raise errors.InvalidParameterError('iteration')
        self.rows.append(row)

    def to_csv(self) -> str:
        lines = [TRACE_HEADER, *(r.to_csv() for r in self.rows)]
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_csv(cls, text: str) -> "ConvergenceTrace":
        lines = text.strip().splitlines()
        if not lines or lines[0] != TRACE_HEADER:
            raise errors.InvalidParameterError('trace header')
        trace = cls()
        for line in lines[1:]:
            iteration, metric, value, seconds = line.split(',')
            trace.add(TraceRow(int(iteration), metric, float(value),
                               float(seconds)))
        return trace

    @property
    def last(self) -> Optional[TraceRow]:
        return self.rows[-1] if self.rows else None


ReportCallback = Callable[[TraceRow], None]


@dataclass
class RunResult:
    policy: TabularPolicy
    trace: ConvergenceTrace
    config: RunConfig

    @property
    def final_value(self) -> Optional[float]:
        last = self.trace.last
        return None if last is None else last.value


def make_solver(game: kernel.Game,
                algorithm: str,
                params: Mapping[str, Any],
                seed: int,
                ) -> Solver:
    """
    :raises errors.InvalidParameterError: unknown algorithm or
        hyperparameter.
    """
    params = dict(params)
    if algorithm == 'cfr':
        allowed = {'alternating', 'regret_floor', 'linear_averaging'}
    elif algorithm == 'mccfr-outcome':
        allowed = {'epsilon', 'seed'}
        params['seed'] = seed
    elif algorithm == 'mccfr-external':
        allowed = {'seed'}
        params['seed'] = seed
    elif algorithm == 'ed':
        allowed = {'learning_rate', 'lr_schedule'}
        if 'lr_schedule' in params:
            params['schedule'] = params.pop('lr_schedule')
            allowed.add('schedule')
    elif algorithm in ALGORITHMS:
        allowed = set()
    else:
        raise errors.InvalidParameterError('algorithm')
    unknown = set(params) - allowed
    if unknown:
        raise errors.InvalidParameterError(', '.join(sorted(unknown)))
    return ALGORITHMS[algorithm](game, **params)


class Run(LoggerMixin, abc.ABC):
    """
    A solver or learning run writing its artifacts to a workspace.

    Usage is the same from the command line and from a Celery worker:

    >>> config = RunConfig(command='solve', game='kuhn_poker',
    ...                    output='/tmp/kuhn')
    >>> result = init_run(config)()
    """

    def __init__(self,
                 config: RunConfig,
                 on_report: Optional[ReportCallback] = None,
                 ) -> None:
        super().__init__()
        self.config = config
        self.on_report = on_report
        self.game = kernel.load_game(config.game)
        self.trace = ConvergenceTrace()
        self.ws: Optional[workspace.FileSystemWorkspace] = None
        if config.output:
            self.ws = workspace.FileSystemWorkspace(config.output)
        self.started = time.monotonic()

    config_file = workspace.File('config.json')
    trace_file = workspace.File('trace.csv')
    policy_file = workspace.File('policy.txt')

    def log_context(self) -> str:
        return f'{self.config.command} {self.game}'

    def __call__(self) -> RunResult:
        """
        Entrypoint.
        :return: final policy and convergence trace.
        """
        with self:
            return self.process()

    def __enter__(self) -> None:
        self.initialize()

    def __exit__(self,
                 exc_type: Type[Exception],
                 exc_val: Exception,
                 exc_tb: TracebackType) -> None:
        self.cleanup(is_error=exc_type is not None)

    @abc.abstractmethod
    def process(self) -> RunResult:  # pragma: no cover
        raise NotImplementedError

    @property
    @abc.abstractmethod
    def evaluated_policy_label(self) -> str:  # pragma: no cover
        raise NotImplementedError

    def initialize(self) -> None:
        """
        Creates the output directory and writes the resolved config.
        """
        self.config = dataclasses.replace(
            self.config, evaluated_policy=self.evaluated_policy_label)
        self.logger.info("Starting %s", self.config.to_native())
        if self.ws is None:
            return
        self.ws.create_collection(self.ws.root)
        self.ws.write(self.config_file, self.config.to_json())
        self.ws.write(self.trace_file, TRACE_HEADER + '\n')

    def cleanup(self, is_error: bool) -> None:
        if is_error:
            self.logger.warning("Run failed after %d trace rows",
                                len(self.trace.rows))

    def report(self, iteration: int, value: float) -> TraceRow:
        row = TraceRow(iteration=iteration,
                       metric=self.config.metric,
                       value=float(value),
                       seconds=time.monotonic() - self.started)
        self.trace.add(row)
        self.logger.info("%d: %s=%.6g", iteration, row.metric, row.value)
        if self.ws is not None:
            self.ws.append(self.trace_file, row.to_csv() + '\n')
        if self.on_report is not None:
            self.on_report(row)
        return row

    def finish(self, policy: TabularPolicy) -> RunResult:
        if self.ws is not None:
            self.ws.write(self.policy_file, policy.to_text())
        return RunResult(policy=policy, trace=self.trace, config=self.config)


class SolveRun(Run):
    """
    Iterates an equilibrium solver, measuring NashConv or exploitability of
    its evaluated policy every ``report_every`` iterations.
    """

    def __init__(self,
                 config: RunConfig,
                 on_report: Optional[ReportCallback] = None,
                 ) -> None:
        super().__init__(config, on_report)
        if config.metric == MEAN_RETURN:
            raise errors.InvalidParameterError('metric')
        self.solver = make_solver(self.game, config.algorithm, config.params,
                                  config.seed)

    @property
    def evaluated_policy_label(self) -> str:
        return self.solver.evaluated

    def measure(self, policy: TabularPolicy) -> float:
        result = analysis.nash_conv(self.solver.game, policy, self.solver.tree)
        if self.config.metric == EXPLOITABILITY:
            if not self.solver.game.descriptor.is_constant_sum:
                raise errors.NotConstantSumError(str(self.game))
            return result.total / self.solver.num_players
        return result.total

    def process(self) -> RunResult:
        every = self.config.report_every
        for i in range(1, self.config.iterations + 1):
            self.solver.iteration()
            if i % every == 0 or i == self.config.iterations:
                self.report(i, self.measure(self.solver.evaluated_policy()))
        return self.finish(self.solver.evaluated_policy())


class QLearnRun(Run):
    """
    Independent Q-learning; the trace holds player 0's mean return over
    each reporting window.

    Hyperparameters: ``alpha``, ``gamma``, ``epsilon``, ``use_world_state``
    and ``players``, a list of seats (``learner``, ``random``).
    """

    @property
    def evaluated_policy_label(self) -> str:
        return 'greedy'

    def learn_config(self) -> rl.QLearnConfig:
        params = {k: v for k, v in self.config.params.items()
                  if k != 'players'}
        try:
            return rl.QLearnConfig(episodes=self.config.iterations,
                                   seed=self.config.seed, **params)
        except TypeError:
            raise errors.InvalidParameterError(', '.join(sorted(params)))

    def seats(self) -> Sequence[rl.Seat]:
        seats = self.config.params.get('players')
        if seats is None:
            return [rl.LEARNER] * self.game.num_players
        return list(seats)

    def process(self) -> RunResult:
        every = self.config.report_every
        reported = 0

        def on_episode(episode: int, result: rl.QLearningResult) -> None:
            nonlocal reported
            if episode % every == 0 or episode == self.config.iterations:
                window = result.returns[reported:]
                value = sum(r[0] for r in window) / len(window)
                self.report(episode, value)
                reported = episode

        result = rl.q_learning_run(self.game, self.seats(),
                                   self.learn_config(), on_episode)
        policy = merge_policies(*(rl.greedy_policy(q)
                                  for q in result.tables.values()))
        return self.finish(policy)


def init_run(config: RunConfig,
             on_report: Optional[ReportCallback] = None) -> Run:
    if config.command == QLEARN:
        return QLearnRun(config, on_report)
    return SolveRun(config, on_report)
