"""
One-shot two-player matrix games.
"""
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, List, Optional, Sequence, Tuple

from game_theory.engine import errors, kernel

Matrix = Tuple[Tuple[float, ...], ...]


def as_matrix(rows: Sequence[Sequence[float]]) -> Matrix:
    return tuple(tuple(float(v) for v in row) for row in rows)


@dataclass(frozen=True)
class MatrixGameSpec:
    """
    Payoffs of the row and column players indexed ``[row][col]``.
    """
    row_payoffs: Matrix
    col_payoffs: Matrix
    row_actions: Tuple[str, ...] = field(default=())
    col_actions: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        rows = len(self.row_payoffs)
        cols = len(self.row_payoffs[0]) if rows else 0
        if rows < 1 or cols < 1:
            raise errors.ShapeMismatchError("empty payoff matrix")
        for matrix in (self.row_payoffs, self.col_payoffs):
            if len(matrix) != rows or any(len(r) != cols for r in matrix):
                raise errors.ShapeMismatchError(
                    f"expected {rows}x{cols} payoff matrices")
        if not self.row_actions:
            object.__setattr__(self, 'row_actions',
                               tuple(f'r{i}' for i in range(rows)))
        if not self.col_actions:
            object.__setattr__(self, 'col_actions',
                               tuple(f'c{j}' for j in range(cols)))
        if len(self.row_actions) != rows or len(self.col_actions) != cols:
            raise errors.ShapeMismatchError("action names")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.row_payoffs), len(self.row_payoffs[0])

    def entries(self) -> List[Tuple[float, float]]:
        return [(r, c)
                for rr, cr in zip(self.row_payoffs, self.col_payoffs)
                for r, c in zip(rr, cr)]

    @property
    def is_zero_sum(self) -> bool:
        return all(r == -c for r, c in self.entries())

    def utility_class(self) -> Tuple[kernel.UtilityClass, float]:
        sums = {r + c for r, c in self.entries()}
        if sums == {0.0}:
            return kernel.UtilityClass.ZERO_SUM, 0.0
        if len(sums) == 1:
            return kernel.UtilityClass.CONSTANT_SUM, sums.pop()
        if all(r == c for r, c in self.entries()):
            return kernel.UtilityClass.IDENTICAL, 0.0
        return kernel.UtilityClass.GENERAL_SUM, 0.0


class MatrixGame(kernel.Game):
    """
    Simultaneous one-shot game built from a :class:`MatrixGameSpec`.

    Registered matrix games set ``spec`` on the class; ad-hoc games pass it
    to the constructor.
    """
    short_name: ClassVar[str] = 'matrix_game'
    spec: ClassVar[Optional[MatrixGameSpec]] = None

    def __init__(self,
                 params: Optional[Dict[str, Any]] = None,
                 spec: Optional[MatrixGameSpec] = None) -> None:
        self.payoffs = spec or self.spec
        if self.payoffs is None:  # pragma: no cover
            raise errors.ShapeMismatchError("payoffs are not defined")
        super().__init__(params)

    def describe(self) -> kernel.GameDescriptor:
        utility_class, utility_sum = self.payoffs.utility_class()
        values = [v for pair in self.payoffs.entries() for v in pair]
        low, high = min(values), max(values)
        if low == high:
            high = low + 1.0
        return kernel.GameDescriptor(
            short_name=self.short_name,
            num_players=2,
            utility_min=low,
            utility_max=high,
            max_game_length=1,
            chance_mode=kernel.ChanceMode.NONE,
            information=kernel.Information.IMPERFECT,
            utility_class=utility_class,
            dynamics=kernel.Dynamics.SIMULTANEOUS,
            num_distinct_actions=max(self.payoffs.shape),
            utility_sum=utility_sum,
        )

    def new_initial_state(self) -> "MatrixState":
        return MatrixState(self)

    def __str__(self) -> str:
        if self.spec is None:
            rows, cols = self.payoffs.shape
            return f'{self.short_name}({rows}x{cols})'
        return super().__str__()


class MatrixState(kernel.State):
    _game: MatrixGame

    def __init__(self, game: MatrixGame) -> None:
        super().__init__(game)
        self.joint: Optional[kernel.JointAction] = None

    def current_player(self) -> int:
        if self.joint is None:
            return kernel.SIMULTANEOUS
        return kernel.TERMINAL

    def _legal_actions(self, player: int) -> List[int]:
        rows, cols = self._game.payoffs.shape
        return list(range(rows if player == 0 else cols))

    def _apply_action(self, record: kernel.HistoryRecord) -> None:
        assert isinstance(record, tuple)
        self.joint = record

    def _returns(self) -> List[float]:
        assert self.joint is not None
        r, c = self.joint
        spec = self._game.payoffs
        return [spec.row_payoffs[r][c], spec.col_payoffs[r][c]]

    def _information_state_key(self, player: int) -> str:
        if self.joint is None:
            return f'p{player}'
        return f'p{player}|{self.serialize()}'

    def state_key(self) -> str:
        return self.serialize() or 'root'

    def action_to_string(self, player: int, action: int) -> str:
        spec = self._game.payoffs
        names = spec.row_actions if player == 0 else spec.col_actions
        return names[action]

    def __str__(self) -> str:
        if self.joint is None:
            return 'simultaneous move'
        r, c = self.joint
        return (f'{self.action_to_string(0, r)} vs '
                f'{self.action_to_string(1, c)}')


def matrix_from_tensors(row: Sequence[Sequence[float]],
                        col: Sequence[Sequence[float]],
                        row_actions: Sequence[str] = (),
                        col_actions: Sequence[str] = (),
                        ) -> MatrixGame:
    """
    :raises errors.ShapeMismatchError: payoff shapes differ or are empty.
    """
    spec = MatrixGameSpec(as_matrix(row), as_matrix(col),
                          tuple(row_actions), tuple(col_actions))
    return MatrixGame(spec=spec)


def _transpose(rows: Sequence[Sequence[float]]) -> Matrix:
    return as_matrix(list(zip(*rows)))


RPS = ((0, -1, 1), (1, 0, -1), (-1, 1, 0))
MATCHING_PENNIES = ((1, -1), (-1, 1))
PRISONERS_DILEMMA = ((5, 0), (10, 1))
STAG_HUNT = ((2, 0), (1, 1))


@kernel.register
class RockPaperScissors(MatrixGame):
    short_name = 'matrix_rps'
    spec = MatrixGameSpec(as_matrix(RPS),
                          as_matrix([[-v for v in r] for r in RPS]),
                          ('Rock', 'Paper', 'Scissors'),
                          ('Rock', 'Paper', 'Scissors'))


@kernel.register
class MatchingPennies(MatrixGame):
    short_name = 'matrix_mp'
    spec = MatrixGameSpec(as_matrix(MATCHING_PENNIES),
                          as_matrix([[-v for v in r]
                                     for r in MATCHING_PENNIES]),
                          ('Heads', 'Tails'), ('Heads', 'Tails'))


@kernel.register
class PrisonersDilemma(MatrixGame):
    short_name = 'matrix_pd'
    spec = MatrixGameSpec(as_matrix(PRISONERS_DILEMMA),
                          _transpose(PRISONERS_DILEMMA),
                          ('Cooperate', 'Defect'), ('Cooperate', 'Defect'))


@kernel.register
class StagHunt(MatrixGame):
    short_name = 'matrix_sh'
    spec = MatrixGameSpec(as_matrix(STAG_HUNT), _transpose(STAG_HUNT),
                          ('Stag', 'Hare'), ('Stag', 'Hare'))
