"""
Pig, a two-player dice race.

On a turn the player repeatedly rolls a die (``0``) or holds (``1``,
legal only with a positive turn total). Rolling a one forfeits the turn
total; any other face adds to it. Reaching ``target_score`` with the banked
score plus the turn total wins at once. A game reaching ``horizon`` moves
ends in a draw. Chance outcome ``f - 1`` is die face ``f``.

:meth:`PigState.state_key` ignores the move counter, so the state graph is
cyclic; analysis over Pig treats it as a Markov game.
"""
from typing import List, Optional, Tuple

from game_theory.engine import errors, kernel

ROLL, HOLD = 0, 1


@kernel.register
class Pig(kernel.Game):
    short_name = 'pig'
    parameter_defaults = {'target_score': 20, 'dice_sides': 6,
                          'horizon': 1000}

    @property
    def target_score(self) -> int:
        return int(self.params['target_score'])

    @property
    def dice_sides(self) -> int:
        return int(self.params['dice_sides'])

    @property
    def horizon(self) -> int:
        return int(self.params['horizon'])

    def describe(self) -> kernel.GameDescriptor:
        for key, minimum in (('target_score', 1), ('dice_sides', 2),
                             ('horizon', 1)):
            if int(self.params[key]) < minimum:
                raise errors.InvalidParameterError(key)
        return kernel.GameDescriptor(
            short_name=self.short_name,
            num_players=2,
            utility_min=-1.0,
            utility_max=1.0,
            max_game_length=self.horizon,
            chance_mode=kernel.ChanceMode.EXPLICIT,
            information=kernel.Information.PERFECT,
            utility_class=kernel.UtilityClass.ZERO_SUM,
            dynamics=kernel.Dynamics.SEQUENTIAL,
            num_distinct_actions=2,
            max_chance_outcomes=self.dice_sides,
        )

    def new_initial_state(self) -> "PigState":
        return PigState(self)


class PigState(kernel.State):
    _game: Pig

    def __init__(self, game: Pig) -> None:
        super().__init__(game)
        self.scores: Tuple[int, int] = (0, 0)
        self.turn_total = 0
        self.player = 0
        self.rolling = False
        self.winner: Optional[int] = None

    def current_player(self) -> int:
        if self.winner is not None:
            return kernel.TERMINAL
        if len(self._history) >= self._game.horizon:
            return kernel.TERMINAL
        if self.rolling:
            return kernel.CHANCE
        return self.player

    def _chance_outcomes(self) -> List[Tuple[int, float]]:
        sides = self._game.dice_sides
        return [(f, 1.0 / sides) for f in range(sides)]

    def _legal_actions(self, player: int) -> List[int]:
        if self.turn_total > 0:
            return [ROLL, HOLD]
        return [ROLL]

    def _apply_action(self, record: kernel.HistoryRecord) -> None:
        assert isinstance(record, int)
        if self.rolling:
            self.rolling = False
            face = record + 1
            if face == 1:
                self.turn_total = 0
                self.player = 1 - self.player
                return
            self.turn_total += face
            if self.scores[self.player] + self.turn_total >= \
                    self._game.target_score:
                self.winner = self.player
            return
        if record == ROLL:
            self.rolling = True
            return
        scores = list(self.scores)
        scores[self.player] += self.turn_total
        self.scores = (scores[0], scores[1])
        self.turn_total = 0
        self.player = 1 - self.player

    def _returns(self) -> List[float]:
        if self.winner is None:
            return [0.0, 0.0]
        return [1.0, -1.0] if self.winner == 0 else [-1.0, 1.0]

    def _information_state_key(self, player: int) -> str:
        return f'{player}|{self.serialize()}'

    def state_key(self) -> str:
        if self.winner is not None:
            return f'win:{self.winner}'
        if len(self._history) >= self._game.horizon:
            return 'draw'
        mover = 'c' if self.rolling else 'p'
        s0, s1 = self.scores
        return f'{s0},{s1}|{self.turn_total}|{mover}{self.player}'

    def action_to_string(self, player: int, action: int) -> str:
        if player == kernel.CHANCE:
            return f'face {action + 1}'
        return ('roll', 'hold')[action]

    def __str__(self) -> str:
        s0, s1 = self.scores
        return (f'scores {s0}-{s1}, player {self.player} '
                f'turn total {self.turn_total}')
