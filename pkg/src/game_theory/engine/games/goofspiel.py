"""
Goofspiel.

Each player holds cards ``1..num_cards``; chance reveals a prize card
uniformly from the remaining prizes, then both players bid simultaneously.
The higher bid wins the prize value; tied bids discard the prize. The player
with more points wins (+1), equal points draw. Action and chance outcome
ids are card values minus one.
"""
from typing import List, Tuple

from game_theory.engine import errors, kernel


@kernel.register
class Goofspiel(kernel.Game):
    short_name = 'goofspiel'
    parameter_defaults = {'num_cards': 4}

    @property
    def num_cards(self) -> int:
        return int(self.params['num_cards'])

    def describe(self) -> kernel.GameDescriptor:
        if self.num_cards < 1:
            raise errors.InvalidParameterError('num_cards')
        return kernel.GameDescriptor(
            short_name=self.short_name,
            num_players=2,
            utility_min=-1.0,
            utility_max=1.0,
            max_game_length=2 * self.num_cards,
            chance_mode=kernel.ChanceMode.EXPLICIT,
            information=kernel.Information.IMPERFECT,
            utility_class=kernel.UtilityClass.ZERO_SUM,
            dynamics=kernel.Dynamics.SIMULTANEOUS,
            num_distinct_actions=self.num_cards,
            max_chance_outcomes=self.num_cards,
        )

    def new_initial_state(self) -> "GoofspielState":
        return GoofspielState(self)


class GoofspielState(kernel.State):
    _game: Goofspiel

    def __init__(self, game: Goofspiel) -> None:
        super().__init__(game)
        self.prizes: Tuple[int, ...] = ()
        self.bids: Tuple[kernel.JointAction, ...] = ()
        self.points: Tuple[float, float] = (0.0, 0.0)

    def current_player(self) -> int:
        n = self._game.num_cards
        if len(self.bids) == n:
            return kernel.TERMINAL
        if len(self.prizes) == len(self.bids):
            return kernel.CHANCE
        return kernel.SIMULTANEOUS

    def _chance_outcomes(self) -> List[Tuple[int, float]]:
        remaining = [c for c in range(self._game.num_cards)
                     if c not in self.prizes]
        p = 1.0 / len(remaining)
        return [(c, p) for c in remaining]

    def _legal_actions(self, player: int) -> List[int]:
        used = {bid[player] for bid in self.bids}
        return [c for c in range(self._game.num_cards) if c not in used]

    def _apply_action(self, record: kernel.HistoryRecord) -> None:
        if isinstance(record, int):
            self.prizes = self.prizes + (record,)
            return
        self.bids = self.bids + (record,)
        prize = self.prizes[-1] + 1.0
        b0, b1 = record
        if b0 > b1:
            self.points = (self.points[0] + prize, self.points[1])
        elif b1 > b0:
            self.points = (self.points[0], self.points[1] + prize)

    def _returns(self) -> List[float]:
        p0, p1 = self.points
        if p0 > p1:
            return [1.0, -1.0]
        if p1 > p0:
            return [-1.0, 1.0]
        return [0.0, 0.0]

    def _information_state_key(self, player: int) -> str:
        prizes = ','.join(str(c + 1) for c in self.prizes)
        mine = ','.join(str(b[player] + 1) for b in self.bids)
        theirs = ','.join(str(b[1 - player] + 1) for b in self.bids)
        return f'{player}|prizes:{prizes}|mine:{mine}|theirs:{theirs}'

    def state_key(self) -> str:
        return f'{self._game}|{self.serialize()}'

    def action_to_string(self, player: int, action: int) -> str:
        if player == kernel.CHANCE:
            return f'prize {action + 1}'
        return f'bid {action + 1}'

    def __str__(self) -> str:
        prizes = ','.join(str(c + 1) for c in self.prizes)
        return f'prizes:{prizes} points:{self.points[0]:g}-{self.points[1]:g}'
