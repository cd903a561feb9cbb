"""
Sequential rendition of a simultaneous-move game.

Each joint decision becomes ``n`` consecutive decisions of players
``0..n-1``; the choices made earlier in the same joint decision stay hidden
from later movers, so a player's information state at its sub-step is its
information state in the source game.
"""
from typing import Any, Dict, List, Optional, Tuple, Union

from game_theory.engine import errors, kernel


@kernel.register
class TurnBasedGame(kernel.Game):
    short_name = 'turn_based'
    parameter_defaults: Dict[str, Any] = {'game': ''}
    required_parameters = ('game',)

    def __init__(self, params: Optional[Dict[str, Any]] = None) -> None:
        params = dict(params or {})
        source = params.get('game')
        self.source: kernel.Game
        if isinstance(source, kernel.Game):
            self.source = source
            params['game'] = str(source)
        elif source:
            self.source = kernel.load_game(str(source))
        else:
            raise errors.InvalidParameterError('game', 'missing parameter')
        super().__init__(params)

    def describe(self) -> kernel.GameDescriptor:
        d = self.source.descriptor
        if not d.is_simultaneous:
            raise errors.AlreadyTurnBasedError(str(self.source))
        return kernel.GameDescriptor(
            short_name=self.short_name,
            num_players=d.num_players,
            utility_min=d.utility_min,
            utility_max=d.utility_max,
            max_game_length=d.max_game_length * d.num_players,
            chance_mode=d.chance_mode,
            information=kernel.Information.IMPERFECT,
            utility_class=d.utility_class,
            dynamics=kernel.Dynamics.SEQUENTIAL,
            num_distinct_actions=d.num_distinct_actions,
            max_chance_outcomes=d.max_chance_outcomes,
            utility_sum=d.utility_sum,
        )

    def new_initial_state(self) -> "TurnBasedState":
        return TurnBasedState(self, self.source.new_initial_state())

    def __str__(self) -> str:
        return f'{self.short_name}(game={self.source})'


class TurnBasedState(kernel.State):
    _game: TurnBasedGame

    def __init__(self, game: TurnBasedGame, source: kernel.State) -> None:
        super().__init__(game)
        self.source = source
        self.pending: Tuple[int, ...] = ()

    def current_player(self) -> int:
        current = self.source.current_player()
        if current == kernel.SIMULTANEOUS:
            return len(self.pending)
        return current

    def _legal_actions(self, player: int) -> List[int]:
        if self.source.is_simultaneous_node():
            return self.source.legal_actions(player)
        return self.source.legal_actions()

    def _chance_outcomes(self) -> List[Tuple[int, float]]:
        return self.source.chance_outcomes()

    def _apply_action(self, record: kernel.HistoryRecord) -> None:
        assert isinstance(record, int)
        if not self.source.is_simultaneous_node():
            self.source = self.source.apply_action(record)
            return
        pending = self.pending + (record,)
        if len(pending) == self.num_players:
            self.source = self.source.apply_action(pending)
            pending = ()
        self.pending = pending

    def _returns(self) -> List[float]:
        return self.source.returns()

    def rewards(self) -> List[float]:
        if self.pending:
            return [0.0] * self.num_players
        return self.source.rewards()

    def _information_state_key(self, player: int) -> str:
        return self.source.information_state_key(player)

    def state_key(self) -> str:
        pending = '+'.join(map(str, self.pending))
        return f'{self.source.state_key()}|pending:{pending}'

    def action_to_string(self, player: int, action: int) -> str:
        return self.source.action_to_string(player, action)

    def __str__(self) -> str:
        return str(self.source)


def to_turn_based(game: Union[kernel.Game, str]) -> TurnBasedGame:
    """
    :raises errors.AlreadyTurnBasedError: game is already sequential.
    """
    if isinstance(game, str):
        game = kernel.load_game(game)
    return TurnBasedGame({'game': game})
