"""
Tic-Tac-Toe. Action id is the row-major cell index; player 0 plays ``x``.
"""
from typing import List, Optional, Tuple

from game_theory.engine import kernel

EMPTY = '.'
MARKS = 'xo'
LINES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)


@kernel.register
class TicTacToe(kernel.Game):
    short_name = 'tic_tac_toe'

    def describe(self) -> kernel.GameDescriptor:
        return kernel.GameDescriptor(
            short_name=self.short_name,
            num_players=2,
            utility_min=-1.0,
            utility_max=1.0,
            max_game_length=9,
            chance_mode=kernel.ChanceMode.NONE,
            information=kernel.Information.PERFECT,
            utility_class=kernel.UtilityClass.ZERO_SUM,
            dynamics=kernel.Dynamics.SEQUENTIAL,
            num_distinct_actions=9,
        )

    def new_initial_state(self) -> "TicTacToeState":
        return TicTacToeState(self)


class TicTacToeState(kernel.State):

    def __init__(self, game: TicTacToe) -> None:
        super().__init__(game)
        self.board: Tuple[str, ...] = (EMPTY,) * 9
        self.winner: Optional[int] = None

    def current_player(self) -> int:
        if self.winner is not None or EMPTY not in self.board:
            return kernel.TERMINAL
        return len(self._history) % 2

    def _legal_actions(self, player: int) -> List[int]:
        return [i for i, c in enumerate(self.board) if c == EMPTY]

    def _apply_action(self, record: kernel.HistoryRecord) -> None:
        assert isinstance(record, int)
        player = len(self._history) % 2
        board = list(self.board)
        board[record] = MARKS[player]
        self.board = tuple(board)
        for line in LINES:
            if all(self.board[i] == MARKS[player] for i in line):
                self.winner = player
                break

    def _returns(self) -> List[float]:
        if self.winner is None:
            return [0.0, 0.0]
        return [1.0, -1.0] if self.winner == 0 else [-1.0, 1.0]

    def _information_state_key(self, player: int) -> str:
        # the full move sequence keeps information states in one-to-one
        # correspondence with histories
        return f'{player}|{",".join(map(str, self._history))}'

    def state_key(self) -> str:
        return ''.join(self.board)

    def action_to_string(self, player: int, action: int) -> str:
        return f'{MARKS[player]}({action // 3},{action % 3})'

    def __str__(self) -> str:
        b = self.board
        return '\n'.join(''.join(b[r * 3:r * 3 + 3]) for r in range(3))
