"""
Kuhn poker.

Three cards (J, Q, K), antes of 1, one betting round with a single bet
size of 1. Chance deals player 0's card, then player 1's. Actions:
``0`` pass (check or fold), ``1`` bet (bet or call).
"""
from typing import List, Optional, Tuple

from game_theory.engine import kernel

PASS, BET = 0, 1
CARDS = 'JQK'
NUM_CARDS = len(CARDS)

# Betting sequences that end the game.
TERMINAL_SEQUENCES = ('pp', 'pbp', 'pbb', 'bp', 'bb')


@kernel.register
class KuhnPoker(kernel.Game):
    short_name = 'kuhn_poker'

    def describe(self) -> kernel.GameDescriptor:
        return kernel.GameDescriptor(
            short_name=self.short_name,
            num_players=2,
            utility_min=-2.0,
            utility_max=2.0,
            max_game_length=5,
            chance_mode=kernel.ChanceMode.EXPLICIT,
            information=kernel.Information.IMPERFECT,
            utility_class=kernel.UtilityClass.ZERO_SUM,
            dynamics=kernel.Dynamics.SEQUENTIAL,
            num_distinct_actions=2,
            max_chance_outcomes=NUM_CARDS,
        )

    def new_initial_state(self) -> "KuhnState":
        return KuhnState(self)


class KuhnState(kernel.State):

    def __init__(self, game: KuhnPoker) -> None:
        super().__init__(game)
        self.cards: Tuple[int, ...] = ()
        self.bets = ''

    def current_player(self) -> int:
        if len(self.cards) < 2:
            return kernel.CHANCE
        if self.bets in TERMINAL_SEQUENCES:
            return kernel.TERMINAL
        return len(self.bets) % 2

    def _chance_outcomes(self) -> List[Tuple[int, float]]:
        remaining = [c for c in range(NUM_CARDS) if c not in self.cards]
        p = 1.0 / len(remaining)
        return [(c, p) for c in remaining]

    def _legal_actions(self, player: int) -> List[int]:
        return [PASS, BET]

    def _apply_action(self, record: kernel.HistoryRecord) -> None:
        assert isinstance(record, int)
        if len(self.cards) < 2:
            self.cards = self.cards + (record,)
        else:
            self.bets += 'pb'[record]

    def _returns(self) -> List[float]:
        winner = self.showdown_winner()
        if self.bets == 'pbp':
            winner, pot = 1, 1.0
        elif self.bets == 'bp':
            winner, pot = 0, 1.0
        elif self.bets == 'pp':
            pot = 1.0
        else:
            pot = 2.0
        return [pot, -pot] if winner == 0 else [-pot, pot]

    def showdown_winner(self) -> int:
        return 0 if self.cards[0] > self.cards[1] else 1

    def _information_state_key(self, player: int) -> str:
        card: Optional[str] = None
        if len(self.cards) > player:
            card = CARDS[self.cards[player]]
        return f'{player}|{card or "-"}|{self.bets}'

    def state_key(self) -> str:
        cards = ''.join(CARDS[c] for c in self.cards)
        return f'{cards}|{self.bets}'

    def action_to_string(self, player: int, action: int) -> str:
        if player == kernel.CHANCE:
            return f'deal {CARDS[action]}'
        return ('pass', 'bet')[action]

    def __str__(self) -> str:
        cards = ' '.join(CARDS[c] for c in self.cards)
        return f'{cards} {self.bets}'.strip()
