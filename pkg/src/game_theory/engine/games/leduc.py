"""
Leduc hold'em.

Six cards: three ranks (J, Q, K) in two suits; card id ``2 * rank + suit``.
Antes of 1, two betting rounds with fixed raise sizes 2 and 4 and at most
two raises per round. A public card is revealed between the rounds. A
private card pairing the public card wins; otherwise the higher rank wins
and equal ranks split the pot.

Actions: ``0`` fold (only when facing a raise), ``1`` call or check,
``2`` raise.
"""
from typing import List, Optional, Tuple

from game_theory.engine import kernel

FOLD, CALL, RAISE = 0, 1, 2
RANKS = 'JQK'
SUITS = 'sh'
NUM_CARDS = len(RANKS) * len(SUITS)
RAISE_SIZES = (2, 4)
MAX_RAISES = 2
ANTE = 1
ACTION_CHARS = 'fcr'


def card_name(card: int) -> str:
    return RANKS[card // 2] + SUITS[card % 2]


@kernel.register
class LeducPoker(kernel.Game):
    short_name = 'leduc_poker'

    def describe(self) -> kernel.GameDescriptor:
        max_pot = ANTE + sum(s * MAX_RAISES for s in RAISE_SIZES)
        return kernel.GameDescriptor(
            short_name=self.short_name,
            num_players=2,
            utility_min=-float(max_pot),
            utility_max=float(max_pot),
            # 2 deals, 4 actions per round at most, 1 public card
            max_game_length=2 + 4 + 1 + 4,
            chance_mode=kernel.ChanceMode.EXPLICIT,
            information=kernel.Information.IMPERFECT,
            utility_class=kernel.UtilityClass.ZERO_SUM,
            dynamics=kernel.Dynamics.SEQUENTIAL,
            num_distinct_actions=3,
            max_chance_outcomes=NUM_CARDS,
        )

    def new_initial_state(self) -> "LeducState":
        return LeducState(self)


class LeducState(kernel.State):

    def __init__(self, game: LeducPoker) -> None:
        super().__init__(game)
        self.private: Tuple[int, ...] = ()
        self.public: Optional[int] = None
        self.rounds: Tuple[str, ...] = ('',)
        self.stakes: Tuple[int, int] = (ANTE, ANTE)
        self.folded: Optional[int] = None
        self.finished = False

    @property
    def round(self) -> int:
        return len(self.rounds) - 1

    @property
    def raises(self) -> int:
        return self.rounds[-1].count('r')

    def round_over(self) -> bool:
        actions = self.rounds[-1]
        return len(actions) >= 2 and actions[-1] == 'c'

    def current_player(self) -> int:
        if self.folded is not None or self.finished:
            return kernel.TERMINAL
        if len(self.private) < 2:
            return kernel.CHANCE
        if self.round == 1 and self.public is None:
            return kernel.CHANCE
        return len(self.rounds[-1]) % 2

    def _chance_outcomes(self) -> List[Tuple[int, float]]:
        used = set(self.private)
        remaining = [c for c in range(NUM_CARDS) if c not in used]
        p = 1.0 / len(remaining)
        return [(c, p) for c in remaining]

    def _legal_actions(self, player: int) -> List[int]:
        actions = []
        if self.stakes[0] != self.stakes[1]:
            actions.append(FOLD)
        actions.append(CALL)
        if self.raises < MAX_RAISES:
            actions.append(RAISE)
        return actions

    def _apply_action(self, record: kernel.HistoryRecord) -> None:
        assert isinstance(record, int)
        if len(self.private) < 2:
            self.private = self.private + (record,)
            return
        if self.public is None and self.round == 1:
            self.public = record
            return
        player = len(self.rounds[-1]) % 2
        stakes = list(self.stakes)
        if record == FOLD:
            self.folded = player
        elif record == CALL:
            stakes[player] = max(stakes)
        else:
            stakes[player] = max(stakes) + RAISE_SIZES[self.round]
        self.stakes = (stakes[0], stakes[1])
        self.rounds = self.rounds[:-1] + (
            self.rounds[-1] + ACTION_CHARS[record],)
        if self.folded is None and self.round_over():
            if self.round == 0:
                self.rounds = self.rounds + ('',)
            else:
                self.finished = True

    def hand_strength(self, player: int) -> Tuple[int, int]:
        rank = self.private[player] // 2
        assert self.public is not None
        return int(rank == self.public // 2), rank

    def _returns(self) -> List[float]:
        if self.folded is not None:
            winner = 1 - self.folded
        else:
            s0, s1 = self.hand_strength(0), self.hand_strength(1)
            if s0 == s1:
                return [0.0, 0.0]
            winner = 0 if s0 > s1 else 1
        won = float(self.stakes[1 - winner])
        return [won, -won] if winner == 0 else [-won, won]

    def _information_state_key(self, player: int) -> str:
        card = card_name(self.private[player]) \
            if len(self.private) > player else '-'
        public = card_name(self.public) if self.public is not None else '-'
        return f'{player}|{card}|{public}|{"/".join(self.rounds)}'

    def state_key(self) -> str:
        cards = ''.join(card_name(c) for c in self.private)
        public = card_name(self.public) if self.public is not None else '-'
        return f'{cards}|{public}|{"/".join(self.rounds)}'

    def action_to_string(self, player: int, action: int) -> str:
        if player == kernel.CHANCE:
            return f'deal {card_name(action)}'
        return ('fold', 'call', 'raise')[action]

    def __str__(self) -> str:
        return self.state_key()
