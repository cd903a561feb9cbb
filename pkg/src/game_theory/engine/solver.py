import abc
from typing import ClassVar, Dict, Optional, Tuple

from game_theory.engine import analysis, errors, kernel
from game_theory.engine.policy import AvgPolicyAccumulator, TabularPolicy, \
    normalize
from game_theory.utils import LoggerMixin


class Solver(LoggerMixin, abc.ABC):
    """
    Iterative equilibrium solver over the cached history tree of a game.

    Simultaneous-move games are solved in their turn-based rendition.
    """
    name: ClassVar[str]
    evaluated: ClassVar[str] = 'average'
    """ Which policy convergence is measured on: 'average' or 'current'."""

    def __init__(self,
                 game: kernel.Game,
                 tree: Optional[analysis.HistoryNode] = None,
                 ) -> None:
        super().__init__()
        if game.num_players < 2:
            raise errors.UnsupportedGameError(str(game))
        self.game = analysis.sequential_game(game)
        self.tree = tree or analysis.build_history_tree(self.game)
        self.infostates = analysis.information_states(self.tree)
        self.t = 0

    @property
    def num_players(self) -> int:
        return self.game.num_players

    @abc.abstractmethod
    def iteration(self) -> None:  # pragma: no cover
        """ Runs one iteration and increments ``t``."""
        raise NotImplementedError

    @abc.abstractmethod
    def evaluated_policy(self) -> TabularPolicy:  # pragma: no cover
        raise NotImplementedError

    def run(self, iterations: int) -> TabularPolicy:
        for _ in range(iterations):
            self.iteration()
        return self.evaluated_policy()

    def nash_conv(self) -> float:
        return analysis.nash_conv(self.game, self.evaluated_policy(),
                                  self.tree).total

    def uniform(self, key: str) -> Tuple[Tuple[int, float], ...]:
        actions = self.infostates[key][1]
        return tuple((a, 1.0 / len(actions)) for a in actions)

    def complete(self, acc: AvgPolicyAccumulator) -> TabularPolicy:
        """
        Normalized accumulator with uniform entries for information states
        it never saw.
        """
        table: Dict[str, Tuple[Tuple[int, float], ...]] = dict(normalize(acc))
        for key in self.infostates:
            if key not in table:
                table[key] = self.uniform(key)
        return TabularPolicy(table)

    def log_context(self) -> str:
        return f'{self.name} {self.game}'

    def __repr__(self) -> str:
        return f'<{self.__class__.__name__} {self.game} t={self.t}>'
