"""
Tabular Q-learning with legal-action masking.

In multiagent games every learning seat runs an independent learner: the
moves of other seats and chance between two decisions of a learner are part
of its environment transition.
"""
from dataclasses import dataclass, field
from logging import getLogger
from typing import (Callable, Dict, List, Mapping, Optional, Sequence, Tuple,
                    Union)

import numpy as np

from game_theory import defaults
from game_theory.engine import errors, kernel
from game_theory.engine.policy import TabularPolicy

logger = getLogger(__name__)

LEARNER = 'learner'
RANDOM = 'random'

Seat = Union[str, TabularPolicy]
EpisodeCallback = Callable[[int, "QLearningResult"], None]


class QTable:
    """
    Action values keyed by (state key, action); unseen pairs are 0.
    """

    def __init__(self) -> None:
        self.values: Dict[str, Dict[int, float]] = {}

    def row(self, key: str, legal: Sequence[int]) -> Dict[int, float]:
        """ Values of the legal actions at ``key``, created as zeros."""
        try:
            return self.values[key]
        except KeyError:
            row = self.values[key] = {a: 0.0 for a in legal}
            return row

    def get(self, key: str, action: int) -> float:
        return self.values.get(key, {}).get(action, 0.0)

    def max_value(self, key: str, legal: Sequence[int]) -> float:
        row = self.values.get(key, {})
        return max(row.get(a, 0.0) for a in legal)

    def __len__(self) -> int:
        return sum(len(r) for r in self.values.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QTable):
            return NotImplemented
        return self.values == other.values


def greedy_action(values: Mapping[int, float], legal: Sequence[int]) -> int:
    """ Argmax over legal actions, lowest id on ties."""
    best = legal[0]
    for a in legal[1:]:
        if values.get(a, 0.0) > values.get(best, 0.0):
            best = a
    return best


def epsilon_greedy(q: QTable, key: str, legal: Sequence[int],
                   epsilon: float) -> Dict[int, float]:
    """
    Masked epsilon-greedy distribution over the legal actions.

    The greedy action gets ``1 - epsilon + epsilon / |legal|``, every other
    legal action ``epsilon / |legal|``; actions outside ``legal`` are absent,
    that is zero.

    :raises errors.EmptyActionSetError: no legal actions.
    """
    if not legal:
        raise errors.EmptyActionSetError(key)
    legal = sorted(legal)
    share = epsilon / len(legal)
    probs = {a: share for a in legal}
    probs[greedy_action(q.values.get(key, {}), legal)] += 1 - epsilon
    return probs


@dataclass
class QLearnConfig:
    alpha: float = 0.1
    gamma: float = 1.0
    epsilon: float = 0.1
    episodes: int = 1000
    seed: int = defaults.DEFAULT_SEED
    use_world_state: bool = False
    """ Key the table by world state instead of information state."""

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise errors.InvalidParameterError('alpha')
        if not 0 <= self.gamma <= 1:
            raise errors.InvalidParameterError('gamma')
        if not 0 <= self.epsilon <= 1:
            raise errors.InvalidParameterError('epsilon')
        if self.episodes < 1:
            raise errors.InvalidParameterError('episodes')


@dataclass
class QLearningResult:
    tables: Dict[int, QTable]
    returns: List[List[float]] = field(default_factory=list)
    """ Final returns of every episode."""

    def mean_returns(self, last: Optional[int] = None) -> np.ndarray:
        rows = self.returns[-last:] if last else self.returns
        return np.mean(rows, axis=0)


class _Pending:
    __slots__ = ('key', 'action', 'reward')

    def __init__(self, key: str, action: int) -> None:
        self.key = key
        self.action = action
        self.reward = 0.0


def state_key_for(state: kernel.State, player: int,
                  use_world_state: bool) -> str:
    if use_world_state:
        return f'{player}|{state.state_key()}'
    return state.information_state_key(player)


def q_learning_run(game: kernel.Game,
                   player_assignment: Sequence[Seat],
                   config: QLearnConfig,
                   on_episode: Optional[EpisodeCallback] = None,
                   ) -> QLearningResult:
    """
    Runs episodes of independent Q-learning.

    :param player_assignment: per seat ``'learner'``, ``'random'`` or a fixed
        policy.
    :param on_episode: called with the episode count and the result so far
        after every episode.
    :raises errors.UnsupportedGameError: simultaneous-move game.
    """
    if game.descriptor.is_simultaneous:
        raise errors.UnsupportedGameError(str(game))
    n = game.num_players
    if len(player_assignment) != n:
        raise errors.InvalidParameterError('player_assignment')
    for seat in player_assignment:
        if isinstance(seat, str) and seat not in (LEARNER, RANDOM):
            raise errors.InvalidParameterError('player_assignment')
    learners = [p for p, s in enumerate(player_assignment) if s == LEARNER]
    tables = {p: QTable() for p in learners}
    rng = np.random.default_rng(config.seed)
    result = QLearningResult(tables=tables)

    def update(p: int, pending: _Pending, target: float) -> None:
        row = tables[p].row(pending.key, [pending.action])
        old = row.get(pending.action, 0.0)
        row[pending.action] = old + config.alpha * (target - old)

    for episode in range(config.episodes):
        state = game.new_initial_state()
        pending: Dict[int, _Pending] = {}
        while not state.is_terminal():
            current = state.current_player()
            if current == kernel.CHANCE:
                action = _draw(rng, dict(state.chance_outcomes()))
            else:
                legal = state.legal_actions()
                seat = player_assignment[current]
                if seat == LEARNER:
                    key = state_key_for(state, current, config.use_world_state)
                    q = tables[current]
                    previous = pending.get(current)
                    if previous is not None:
                        update(current, previous, previous.reward +
                               config.gamma * q.max_value(key, legal))
                    q.row(key, legal)
                    probs_map = epsilon_greedy(q, key, legal, config.epsilon)
                    action = _draw(rng, probs_map)
                    pending[current] = _Pending(key, action)
                elif seat == RANDOM:
                    action = legal[rng.integers(len(legal))]
                else:
                    assert isinstance(seat, TabularPolicy)
                    probs_map = seat.action_probabilities(
                        state.information_state_key(current))
                    action = _draw(rng, probs_map)
            state = state.apply_action(action)
            rewards = state.rewards()
            for p, item in pending.items():
                item.reward += rewards[p]
        for p, item in pending.items():
            update(p, item, item.reward)
        result.returns.append(state.returns())
        if on_episode is not None:
            on_episode(episode + 1, result)
        if (episode + 1) % 10000 == 0:
            logger.debug("%s: %d episodes", game, episode + 1)
    return result


def _draw(rng: np.random.Generator, probs: Mapping[int, float]) -> int:
    """ Action drawn with one uniform variate, scanning ascending ids."""
    u = rng.random() * sum(probs.values())
    total = 0.0
    actions = sorted(probs)
    for a in actions:
        total += probs[a]
        if u < total:
            return a
    return actions[-1]


def greedy_policy(q: QTable) -> TabularPolicy:
    """ Deterministic policy playing the greedy action of every row."""
    return TabularPolicy.deterministic({
        key: greedy_action(row, sorted(row))
        for key, row in q.values.items() if row})


def greedy_playout(game: kernel.Game,
                   tables: Mapping[int, QTable],
                   use_world_state: bool = False,
                   ) -> Tuple[kernel.State, List[int]]:
    """
    Plays one episode with every seat greedy on its table; chance takes its
    most likely outcome.
    """
    state = game.new_initial_state()
    actions: List[int] = []
    while not state.is_terminal():
        current = state.current_player()
        if current == kernel.CHANCE:
            action = max(state.chance_outcomes(), key=lambda o: o[1])[0]
        else:
            legal = state.legal_actions()
            key = state_key_for(state, current, use_world_state)
            action = greedy_action(tables[current].values.get(key, {}), legal)
        state = state.apply_action(action)
        actions.append(action)
    return state, actions
