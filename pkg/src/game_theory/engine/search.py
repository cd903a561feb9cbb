"""
Decision-time search for perfect-information games.

Values are reported in view of ``maximizing_player``. Depth counts decision
layers only; chance layers are expanded without consuming depth. A search
cut off at depth zero scores the state with ``value_fn`` (0 when omitted);
only expectiminimax expands a chance node sitting at the cutoff.
"""
import math
from dataclasses import dataclass, field
from logging import getLogger
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from game_theory import defaults
from game_theory.engine import errors, kernel

logger = getLogger(__name__)

ValueFn = Callable[[kernel.State], float]

INF = float('inf')


@dataclass
class SearchResult:
    value: float
    best_action: Optional[int]
    nodes_visited: int = 0


def _check_two_player_zero_sum(state: kernel.State) -> None:
    d = state.game.descriptor
    if d.is_simultaneous or d.num_players != 2 or not d.is_constant_sum:
        raise errors.UnsupportedGameError(str(state.game))


class _Counter:
    __slots__ = ('nodes',)

    def __init__(self) -> None:
        self.nodes = 0


def _leaf_value(state: kernel.State, depth: int, value_fn: Optional[ValueFn],
                player: int, expand_chance: bool = True) -> Optional[float]:
    """ Terminal or cutoff value; ``None`` when the search goes on."""
    if state.is_terminal():
        return state.returns()[player]
    if depth <= 0 and not (expand_chance and state.is_chance_node()):
        return value_fn(state) if value_fn is not None else 0.0
    return None


def _pick(state: kernel.State, scores: List[Tuple[int, float]],
          maximizing_player: int) -> Tuple[float, int]:
    """ Best (value, action) for the mover; first strictly better wins."""
    maximize = state.current_player() == maximizing_player
    best_action, best = scores[0]
    for action, value in scores[1:]:
        if (value > best) if maximize else (value < best):
            best_action, best = action, value
    return best, best_action


def minimax(state: kernel.State,
            depth: int,
            value_fn: Optional[ValueFn] = None,
            maximizing_player: int = 0,
            ) -> SearchResult:
    """
    Plain depth-limited minimax.

    :raises errors.ChanceNodeEncounteredError: a chance node above the
        depth cutoff.
    :raises errors.UnsupportedGameError: game is not two-player zero-sum
        and turn-based.
    """
    _check_two_player_zero_sum(state)
    counter = _Counter()

    def search(s: kernel.State, d: int) -> float:
        counter.nodes += 1
        leaf = _leaf_value(s, d, value_fn, maximizing_player,
                           expand_chance=False)
        if leaf is not None:
            return leaf
        if s.is_chance_node():
            raise errors.ChanceNodeEncounteredError(s.state_key())
        values = [search(s.apply_action(a), d - 1) for a in s.legal_actions()]
        if s.current_player() == maximizing_player:
            return max(values)
        return min(values)

    return _root_search(state, depth, value_fn, maximizing_player, counter,
                        search)


def alpha_beta(state: kernel.State,
               depth: int,
               value_fn: Optional[ValueFn] = None,
               maximizing_player: int = 0,
               ) -> SearchResult:
    """
    Minimax with alpha-beta pruning; returns the same value and action as
    :func:`minimax` while visiting no more nodes.

    :raises errors.ChanceNodeEncounteredError: a chance node above the
        depth cutoff.
    :raises errors.UnsupportedGameError: game is not two-player zero-sum
        and turn-based.
    """
    _check_two_player_zero_sum(state)
    counter = _Counter()

    def search(s: kernel.State, d: int, alpha: float, beta: float) -> float:
        counter.nodes += 1
        leaf = _leaf_value(s, d, value_fn, maximizing_player,
                           expand_chance=False)
        if leaf is not None:
            return leaf
        if s.is_chance_node():
            raise errors.ChanceNodeEncounteredError(s.state_key())
        if s.current_player() == maximizing_player:
            value = -INF
            for a in s.legal_actions():
                value = max(value, search(s.apply_action(a), d - 1,
                                          alpha, beta))
                alpha = max(alpha, value)
                if alpha >= beta:
                    break
            return value
        value = INF
        for a in s.legal_actions():
            value = min(value, search(s.apply_action(a), d - 1, alpha, beta))
            beta = min(beta, value)
            if alpha >= beta:
                break
        return value

    if state.is_terminal() or depth <= 0 or state.is_chance_node():
        return _root_search(state, depth, value_fn, maximizing_player,
                            counter, lambda child, d: search(child, d,
                                                             -INF, INF))
    counter.nodes += 1
    maximize = state.current_player() == maximizing_player
    alpha, beta = -INF, INF
    best_action: Optional[int] = None
    best = -INF if maximize else INF
    for a in state.legal_actions():
        value = search(state.apply_action(a), depth - 1, alpha, beta)
        if maximize and value > best:
            best, best_action = value, a
            alpha = max(alpha, best)
        elif not maximize and value < best:
            best, best_action = value, a
            beta = min(beta, best)
    return SearchResult(best, best_action, counter.nodes)


def expectiminimax(state: kernel.State,
                   depth: int,
                   value_fn: Optional[ValueFn] = None,
                   maximizing_player: int = 0,
                   ) -> SearchResult:
    """
    Minimax with chance nodes backed up as expectations.

    :raises errors.UnsupportedGameError: game is not two-player zero-sum
        and turn-based.
    """
    _check_two_player_zero_sum(state)
    counter = _Counter()

    def search(s: kernel.State, d: int) -> float:
        counter.nodes += 1
        leaf = _leaf_value(s, d, value_fn, maximizing_player)
        if leaf is not None:
            return leaf
        if s.is_chance_node():
            return sum(p * search(s.apply_action(o), d)
                       for o, p in s.chance_outcomes())
        values = [search(s.apply_action(a), d - 1) for a in s.legal_actions()]
        if s.current_player() == maximizing_player:
            return max(values)
        return min(values)

    return _root_search(state, depth, value_fn, maximizing_player, counter,
                        search)


def _root_search(state: kernel.State, depth: int,
                 value_fn: Optional[ValueFn], maximizing_player: int,
                 counter: _Counter,
                 search: Callable[[kernel.State, int], float],
                 ) -> SearchResult:
    if state.is_chance_node():
        return SearchResult(search(state, depth), None, counter.nodes)
    leaf = _leaf_value(state, depth, value_fn, maximizing_player)
    if leaf is not None:
        counter.nodes += 1
        return SearchResult(leaf, None, counter.nodes)
    counter.nodes += 1
    scores = [(a, search(state.apply_action(a), depth - 1))
              for a in state.legal_actions()]
    value, action = _pick(state, scores, maximizing_player)
    return SearchResult(value, action, counter.nodes)


def default_uct_c(game: kernel.Game) -> float:
    """ Exploration constant scaled to the game's utility range."""
    d = game.descriptor
    return 2 * (d.utility_max - d.utility_min) * math.sqrt(2)


class MctsNode:
    __slots__ = ('state', 'player', 'visits', 'total', 'children', 'probs',
                 'expanded')

    def __init__(self, state: kernel.State) -> None:
        self.state = state
        self.player = state.current_player()
        self.visits = 0
        self.total = np.zeros(state.num_players)
        self.children: Dict[int, "MctsNode"] = {}
        self.probs: List[Tuple[int, float]] = []
        self.expanded = False

    def expand(self) -> None:
        if self.player == kernel.CHANCE:
            self.probs = self.state.chance_outcomes()
            actions = [o for o, _ in self.probs]
        else:
            actions = self.state.legal_actions()
        for a in actions:
            self.children[a] = MctsNode(self.state.apply_action(a))
        self.expanded = True

    def mean(self, player: int) -> float:
        return float(self.total[player] / self.visits)


@dataclass
class MctsResult(SearchResult):
    child_visits: Dict[int, int] = field(default_factory=dict)
    child_values: Dict[int, float] = field(default_factory=dict)
    """ Mean return of the root mover after each root action."""


class Mcts:
    """
    UCT with uniform random playouts.

    Unvisited children are tried first in ascending action order; chance
    children are sampled from the chance distribution. A playout stopped at
    ``rollout_limit`` moves scores ``cutoff_value`` for every player.
    """

    def __init__(self,
                 uct_c: float,
                 rollout_limit: int = defaults.MCTS_ROLLOUT_LIMIT,
                 cutoff_value: float = defaults.MCTS_CUTOFF_VALUE,
                 seed: int = defaults.DEFAULT_SEED) -> None:
        self.uct_c = uct_c
        self.rollout_limit = rollout_limit
        self.cutoff_value = cutoff_value
        self.rng = np.random.default_rng(seed)

    def select(self, node: MctsNode) -> MctsNode:
        if node.player == kernel.CHANCE:
            outcomes, probs = zip(*node.probs)
            index = self.rng.choice(len(outcomes), p=np.asarray(probs))
            return node.children[outcomes[index]]
        best: Optional[MctsNode] = None
        best_score = -INF
        log_n = math.log(node.visits) if node.visits else 0.0
        for a in sorted(node.children):
            child = node.children[a]
            if child.visits == 0:
                return child
            score = (child.mean(node.player)
                     + self.uct_c * math.sqrt(log_n / child.visits))
            if score > best_score:
                best, best_score = child, score
        assert best is not None
        return best

    def rollout(self, state: kernel.State) -> np.ndarray:
        steps = 0
        while not state.is_terminal():
            if steps >= self.rollout_limit:
                return np.full(state.num_players, self.cutoff_value)
            if state.is_chance_node():
                outcomes, probs = zip(*state.chance_outcomes())
                action = outcomes[self.rng.choice(len(outcomes),
                                                  p=np.asarray(probs))]
            else:
                legal = state.legal_actions()
                action = legal[self.rng.integers(len(legal))]
            state = state.apply_action(action)
            steps += 1
        return np.asarray(state.returns(), dtype=np.float64)

    def simulate(self, root: MctsNode) -> None:
        path = [root]
        node = root
        while True:
            if node.state.is_terminal():
                returns = np.asarray(node.state.returns(), dtype=np.float64)
                break
            if not node.expanded:
                if node.visits == 0 and node is not root:
                    returns = self.rollout(node.state)
                    break
                node.expand()
            node = self.select(node)
            path.append(node)
        for n in path:
            n.visits += 1
            n.total += returns

    def search(self, state: kernel.State, num_simulations: int) -> MctsResult:
        """
        :raises errors.TerminalStateError: root is terminal.
        """
        if state.is_terminal():
            raise errors.TerminalStateError(state.state_key())
        if num_simulations < 1:
            raise errors.InvalidParameterError('num_simulations')
        root = MctsNode(state)
        root.expand()
        for _ in range(num_simulations):
            self.simulate(root)
        visits = {a: c.visits for a, c in sorted(root.children.items())}
        mover = root.player if root.player >= 0 else 0
        values = {a: c.mean(mover) for a, c in sorted(root.children.items())
                  if c.visits}
        best_action = max(sorted(visits), key=lambda a: visits[a])
        return MctsResult(
            value=values[best_action],
            best_action=best_action,
            nodes_visited=root.visits,
            child_visits=visits,
            child_values=values,
        )


def mcts_search(state: kernel.State,
                num_simulations: int = defaults.MCTS_SIMULATIONS,
                uct_c: Optional[float] = None,
                rollout_limit: int = defaults.MCTS_ROLLOUT_LIMIT,
                seed: int = defaults.DEFAULT_SEED,
                cutoff_value: float = defaults.MCTS_CUTOFF_VALUE,
                ) -> MctsResult:
    """
    UCT search from ``state``; the most visited root child is chosen, ties
    going to the lowest action id. Identical arguments give identical
    results.

    :raises errors.UnsupportedGameError: simultaneous-move game.
    :raises errors.TerminalStateError: root is terminal.
    """
    if state.game.descriptor.is_simultaneous:
        raise errors.UnsupportedGameError(str(state.game))
    if uct_c is None:
        uct_c = default_uct_c(state.game)
    mcts = Mcts(uct_c, rollout_limit=rollout_limit,
                cutoff_value=cutoff_value, seed=seed)
    result = mcts.search(state, num_simulations)
    logger.debug("mcts %s: visits %s", state.state_key(), result.child_visits)
    return result
