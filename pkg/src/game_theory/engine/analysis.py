"""
Exact traversals of enumerable games and equilibrium-quality metrics.

Exact passes walk a cached :class:`HistoryNode` tree. Simultaneous-move
games are evaluated through their turn-based rendition, which shares
information-state keys with the source game, so a policy for one is a policy
for the other.
"""
from collections import deque
from dataclasses import dataclass, field
from logging import getLogger
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from game_theory import defaults
from game_theory.engine import errors, kernel
from game_theory.engine.games import turn_based
from game_theory.engine.policy import TabularPolicy

logger = getLogger(__name__)


class HistoryNode:
    """
    One history of a sequential game with its children expanded.

    ``key`` and ``actions`` are set at decision nodes, ``probs`` at chance
    nodes, ``returns`` at terminals.
    """
    __slots__ = ('state', 'player', 'key', 'actions', 'probs', 'children',
                 'returns')

    def __init__(self, state: kernel.State) -> None:
        self.state = state
        self.player = state.current_player()
        self.key = ''
        self.actions: Tuple[int, ...] = ()
        self.probs: Tuple[float, ...] = ()
        self.children: Tuple["HistoryNode", ...] = ()
        self.returns: Optional[Tuple[float, ...]] = None

    @property
    def is_terminal(self) -> bool:
        return self.returns is not None

    @property
    def is_chance(self) -> bool:
        return self.player == kernel.CHANCE

    def __repr__(self) -> str:
        return f'<HistoryNode {kernel.player_name(self.player)} {self.key!r}>'


def sequential_game(game: kernel.Game) -> kernel.Game:
    """ Turn-based rendition of a simultaneous game, or the game itself."""
    if game.descriptor.is_simultaneous:
        return turn_based.to_turn_based(game)
    return game


def build_history_tree(game: kernel.Game,
                       budget: Optional[int] = None) -> HistoryNode:
    """
    Expands every history of a game.

    :param game: sequential game; simultaneous games are converted.
    :raises errors.BudgetExceededError: too many histories.
    """
    game = sequential_game(game)
    if budget is None:
        budget = defaults.ENUMERATION_BUDGET
    count = 0

    def expand(state: kernel.State) -> HistoryNode:
        nonlocal count
        count += 1
        if count > budget:
            raise errors.BudgetExceededError(budget)
        node = HistoryNode(state)
        if state.is_terminal():
            node.returns = tuple(state.returns())
            return node
        if node.player == kernel.CHANCE:
            outcomes = state.chance_outcomes()
            node.actions = tuple(a for a, _ in outcomes)
            node.probs = tuple(p for _, p in outcomes)
        else:
            node.key = state.information_state_key(node.player)
            node.actions = tuple(state.legal_actions(node.player))
        node.children = tuple(expand(state.apply_action(a))
                              for a in node.actions)
        return node

    root = expand(game.new_initial_state())
    logger.debug("%s: history tree of %d nodes", game, count)
    return root


def iter_nodes(root: HistoryNode) -> Iterator[HistoryNode]:
    """ Depth-first pre-order walk over a history tree."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


InfoStateIndex = Dict[str, Tuple[int, Tuple[int, ...]]]


def information_states(root: HistoryNode) -> InfoStateIndex:
    """
    :returns: information-state key to (player, legal actions), in
        depth-first discovery order.
    """
    result: InfoStateIndex = {}
    for node in iter_nodes(root):
        if node.key and node.key not in result:
            result[node.key] = (node.player, node.actions)
    return result


def own_reach(root: HistoryNode,
              policy: Mapping[str, Sequence[Tuple[int, float]]],
              player: int,
              ) -> Dict[str, float]:
    """
    Probability that ``player``'s own choices under ``policy`` lead to each of
    its information states; well defined with perfect recall.
    """
    reach: Dict[str, float] = {}
    stack: List[Tuple[HistoryNode, float]] = [(root, 1.0)]
    while stack:
        node, r = stack.pop()
        if node.is_terminal:
            continue
        if node.player != player:
            stack.extend((c, r) for c in node.children)
            continue
        reach.setdefault(node.key, r)
        probs = dict(policy[node.key])
        stack.extend((c, r * probs.get(a, 0.0))
                     for a, c in zip(node.actions, node.children))
    return reach


def _resolve_tree(game: kernel.Game,
                  tree: Optional[HistoryNode]) -> HistoryNode:
    return tree if tree is not None else build_history_tree(game)


def node_values(node: HistoryNode, policy: TabularPolicy) -> np.ndarray:
    """
    Expected returns of all players from a tree node under a joint policy.

    :raises errors.MissingPolicyEntryError: reached decision key has no entry.
    """
    if node.returns is not None:
        return np.asarray(node.returns, dtype=np.float64)
    if node.is_chance:
        weights = node.probs
    else:
        probs = policy.action_probabilities(node.key)
        weights = tuple(probs.get(a, 0.0) for a in node.actions)
    value = np.zeros(node.state.num_players)
    for w, child in zip(weights, node.children):
        if w > 0:
            value += w * node_values(child, policy)
    return value


def policy_value(state: kernel.State, policy: TabularPolicy) -> np.ndarray:
    """
    Expected returns from ``state`` under a joint policy, by direct recursion
    over states; simultaneous nodes weight joint actions by the product of
    the players' probabilities.
    """
    if state.is_terminal():
        return np.asarray(state.returns(), dtype=np.float64)
    value = np.zeros(state.num_players)
    current = state.current_player()
    if current == kernel.CHANCE:
        for outcome, p in state.chance_outcomes():
            value += p * policy_value(state.apply_action(outcome), policy)
        return value
    players = kernel.acting_players(state)
    probs = [policy.action_probabilities(state.information_state_key(p))
             for p in players]
    for record, _ in kernel.child_records(state):
        joint = record if isinstance(record, tuple) else (record,)
        w = float(np.prod([pr.get(a, 0.0) for pr, a in zip(probs, joint)]))
        if w > 0:
            value += w * policy_value(state.apply_action(record), policy)
    return value


def expected_returns(game: kernel.Game,
                     policy: TabularPolicy,
                     tree: Optional[HistoryNode] = None) -> np.ndarray:
    """
    Exact expected returns of every player under a joint policy.

    :raises errors.MissingPolicyEntryError: policy misses a reached key.
    :raises errors.BudgetExceededError: game is too large to enumerate.
    """
    if tree is None and game.descriptor.is_simultaneous:
        return policy_value(game.new_initial_state(), policy)
    return node_values(_resolve_tree(game, tree), policy)


def get_all_states(game: kernel.Game,
                   include_chance: bool = False,
                   include_terminals: bool = False,
                   budget: Optional[int] = None,
                   breadth_first: bool = False,
                   ) -> Dict[str, kernel.State]:
    """
    Enumerates distinct world states keyed by :meth:`State.state_key`.

    A state already seen is not expanded again, so games whose state graph
    has cycles (Pig) still enumerate finitely.

    :param breadth_first: discover every state along a shortest history.
    :raises errors.BudgetExceededError: more than ``budget`` states visited.
    """
    if budget is None:
        budget = defaults.ENUMERATION_BUDGET
    seen: Dict[str, kernel.State] = {}
    result: Dict[str, kernel.State] = {}
    pending = deque([game.new_initial_state()])
    while pending:
        state = pending.popleft() if breadth_first else pending.pop()
        key = state.state_key()
        if key in seen:
            continue
        seen[key] = state
        if len(seen) > budget:
            raise errors.BudgetExceededError(budget)
        if state.is_terminal():
            if include_terminals:
                result[key] = state
            continue
        if not state.is_chance_node() or include_chance:
            result[key] = state
        children = [state.apply_action(r)
                    for r, _ in kernel.child_records(state)]
        if breadth_first:
            pending.extend(children)
        else:
            pending.extend(reversed(children))
    return result


@dataclass
class Step:
    player: int
    key: str
    """ Information-state key of the acting player, empty at chance nodes."""
    probabilities: Dict[int, float]
    action: kernel.HistoryRecord
    rewards: List[float]


@dataclass
class Trajectory:
    steps: List[Step] = field(default_factory=list)
    returns: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class TrajectoryBatch:
    seed: int
    episodes: List[Trajectory] = field(default_factory=list)

    def mean_returns(self) -> np.ndarray:
        return np.mean([e.returns for e in self.episodes], axis=0)

    def returns_array(self) -> np.ndarray:
        return np.asarray([e.returns for e in self.episodes])


def _choose(rng: np.random.Generator, actions: Sequence[int],
            probs: Sequence[float]) -> int:
    return int(actions[rng.choice(len(actions), p=np.asarray(probs))])


def sample_trajectories(game: kernel.Game,
                        policy: TabularPolicy,
                        num_episodes: int,
                        seed: int = defaults.DEFAULT_SEED,
                        ) -> TrajectoryBatch:
    """
    Plays episodes with every player following the joint policy.

    Identical (game, policy, seed) give identical batches.
    """
    if num_episodes < 1:
        raise errors.InvalidParameterError('num_episodes')
    rng = np.random.default_rng(seed)
    batch = TrajectoryBatch(seed=seed)
    for _ in range(num_episodes):
        state = game.new_initial_state()
        episode = Trajectory()
        while not state.is_terminal():
            current = state.current_player()
            record: kernel.HistoryRecord
            if current == kernel.CHANCE:
                outcomes = state.chance_outcomes()
                record = _choose(rng, *zip(*outcomes))
                step = Step(current, '', dict(outcomes), record, [])
            elif current == kernel.SIMULTANEOUS:
                keys, joint = [], []
                for p in range(state.num_players):
                    key = state.information_state_key(p)
                    probs = policy.action_probabilities(key)
                    keys.append(key)
                    joint.append(_choose(rng, *zip(*sorted(probs.items()))))
                record = tuple(joint)
                step = Step(current, ' '.join(keys), {}, record, [])
            else:
                key = state.information_state_key(current)
                probs = policy.action_probabilities(key)
                record = _choose(rng, *zip(*sorted(probs.items())))
                step = Step(current, key, probs, record, [])
            state = state.apply_action(record)
            step.rewards = state.rewards()
            episode.steps.append(step)
        episode.returns = state.returns()
        batch.episodes.append(episode)
    return batch


def value_iteration(game: kernel.Game,
                    tolerance: float = defaults.VALUE_ITERATION_TOLERANCE,
                    budget: Optional[int] = None,
                    ) -> Dict[str, float]:
    """
    Solves a single-agent or two-player zero-sum perfect-information game.

    Values of decision states are in view of the player to move; chance and
    terminal states carry player 0's value. Sweeps repeat until no value
    changes by ``tolerance`` or more.

    :returns: state key to value.
    :raises errors.UnsupportedGameError: game is simultaneous, has imperfect
        information, or is neither single-agent nor two-player zero-sum.
    """
    d = game.descriptor
    if d.is_simultaneous or not d.is_perfect_information:
        raise errors.UnsupportedGameError(str(game))
    if d.num_players > 1 and not (d.num_players == 2 and d.is_constant_sum):
        raise errors.UnsupportedGameError(str(game))
    shift = d.utility_sum / 2 if d.num_players == 2 else 0.0
    states = get_all_states(game, include_chance=True, include_terminals=True,
                            budget=budget, breadth_first=True)
    values: Dict[str, float] = {}
    graph = []
    for key, state in states.items():
        if state.is_terminal():
            values[key] = state.returns()[0] - shift
            continue
        values[key] = 0.0
        children = []
        for record, p in kernel.child_records(state):
            children.append((state.apply_action(record).state_key(), p))
        graph.append((key, state.current_player(), children))
    graph.reverse()
    sweeps = 0
    while True:
        sweeps += 1
        delta = 0.0
        for key, player, children in graph:
            if player == kernel.CHANCE:
                new = sum(p * values[c] for c, p in children)
            elif player == 0:
                new = max(values[c] for c, _ in children)
            else:
                new = min(values[c] for c, _ in children)
            delta = max(delta, abs(new - values[key]))
            values[key] = new
        if delta < tolerance:
            break
    logger.debug("%s: value iteration converged after %d sweeps", game,
                 sweeps)
    result = {}
    for key, state in states.items():
        v = values[key]
        if state.current_player() == 1:
            result[key] = -v + shift
        else:
            result[key] = v + shift
    return result


@dataclass
class BestResponseResult:
    responder: int
    policy: TabularPolicy
    """ Deterministic best-response policy of the responder."""
    value: float
    action_values: Dict[str, Dict[int, float]]
    """ Counterfactual action values per responder information state."""


def best_response(game: kernel.Game,
                  policy: TabularPolicy,
                  responder: int,
                  tree: Optional[HistoryNode] = None,
                  ) -> BestResponseResult:
    """
    Exact best response of ``responder`` to the other players' policies.

    Histories are grouped by the responder's information states and weighted
    by counterfactual reach (others' policies and chance). Ties go to the
    lowest action id.

    :raises errors.ImperfectRecallError: the responder forgets own history.
    :raises errors.MissingPolicyEntryError: an opponent key has no entry.
    """
    root = _resolve_tree(game, tree)
    if not 0 <= responder < root.state.num_players:
        raise errors.InvalidPlayerError(responder)
    groups: Dict[str, List[Tuple[HistoryNode, float]]] = {}
    recall: Dict[str, Tuple[Tuple[str, int], ...]] = {}
    stack: List[Tuple[HistoryNode, float, Tuple[Tuple[str, int], ...]]] = [
        (root, 1.0, ())]
    while stack:
        node, reach, own = stack.pop()
        if node.is_terminal:
            continue
        if node.is_chance:
            stack.extend((c, reach * p, own)
                         for p, c in zip(node.probs, node.children))
        elif node.player == responder:
            if recall.setdefault(node.key, own) != own:
                raise errors.ImperfectRecallError(node.key)
            groups.setdefault(node.key, []).append((node, reach))
            stack.extend((c, reach, own + ((node.key, a),))
                         for a, c in zip(node.actions, node.children))
        else:
            probs = policy.action_probabilities(node.key)
            stack.extend((c, reach * probs.get(a, 0.0), own)
                         for a, c in zip(node.actions, node.children))

    choice: Dict[str, int] = {}
    action_values: Dict[str, Dict[int, float]] = {}
    memo: Dict[int, float] = {}

    def best_action(key: str) -> int:
        if key not in choice:
            q: Dict[int, float] = {}
            for node, reach in groups[key]:
                for a, child in zip(node.actions, node.children):
                    q[a] = q.get(a, 0.0) + reach * value(child)
            action_values[key] = q
            best = min(q)
            for a in sorted(q):
                if q[a] > q[best]:
                    best = a
            choice[key] = best
        return choice[key]

    def value(node: HistoryNode) -> float:
        if id(node) in memo:
            return memo[id(node)]
        if node.returns is not None:
            v = node.returns[responder]
        elif node.is_chance:
            v = sum(p * value(c) for p, c in zip(node.probs, node.children))
        elif node.player == responder:
            a = best_action(node.key)
            v = value(node.children[node.actions.index(a)])
        else:
            probs = policy.action_probabilities(node.key)
            v = sum(probs.get(a, 0.0) * value(c)
                    for a, c in zip(node.actions, node.children)
                    if probs.get(a, 0.0) > 0)
        memo[id(node)] = v
        return v

    br_value = value(root)
    for key in groups:
        best_action(key)
    return BestResponseResult(
        responder=responder,
        policy=TabularPolicy.deterministic(choice),
        value=br_value,
        action_values=action_values,
    )


@dataclass
class NashConvResult:
    total: float
    deltas: List[float]
    br_values: List[float]
    on_policy_values: List[float]


def nash_conv(game: kernel.Game,
              policy: TabularPolicy,
              tree: Optional[HistoryNode] = None) -> NashConvResult:
    """
    Sum over players of the gain from deviating to a best response.
    """
    root = _resolve_tree(game, tree)
    on_policy = node_values(root, policy)
    br_values = [best_response(game, policy, p, root).value
                 for p in range(root.state.num_players)]
    deltas = [float(b - v) for b, v in zip(br_values, on_policy)]
    return NashConvResult(total=sum(deltas), deltas=deltas,
                          br_values=br_values,
                          on_policy_values=[float(v) for v in on_policy])


def exploitability(game: kernel.Game,
                   policy: TabularPolicy,
                   tree: Optional[HistoryNode] = None) -> float:
    """
    NashConv divided by the number of players.

    :raises errors.NotConstantSumError: game is not constant-sum.
    """
    if not game.descriptor.is_constant_sum:
        raise errors.NotConstantSumError(str(game))
    return nash_conv(game, policy, tree).total / game.num_players

