"""
Counterfactual regret minimization: vanilla CFR, CFR+, and the outcome- and
external-sampling Monte Carlo variants.
"""
from dataclasses import dataclass, field
from logging import getLogger
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from game_theory import defaults
from game_theory.engine import analysis, errors, kernel
from game_theory.engine.analysis import HistoryNode
from game_theory.engine.policy import AvgPolicyAccumulator, TabularPolicy
from game_theory.engine.solver import Solver

logger = getLogger(__name__)

RegretTable = Dict[str, List[float]]


def regret_matching(regrets: Sequence[float]) -> List[float]:
    """
    Distribution proportional to positive regrets, uniform when no regret
    is positive.

    :raises errors.EmptyActionSetError: no actions.
    """
    if not regrets:
        raise errors.EmptyActionSetError()
    positive = [max(r, 0.0) for r in regrets]
    total = sum(positive)
    if total > 0:
        return [r / total for r in positive]
    return [1.0 / len(regrets)] * len(regrets)


class RegretSolver(Solver):
    """
    Common state of CFR-family solvers: cumulative regrets and the
    average-policy accumulator, both keyed by information state.
    """

    def __init__(self,
                 game: kernel.Game,
                 tree: Optional[HistoryNode] = None,
                 ) -> None:
        super().__init__(game, tree)
        self.regrets: RegretTable = {
            key: [0.0] * len(actions)
            for key, (_, actions) in self.infostates.items()}
        self.average = AvgPolicyAccumulator()

    def strategy(self, key: str) -> List[float]:
        return regret_matching(self.regrets[key])

    def current_policy(self) -> TabularPolicy:
        return TabularPolicy({
            key: list(zip(actions, self.strategy(key)))
            for key, (_, actions) in self.infostates.items()})

    def average_policy(self) -> TabularPolicy:
        return self.complete(self.average)

    def evaluated_policy(self) -> TabularPolicy:
        return self.average_policy()


class CfrSolver(RegretSolver):
    """
    Exact CFR over the full history tree.

    Players are updated in turn, each against the regrets the previous one
    just wrote; ``alternating=False`` updates all players from the same
    current policy instead. ``plus`` adds the CFR+ features, which can also
    be set alone: flooring cumulative regrets at zero and weighting
    average-policy increments by the iteration number.
    """
    name = 'cfr'

    def __init__(self,
                 game: kernel.Game,
                 plus: bool = False,
                 alternating: bool = True,
                 regret_floor: Optional[bool] = None,
                 linear_averaging: Optional[bool] = None,
                 tree: Optional[HistoryNode] = None,
                 ) -> None:
        super().__init__(game, tree)
        self.plus = plus
        self.alternating = alternating
        self.regret_floor = plus if regret_floor is None else regret_floor
        self.linear_averaging = (plus if linear_averaging is None
                                 else linear_averaging)

    def iteration(self) -> None:
        self.t += 1
        if self.alternating:
            for p in range(self.num_players):
                self._update({p})
        else:
            self._update(set(range(self.num_players)))
        self.logger.debug("iteration %d done", self.t)

    def _update(self, players: Set[int]) -> None:
        strategies = {key: self.strategy(key) for key in self.infostates}
        instant: RegretTable = {}
        weight = float(self.t) if self.linear_averaging else 1.0
        reach = [1.0] * (self.num_players + 1)
        self._traverse(self.tree, reach, players, strategies, instant, weight)
        for key, increments in instant.items():
            row = self.regrets[key]
            for i, r in enumerate(increments):
                row[i] += r
                if self.regret_floor and row[i] < 0:
                    row[i] = 0.0

    def _traverse(self,
                  node: HistoryNode,
                  reach: List[float],
                  players: Set[int],
                  strategies: Dict[str, List[float]],
                  instant: RegretTable,
                  weight: float,
                  ) -> Sequence[float]:
        """
        :param reach: per-player reach contributions, chance last.
        :returns: values of all players at ``node``.
        """
        if node.returns is not None:
            return node.returns
        n = self.num_players
        value = [0.0] * n
        if node.is_chance:
            for p, child in zip(node.probs, node.children):
                child_reach = list(reach)
                child_reach[n] *= p
                child_value = self._traverse(child, child_reach, players,
                                             strategies, instant, weight)
                for i in range(n):
                    value[i] += p * child_value[i]
            return value
        player = node.player
        sigma = strategies[node.key]
        child_values = []
        for s, child in zip(sigma, node.children):
            child_reach = list(reach)
            child_reach[player] *= s
            child_value = self._traverse(child, child_reach, players,
                                         strategies, instant, weight)
            child_values.append(child_value)
            for i in range(n):
                value[i] += s * child_value[i]
        if player in players:
            cf_reach = float(np.prod(reach[:player] + reach[player + 1:]))
            row = instant.get(node.key)
            if row is None:
                row = instant[node.key] = [0.0] * len(sigma)
                self.average.add(node.key, node.actions,
                                 [weight * reach[player] * s for s in sigma])
            for i, child_value in enumerate(child_values):
                row[i] += cf_reach * (child_value[player] - value[player])
        return value


class CfrPlusSolver(CfrSolver):
    name = 'cfrplus'

    def __init__(self,
                 game: kernel.Game,
                 tree: Optional[HistoryNode] = None) -> None:
        super().__init__(game, plus=True, tree=tree)


def _sample(rng: np.random.Generator, probs: Sequence[float]) -> int:
    """ Index drawn from a distribution with one uniform variate."""
    u = rng.random()
    total = 0.0
    for i, p in enumerate(probs):
        total += p
        if u < total:
            return i
    return len(probs) - 1


class OutcomeSamplingSolver(RegretSolver):
    """
    Outcome-sampling MCCFR.

    Each iteration samples one terminal history per updating player. The
    updater explores with ``epsilon``-uniform mixing, the others follow their
    current policies, and sampled regrets are importance corrected by the
    history's sampling probability.
    """
    name = 'mccfr-outcome'

    def __init__(self,
                 game: kernel.Game,
                 epsilon: float = defaults.OUTCOME_SAMPLING_EPSILON,
                 seed: int = defaults.DEFAULT_SEED,
                 tree: Optional[HistoryNode] = None,
                 ) -> None:
        super().__init__(game, tree)
        if not 0 <= epsilon <= 1:
            raise errors.InvalidParameterError('epsilon')
        self.epsilon = epsilon
        self.rng = np.random.default_rng(seed)

    def iteration(self) -> None:
        self.t += 1
        for p in range(self.num_players):
            self._episode(self.tree, p, 1.0, 1.0, 1.0)

    def _episode(self,
                 node: HistoryNode,
                 player: int,
                 my_reach: float,
                 opp_reach: float,
                 sample_reach: float,
                 ) -> float:
        if node.returns is not None:
            return node.returns[player]
        if node.is_chance:
            i = _sample(self.rng, node.probs)
            p = node.probs[i]
            return self._episode(node.children[i], player, my_reach,
                                 opp_reach * p, sample_reach * p)
        sigma = self.strategy(node.key)
        k = len(sigma)
        if node.player == player:
            behavior = [self.epsilon / k + (1 - self.epsilon) * s
                        for s in sigma]
        else:
            behavior = sigma
        i = _sample(self.rng, behavior)
        if node.player == player:
            child = self._episode(node.children[i], player,
                                  my_reach * sigma[i], opp_reach,
                                  sample_reach * behavior[i])
        else:
            child = self._episode(node.children[i], player, my_reach,
                                  opp_reach * sigma[i],
                                  sample_reach * behavior[i])
        child_values = [0.0] * k
        child_values[i] = child / behavior[i]
        estimate = sum(s * v for s, v in zip(sigma, child_values))
        if node.player == player:
            row = self.regrets[node.key]
            scale = opp_reach / sample_reach
            for a in range(k):
                row[a] += (child_values[a] - estimate) * scale
            self.average.add(node.key, node.actions,
                             [my_reach * s / sample_reach for s in sigma])
        return estimate


class ExternalSamplingSolver(RegretSolver):
    """
    External-sampling MCCFR.

    The updating player enumerates all of its actions; chance and opponent
    actions are sampled once. Opponent nodes accumulate their current
    policy into the average, and the updating player alternates.
    """
    name = 'mccfr-external'

    def __init__(self,
                 game: kernel.Game,
                 seed: int = defaults.DEFAULT_SEED,
                 tree: Optional[HistoryNode] = None,
                 ) -> None:
        super().__init__(game, tree)
        self.rng = np.random.default_rng(seed)

    def iteration(self) -> None:
        self.t += 1
        for p in range(self.num_players):
            self._update(self.tree, p)

    def _update(self, node: HistoryNode, player: int) -> float:
        if node.returns is not None:
            return node.returns[player]
        if node.is_chance:
            i = _sample(self.rng, node.probs)
            return self._update(node.children[i], player)
        sigma = self.strategy(node.key)
        if node.player != player:
            i = _sample(self.rng, sigma)
            value = self._update(node.children[i], player)
        else:
            child_values = [self._update(c, player) for c in node.children]
            value = sum(s * v for s, v in zip(sigma, child_values))
            row = self.regrets[node.key]
            for a, v in enumerate(child_values):
                row[a] += v - value
        if node.player == (player + 1) % self.num_players:
            self.average.add(node.key, node.actions, sigma)
        return value


@dataclass
class CounterfactualValues:
    q: Dict[int, float]
    """ Counterfactual action values."""
    value: float
    """ Counterfactual state value, ``sum(pi(a) * q[a])``."""
    reach: float
    """ Others' and chance reach summed over the information state."""


def counterfactual_values(game: kernel.Game,
                          policy: TabularPolicy,
                          player: int,
                          tree: Optional[HistoryNode] = None,
                          ) -> Dict[str, CounterfactualValues]:
    """
    Counterfactual values of every information state of ``player`` under a
    joint policy.

    :raises errors.MissingPolicyEntryError: policy misses a decision key.
    """
    root = tree if tree is not None else analysis.build_history_tree(game)
    result: Dict[str, CounterfactualValues] = {}

    def walk(node: HistoryNode, cf: float) -> float:
        if node.returns is not None:
            return node.returns[player]
        if node.is_chance:
            return sum(p * walk(c, cf * p)
                       for p, c in zip(node.probs, node.children))
        probs = policy.action_probabilities(node.key)
        pi = [probs.get(a, 0.0) for a in node.actions]
        if node.player != player:
            return sum(p * walk(c, cf * p)
                       for p, c in zip(pi, node.children))
        values = [walk(c, cf) for c in node.children]
        v = sum(p * x for p, x in zip(pi, values))
        entry = result.get(node.key)
        if entry is None:
            entry = result[node.key] = CounterfactualValues(
                q={a: 0.0 for a in node.actions}, value=0.0, reach=0.0)
        for a, x in zip(node.actions, values):
            entry.q[a] += cf * x
        entry.value += cf * v
        entry.reach += cf
        return v

    walk(root, 1.0)
    return result


@dataclass
class ConsistencyReport:
    checked: List[str] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)
    max_error: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures


def cf_value_consistency_check(game: kernel.Game,
                               policy: TabularPolicy,
                               player: int,
                               tree: Optional[HistoryNode] = None,
                               tolerance: float = 1e-9,
                               ) -> ConsistencyReport:
    """
    Checks that the conditional value of every information state equals its
    counterfactual value divided by the others' reach.

    The conditional value is computed directly: histories of the state are
    weighted by their full reach probability. States unreachable under the
    policy are skipped.
    """
    root = tree if tree is not None else analysis.build_history_tree(game)
    cf = counterfactual_values(game, policy, player, root)
    members: Dict[str, List[Tuple[HistoryNode, float]]] = {}
    stack: List[Tuple[HistoryNode, float]] = [(root, 1.0)]
    while stack:
        node, reach = stack.pop()
        if node.returns is not None:
            continue
        if node.is_chance:
            weights = node.probs
        else:
            probs = policy.action_probabilities(node.key)
            weights = tuple(probs.get(a, 0.0) for a in node.actions)
            if node.player == player:
                members.setdefault(node.key, []).append((node, reach))
        stack.extend((c, reach * w) for w, c in zip(weights, node.children))
    report = ConsistencyReport()
    for key, entry in cf.items():
        total = sum(r for _, r in members[key])
        if entry.reach <= 0 or total <= 0:
            report.skipped.append(key)
            continue
        direct = sum(r * analysis.node_values(h, policy)[player]
                     for h, r in members[key]) / total
        error = abs(direct - entry.value / entry.reach)
        report.max_error = max(report.max_error, error)
        report.checked.append(key)
        if error >= tolerance:
            report.failures.append(key)
    if report.failures:
        logger.warning("%s: %d information states fail the counterfactual "
                       "value check", game, len(report.failures))
    return report


SOLVERS = {cls.name: cls for cls in (CfrSolver, CfrPlusSolver,
                                     OutcomeSamplingSolver,
                                     ExternalSamplingSolver)}
