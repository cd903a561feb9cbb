"""
Best-response driven solvers: extensive-form fictitious play and tabular
exploitability descent.
"""
import math
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from game_theory import defaults
from game_theory.engine import analysis, errors, kernel, regret
from game_theory.engine.analysis import HistoryNode
from game_theory.engine.policy import TabularPolicy, merge_policies
from game_theory.engine.solver import Solver

SCHEDULES = ('constant', 'inverse_sqrt')


class BestResponseSolver(Solver):

    def __init__(self,
                 game: kernel.Game,
                 tree: Optional[HistoryNode] = None,
                 ) -> None:
        if game.num_players != 2:
            raise errors.UnsupportedGameError(str(game))
        super().__init__(game, tree)

    def best_responses(self, policy: TabularPolicy) -> List[TabularPolicy]:
        return [analysis.best_response(self.game, policy, p, self.tree).policy
                for p in range(self.num_players)]

    def keys_of(self, player: int) -> List[str]:
        return [k for k, (p, _) in self.infostates.items() if p == player]


class XfpSolver(BestResponseSolver):
    """
    Extensive-form fictitious play.

    Starting from the uniform policy, every player best responds to the
    others' average policy; the new average is mixed per information state
    with weights given by each policy's own reach probability, so that the
    average stays realization equivalent to the normal-form average.
    """
    name = 'xfp'
    evaluated = 'average'

    def __init__(self,
                 game: kernel.Game,
                 tree: Optional[HistoryNode] = None,
                 ) -> None:
        super().__init__(game, tree)
        self.policy = TabularPolicy({k: self.uniform(k)
                                     for k in self.infostates})

    def iteration(self) -> None:
        self.t += 1
        response = merge_policies(*self.best_responses(self.policy))
        table = {}
        for p in range(self.num_players):
            avg_reach = analysis.own_reach(self.tree, self.policy, p)
            br_reach = analysis.own_reach(self.tree, response, p)
            for key in self.keys_of(p):
                old = self.policy.action_probabilities(key)
                new = response.action_probabilities(key)
                a_w = (self.t - 1) * avg_reach.get(key, 0.0)
                b_w = br_reach.get(key, 0.0)
                weights = [a_w * old.get(a, 0.0) + b_w * new.get(a, 0.0)
                           for a in self.infostates[key][1]]
                total = sum(weights)
                if total > 0:
                    table[key] = [(a, w / total) for a, w in
                                  zip(self.infostates[key][1], weights)]
                else:
                    table[key] = list(old.items())
        self.policy = TabularPolicy(table)
        self.logger.debug("iteration %d done", self.t)

    def average_policy(self) -> TabularPolicy:
        return self.policy

    def evaluated_policy(self) -> TabularPolicy:
        return self.policy


def masked_softmax(logits: Sequence[float]) -> np.ndarray:
    """ Softmax over the legal actions a logit row is defined for."""
    z = np.asarray(logits, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


class EdSolver(BestResponseSolver):
    """
    Tabular exploitability descent.

    Policies are a softmax of per-information-state logits. Each iteration
    every player ascends the counterfactual policy gradient of its value
    against best-responding opponents. Convergence is measured on the
    current policy; nothing is averaged.
    """
    name = 'ed'
    evaluated = 'current'

    def __init__(self,
                 game: kernel.Game,
                 learning_rate: float = defaults.ED_LEARNING_RATE,
                 schedule: str = 'constant',
                 logits: Optional[Mapping[str, Sequence[float]]] = None,
                 tree: Optional[HistoryNode] = None,
                 ) -> None:
        super().__init__(game, tree)
        if learning_rate <= 0:
            raise errors.InvalidParameterError('learning_rate')
        if schedule not in SCHEDULES:
            raise errors.InvalidParameterError('lr_schedule')
        self.learning_rate = learning_rate
        self.schedule = schedule
        self.logits: Dict[str, np.ndarray] = {}
        for key, (_, actions) in self.infostates.items():
            row = (logits or {}).get(key)
            if row is None:
                self.logits[key] = np.zeros(len(actions))
            else:
                self.logits[key] = np.asarray(row, dtype=np.float64)

    def current_policy(self) -> TabularPolicy:
        return self.policy_of(self.logits)

    def policy_of(self, logits: Mapping[str, np.ndarray]) -> TabularPolicy:
        return TabularPolicy({
            key: list(zip(self.infostates[key][1], masked_softmax(row)))
            for key, row in logits.items()})

    def evaluated_policy(self) -> TabularPolicy:
        return self.current_policy()

    def step_size(self) -> float:
        if self.schedule == 'inverse_sqrt':
            return self.learning_rate / math.sqrt(max(self.t, 1))
        return self.learning_rate

    def advantages(self) -> Dict[str, np.ndarray]:
        """
        Ascent direction of every information state: at state ``s`` of
        player ``i`` the component for action ``a`` is
        ``pi(s, a) * (q(s, a) - v(s))`` over counterfactual values, with
        opponents fixed at their best responses to the current policy.
        """
        policy = self.current_policy()
        responses = self.best_responses(policy)
        result: Dict[str, np.ndarray] = {}
        for p in range(self.num_players):
            others = [r for j, r in enumerate(responses) if j != p]
            joint = policy.merge(merge_policies(*others))
            cf = regret.counterfactual_values(self.game, joint, p, self.tree)
            for key in self.keys_of(p):
                actions = self.infostates[key][1]
                pi = masked_softmax(self.logits[key])
                entry = cf[key]
                q = np.asarray([entry.q[a] for a in actions])
                result[key] = pi * (q - entry.value)
        return result

    def gradient(self) -> Dict[str, np.ndarray]:
        """
        Gradient of every player's value with respect to its own logits
        against best-responding opponents: the advantages scaled by the
        player's own reach of each state.
        """
        policy = self.current_policy()
        reach = {p: analysis.own_reach(self.tree, policy, p)
                 for p in range(self.num_players)}
        return {key: reach[self.infostates[key][0]].get(key, 0.0) * a
                for key, a in self.advantages().items()}

    def iteration(self) -> None:
        self.t += 1
        lr = self.step_size()
        for key, g in self.advantages().items():
            self.logits[key] = self.logits[key] + lr * g
        self.logger.debug("iteration %d done", self.t)


SOLVERS = {cls.name: cls for cls in (XfpSolver, EdSolver)}
