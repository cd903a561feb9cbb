"""
Tabular policies, the policy text format and average-policy accumulators.
"""
from typing import (Dict, Iterable, Iterator, List, Mapping, Optional,
                    Sequence, Tuple)

from game_theory.engine import errors, kernel

ActionProbs = Tuple[Tuple[int, float], ...]

TOLERANCE = 1e-12

_ESCAPES = (('%', '%25'), ('\t', '%09'), ('\n', '%0A'), ('\r', '%0D'))


def escape_key(key: str) -> str:
    for char, escaped in _ESCAPES:
        key = key.replace(char, escaped)
    return key


def unescape_key(key: str) -> str:
    for char, escaped in reversed(_ESCAPES):
        key = key.replace(escaped, char)
    return key


def normalize_weights(weights: Sequence[float]) -> List[float]:
    """
    Scales non-negative weights to a distribution; zero mass gives uniform.
    """
    total = sum(weights)
    if total > 0:
        return [w / total for w in weights]
    return [1.0 / len(weights)] * len(weights)


class TabularPolicy(Mapping[str, ActionProbs]):
    """
    Immutable map from information-state key to a distribution over the
    legal actions there, ascending by action id.

    Keys encode the player, so one table holds a joint policy.
    """

    def __init__(self,
                 table: Optional[Mapping[str, Iterable[Tuple[int, float]]]]
                 = None,
                 ) -> None:
        self._table: Dict[str, ActionProbs] = {}
        for key, probs in (table or {}).items():
            entry = tuple(sorted((int(a), float(p)) for a, p in probs))
            self._check(key, entry)
            self._table[key] = entry

    @staticmethod
    def _check(key: str, entry: ActionProbs) -> None:
        if not entry:
            raise errors.PolicyFormatError(f"empty entry {key!r}")
        actions = [a for a, _ in entry]
        if len(set(actions)) != len(actions):
            raise errors.PolicyFormatError(f"duplicate action at {key!r}")
        if any(p < 0 for _, p in entry):
            raise errors.PolicyFormatError(f"negative probability {key!r}")
        if abs(sum(p for _, p in entry) - 1.0) > TOLERANCE:
            raise errors.PolicyFormatError(f"probabilities of {key!r} "
                                           f"do not sum to 1")

    def __getitem__(self, key: str) -> ActionProbs:
        try:
            return self._table[key]
        except KeyError:
            raise errors.MissingPolicyEntryError(key)

    def __contains__(self, key: object) -> bool:
        return key in self._table

    def __iter__(self) -> Iterator[str]:
        return iter(self._table)

    def __len__(self) -> int:
        return len(self._table)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TabularPolicy):
            return NotImplemented
        return self._table == other._table

    def __repr__(self) -> str:
        return f'<TabularPolicy: {len(self)} entries>'

    def action_probabilities(self, key: str) -> Dict[int, float]:
        """
        :raises errors.MissingPolicyEntryError: key is not in the table.
        """
        return dict(self[key])

    def probability(self, key: str, action: int) -> float:
        return self.action_probabilities(key).get(action, 0.0)

    def merge(self, other: Mapping[str, ActionProbs]) -> "TabularPolicy":
        """ A copy with entries of ``other`` replacing ours."""
        table: Dict[str, Iterable[Tuple[int, float]]] = dict(self._table)
        table.update(other)
        return TabularPolicy(table)

    @classmethod
    def deterministic(cls, choices: Mapping[str, int]) -> "TabularPolicy":
        return cls({k: ((a, 1.0),) for k, a in choices.items()})

    def to_text(self) -> str:
        """
        One line per entry sorted by key:
        ``<escaped key> TAB <action>=<prob>,<action>=<prob>``.
        """
        lines = []
        for key in sorted(self._table):
            probs = ','.join(f'{a}={p!r}' for a, p in self._table[key])
            lines.append(f'{escape_key(key)}\t{probs}')
        return ''.join(f'{line}\n' for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "TabularPolicy":
        """
        :raises errors.PolicyFormatError: malformed line or distribution.
        """
        table: Dict[str, List[Tuple[int, float]]] = {}
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                key, body = line.split('\t')
                entry = []
                for item in body.split(','):
                    action, prob = item.strip().split('=')
                    entry.append((int(action), float(prob)))
            except ValueError:
                raise errors.PolicyFormatError(f"line {number}: {line!r}")
            table[unescape_key(key)] = entry
        return cls(table)


def merge_policies(*policies: Mapping[str, ActionProbs]) -> TabularPolicy:
    """ Joins per-player policies into one joint table."""
    result = TabularPolicy()
    for p in policies:
        result = result.merge(p)
    return result


def decision_information_states(game: kernel.Game,
                                budget: Optional[int] = None,
                                ) -> Dict[str, List[int]]:
    """
    :returns: legal actions of every decision information state in
        depth-first discovery order.
    :raises errors.BudgetExceededError: too many histories.
    """
    legal: Dict[str, List[int]] = {}
    for state in kernel.iter_histories(game, budget):
        for p in kernel.acting_players(state):
            key = state.information_state_key(p)
            if key not in legal:
                legal[key] = state.legal_actions(p)
    return legal


def uniform_random_policy(game: kernel.Game,
                          budget: Optional[int] = None) -> TabularPolicy:
    """
    Uniform distribution over legal actions at every decision information
    state of the game.
    """
    infostates = decision_information_states(game, budget)
    return TabularPolicy({
        key: [(a, 1.0 / len(actions)) for a in actions]
        for key, actions in infostates.items()
    })


def check_policy(game: kernel.Game,
                 policy: TabularPolicy,
                 budget: Optional[int] = None) -> List[str]:
    """
    Validates a policy against a game.

    :returns: problems found: missing entries, actions outside the legal
        set and entries for unknown information states.
    """
    infostates = decision_information_states(game, budget)
    problems = []
    for key, actions in infostates.items():
        if key not in policy:
            problems.append(f'missing entry {key!r}')
            continue
        illegal = [a for a, p in policy[key] if a not in actions and p > 0]
        if illegal:
            problems.append(f'illegal actions {illegal} at {key!r}')
    for key in policy:
        if key not in infostates:
            problems.append(f'unknown information state {key!r}')
    return problems


class AvgPolicyAccumulator:
    """
    Per information state non-negative action weights whose normalization
    is the average policy.
    """

    def __init__(self) -> None:
        self.sums: Dict[str, Tuple[Tuple[int, ...], List[float]]] = {}
        self.t = 0

    def row(self, key: str, actions: Sequence[int]) -> List[float]:
        """ Weight row of an information state, created with zeros."""
        try:
            return self.sums[key][1]
        except KeyError:
            weights = [0.0] * len(actions)
            self.sums[key] = (tuple(actions), weights)
            return weights

    def add(self, key: str, actions: Sequence[int],
            weights: Sequence[float]) -> None:
        row = self.row(key, actions)
        for i, w in enumerate(weights):
            if w < 0:
                raise ValueError(w)
            row[i] += w

    def __len__(self) -> int:
        return len(self.sums)


def normalize(acc: AvgPolicyAccumulator) -> TabularPolicy:
    """
    Average policy of an accumulator; all-zero rows become uniform.
    """
    return TabularPolicy({
        key: list(zip(actions, normalize_weights(weights)))
        for key, (actions, weights) in acc.sums.items()
    })
