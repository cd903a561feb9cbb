"""
Game and state abstractions, the game registry and history enumeration.

Player identity is an integer: decision players are ``0..n-1``, special
players are the negative constants below. States are value objects:
:meth:`State.apply_action` returns a child and never changes the parent.
"""
import abc
import copy
import enum
import itertools
from dataclasses import dataclass, field
from importlib import import_module
from logging import getLogger
from typing import (Any, ClassVar, Dict, Iterator, List, Mapping, Optional,
                    Sequence, Tuple, Type, TypeVar, Union)

from game_theory import defaults
from game_theory.engine import errors

logger = getLogger(__name__)

CHANCE = -1
SIMULTANEOUS = -2
TERMINAL = -4

PLAYER_NAMES = {
    CHANCE: 'chance',
    SIMULTANEOUS: 'simultaneous',
    TERMINAL: 'terminal',
}

JointAction = Tuple[int, ...]
HistoryRecord = Union[int, JointAction]


def player_name(player: int) -> str:
    """ Human-readable player reference."""
    return PLAYER_NAMES.get(player, f'player {player}')


class ChanceMode(enum.Enum):
    NONE = 'none'
    EXPLICIT = 'explicit-stochastic'


class Information(enum.Enum):
    PERFECT = 'perfect'
    IMPERFECT = 'imperfect'


class UtilityClass(enum.Enum):
    ZERO_SUM = 'zero-sum'
    CONSTANT_SUM = 'constant-sum'
    GENERAL_SUM = 'general-sum'
    IDENTICAL = 'identical-interest'


class Dynamics(enum.Enum):
    SEQUENTIAL = 'sequential'
    SIMULTANEOUS = 'simultaneous'


@dataclass(frozen=True)
class GameDescriptor:
    """
    Static facts about a game.
    """
    short_name: str
    num_players: int
    utility_min: float
    utility_max: float
    max_game_length: int
    chance_mode: ChanceMode
    information: Information
    utility_class: UtilityClass
    dynamics: Dynamics
    num_distinct_actions: int
    max_chance_outcomes: int = 0
    utility_sum: float = 0.0
    """ Sum of returns at every terminal for constant-sum games."""

    def __post_init__(self) -> None:
        if self.num_players < 1:
            raise ValueError(self.num_players)
        if not self.utility_min < self.utility_max:
            raise ValueError((self.utility_min, self.utility_max))
        if (self.utility_class is UtilityClass.ZERO_SUM
                and self.utility_sum != 0):
            raise ValueError(self.utility_sum)

    @property
    def is_constant_sum(self) -> bool:
        return self.utility_class in (UtilityClass.ZERO_SUM,
                                      UtilityClass.CONSTANT_SUM)

    @property
    def is_perfect_information(self) -> bool:
        return self.information is Information.PERFECT

    @property
    def is_simultaneous(self) -> bool:
        return self.dynamics is Dynamics.SIMULTANEOUS


G = TypeVar('G', bound='Game')


class Game(abc.ABC):
    """
    Immutable game definition.

    Subclasses declare ``short_name`` and ``parameter_defaults``; parameters
    passed as strings (CLI, game strings) are cast to the default's type.
    """
    short_name: ClassVar[str]
    parameter_defaults: ClassVar[Dict[str, Any]] = {}
    required_parameters: ClassVar[Tuple[str, ...]] = ()

    def __init__(self, params: Optional[Mapping[str, Any]] = None) -> None:
        self.params: Dict[str, Any] = self.resolve_parameters(params or {})
        self.descriptor = self.describe()

    @classmethod
    def resolve_parameters(cls, params: Mapping[str, Any]) -> Dict[str, Any]:
        """
        Validates parameter names and casts values.

        :raises errors.InvalidParameterError: names the offending key.
        """
        resolved = dict(cls.parameter_defaults)
        for key, value in params.items():
            if key not in cls.parameter_defaults:
                raise errors.InvalidParameterError(key, 'unknown parameter')
            resolved[key] = cls.cast_parameter(key, value)
        for key in cls.required_parameters:
            if resolved.get(key) in (None, ''):
                raise errors.InvalidParameterError(key, 'missing parameter')
        return resolved

    @classmethod
    def cast_parameter(cls, key: str, value: Any) -> Any:
        default = cls.parameter_defaults[key]
        kind = type(default)
        if default is None or isinstance(value, kind):
            return value
        try:
            if kind is bool:
                if str(value).lower() in ('1', 'true', 'yes'):
                    return True
                if str(value).lower() in ('0', 'false', 'no'):
                    return False
                raise ValueError(value)
            return kind(value)
        except (TypeError, ValueError):
            raise errors.InvalidParameterError(key)

    @abc.abstractmethod
    def describe(self) -> GameDescriptor:  # pragma: no cover
        raise NotImplementedError

    @abc.abstractmethod
    def new_initial_state(self) -> "State":  # pragma: no cover
        raise NotImplementedError

    @property
    def num_players(self) -> int:
        return self.descriptor.num_players

    @property
    def num_distinct_actions(self) -> int:
        return self.descriptor.num_distinct_actions

    def deserialize_state(self, text: str) -> "State":
        """
        Rebuilds a state by replaying a serialized history.
        """
        state = self.new_initial_state()
        for record in parse_history(text):
            state = state.apply_action(record)
        return state

    def __str__(self) -> str:
        if not self.params:
            return self.short_name
        args = ','.join(f'{k}={v}' for k, v in sorted(self.params.items()))
        return f'{self.short_name}({args})'

    def __repr__(self) -> str:
        return f'<{self.__class__.__name__} {self}>'


class State(abc.ABC):
    """
    A history of a game together with the situation it induces.
    """

    def __init__(self, game: Game) -> None:
        self._game = game
        self._history: Tuple[HistoryRecord, ...] = ()

    @property
    def game(self) -> Game:
        return self._game

    @property
    def history(self) -> Tuple[HistoryRecord, ...]:
        return self._history

    @property
    def move_number(self) -> int:
        return len(self._history)

    @property
    def num_players(self) -> int:
        return self._game.num_players

    @abc.abstractmethod
    def current_player(self) -> int:  # pragma: no cover
        """
        :returns: decision player index or one of CHANCE, SIMULTANEOUS,
            TERMINAL.
        """
        raise NotImplementedError

    @abc.abstractmethod
    def _legal_actions(self, player: int) -> List[int]:  # pragma: no cover
        """ Ascending legal action ids for a decision player."""
        raise NotImplementedError

    def _chance_outcomes(self) -> List[Tuple[int, float]]:  # pragma: no cover
        raise errors.NotChanceNodeError(self.state_key())

    @abc.abstractmethod
    def _apply_action(self, record: HistoryRecord) -> None:  # pragma: no cover
        """
        Advances this freshly copied state by one validated record.
        """
        raise NotImplementedError

    @abc.abstractmethod
    def _returns(self) -> List[float]:  # pragma: no cover
        raise NotImplementedError

    @abc.abstractmethod
    def _information_state_key(self, player: int) -> str:  # pragma: no cover
        raise NotImplementedError

    def is_terminal(self) -> bool:
        return self.current_player() == TERMINAL

    def is_chance_node(self) -> bool:
        return self.current_player() == CHANCE

    def is_simultaneous_node(self) -> bool:
        return self.current_player() == SIMULTANEOUS

    def legal_actions(self, player: Optional[int] = None) -> List[int]:
        """
        :param player: acting player; required at simultaneous nodes.
        :returns: non-empty ascending list of action ids.
        :raises errors.TerminalStateError: at terminal states.
        :raises errors.WrongPlayerError: player does not act here.
        """
        current = self.current_player()
        if current == TERMINAL:
            raise errors.TerminalStateError(self.state_key())
        if player is None:
            if current == SIMULTANEOUS:
                raise errors.WrongPlayerError(
                    "player is required at simultaneous nodes")
            player = current
        if current == CHANCE:
            if player != CHANCE:
                raise errors.WrongPlayerError(player_name(player))
            return [a for a, _ in self._chance_outcomes()]
        if current == SIMULTANEOUS:
            if not 0 <= player < self.num_players:
                raise errors.WrongPlayerError(player_name(player))
        elif player != current:
            raise errors.WrongPlayerError(player_name(player))
        return self._legal_actions(player)

    def chance_outcomes(self) -> List[Tuple[int, float]]:
        """
        :returns: (outcome id, probability) pairs, ascending by id.
        :raises errors.NotChanceNodeError: state is not a chance node.
        """
        if self.current_player() != CHANCE:
            raise errors.NotChanceNodeError(self.state_key())
        return self._chance_outcomes()

    def apply_action(self, action: Union[int, Sequence[int]]) -> "State":
        """
        :param action: action id, chance outcome id or a joint action
            vector at simultaneous nodes.
        :returns: child state; this state is left unchanged.
        :raises errors.IllegalActionError: action is not legal here.
        :raises errors.TerminalStateError: state is terminal.
        """
        current = self.current_player()
        if current == TERMINAL:
            raise errors.TerminalStateError(self.state_key())
        record: HistoryRecord
        if current == SIMULTANEOUS:
            if isinstance(action, int) or len(action) != self.num_players:
                raise errors.IllegalActionError(self.state_key(), action)
            record = tuple(int(a) for a in action)
            for p, a in enumerate(record):
                if a not in self._legal_actions(p):
                    raise errors.IllegalActionError(self.state_key(), action)
        else:
            if not isinstance(action, int) or isinstance(action, bool):
                raise errors.IllegalActionError(self.state_key(), action)
            if action not in self.legal_actions(current):
                raise errors.IllegalActionError(self.state_key(), action)
            record = action
        child = copy.copy(self)
        child._apply_action(record)
        child._history = self._history + (record,)
        return child

    def returns(self) -> List[float]:
        """
        :raises errors.NotTerminalError: returns are only defined at
            terminal states.
        """
        if not self.is_terminal():
            raise errors.NotTerminalError(self.state_key())
        return self._returns()

    def rewards(self) -> List[float]:
        """
        Rewards received on the transition into this state.

        All shipped games pay at episode end only.
        """
        if self.is_terminal():
            return self._returns()
        return [0.0] * self.num_players

    def information_state_key(self, player: int) -> str:
        if not 0 <= player < self.num_players:
            raise errors.InvalidPlayerError(player)
        return self._information_state_key(player)

    def state_key(self) -> str:
        """
        Canonical world-state key; equal keys are interchangeable for any
        continuation of the game.
        """
        return f'{self._game}|{self.serialize()}'

    def action_to_string(self, player: int, action: int) -> str:
        return str(action)

    def serialize(self) -> str:
        return format_history(self._history)

    def __str__(self) -> str:
        return self.serialize()


def format_history(history: Sequence[HistoryRecord]) -> str:
    """ Space separated records, joint actions joined with ``+``."""
    return ' '.join(
        '+'.join(map(str, r)) if isinstance(r, tuple) else str(r)
        for r in history)


def parse_history(text: str) -> List[HistoryRecord]:
    """
    Parses :func:`format_history` output; commas are accepted as record
    separators too.
    """
    records: List[HistoryRecord] = []
    for token in text.replace(',', ' ').split():
        try:
            if '+' in token:
                records.append(tuple(int(a) for a in token.split('+')))
            else:
                records.append(int(token))
        except ValueError:
            raise errors.IllegalActionError(text, token)
    return records


def child_records(state: State) -> List[Tuple[HistoryRecord, float]]:
    """
    All records applicable at a non-terminal state in deterministic order.

    :returns: (record, chance probability) pairs; probability is 1 for
        decision records.
    """
    current = state.current_player()
    if current == CHANCE:
        return [(a, p) for a, p in state.chance_outcomes()]
    if current == SIMULTANEOUS:
        legal = [state.legal_actions(p) for p in range(state.num_players)]
        return [(joint, 1.0) for joint in itertools.product(*legal)]
    return [(a, 1.0) for a in state.legal_actions(current)]


def iter_histories(game: Game,
                   budget: Optional[int] = None,
                   max_depth: int = 0,
                   ) -> Iterator[State]:
    """
    Depth-first pre-order walk over every history of a game.

    :param budget: max number of histories, defaults to
        ``ENUMERATION_BUDGET``.
    :param max_depth: histories of this length are yielded but not expanded;
        0 means unlimited.
    :raises errors.BudgetExceededError: too many histories.
    """
    if budget is None:
        budget = defaults.ENUMERATION_BUDGET
    stack = [game.new_initial_state()]
    count = 0
    while stack:
        state = stack.pop()
        count += 1
        if count > budget:
            raise errors.BudgetExceededError(budget)
        yield state
        if state.is_terminal():
            continue
        if max_depth and state.move_number >= max_depth:
            continue
        children = [state.apply_action(r) for r, _ in child_records(state)]
        stack.extend(reversed(children))


@dataclass
class PerfectRecallReport:
    num_histories: int = 0
    num_information_states: int = 0
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def acting_players(state: State) -> List[int]:
    current = state.current_player()
    if current == SIMULTANEOUS:
        return list(range(state.num_players))
    if current >= 0:
        return [current]
    return []


def verify_perfect_recall(game: Game,
                          budget: Optional[int] = None,
                          ) -> PerfectRecallReport:
    """
    Checks that all histories of every information state share the acting
    player's own sequence of (information state, action) pairs.

    :raises errors.BudgetExceededError: too many histories.
    """
    if budget is None:
        budget = defaults.ENUMERATION_BUDGET
    report = PerfectRecallReport()
    seen: Dict[str, Tuple[Tuple[str, int], ...]] = {}
    violations = set()
    n = game.num_players
    Own = Tuple[Tuple[str, int], ...]
    empty: Tuple[Own, ...] = tuple(() for _ in range(n))
    stack: List[Tuple[State, Tuple[Own, ...]]] = [
        (game.new_initial_state(), empty)]
    while stack:
        state, own = stack.pop()
        report.num_histories += 1
        if report.num_histories > budget:
            raise errors.BudgetExceededError(budget)
        if state.is_terminal():
            continue
        players = acting_players(state)
        keys = {p: state.information_state_key(p) for p in players}
        for p, key in keys.items():
            previous = seen.setdefault(key, own[p])
            if previous != own[p]:
                violations.add(key)
        for record, _ in child_records(state):
            child_own = list(own)
            for p in players:
                a = record[p] if isinstance(record, tuple) else record
                child_own[p] = own[p] + ((keys[p], a),)
            stack.append((state.apply_action(record), tuple(child_own)))
    report.num_information_states = len(seen)
    report.violations = sorted(violations)
    if violations:
        logger.warning("%s: %d perfect recall violations", game,
                       len(violations))
    return report


_registry: Dict[str, Type[Game]] = {}


def register(cls: Type[G]) -> Type[G]:
    """ Class decorator adding a game to the registry."""
    _registry[cls.short_name] = cls
    return cls


def _load_registry() -> None:
    import_module('game_theory.engine.games')


def registered_games() -> List[Tuple[str, Dict[str, Any]]]:
    """
    :returns: sorted (short name, parameter defaults) pairs.
    """
    _load_registry()
    return [(name, dict(cls.parameter_defaults))
            for name, cls in sorted(_registry.items())]


def make_game(short_name: str,
              params: Optional[Mapping[str, Any]] = None) -> Game:
    """
    :raises errors.UnknownGameError: short name is not registered.
    :raises errors.InvalidParameterError: parameter is unknown or invalid.
    """
    _load_registry()
    try:
        cls = _registry[short_name]
    except KeyError:
        raise errors.UnknownGameError(short_name)
    return cls(params)


def split_game_string(text: str) -> Tuple[str, Dict[str, str]]:
    """
    Splits ``name(k=v,k2=nested(a=b))`` into a name and raw parameters.
    """
    text = text.strip()
    if '(' not in text:
        if not text or ')' in text:
            raise errors.UnknownGameError(text)
        return text, {}
    if not text.endswith(')'):
        raise errors.InvalidParameterError(text, 'malformed game string')
    name, body = text[:-1].split('(', 1)
    params: Dict[str, str] = {}
    depth = 0
    start = 0
    parts = []
    for i, char in enumerate(body):
        if char == '(':
            depth += 1
        elif char == ')':
            depth -= 1
        elif char == ',' and depth == 0:
            parts.append(body[start:i])
            start = i + 1
    parts.append(body[start:])
    for part in parts:
        if not part.strip():
            continue
        if '=' not in part:
            raise errors.InvalidParameterError(part, 'malformed parameter')
        key, value = part.split('=', 1)
        params[key.strip()] = value.strip()
    return name.strip(), params


def load_game(text: str) -> Game:
    """
    Builds a game from a game string such as ``goofspiel(num_cards=3)``.
    """
    name, params = split_game_string(text)
    return make_game(name, params)
