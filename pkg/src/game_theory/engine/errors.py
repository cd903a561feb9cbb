"""
Error kinds raised by the game engine.

Every error derives from :class:`GameTheoryError` and from the closest
builtin exception, so callers may catch either.
"""
from typing import Iterable, List, Sequence


class GameTheoryError(Exception):
    """ Base class for engine errors."""


class UnknownGameError(GameTheoryError, LookupError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unknown game: {name}")
        self.name = name


class InvalidParameterError(GameTheoryError, ValueError):
    def __init__(self, key: str, reason: str = 'invalid parameter') -> None:
        super().__init__(f"{reason}: {key}")
        self.key = key


class TerminalStateError(GameTheoryError, RuntimeError):
    pass


class WrongPlayerError(GameTheoryError, ValueError):
    pass


class NotChanceNodeError(GameTheoryError, RuntimeError):
    pass


class IllegalActionError(GameTheoryError, ValueError):
    def __init__(self, state_key: str, action: object) -> None:
        super().__init__(f"illegal action {action} at state {state_key!r}")
        self.state_key = state_key
        self.action = action


class NotTerminalError(GameTheoryError, RuntimeError):
    pass


class InvalidPlayerError(GameTheoryError, ValueError):
    pass


class BudgetExceededError(GameTheoryError, RuntimeError):
    def __init__(self, budget: int) -> None:
        super().__init__(f"enumeration budget exceeded: {budget}")
        self.budget = budget


class MissingPolicyEntryError(GameTheoryError, KeyError):
    """ Subclasses KeyError so policies behave as mappings."""

    def __init__(self, key: str) -> None:
        super().__init__(f"missing policy entry: {key!r}")
        self.key = key


class UnsupportedGameError(GameTheoryError, ValueError):
    pass


class ImperfectRecallError(GameTheoryError, ValueError):
    def __init__(self, key: str) -> None:
        super().__init__(f"imperfect recall at information state {key!r}")
        self.key = key


class NotConstantSumError(GameTheoryError, ValueError):
    pass


class ShapeMismatchError(GameTheoryError, ValueError):
    pass


class DimensionMismatchError(GameTheoryError, ValueError):
    pass


class UnsupportedDimensionError(GameTheoryError, ValueError):
    """ No rendition for this number of strategies or populations."""


class ChanceNodeEncounteredError(GameTheoryError, RuntimeError):
    pass


class EmptyActionSetError(GameTheoryError, ValueError):
    pass


class AlreadyTurnBasedError(GameTheoryError, ValueError):
    pass


class ReducibleChainError(GameTheoryError, RuntimeError):
    def __init__(self, classes: Iterable[Sequence[int]]) -> None:
        self.classes: List[List[int]] = [list(c) for c in classes]
        super().__init__(
            f"no unique stationary distribution, closed classes: "
            f"{self.classes}")


class EndOfInputError(GameTheoryError, EOFError):
    pass


class PolicyFormatError(GameTheoryError, ValueError):
    pass
