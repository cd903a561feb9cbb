"""
Shipped games. Importing this package fills the game registry.
"""
from game_theory.engine.games import (  # noqa: F401
    goofspiel,
    kuhn,
    leduc,
    matrix,
    pig,
    tic_tac_toe,
    turn_based,
)
from game_theory.engine.games.matrix import (  # noqa: F401
    MatrixGameSpec,
    matrix_from_tensors,
)
from game_theory.engine.games.turn_based import to_turn_based  # noqa: F401
