"""
Text-mode play harness: agents per seat, chance sampled from a seeded
generator, every step written to a transcript.
"""
import abc
from dataclasses import dataclass, field
from typing import IO, List, Optional, Sequence

import numpy as np

from game_theory import defaults
from game_theory.engine import errors, kernel, search, workspace
from game_theory.engine.policy import TabularPolicy


class Agent(abc.ABC):
    name: str

    @abc.abstractmethod
    def choose(self, state: kernel.State) -> int:  # pragma: no cover
        raise NotImplementedError


class RandomAgent(Agent):
    name = 'random'

    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng

    def choose(self, state: kernel.State) -> int:
        legal = state.legal_actions()
        return legal[int(self.rng.integers(len(legal)))]


class MctsAgent(Agent):
    name = 'mcts'

    def __init__(self,
                 rng: np.random.Generator,
                 simulations: int = defaults.MCTS_SIMULATIONS,
                 ) -> None:
        self.rng = rng
        self.simulations = simulations

    def choose(self, state: kernel.State) -> int:
        seed = int(self.rng.integers(2 ** 31))
        return search.mcts_search(state, self.simulations,
                                  seed=seed).best_action


class PolicyAgent(Agent):
    name = 'policy'

    def __init__(self, policy: TabularPolicy,
                 rng: np.random.Generator) -> None:
        self.policy = policy
        self.rng = rng

    def choose(self, state: kernel.State) -> int:
        key = state.information_state_key(state.current_player())
        probs = self.policy.action_probabilities(key)
        actions = sorted(probs)
        weights = np.asarray([probs[a] for a in actions])
        return actions[int(self.rng.choice(len(actions),
                                           p=weights / weights.sum()))]


class HumanAgent(Agent):
    """
    Reads action indices from a text stream; anything that is not the index
    of a legal action is answered with the prompt again.
    """
    name = 'human'

    def __init__(self, stdin: IO[str], stdout: IO[str]) -> None:
        self.stdin = stdin
        self.stdout = stdout

    def prompt(self, state: kernel.State, legal: Sequence[int]) -> None:
        player = state.current_player()
        options = ' '.join(f'[{i}] {state.action_to_string(player, a)}'
                           for i, a in enumerate(legal))
        self.stdout.write(f'{kernel.player_name(player)}: {options}\n> ')
        self.stdout.flush()

    def choose(self, state: kernel.State) -> int:
        """
        :raises errors.EndOfInputError: input closed before a valid choice.
        """
        legal = state.legal_actions()
        while True:
            self.prompt(state, legal)
            line = self.stdin.readline()
            if not line:
                raise errors.EndOfInputError(state.state_key())
            try:
                index = int(line.strip())
            except ValueError:
                continue
            if 0 <= index < len(legal):
                return legal[index]


@dataclass
class Transcript:
    lines: List[str] = field(default_factory=list)
    actions: List[int] = field(default_factory=list)
    returns: Optional[List[float]] = None

    def log(self, line: str, out: Optional[IO[str]]) -> None:
        self.lines.append(line)
        if out is not None:
            out.write(line + '\n')

    def __str__(self) -> str:
        return '\n'.join(self.lines) + '\n'


def play_interactive(game: kernel.Game,
                     agents: Sequence[Agent],
                     seed: int = defaults.DEFAULT_SEED,
                     out: Optional[IO[str]] = None,
                     rng: Optional[np.random.Generator] = None,
                     ) -> Transcript:
    """
    Plays one game to the end.

    :param agents: one agent per seat.
    :param out: stream the transcript is echoed to while playing.
    :param rng: generator for chance outcomes, seeded with ``seed`` when
        not given.
    :raises errors.UnsupportedGameError: simultaneous-move game.
    :raises errors.EndOfInputError: a human seat ran out of input.
    """
    if game.descriptor.is_simultaneous:
        raise errors.UnsupportedGameError(str(game))
    if len(agents) != game.num_players:
        raise errors.InvalidParameterError('agents')
    rng = rng or np.random.default_rng(seed)
    transcript = Transcript()
    state = game.new_initial_state()
    while not state.is_terminal():
        transcript.log(str(state), out)
        player = state.current_player()
        if player == kernel.CHANCE:
            outcomes = state.chance_outcomes()
            index = int(rng.choice(len(outcomes),
                                   p=[p for _, p in outcomes]))
            action = outcomes[index][0]
        else:
            action = agents[player].choose(state)
        transcript.log(f'{kernel.player_name(player)}: '
                       f'{state.action_to_string(player, action)}', out)
        transcript.actions.append(action)
        state = state.apply_action(action)
    transcript.log(str(state), out)
    transcript.returns = state.returns()
    transcript.log('returns: ' + ' '.join(f'{r:g}' for r in state.returns()),
                   out)
    return transcript


def make_agent(spec: str,
               rng: np.random.Generator,
               stdin: IO[str],
               stdout: IO[str],
               simulations: int = defaults.MCTS_SIMULATIONS,
               ) -> Agent:
    """
    :param spec: ``human``, ``random``, ``mcts`` or a policy file path.
    """
    if spec == HumanAgent.name:
        return HumanAgent(stdin, stdout)
    if spec == RandomAgent.name:
        return RandomAgent(rng)
    if spec == MctsAgent.name:
        return MctsAgent(rng, simulations)
    policy = TabularPolicy.from_text(workspace.read_file(spec))
    return PolicyAgent(policy, rng)
