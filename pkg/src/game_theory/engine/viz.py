"""
Game-tree export to Graphviz DOT.

Decision nodes are labelled with the acting player's information-state key,
chance nodes are circles, terminals are diamonds labelled with the utility of
player 0. Edges take the colour of the acting player. Histories sharing an
information state may be grouped into dotted clusters.
"""
import hashlib
from dataclasses import dataclass, field
from logging import getLogger
from typing import Dict, List, Optional, Tuple

from game_theory import defaults
from game_theory.engine import errors, kernel

logger = getLogger(__name__)

PALETTE = ('darkgreen', 'orange', 'purple', 'brown', 'magenta')
""" Edge colours of players beyond index 1, cycled."""

SIMULTANEOUS_COLOR = 'gray40'


@dataclass
class DotExportConfig:
    max_depth: int = 0
    """ Histories of this length are leaves; 0 means unlimited."""
    group_information_states: bool = True
    chance_color: str = 'black'
    player_colors: Tuple[str, ...] = ('blue', 'red')
    budget: Optional[int] = None

    def edge_color(self, player: int) -> str:
        if player == kernel.CHANCE:
            return self.chance_color
        if player == kernel.SIMULTANEOUS:
            return SIMULTANEOUS_COLOR
        if player < len(self.player_colors):
            return self.player_colors[player]
        extra = player - len(self.player_colors)
        return PALETTE[extra % len(PALETTE)]


def node_id(state: kernel.State) -> str:
    """ Stable identifier derived from the serialized history."""
    digest = hashlib.sha1(state.serialize().encode('utf-8')).hexdigest()
    return f'n{digest[:12]}'


def quote(text: str) -> str:
    escaped = (text.replace('\\', '\\\\').replace('"', '\\"')
               .replace('\n', '\\n'))
    return f'"{escaped}"'


def format_utility(value: float) -> str:
    return f'{value:g}'


@dataclass
class _Cluster:
    player: int
    members: List[str] = field(default_factory=list)


def export_dot(game: kernel.Game,
               config: Optional[DotExportConfig] = None) -> str:
    """
    :raises errors.BudgetExceededError: too many histories.
    """
    config = config or DotExportConfig()
    nodes: List[str] = []
    edges: List[str] = []
    clusters: Dict[str, _Cluster] = {}
    budget = config.budget or defaults.ENUMERATION_BUDGET
    stack: List[Tuple[kernel.State, Optional[kernel.State]]] = [
        (game.new_initial_state(), None)]
    while stack:
        state, parent = stack.pop()
        if len(nodes) >= budget:
            raise errors.BudgetExceededError(budget)
        nid = node_id(state)
        player = state.current_player()
        leaf = bool(config.max_depth and
                    state.move_number >= config.max_depth)
        if player != kernel.TERMINAL and not leaf:
            stack.extend(reversed([(state.apply_action(r), state)
                                   for r, _ in kernel.child_records(state)]))
        if player == kernel.TERMINAL:
            label = format_utility(state.returns()[0])
            attrs = f'shape=diamond, label={quote(label)}'
        elif player == kernel.CHANCE:
            attrs = 'shape=circle, label="c"'
        elif player == kernel.SIMULTANEOUS:
            attrs = f'shape=box, label={quote(state.serialize() or "root")}'
        else:
            key = state.information_state_key(player)
            attrs = f'shape=box, label={quote(key)}'
            clusters.setdefault(key, _Cluster(player)).members.append(nid)
        nodes.append(f'  {nid} [{attrs}];')
        if parent is None:
            continue
        mover = parent.current_player()
        record = state.history[-1]
        if isinstance(record, tuple):
            label = ','.join(parent.action_to_string(p, a)
                             for p, a in enumerate(record))
        else:
            label = parent.action_to_string(mover, record)
        edges.append(f'  {node_id(parent)} -> {nid} '
                     f'[color={config.edge_color(mover)}, '
                     f'label={quote(label)}];')

    lines = [f'digraph {quote(str(game))} {{', '  node [fontsize=10];']
    lines.extend(nodes)
    lines.extend(edges)
    if config.group_information_states:
        for key in sorted(clusters):
            members = clusters[key].members
            if len(members) < 2:
                continue
            digest = hashlib.sha1(key.encode('utf-8')).hexdigest()[:12]
            lines.append(f'  subgraph cluster_{digest} {{')
            lines.append(f'    style=dotted; label={quote(key)};')
            lines.extend(f'    {m};' for m in members)
            lines.append('  }')
    lines.append('}')
    logger.debug("%s: %d nodes, %d edges", game, len(nodes), len(edges))
    return '\n'.join(lines) + '\n'
