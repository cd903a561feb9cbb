import argparse
import sys
from typing import IO, Any, List, Optional, Sequence

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from game_theory import defaults, play, runs
from game_theory.engine import (analysis, egt, errors, kernel, search,
                                viz, workspace)
from game_theory.engine.policy import (TabularPolicy, check_policy,
                                       uniform_random_policy)
from game_theory.utils import LoggerMixin

SEARCH_ALGORITHMS = ('minimax', 'alpha_beta', 'expectiminimax', 'mcts')


class Command(LoggerMixin, BaseCommand):
    help = "Computational game theory: solve, search, learn and export."
    requires_system_checks: List[str] = []

    parser: argparse.ArgumentParser

    def create_parser(self, prog_name: str, subcommand: str,
                      **kwargs: Any) -> argparse.ArgumentParser:
        self.parser = super().create_parser(prog_name, subcommand, **kwargs)
        return self.parser

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        sub = parser.add_subparsers(dest='subcommand',
                                    parser_class=argparse.ArgumentParser)

        sub.add_parser('list', help="list registered games")

        p = sub.add_parser('play', help="play one game in text mode")
        self.add_game(p)
        for seat in range(4):
            p.add_argument(f'--p{seat}', default='random',
                           help="human, random, mcts or a policy file")
        p.add_argument('--simulations', type=int,
                       default=defaults.MCTS_SIMULATIONS)
        self.add_seed(p)

        p = sub.add_parser('solve', help="run an equilibrium solver")
        self.add_game(p)
        p.add_argument('--algorithm', choices=sorted(runs.ALGORITHMS),
                       default='cfr')
        p.add_argument('--iterations', type=int, default=1000)
        p.add_argument('--metric', default=runs.NASHCONV,
                       choices=(runs.NASHCONV, runs.EXPLOITABILITY))
        p.add_argument('--epsilon', type=float)
        p.add_argument('--learning-rate', type=float)
        p.add_argument('--lr-schedule', choices=('constant', 'inverse_sqrt'))
        p.add_argument('--simultaneous', dest='alternating',
                       action='store_false', default=None,
                       help="update CFR players from one policy")
        p.add_argument('--regret-floor', action='store_true', default=None)
        p.add_argument('--linear-averaging', action='store_true',
                       default=None)
        self.add_run(p)

        p = sub.add_parser('search', help="search a game from a history")
        self.add_game(p)
        p.add_argument('--history', default='',
                       help="actions separated by spaces or commas")
        p.add_argument('--algorithm', choices=SEARCH_ALGORITHMS,
                       default='alpha_beta')
        p.add_argument('--depth', type=int, default=-1,
                       help="-1 searches to the end of the game")
        p.add_argument('--simulations', type=int,
                       default=defaults.MCTS_SIMULATIONS)
        self.add_seed(p)

        p = sub.add_parser('qlearn', help="tabular Q-learning")
        self.add_game(p)
        p.add_argument('--episodes', type=int, default=1000)
        p.add_argument('--alpha', type=float, default=0.1)
        p.add_argument('--gamma', type=float, default=1.0)
        p.add_argument('--epsilon', type=float, default=0.1)
        p.add_argument('--players', default=None,
                       help="comma separated seats: learner or random")
        p.add_argument('--world-state', action='store_true')
        self.add_run(p)

        p = sub.add_parser('nashconv', help="NashConv of a policy file")
        self.add_game(p)
        p.add_argument('--policy', required=True)

        p = sub.add_parser('expected-returns',
                           help="exact expected returns of a policy")
        self.add_game(p)
        p.add_argument('--policy', help="uniform random when omitted")

        p = sub.add_parser('enumerate', help="enumerate world states")
        self.add_game(p)
        p.add_argument('--counts', action='store_true')
        p.add_argument('--include-chance', action='store_true')
        p.add_argument('--include-terminals', action='store_true')

        p = sub.add_parser('tree', help="export the game tree as DOT")
        self.add_game(p)
        p.add_argument('--depth', type=int, default=0)
        p.add_argument('--no-clusters', action='store_true')
        p.add_argument('--out')

        p = sub.add_parser('alpharank', help="alpha-rank of a payoff table")
        p.add_argument('--payoffs', required=True)
        group = p.add_mutually_exclusive_group()
        group.add_argument('--alpha', type=float, default=1.0)
        group.add_argument('--alpha-sweep', type=float, nargs=3,
                           metavar=('LO', 'HI', 'STEPS'))
        p.add_argument('--pop-size', type=int,
                       default=defaults.ALPHARANK_POPULATION_SIZE)
        p.add_argument('--out')

        p = sub.add_parser('phase-portrait',
                           help="sample the replicator vector field")
        p.add_argument('--payoffs', required=True)
        p.add_argument('--resolution', type=int, default=10)
        p.add_argument('--out')

        p = sub.add_parser('policy', help="policy file tools")
        policy_sub = p.add_subparsers(dest='policy_command', required=True,
                                      parser_class=argparse.ArgumentParser)
        q = policy_sub.add_parser('export',
                                  help="write the uniform random policy")
        self.add_game(q)
        q.add_argument('--out')
        q = policy_sub.add_parser('import',
                                  help="validate a policy file")
        self.add_game(q)
        q.add_argument('--file', required=True)

    @staticmethod
    def add_game(p: argparse.ArgumentParser) -> None:
        p.add_argument('--game', required=True,
                       help="game string, e.g. goofspiel(num_cards=3)")

    @staticmethod
    def add_seed(p: argparse.ArgumentParser) -> None:
        p.add_argument('--seed', type=int, default=defaults.DEFAULT_SEED)

    def add_run(self, p: argparse.ArgumentParser) -> None:
        self.add_seed(p)
        p.add_argument('--report-every', type=int,
                       default=defaults.REPORT_EVERY)
        p.add_argument('--out', help="directory for run artifacts")

    def handle(self, *args: Any, **options: Any) -> None:
        subcommand = options.get('subcommand')
        if subcommand is None:
            self.list_games()
            self.stdout.write(self.parser.format_usage())
            return
        method = getattr(self, 'handle_' + subcommand.replace('-', '_'))
        try:
            method(options)
        except (errors.GameTheoryError, OSError) as e:
            self.logger.debug("%s failed", subcommand, exc_info=True)
            message = str(e).splitlines()[0] if str(e) else repr(e)
            raise CommandError(f'{type(e).__name__}: {message}',
                               returncode=1)

    def emit(self, content: str, path: Optional[str]) -> None:
        if path:
            workspace.write_file(path, content)
        else:
            self.stdout.write(content, ending='')

    def list_games(self) -> None:
        for name, params in kernel.registered_games():
            described = ', '.join(f'{k}={v}' for k, v in params.items())
            self.stdout.write(f'{name}({described})' if described else name)

    def handle_list(self, options: dict) -> None:
        self.list_games()

    def handle_play(self, options: dict) -> None:
        game = kernel.load_game(options['game'])
        rng = np.random.default_rng(options['seed'])
        self.logger.info("play %s with seed %d", game, options['seed'])
        agents = [play.make_agent(options[f'p{p}'], rng, sys.stdin,
                                  self.stdout, options['simulations'])
                  for p in range(game.num_players)]
        play.play_interactive(game, agents, out=self.stdout, rng=rng)

    def handle_solve(self, options: dict) -> None:
        params = {}
        for name in ('epsilon', 'learning_rate', 'lr_schedule',
                     'alternating', 'regret_floor', 'linear_averaging'):
            if options.get(name) is not None:
                params[name] = options[name]
        config = runs.RunConfig(
            command=runs.SOLVE,
            game=options['game'],
            algorithm=options['algorithm'],
            iterations=options['iterations'],
            report_every=options['report_every'],
            seed=options['seed'],
            metric=options['metric'],
            params=params,
            output=options['out'])
        self.execute_run(config)

    def handle_qlearn(self, options: dict) -> None:
        params: dict = {
            'alpha': options['alpha'],
            'gamma': options['gamma'],
            'epsilon': options['epsilon'],
            'use_world_state': options['world_state'],
        }
        if options['players']:
            params['players'] = options['players'].split(',')
        config = runs.RunConfig(
            command=runs.QLEARN,
            game=options['game'],
            iterations=options['episodes'],
            report_every=options['report_every'],
            seed=options['seed'],
            metric=runs.MEAN_RETURN,
            params=params,
            output=options['out'])
        self.execute_run(config)

    def execute_run(self, config: runs.RunConfig) -> None:
        self.stdout.write(runs.TRACE_HEADER)

        def on_report(row: runs.TraceRow) -> None:
            self.stdout.write(row.to_csv())
            self.stdout.flush()

        result = runs.init_run(config, on_report)()
        if config.output:
            self.logger.info("artifacts written to %s", config.output)
        elif result.final_value is not None:
            self.logger.info("final %s %s", config.metric, result.final_value)

    def handle_search(self, options: dict) -> None:
        game = kernel.load_game(options['game'])
        state = game.deserialize_state(options['history'])
        depth = options['depth']
        if depth < 0:
            depth = game.descriptor.max_game_length + 1
        algorithm = options['algorithm']
        result: search.SearchResult
        if algorithm == 'mcts':
            result = search.mcts_search(state, options['simulations'],
                                        seed=options['seed'])
        else:
            result = getattr(search, algorithm)(state, depth)
        action = ('-' if result.best_action is None else
                  state.action_to_string(state.current_player(),
                                         result.best_action))
        self.stdout.write(f'value {result.value:g}')
        self.stdout.write(f'best_action {action}')
        self.stdout.write(f'nodes {result.nodes_visited}')

    def load_policy(self, path: str) -> TabularPolicy:
        return TabularPolicy.from_text(workspace.read_file(path))

    def handle_nashconv(self, options: dict) -> None:
        game = kernel.load_game(options['game'])
        result = analysis.nash_conv(game, self.load_policy(options['policy']))
        self.stdout.write(f'nashconv {result.total!r}')
        for p, delta in enumerate(result.deltas):
            self.stdout.write(f'player {p} delta {delta!r}')

    def handle_expected_returns(self, options: dict) -> None:
        game = kernel.load_game(options['game'])
        if options['policy']:
            policy = self.load_policy(options['policy'])
        else:
            policy = uniform_random_policy(game)
        values = analysis.expected_returns(game, policy)
        self.stdout.write(' '.join(repr(float(v)) for v in values))

    def handle_enumerate(self, options: dict) -> None:
        game = kernel.load_game(options['game'])
        if options['counts']:
            for name, count in self.count_states(game):
                self.stdout.write(f'{name} {count}')
            return
        states = analysis.get_all_states(
            game, include_chance=options['include_chance'],
            include_terminals=options['include_terminals'])
        for key in states:
            self.stdout.write(key)

    @staticmethod
    def count_states(game: kernel.Game) -> List[Any]:
        states = analysis.get_all_states(game, include_chance=True,
                                         include_terminals=True)
        decisions = [s for s in states.values()
                     if not s.is_terminal() and not s.is_chance_node()]
        infostates = {(p, s.information_state_key(p))
                      for s in decisions for p in kernel.acting_players(s)}
        return [
            ('states', len(states)),
            ('decision_states', len(decisions)),
            ('information_states', len(infostates)),
            ('chance_nodes',
             sum(1 for s in states.values() if s.is_chance_node())),
            ('terminals', sum(1 for s in states.values() if s.is_terminal())),
        ]

    def handle_tree(self, options: dict) -> None:
        game = kernel.load_game(options['game'])
        config = viz.DotExportConfig(
            max_depth=options['depth'],
            group_information_states=not options['no_clusters'])
        self.emit(viz.export_dot(game, config), options['out'])

    def load_table(self, path: str) -> egt.PayoffTable:
        return egt.PayoffTable.from_text(workspace.read_file(path))

    def handle_alpharank(self, options: dict) -> None:
        table = self.load_table(options['payoffs'])
        if options['alpha_sweep']:
            lo, hi, steps = options['alpha_sweep']
            alphas = egt.log_grid(lo, hi, int(steps))
        else:
            alphas = [options['alpha']]
        sweep = egt.alpha_rank_sweep(table, alphas, options['pop_size'])
        if len(alphas) > 1:
            self.logger.info("ranking stabilized: %s", sweep.stabilized)
            self.stderr.write(f'stabilized {sweep.stabilized}')
        self.emit(sweep.to_csv(), options['out'])

    def handle_phase_portrait(self, options: dict) -> None:
        table = self.load_table(options['payoffs'])
        portrait = egt.phase_portrait_grid(table, options['resolution'])
        self.emit(portrait.to_csv(), options['out'])

    def handle_policy(self, options: dict) -> None:
        game = kernel.load_game(options['game'])
        if options['policy_command'] == 'export':
            self.emit(uniform_random_policy(game).to_text(), options['out'])
            return
        policy = self.load_policy(options['file'])
        problems = check_policy(game, policy)
        if problems:
            raise errors.PolicyFormatError(problems[0])
        self.stdout.write(f'ok {len(policy)} information states')


def run(argv: Sequence[str],
        stdout: Optional[IO[str]] = None,
        stderr: Optional[IO[str]] = None) -> int:
    """
    Runs the command as from a shell and returns its exit code: 0 on
    success, 1 on runtime errors and 2 on usage errors.
    """
    command = Command(stdout=stdout, stderr=stderr)
    try:
        command.run_from_argv(['manage.py', 'gametheory', *argv])
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    return 0
