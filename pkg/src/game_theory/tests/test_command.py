import io
import json
import os
from typing import List, Tuple
from unittest import mock

from django.test import SimpleTestCase

from game_theory.engine import analysis, kernel
from game_theory.engine.policy import uniform_random_policy
from game_theory.management.commands import gametheory
from game_theory.tests.base import TempDirMixin

RPS_TABLE = ('populations=1 strategies=3\n'
             '0 -1 1\n'
             '1 0 -1\n'
             '-1 1 0\n')


class GameTheoryCommandTestCase(TempDirMixin, SimpleTestCase):

    def call(self, *argv: str) -> Tuple[int, str, str]:
        stdout, stderr = io.StringIO(), io.StringIO()
        code = gametheory.run(argv, stdout=stdout, stderr=stderr)
        return code, stdout.getvalue(), stderr.getvalue()

    def path(self, name: str) -> str:
        return os.path.join(self.temp_dir, name)

    def lines(self, text: str) -> List[str]:
        return text.splitlines()

    def test_list(self):
        code, out, _ = self.call('list')

        self.assertEqual(code, 0)
        self.assertIn('kuhn_poker', self.lines(out))
        self.assertTrue(any(line.startswith('goofspiel(')
                            for line in self.lines(out)))

    def test_usage(self):
        code, out, _ = self.call()

        self.assertEqual(code, 0)
        self.assertIn('tic_tac_toe', out)
        self.assertIn('usage:', out)

    @mock.patch('sys.stderr', new_callable=io.StringIO)
    def test_usage_errors(self, stderr: io.StringIO):
        """ Bad arguments exit with code 2."""
        for argv in (('solve', '--game', 'kuhn_poker', '--algorithm', 'x'),
                     ('solve',),
                     ('frobnicate',)):
            with self.subTest(argv=argv):
                code, _, _ = self.call(*argv)
                self.assertEqual(code, 2)
        self.assertIn('usage:', stderr.getvalue())

    def test_runtime_errors(self):
        """ Failures inside the engine exit with code 1."""
        code, _, err = self.call('expected-returns', '--game', 'chess')
        self.assertEqual(code, 1)
        self.assertIn('UnknownGameError', err)

        code, _, err = self.call('nashconv', '--game', 'kuhn_poker',
                                 '--policy', self.path('missing.txt'))
        self.assertEqual(code, 1)
        self.assertIn('FileNotFoundError', err)

    def test_solve(self):
        code, out, _ = self.call('solve', '--game', 'matrix_rps',
                                 '--iterations', '10', '--report-every', '5',
                                 '--out', self.path('run'))

        self.assertEqual(code, 0)
        lines = self.lines(out)
        self.assertEqual(lines[0], 'iteration,metric,value,seconds')
        self.assertEqual([line.split(',')[0] for line in lines[1:]],
                         ['5', '10'])
        for name in ('config.json', 'trace.csv', 'policy.txt'):
            self.assertTrue(os.path.exists(self.path(f'run/{name}')), name)

    def test_solve_simultaneous(self):
        """ CFR alternates updates unless told otherwise."""
        code, _, _ = self.call('solve', '--game', 'matrix_rps',
                               '--iterations', '2', '--simultaneous',
                               '--out', self.path('run'))

        self.assertEqual(code, 0)
        with open(self.path('run/config.json')) as f:
            config = json.load(f)
        self.assertDictEqual(config['params'], {'alternating': False})

    def test_qlearn(self):
        code, out, _ = self.call('qlearn', '--game', 'kuhn_poker',
                                 '--episodes', '20', '--report-every', '10',
                                 '--players', 'learner,random')

        self.assertEqual(code, 0)
        self.assertEqual(len(self.lines(out)), 3)
        self.assertIn(',mean_return,', out)

    def test_search(self):
        code, out, _ = self.call('search', '--game', 'tic_tac_toe',
                                 '--history', '0 3 1 4')

        self.assertEqual(code, 0)
        self.assertListEqual(self.lines(out)[:2],
                             ['value 1', 'best_action x(0,2)'])

    def test_expected_returns(self):
        code, out, _ = self.call('expected-returns', '--game', 'kuhn_poker')

        game = kernel.load_game('kuhn_poker')
        expected = analysis.expected_returns(
            game, uniform_random_policy(game))
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(),
                         ' '.join(repr(float(v)) for v in expected))

    def test_enumerate_counts(self):
        code, out, _ = self.call('enumerate', '--game', 'kuhn_poker',
                                 '--counts')

        self.assertEqual(code, 0)
        self.assertListEqual(self.lines(out), [
            'states 58',
            'decision_states 24',
            'information_states 12',
            'chance_nodes 4',
            'terminals 30',
        ])

    def test_policy_export_and_import(self):
        path = self.path('uniform.txt')

        code, _, _ = self.call('policy', 'export', '--game', 'kuhn_poker',
                               '--out', path)
        self.assertEqual(code, 0)

        code, out, _ = self.call('policy', 'import', '--game', 'kuhn_poker',
                                 '--file', path)
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), 'ok 12 information states')

        code, out, _ = self.call('nashconv', '--game', 'kuhn_poker',
                                 '--policy', path)
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith('nashconv '))

    def test_policy_import_incomplete(self):
        path = self.path('partial.txt')
        with open(path, 'w') as f:
            f.write('0|J|\t0=1.0\n')

        code, _, err = self.call('policy', 'import', '--game', 'kuhn_poker',
                                 '--file', path)

        self.assertEqual(code, 1)
        self.assertIn('PolicyFormatError', err)

    def test_tree(self):
        path = self.path('kuhn.dot')

        code, _, _ = self.call('tree', '--game', 'kuhn_poker', '--out', path)

        self.assertEqual(code, 0)
        with open(path) as f:
            self.assertTrue(f.read().startswith('digraph'))

    def test_evolutionary_commands(self):
        table = self.path('rps.txt')
        with open(table, 'w') as f:
            f.write(RPS_TABLE)

        code, out, _ = self.call('phase-portrait', '--payoffs', table,
                                 '--resolution', '10')
        self.assertEqual(code, 0)
        self.assertEqual(len(self.lines(out)), 67)

        code, out, err = self.call('alpharank', '--payoffs', table,
                                   '--alpha-sweep', '0.1', '10', '3')
        self.assertEqual(code, 0)
        self.assertEqual(len(self.lines(out)), 10)
        self.assertIn('stabilized True', err)

    def test_play(self):
        code, out, _ = self.call('play', '--game', 'kuhn_poker',
                                 '--seed', '3')

        self.assertEqual(code, 0)
        self.assertTrue(self.lines(out)[-1].startswith('returns: '))
