import dataclasses
import math

from django.test import SimpleTestCase

from game_theory.engine import analysis, errors, kernel, policy, regret
from game_theory.engine.games import matrix, turn_based
from game_theory.tests.base import GamesMixin, slow


def max_average_regret(solver: regret.RegretSolver) -> float:
    return max(max(row) for row in solver.regrets.values()) / solver.t


class RegretMatchingTestCase(SimpleTestCase):

    def test_positive_regrets(self):
        self.assertListEqual(regret.regret_matching([3, 1, -2]),
                             [0.75, 0.25, 0.0])

    def test_uniform_fallback(self):
        self.assertListEqual(regret.regret_matching([0, 0, 0]),
                             [1 / 3, 1 / 3, 1 / 3])
        self.assertListEqual(regret.regret_matching([-1, -5]), [0.5, 0.5])

    def test_empty(self):
        with self.assertRaises(errors.EmptyActionSetError):
            regret.regret_matching([])


class CfrTestCase(GamesMixin, SimpleTestCase):

    def test_first_iteration(self):
        """ One iteration from uniform leaves finite, partly positive
        regrets and an average equal to the uniform policy."""
        solver = regret.CfrSolver(self.kuhn())

        solver.iteration()

        rows = list(solver.regrets.values())
        self.assertEqual(len(rows), 12)
        self.assertTrue(all(math.isfinite(r) for row in rows for r in row))
        self.assertTrue(any(r > 0 for row in rows for r in row))
        self.assertEqual(solver.average_policy(),
                         policy.uniform_random_policy(self.kuhn()))

    def test_untouched_average_is_uniform(self):
        solver = regret.CfrSolver(self.kuhn())

        self.assertEqual(solver.average_policy(),
                         policy.uniform_random_policy(self.kuhn()))

    def test_kuhn_convergence(self):
        """ The average policy approaches the Kuhn equilibrium."""
        solver = regret.CfrSolver(self.kuhn())

        average = solver.run(1000)

        self.assertLess(solver.nash_conv(), 0.01)
        value = analysis.expected_returns(solver.game, average, solver.tree)
        self.assertAlmostEqual(value[0], -1 / 18, delta=0.005)

    def test_kuhn_regret_decay(self):
        """ Average regret shrinks across checkpoints."""
        solver = regret.CfrSolver(self.kuhn())
        checkpoints = []
        for target in (100, 1000, 10000):
            while solver.t < target:
                solver.iteration()
            checkpoints.append(max_average_regret(solver))

        self.assertGreaterEqual(checkpoints[0], checkpoints[1])
        self.assertGreaterEqual(checkpoints[1], checkpoints[2])
        self.assertLess(solver.nash_conv(), 0.003)

    def test_update_schedules(self):
        """ Players alternate by default; both schedules converge."""
        game = self.kuhn()
        tree = analysis.build_history_tree(game)
        alternating = regret.CfrSolver(game, tree=tree)
        simultaneous = regret.CfrSolver(game, alternating=False, tree=tree)

        self.assertTrue(alternating.alternating)
        self.assertFalse(alternating.regret_floor)
        self.assertFalse(alternating.linear_averaging)

        alternating.run(200)
        simultaneous.run(200)

        self.assertNotEqual(alternating.regrets, simultaneous.regrets)
        self.assertLess(simultaneous.nash_conv(), 0.2)
        self.assertLess(alternating.nash_conv(), simultaneous.nash_conv())

    def test_cfr_plus_regrets_non_negative(self):
        solver = regret.CfrPlusSolver(self.kuhn())

        for _ in range(20):
            solver.iteration()
            for row in solver.regrets.values():
                self.assertTrue(all(r >= 0 for r in row), row)
        self.assertTrue(solver.alternating)
        self.assertTrue(solver.linear_averaging)

    @slow
    def test_cfr_plus_on_leduc(self):
        """ CFR+ is at least as close to equilibrium as vanilla CFR."""
        game = kernel.load_game('leduc_poker')
        tree = analysis.build_history_tree(game)
        vanilla = regret.CfrSolver(game, tree=tree)
        plus = regret.CfrPlusSolver(game, tree=tree)

        vanilla.run(1000)
        plus.run(1000)

        self.assertLessEqual(plus.nash_conv(), vanilla.nash_conv())

    def test_simultaneous_game(self):
        """ Matrix games are solved in their turn-based rendition."""
        solver = regret.CfrSolver(kernel.load_game('matrix_mp'))

        average = solver.run(500)

        self.assertLess(solver.nash_conv(), 0.05)
        self.assertSetEqual(set(average), {'p0', 'p1'})

    def test_single_player_game(self):
        game = turn_based.to_turn_based('matrix_rps')
        game.descriptor = dataclasses.replace(game.descriptor,
                                              num_players=1)

        with self.assertRaises(errors.UnsupportedGameError):
            regret.CfrSolver(game)


class OutcomeSamplingTestCase(GamesMixin, SimpleTestCase):

    def test_kuhn_convergence(self):
        solver = regret.OutcomeSamplingSolver(self.kuhn(), epsilon=0.6,
                                              seed=1)

        solver.run(100000)

        self.assertLess(solver.nash_conv(), 0.05)

    def test_single_trajectory(self):
        """ An iteration touches a handful of information states."""
        game = self.kuhn()
        solver = regret.OutcomeSamplingSolver(game, seed=3)

        solver.iteration()

        bound = game.num_players * game.descriptor.max_game_length
        self.assertLessEqual(len(solver.average), bound)
        self.assertGreater(len(solver.average), 0)

    def test_same_seed_same_tables(self):
        a = regret.OutcomeSamplingSolver(self.kuhn(), seed=4)
        b = regret.OutcomeSamplingSolver(self.kuhn(), seed=4)

        a.run(100)
        b.run(100)

        self.assertEqual(a.regrets, b.regrets)
        self.assertEqual(a.average_policy(), b.average_policy())

    def test_invalid_epsilon(self):
        with self.assertRaises(errors.InvalidParameterError):
            regret.OutcomeSamplingSolver(self.kuhn(), epsilon=1.5)


class ExternalSamplingTestCase(GamesMixin, SimpleTestCase):

    def test_kuhn_convergence(self):
        solver = regret.ExternalSamplingSolver(self.kuhn(), seed=1)

        solver.run(10000)

        self.assertLess(solver.nash_conv(), 0.05)

    def test_nothing_to_sample(self):
        """ Without chance and opponent choices the updates are exact."""
        game = turn_based.to_turn_based(
            matrix.matrix_from_tensors([[1], [0]], [[0], [0]]))
        exact = regret.CfrSolver(game)
        sampled = regret.ExternalSamplingSolver(game, seed=0)

        for _ in range(5):
            exact.iteration()
            sampled.iteration()
            for a, b in zip(exact.regrets['p0'], sampled.regrets['p0']):
                self.assertAlmostEqual(a, b, delta=1e-12)

    def test_leduc_smoke(self):
        game = kernel.load_game('leduc_poker')
        solver = regret.ExternalSamplingSolver(game, seed=1)

        solver.run(10)
        early = solver.nash_conv()
        solver.run(990)

        self.assertLess(solver.nash_conv(), early)


class CounterfactualValuesTestCase(GamesMixin, SimpleTestCase):

    def test_state_value_is_expected_action_value(self):
        game = self.kuhn()
        uniform = policy.uniform_random_policy(game)

        for player in (0, 1):
            values = regret.counterfactual_values(game, uniform, player)
            self.assertEqual(len(values), 6)
            for key, entry in values.items():
                expected = sum(uniform.probability(key, a) * q
                               for a, q in entry.q.items())
                self.assertAlmostEqual(entry.value, expected, delta=1e-9)

    def test_kuhn_consistency(self):
        """ All 12 Kuhn information states pass under the uniform policy.
        """
        game = self.kuhn()
        uniform = policy.uniform_random_policy(game)
        tree = analysis.build_history_tree(game)

        checked = []
        for player in (0, 1):
            report = regret.cf_value_consistency_check(game, uniform, player,
                                                       tree)
            self.assertTrue(report.ok, report.failures)
            self.assertListEqual(report.skipped, [])
            checked.extend(report.checked)

        self.assertEqual(len(set(checked)), 12)

    def test_perfect_information(self):
        game = kernel.load_game('pig(target_score=3,dice_sides=3,horizon=6)')
        uniform = policy.uniform_random_policy(game)

        for player in (0, 1):
            report = regret.cf_value_consistency_check(game, uniform, player)
            self.assertTrue(report.ok, report.failures)
            self.assertGreater(len(report.checked), 0)

    def test_unreached_states_skipped(self):
        """ States the opponent never lets happen are skipped."""
        game = self.kuhn()
        passive = policy.uniform_random_policy(game).merge(
            policy.TabularPolicy.deterministic(
                {f'1|{c}|p': 0 for c in 'JQK'}))

        report = regret.cf_value_consistency_check(game, passive, 0)

        self.assertTrue(report.ok)
        self.assertListEqual(sorted(report.skipped),
                             ['0|J|pb', '0|K|pb', '0|Q|pb'])
        self.assertEqual(len(report.checked), 3)
