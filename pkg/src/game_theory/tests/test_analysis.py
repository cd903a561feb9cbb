import itertools
import math
from typing import Dict, List

import numpy as np
from django.test import SimpleTestCase

from game_theory.engine import analysis, errors, kernel, policy
from game_theory.engine.policy import TabularPolicy
from game_theory.tests.base import GamesMixin

ROCK, PAPER = 0, 1


def kuhn_keys(player: int) -> List[str]:
    if player == 0:
        return [f'0|{c}|{b}' for c in 'JQK' for b in ('', 'pb')]
    return [f'1|{c}|{b}' for c in 'JQK' for b in ('p', 'b')]


def pure_policies(keys: List[str]) -> List[TabularPolicy]:
    """ Every deterministic policy over two-action information states."""
    return [TabularPolicy.deterministic(dict(zip(keys, choice)))
            for choice in itertools.product((0, 1), repeat=len(keys))]


def enumerate_terminals(game: kernel.Game,
                        joint: TabularPolicy) -> np.ndarray:
    """ Sum over terminal histories of reach probability times returns."""
    total = np.zeros(game.num_players)
    for state in kernel.iter_histories(game):
        if not state.is_terminal():
            continue
        reach = 1.0
        prefix = game.new_initial_state()
        for record in state.history:
            player = prefix.current_player()
            if player == kernel.CHANCE:
                reach *= dict(prefix.chance_outcomes())[record]
            else:
                key = prefix.information_state_key(player)
                reach *= joint.probability(key, record)
            prefix = prefix.apply_action(record)
        total += reach * np.asarray(state.returns())
    return total


class ExpectedReturnsTestCase(GamesMixin, SimpleTestCase):

    def test_matching_pennies_uniform(self):
        game = kernel.load_game('matrix_mp')
        returns = analysis.expected_returns(
            game, self.mixed([[0.5, 0.5], [0.5, 0.5]]))

        np.testing.assert_allclose(returns, [0.0, 0.0], atol=1e-12)

    def test_uniform_equalizes_rock(self):
        returns = analysis.expected_returns(
            self.rps(), self.mixed([[1 / 3] * 3, [1.0, 0.0, 0.0]]))

        np.testing.assert_allclose(returns, [0.0, 0.0], atol=1e-12)

    def test_kuhn_uniform(self):
        """ Tree walk agrees with terminal enumeration."""
        game = self.kuhn()
        uniform = policy.uniform_random_policy(game)

        returns = analysis.expected_returns(game, uniform)

        np.testing.assert_allclose(
            returns, enumerate_terminals(game, uniform), atol=1e-12)
        self.assertAlmostEqual(returns.sum(), 0.0, delta=1e-9)

    def test_turn_based_matches_simultaneous(self):
        """ Simultaneous games and their turn-based rendition agree."""
        game = kernel.load_game('goofspiel(num_cards=3)')
        uniform = policy.uniform_random_policy(game)
        sequential = analysis.sequential_game(game)

        np.testing.assert_allclose(
            analysis.expected_returns(game, uniform),
            analysis.expected_returns(sequential, uniform), atol=1e-12)

    def test_missing_policy_entry(self):
        game = self.kuhn()
        partial = TabularPolicy({'0|J|': [(0, 1.0)]})

        with self.assertRaises(errors.MissingPolicyEntryError):
            analysis.expected_returns(game, partial)


class GetAllStatesTestCase(GamesMixin, SimpleTestCase):

    def test_kuhn_decision_states(self):
        """ 24 decision histories in 12 information states."""
        states = analysis.get_all_states(self.kuhn())

        self.assertEqual(len(states), 24)
        keys = {s.information_state_key(s.current_player())
                for s in states.values()}
        self.assertEqual(len(keys), 12)

    def test_kuhn_flags(self):
        states = analysis.get_all_states(self.kuhn(), include_chance=True,
                                         include_terminals=True)

        self.assertEqual(len(states), 58)
        self.assertIn('|', states)

    def test_tic_tac_toe_boards(self):
        """ Tic-Tac-Toe has 5478 distinct boards."""
        states = analysis.get_all_states(kernel.load_game('tic_tac_toe'),
                                         include_terminals=True)

        self.assertEqual(len(states), 5478)
        self.assertListEqual(list(states)[:2], ['.........', 'x........'])

    def test_matrix_game(self):
        states = analysis.get_all_states(self.rps())

        self.assertListEqual(list(states), ['root'])

    def test_cyclic_game(self):
        """ Pig enumerates finitely although its state graph has cycles."""
        states = analysis.get_all_states(
            kernel.load_game('pig(target_score=4,dice_sides=3)'),
            include_chance=True, include_terminals=True)

        self.assertIn('0,0|0|p0', states)
        self.assertIn('win:1', states)

    def test_budget(self):
        with self.assertRaises(errors.BudgetExceededError):
            analysis.get_all_states(kernel.load_game('tic_tac_toe'),
                                    budget=100)


class SampleTrajectoriesTestCase(GamesMixin, SimpleTestCase):

    def test_mean_return_converges(self):
        """ Empirical mean return is within 3 sigma of the exact value."""
        game = self.kuhn()
        uniform = policy.uniform_random_policy(game)
        exact = analysis.expected_returns(game, uniform)

        batch = analysis.sample_trajectories(game, uniform, 20000, seed=7)

        returns = batch.returns_array()
        sigma = returns[:, 0].std() / math.sqrt(len(returns))
        self.assertLess(abs(batch.mean_returns()[0] - exact[0]), 3 * sigma)

    def test_rewards_sum_to_returns(self):
        game = self.kuhn()
        batch = analysis.sample_trajectories(
            game, policy.uniform_random_policy(game), 50, seed=1)

        for episode in batch.episodes:
            total = np.sum([s.rewards for s in episode.steps], axis=0)
            np.testing.assert_allclose(total, episode.returns)
            self.assertLessEqual(len(episode),
                                 game.descriptor.max_game_length)

    def test_same_seed_same_batch(self):
        game = self.kuhn()
        uniform = policy.uniform_random_policy(game)

        a = analysis.sample_trajectories(game, uniform, 20, seed=3)
        b = analysis.sample_trajectories(game, uniform, 20, seed=3)

        self.assertEqual(a, b)

    def test_deterministic_playout(self):
        """ Deterministic policies without chance give a single playout."""
        game = kernel.load_game('tic_tac_toe')
        moves = [0, 3, 1, 4, 2]
        choices: Dict[str, int] = {}
        state = game.new_initial_state()
        for m in moves:
            choices[state.information_state_key(state.current_player())] = m
            state = state.apply_action(m)

        batch = analysis.sample_trajectories(
            game, TabularPolicy.deterministic(choices), 1)

        self.assertListEqual([s.action for s in batch.episodes[0].steps],
                             moves)
        self.assertEqual(batch.episodes[0].returns, [1.0, -1.0])

    def test_invalid_num_episodes(self):
        game = self.kuhn()
        with self.assertRaises(errors.InvalidParameterError):
            analysis.sample_trajectories(
                game, policy.uniform_random_policy(game), 0)


class ValueIterationTestCase(SimpleTestCase):

    def test_tic_tac_toe(self):
        """ Tic-Tac-Toe is a draw; an immediate win is worth one."""
        values = analysis.value_iteration(kernel.load_game('tic_tac_toe'))

        self.assertEqual(values['.........'], 0.0)
        # x to move completes the top row
        self.assertEqual(values['xx.oo....'], 1.0)
        # o to move, x threatens two lines at once
        self.assertEqual(values['x.x.o.o.x'], -1.0)

    def test_pig_fixed_point(self):
        """ Pig values stay in range and one more sweep changes nothing."""
        game = kernel.load_game('pig(target_score=6,dice_sides=3)')

        values = analysis.value_iteration(game, tolerance=1e-12)

        self.assertTrue(all(-1.0 <= v <= 1.0 for v in values.values()))
        states = analysis.get_all_states(game, include_chance=True,
                                         include_terminals=True)

        def p0_value(s: kernel.State) -> float:
            # values are in view of the mover, player 0 elsewhere
            v = values[s.state_key()]
            return -v if s.current_player() == 1 else v

        for state in states.values():
            if state.is_terminal():
                continue
            children = [(p0_value(state.apply_action(r)), p)
                        for r, p in kernel.child_records(state)]
            player = state.current_player()
            if player == kernel.CHANCE:
                backup = sum(p * v for v, p in children)
            elif player == 0:
                backup = max(v for v, _ in children)
            else:
                backup = min(v for v, _ in children)
            self.assertAlmostEqual(p0_value(state), backup, delta=1e-9)

    def test_unsupported_games(self):
        for name in ('kuhn_poker', 'matrix_rps', 'matrix_pd'):
            with self.subTest(name):
                with self.assertRaises(errors.UnsupportedGameError):
                    analysis.value_iteration(kernel.load_game(name))


class BestResponseTestCase(GamesMixin, SimpleTestCase):

    def test_matching_pennies_equalizer(self):
        game = kernel.load_game('matrix_mp')
        result = analysis.best_response(
            game, self.mixed([[0.5, 0.5], [0.5, 0.5]]), 0)

        self.assertAlmostEqual(result.value, 0.0, delta=1e-12)
        self.assertEqual(result.policy['p0'], ((0, 1.0),))

    def test_rps_against_rock(self):
        result = analysis.best_response(
            self.rps(), self.mixed([[1.0, 0, 0], [1.0, 0, 0]]), 1)

        self.assertEqual(result.responder, 1)
        self.assertEqual(result.policy['p1'], ((PAPER, 1.0),))
        self.assertEqual(result.value, 1.0)
        self.assertEqual(result.action_values['p1'],
                         {ROCK: 0.0, PAPER: 1.0, 2: -1.0})

    def test_kuhn_brute_force(self):
        """ Best response value is the best of all 64 pure policies."""
        game = self.kuhn()
        uniform = policy.uniform_random_policy(game)
        tree = analysis.build_history_tree(game)
        for player in (0, 1):
            with self.subTest(player=player):
                brute = max(
                    analysis.expected_returns(
                        game, uniform.merge(p), tree)[player]
                    for p in pure_policies(kuhn_keys(player)))

                result = analysis.best_response(game, uniform, player, tree)

                self.assertAlmostEqual(result.value, brute, delta=1e-9)
                self.assertEqual(len(result.policy), 6)
                on_policy = analysis.expected_returns(
                    game, uniform.merge(result.policy), tree)[player]
                self.assertAlmostEqual(on_policy, result.value, delta=1e-9)

    def test_invalid_responder(self):
        with self.assertRaises(errors.InvalidPlayerError):
            analysis.best_response(
                self.rps(), self.mixed([[1.0, 0, 0], [1.0, 0, 0]]), 2)


class NashConvTestCase(GamesMixin, SimpleTestCase):

    def test_matching_pennies_uniform(self):
        game = kernel.load_game('matrix_mp')
        uniform = self.mixed([[0.5, 0.5], [0.5, 0.5]])

        self.assertAlmostEqual(analysis.nash_conv(game, uniform).total, 0.0,
                               delta=1e-12)
        self.assertAlmostEqual(analysis.exploitability(game, uniform), 0.0,
                               delta=1e-12)

    def test_both_rock(self):
        result = analysis.nash_conv(
            self.rps(), self.mixed([[1.0, 0, 0], [1.0, 0, 0]]))

        self.assertListEqual(result.deltas, [1.0, 1.0])
        self.assertEqual(result.total, 2.0)

    def test_kuhn_uniform(self):
        """ NashConv and exploitability agree with brute force oracles."""
        game = self.kuhn()
        uniform = policy.uniform_random_policy(game)
        tree = analysis.build_history_tree(game)
        on_policy = analysis.expected_returns(game, uniform, tree)
        br_values = [
            max(analysis.expected_returns(game, uniform.merge(p), tree)[i]
                for p in pure_policies(kuhn_keys(i)))
            for i in (0, 1)]

        result = analysis.nash_conv(game, uniform, tree)

        oracle = sum(b - v for b, v in zip(br_values, on_policy))
        self.assertAlmostEqual(result.total, oracle, delta=1e-9)
        self.assertTrue(all(d >= -1e-9 for d in result.deltas))
        exploitability = analysis.exploitability(game, uniform, tree)
        self.assertAlmostEqual(exploitability, result.total / 2,
                               delta=1e-12)
        self.assertAlmostEqual(exploitability, sum(br_values) / 2,
                               delta=1e-12)

    def test_not_constant_sum(self):
        game = kernel.load_game('matrix_pd')
        with self.assertRaises(errors.NotConstantSumError):
            analysis.exploitability(
                game, self.mixed([[0.5, 0.5], [0.5, 0.5]]))
