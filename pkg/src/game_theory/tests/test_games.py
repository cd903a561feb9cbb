from django.test import SimpleTestCase

from game_theory.engine import errors, kernel
from game_theory.engine.games import kuhn, leduc, matrix, pig, turn_based


def play(game: kernel.Game, *records) -> kernel.State:
    state = game.new_initial_state()
    for r in records:
        state = state.apply_action(r)
    return state


class KuhnPokerTestCase(SimpleTestCase):

    def setUp(self):
        self.game = kernel.load_game('kuhn_poker')

    def test_returns(self):
        """ Pot sizes of every betting sequence, player 0 holding K."""
        cases = {
            (0, 0): [1.0, -1.0],
            (0, 1, 0): [-1.0, 1.0],
            (0, 1, 1): [2.0, -2.0],
            (1, 0): [1.0, -1.0],
            (1, 1): [2.0, -2.0],
        }
        for bets, expected in cases.items():
            with self.subTest(bets):
                state = play(self.game, 2, 0, *bets)
                self.assertTrue(state.is_terminal())
                self.assertEqual(state.returns(), expected)

    def test_information_state_keys(self):
        """ A player sees its own card and the betting, not the other card.
        """
        a = play(self.game, 2, 0, kuhn.BET)
        b = play(self.game, 2, 1, kuhn.BET)

        self.assertEqual(a.information_state_key(1), '1|J|b')
        self.assertEqual(a.information_state_key(0), '0|K|b')
        self.assertEqual(a.information_state_key(0),
                         b.information_state_key(0))
        self.assertNotEqual(a.state_key(), b.state_key())
        self.assertEqual(a.state_key(), 'KJ|b')

    def test_descriptor(self):
        d = self.game.descriptor
        self.assertEqual(d.num_players, 2)
        self.assertTrue(d.is_constant_sum)
        self.assertFalse(d.is_perfect_information)
        self.assertEqual(d.chance_mode, kernel.ChanceMode.EXPLICIT)


class LeducPokerTestCase(SimpleTestCase):

    def setUp(self):
        self.game = kernel.load_game('leduc_poker')

    def test_pair_wins(self):
        """ A private card pairing the public card wins the showdown."""
        # Js vs Qs, raise and call, public Jh, check check
        state = play(self.game, 0, 2, leduc.RAISE, leduc.CALL, 1,
                     leduc.CALL, leduc.CALL)

        self.assertTrue(state.is_terminal())
        self.assertEqual(state.returns(), [3.0, -3.0])

    def test_fold(self):
        """ Folding loses the stake put in so far."""
        state = play(self.game, 0, 2, leduc.RAISE, leduc.FOLD)

        self.assertEqual(state.returns(), [1.0, -1.0])

    def test_fold_only_facing_raise(self):
        state = play(self.game, 0, 2)

        self.assertListEqual(state.legal_actions(),
                             [leduc.CALL, leduc.RAISE])
        state = state.apply_action(leduc.RAISE)
        self.assertListEqual(state.legal_actions(),
                             [leduc.FOLD, leduc.CALL, leduc.RAISE])
        state = state.apply_action(leduc.RAISE)
        self.assertListEqual(state.legal_actions(),
                             [leduc.FOLD, leduc.CALL])

    def test_public_card_deal(self):
        """ The public card is dealt from the four remaining cards."""
        state = play(self.game, 0, 2, leduc.CALL, leduc.CALL)

        self.assertTrue(state.is_chance_node())
        self.assertListEqual([c for c, _ in state.chance_outcomes()],
                             [1, 3, 4, 5])
        state = state.apply_action(5)
        self.assertEqual(state.information_state_key(1), '1|Qs|Kh|cc/')

    def test_split_pot(self):
        """ Equal ranks without a pair split the pot."""
        state = play(self.game, 0, 1, leduc.CALL, leduc.CALL, 2,
                     leduc.CALL, leduc.CALL)

        self.assertEqual(state.returns(), [0.0, 0.0])


class TicTacToeTestCase(SimpleTestCase):

    def setUp(self):
        self.game = kernel.load_game('tic_tac_toe')

    def test_win(self):
        """ Three marks in a row end the game."""
        state = play(self.game, 0, 3, 1, 4, 2)

        self.assertTrue(state.is_terminal())
        self.assertEqual(state.returns(), [1.0, -1.0])
        self.assertEqual(str(state), 'xxx\noo.\n...')

    def test_draw(self):
        state = play(self.game, 0, 4, 8, 1, 7, 6, 2, 5, 3)

        self.assertTrue(state.is_terminal())
        self.assertEqual(state.returns(), [0.0, 0.0])

    def test_keys(self):
        """ Transpositions share a state key but not an information state.
        """
        a = play(self.game, 0, 4, 8)
        b = play(self.game, 8, 4, 0)

        self.assertEqual(a.state_key(), b.state_key())
        self.assertEqual(a.state_key(), 'x...o...x')
        self.assertNotEqual(a.information_state_key(1),
                            b.information_state_key(1))
        self.assertEqual(a.information_state_key(1), '1|0,4,8')

    def test_action_to_string(self):
        state = self.game.new_initial_state()
        self.assertEqual(state.action_to_string(0, 5), 'x(1,2)')


class GoofspielTestCase(SimpleTestCase):

    def setUp(self):
        self.game = kernel.load_game('goofspiel(num_cards=3)')

    def test_tied_bids_discard_prize(self):
        """ Equal bids give the prize to nobody."""
        # prize 3 tied, prize 1 to player 1, prize 2 to player 0
        state = play(self.game, 2, (2, 2), 0, (0, 1), 1, (1, 0))

        self.assertTrue(state.is_terminal())
        self.assertEqual(state.returns(), [1.0, -1.0])

    def test_bids_are_used_once(self):
        state = play(self.game, 2, (2, 0))
        state = state.apply_action(1)

        self.assertListEqual(state.legal_actions(0), [0, 1])
        self.assertListEqual(state.legal_actions(1), [1, 2])
        self.assertEqual(state.information_state_key(0),
                         '0|prizes:3,2|mine:3|theirs:1')

    def test_invalid_num_cards(self):
        with self.assertRaises(errors.InvalidParameterError):
            kernel.load_game('goofspiel(num_cards=0)')


class PigTestCase(SimpleTestCase):

    def setUp(self):
        self.game = kernel.load_game('pig')

    def test_hold_banks_turn_total(self):
        state = play(self.game, pig.ROLL)
        self.assertTrue(state.is_chance_node())
        self.assertEqual(len(state.chance_outcomes()), 6)

        state = state.apply_action(4)
        self.assertListEqual(state.legal_actions(), [pig.ROLL, pig.HOLD])
        state = state.apply_action(pig.HOLD)

        self.assertEqual(state.current_player(), 1)
        self.assertEqual(state.state_key(), '5,0|0|p1')

    def test_rolling_one_forfeits_turn(self):
        """ Two forfeited turns lead back to the initial world state."""
        state = play(self.game, pig.ROLL, 3, pig.ROLL, 0)
        self.assertEqual(state.state_key(), '0,0|0|p1')

        state = play(state.game, *state.history, pig.ROLL, 0)
        self.assertEqual(state.state_key(),
                         self.game.new_initial_state().state_key())

    def test_reaching_target_wins(self):
        game = kernel.load_game('pig(target_score=5)')

        state = play(game, pig.ROLL, 4)

        self.assertTrue(state.is_terminal())
        self.assertEqual(state.returns(), [1.0, -1.0])

    def test_horizon_draw(self):
        game = kernel.load_game('pig(horizon=2)')

        state = play(game, pig.ROLL, 2)

        self.assertTrue(state.is_terminal())
        self.assertEqual(state.returns(), [0.0, 0.0])
        self.assertEqual(state.state_key(), 'draw')


class MatrixGameTestCase(SimpleTestCase):

    def assert_utility_class(self, name: str,
                             expected: kernel.UtilityClass) -> None:
        game = kernel.load_game(name)
        self.assertEqual(game.descriptor.utility_class, expected)

    def test_utility_classes(self):
        self.assert_utility_class('matrix_rps', kernel.UtilityClass.ZERO_SUM)
        self.assert_utility_class('matrix_mp', kernel.UtilityClass.ZERO_SUM)
        self.assert_utility_class('matrix_pd',
                                  kernel.UtilityClass.GENERAL_SUM)
        self.assert_utility_class('matrix_sh',
                                  kernel.UtilityClass.GENERAL_SUM)

    def test_prisoners_dilemma_payoffs(self):
        game = kernel.load_game('matrix_pd')
        state = game.new_initial_state()

        self.assertEqual(state.apply_action((1, 0)).returns(), [10.0, 0.0])
        self.assertEqual(state.action_to_string(1, 1), 'Defect')

    def test_from_tensors(self):
        """ Ad-hoc matrix games validate payoff shapes."""
        game = matrix.matrix_from_tensors([[1, 2, 3]], [[3, 2, 1]])

        self.assertEqual(str(game), 'matrix_game(1x3)')
        self.assertEqual(game.descriptor.utility_class,
                         kernel.UtilityClass.CONSTANT_SUM)
        self.assertEqual(game.descriptor.utility_sum, 4.0)
        with self.assertRaises(errors.ShapeMismatchError):
            matrix.matrix_from_tensors([[1, 2]], [[1], [2]])
        with self.assertRaises(errors.ShapeMismatchError):
            matrix.matrix_from_tensors([], [])


class TurnBasedTestCase(SimpleTestCase):

    def test_hidden_first_move(self):
        """ The second mover cannot see the first mover's choice."""
        game = turn_based.to_turn_based('matrix_rps')

        root = game.new_initial_state()
        self.assertEqual(root.current_player(), 0)
        children = [root.apply_action(a) for a in root.legal_actions()]
        self.assertEqual({c.current_player() for c in children}, {1})
        self.assertEqual({c.information_state_key(1) for c in children},
                         {'p1'})
        self.assertEqual(children[1].apply_action(2).returns(), [-1.0, 1.0])

    def test_chance_passes_through(self):
        game = turn_based.to_turn_based('goofspiel(num_cards=2)')

        state = game.new_initial_state()
        self.assertTrue(state.is_chance_node())
        state = state.apply_action(1).apply_action(0)
        self.assertEqual(state.current_player(), 1)
        self.assertEqual(state.rewards(), [0.0, 0.0])

    def test_already_turn_based(self):
        with self.assertRaises(errors.AlreadyTurnBasedError):
            turn_based.to_turn_based('kuhn_poker')
