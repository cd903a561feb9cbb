import numpy as np
from django.test import SimpleTestCase

from game_theory.engine import egt, errors

RPS = [[0.0, -1.0, 1.0],
       [1.0, 0.0, -1.0],
       [-1.0, 1.0, 0.0]]
PRISONERS_DILEMMA = [[3.0, 0.0],
                     [5.0, 1.0]]
MATCHING_PENNIES = [[1.0, -1.0],
                    [-1.0, 1.0]]


class ReplicatorTestCase(SimpleTestCase):

    def test_rock_paper_scissors(self):
        d = egt.replicator_derivative(RPS, [0.5, 0.5, 0.0])

        np.testing.assert_allclose(d, [-0.25, 0.25, 0.0], atol=1e-12)

    def test_shift_invariance(self):
        """ Adding a constant to all payoffs changes nothing."""
        shifted = (np.asarray(RPS) + 7.5).tolist()
        x = [0.2, 0.3, 0.5]

        np.testing.assert_allclose(egt.replicator_derivative(shifted, x),
                                   egt.replicator_derivative(RPS, x),
                                   atol=1e-12)

    def test_tangent_to_simplex(self):
        rng = np.random.default_rng(1)
        for x in rng.dirichlet([1.0, 1.0, 1.0], size=20):
            d = egt.replicator_derivative(RPS, x)
            self.assertAlmostEqual(float(d.sum()), 0.0, delta=1e-12)

    def test_vertices_are_rest_points(self):
        d = egt.replicator_derivative(RPS, [0.0, 1.0, 0.0])

        np.testing.assert_allclose(d, [0.0, 0.0, 0.0])

    def test_shape_mismatch(self):
        with self.assertRaises(errors.DimensionMismatchError):
            egt.replicator_derivative(RPS, [0.5, 0.5])
        with self.assertRaises(errors.DimensionMismatchError):
            egt.replicator_derivative([[1.0, 2.0]], [1.0])

    def test_two_populations(self):
        x = [0.5, 0.5]
        dx, dy = egt.two_population_derivative(
            MATCHING_PENNIES, (-np.asarray(MATCHING_PENNIES)).tolist(),
            x, [1.0, 0.0])

        np.testing.assert_allclose(dx, [0.5, -0.5])
        np.testing.assert_allclose(dy, [0.0, 0.0])

    def test_integration(self):
        trajectory = egt.integrate_replicator(PRISONERS_DILEMMA, [0.9, 0.1],
                                              dt=0.01, steps=2000,
                                              renormalize=True)

        self.assertEqual(trajectory.shape, (2001, 2))
        np.testing.assert_allclose(trajectory.sum(axis=1), 1.0)
        self.assertGreater(trajectory[-1][1], 0.99)


class PhasePortraitTestCase(SimpleTestCase):

    def test_simplex_grid(self):
        table = egt.PayoffTable.symmetric(RPS)

        portrait = egt.phase_portrait_grid(table, 10)

        self.assertEqual(len(portrait), 66)
        for row in portrait.rows:
            self.assertAlmostEqual(sum(row[:3]), 1.0, delta=1e-12)
            self.assertAlmostEqual(sum(row[3:6]), 0.0, delta=1e-12)

    def test_interval_grid(self):
        table = egt.PayoffTable.symmetric(PRISONERS_DILEMMA)

        portrait = egt.phase_portrait_grid(table, 4)

        self.assertEqual(len(portrait), 5)
        self.assertTrue(portrait.to_csv().startswith(
            'p0,p1,d0,d1,magnitude\n'))

    def test_two_population_grid(self):
        table = egt.PayoffTable.multi(
            [MATCHING_PENNIES, (-np.asarray(MATCHING_PENNIES)).tolist()])

        portrait = egt.phase_portrait_grid(table, 11)

        self.assertEqual(len(portrait), 121)
        self.assertListEqual(portrait.columns,
                             ['p', 'q', 'dp', 'dq', 'magnitude'])

    def test_unsupported_shapes(self):
        table = egt.PayoffTable.symmetric(np.eye(4).tolist())

        with self.assertRaises(errors.UnsupportedDimensionError) as ctx:
            egt.phase_portrait_grid(table, 5)
        self.assertNotIsInstance(ctx.exception, errors.DimensionMismatchError)
        with self.assertRaises(errors.InvalidParameterError):
            egt.phase_portrait_grid(egt.PayoffTable.symmetric(RPS), 0)


class PayoffTableTestCase(SimpleTestCase):

    def test_text_format(self):
        table = egt.PayoffTable.multi([[[1, 2], [3, 4]], [[5, 6], [7, 8]]])

        parsed = egt.PayoffTable.from_text(table.to_text())

        self.assertEqual(parsed.strategies, (2, 2))
        np.testing.assert_array_equal(parsed.tensors[1], [[5, 6], [7, 8]])

    def test_heuristic_payoff_table(self):
        text = ('hpt strategies=2 rows=3\n'
                '2 0 3 0\n'
                '1 1 0 5\n'
                '0 2 0 1\n')

        table = egt.PayoffTable.from_text(text)

        self.assertTrue(table.is_symmetric)
        np.testing.assert_array_equal(table.tensors[0], PRISONERS_DILEMMA)

    def test_invalid(self):
        with self.assertRaises(errors.DimensionMismatchError):
            egt.PayoffTable.multi([[[1, 2]], [[1, 2], [3, 4]]])
        with self.assertRaises(errors.DimensionMismatchError):
            egt.PayoffTable.symmetric([[1.0, float('nan')], [0.0, 0.0]])
        with self.assertRaises(errors.DimensionMismatchError):
            egt.PayoffTable.from_text('populations=1 strategies=2\n1 2\n')


class AlphaRankTestCase(SimpleTestCase):

    def test_cyclic_game_is_uniform(self):
        result = egt.alpha_rank(egt.PayoffTable.symmetric(RPS), alpha=1.0)

        np.testing.assert_allclose(result.stationary, [1 / 3] * 3,
                                   atol=1e-9)

    def test_two_population_cycle(self):
        table = egt.PayoffTable.multi(
            [MATCHING_PENNIES, (-np.asarray(MATCHING_PENNIES)).tolist()])

        result = egt.alpha_rank(table, alpha=5.0)

        self.assertListEqual(result.profiles,
                             [(0, 0), (0, 1), (1, 0), (1, 1)])
        np.testing.assert_allclose(result.stationary, [0.25] * 4, atol=1e-9)

    def test_dominant_strategy(self):
        """ Defection takes the mass as ranking intensity grows."""
        table = egt.PayoffTable.symmetric(PRISONERS_DILEMMA)

        sweep = egt.alpha_rank_sweep(table, egt.log_grid(0.01, 10.0, 8))

        masses = [r.mass((1,)) for r in sweep.results]
        self.assertGreater(masses[-1], 0.99)
        for low, high in zip(masses, masses[1:]):
            self.assertGreaterEqual(high, low - 1e-12)
        self.assertTrue(sweep.stabilized)
        self.assertEqual(sweep.results[-1].top, (1,))

    def test_chain_properties(self):
        table = egt.PayoffTable.multi(
            [[[3, 0], [5, 1]], [[3, 5], [0, 1]]])

        result = egt.alpha_rank(table, alpha=2.0)

        c = result.transition
        self.assertTrue(np.all(c >= 0))
        np.testing.assert_allclose(c.sum(axis=1), 1.0, atol=1e-12)
        residual = np.max(np.abs(result.stationary @ c - result.stationary))
        self.assertLess(residual, 1e-10)
        self.assertEqual(result.top, (1, 1))

    def test_sweep_csv(self):
        sweep = egt.alpha_rank_sweep(egt.PayoffTable.symmetric(RPS),
                                     [0.1, 1.0])

        lines = sweep.to_csv().splitlines()
        self.assertEqual(lines[0], 'alpha,profile,mass')
        self.assertEqual(len(lines), 7)
        self.assertTrue(lines[1].startswith('0.1,0,'))

    def test_invalid_parameters(self):
        table = egt.PayoffTable.symmetric(RPS)
        with self.assertRaises(errors.InvalidParameterError):
            egt.alpha_rank_sweep(table, [])
        with self.assertRaises(errors.InvalidParameterError):
            egt.alpha_rank_sweep(table, [1.0, 0.5])
        with self.assertRaises(errors.InvalidParameterError):
            egt.alpha_rank(table, alpha=0.0)
        with self.assertRaises(errors.InvalidParameterError):
            egt.alpha_rank(table, alpha=1.0, population_size=1)

    def test_reducible_chain(self):
        with self.assertRaises(errors.ReducibleChainError):
            egt.stationary_distribution(np.eye(2))
