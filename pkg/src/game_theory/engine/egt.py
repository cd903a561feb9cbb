"""
Evolutionary dynamics over normal-form payoff tables: replicator dynamics,
phase-portrait sampling and alpha-rank.

Alpha-rank works in the small-mutation limit: the Markov chain lives on pure
strategy profiles (monomorphic populations) and moves when a single mutant
fixates in one population. Fixation follows the Fermi selection process with
ranking intensity ``alpha`` and population size ``m``.
"""
import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from logging import getLogger
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from game_theory import defaults
from game_theory.engine import errors

logger = getLogger(__name__)

Profile = Tuple[int, ...]

STATIONARY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class PayoffTable:
    """
    Utilities of every population at every pure strategy profile.

    A single-population (symmetric) table holds one ``k x k`` matrix: the
    payoff of strategy ``i`` against ``j``. A multi-population table holds
    one tensor of shape ``(k_1, ..., k_P)`` per population.
    """
    tensors: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not self.tensors:
            raise errors.DimensionMismatchError("no payoff tensors")
        shape = self.tensors[0].shape
        for t in self.tensors:
            if t.shape != shape:
                raise errors.DimensionMismatchError(f"{t.shape} != {shape}")
            if not np.all(np.isfinite(t)):
                raise errors.DimensionMismatchError("non-finite payoff")
        if len(self.tensors) == 1:
            if len(shape) != 2 or shape[0] != shape[1]:
                raise errors.DimensionMismatchError(
                    f"symmetric table must be square: {shape}")
        elif len(shape) != len(self.tensors):
            raise errors.DimensionMismatchError(
                f"{len(self.tensors)} populations, tensor rank {len(shape)}")

    @classmethod
    def symmetric(cls, matrix: Sequence[Sequence[float]]) -> "PayoffTable":
        return cls((np.asarray(matrix, dtype=np.float64),))

    @classmethod
    def multi(cls, tensors: Iterable[Sequence]) -> "PayoffTable":
        return cls(tuple(np.asarray(t, dtype=np.float64) for t in tensors))

    @property
    def is_symmetric(self) -> bool:
        return len(self.tensors) == 1

    @property
    def num_populations(self) -> int:
        return len(self.tensors)

    @property
    def strategies(self) -> Tuple[int, ...]:
        if self.is_symmetric:
            return self.tensors[0].shape[:1]
        return tuple(self.tensors[0].shape)

    def profiles(self) -> List[Profile]:
        return list(itertools.product(*(range(k) for k in self.strategies)))

    def to_text(self) -> str:
        strategies = ','.join(map(str, self.strategies))
        blocks = [f'populations={self.num_populations} '
                  f'strategies={strategies}']
        for tensor in self.tensors:
            rows = tensor.reshape(-1, tensor.shape[-1])
            blocks.append('\n'.join(' '.join(repr(float(v)) for v in row)
                                    for row in rows))
        return blocks[0] + '\n' + '\n\n'.join(blocks[1:]) + '\n'

    @classmethod
    def from_text(cls, text: str) -> "PayoffTable":
        """
        Parses the payoff-table format or a heuristic payoff table.

        :raises errors.DimensionMismatchError: malformed or inconsistent.
        """
        lines = text.strip('\n').split('\n')
        header = dict(item.split('=', 1) for item in lines[0].split()
                      if '=' in item)
        if lines[0].startswith('hpt'):
            return cls.from_hpt(lines)
        try:
            populations = int(header['populations'])
            strategies = [int(k) for k in header['strategies'].split(',')]
        except (KeyError, ValueError):
            raise errors.DimensionMismatchError(f"bad header: {lines[0]!r}")
        shape = ((strategies[0], strategies[0]) if populations == 1
                 else tuple(strategies))
        blocks: List[List[List[float]]] = [[]]
        for line in lines[1:]:
            if not line.strip():
                blocks.append([])
                continue
            try:
                blocks[-1].append([float(v) for v in line.split()])
            except ValueError:
                raise errors.DimensionMismatchError(f"bad row: {line!r}")
        blocks = [b for b in blocks if b]
        if len(blocks) != populations:
            raise errors.DimensionMismatchError(
                f"{len(blocks)} tensors for {populations} populations")
        tensors = []
        for block in blocks:
            array = np.asarray(block, dtype=np.float64)
            if array.size != int(np.prod(shape)):
                raise errors.DimensionMismatchError(
                    f"tensor of {array.size} entries for shape {shape}")
            tensors.append(array.reshape(shape))
        return cls(tuple(tensors))

    @classmethod
    def from_hpt(cls, lines: Sequence[str]) -> "PayoffTable":
        """
        Expands a heuristic payoff table: each row holds the count of
        players using every strategy, then the payoff of each strategy in
        that match-up. Two-player tables become a symmetric matrix, larger
        ones one symmetric tensor per player.
        """
        header = dict(item.split('=', 1) for item in lines[0].split()
                      if '=' in item)
        k = int(header['strategies'])
        rows = {}
        for line in lines[1:]:
            if not line.strip():
                continue
            values = line.split()
            if len(values) != 2 * k:
                raise errors.DimensionMismatchError(f"bad row: {line!r}")
            counts = tuple(int(v) for v in values[:k])
            rows[counts] = [float(v) for v in values[k:]]
        if 'rows' in header and int(header['rows']) != len(rows):
            raise errors.DimensionMismatchError("row count mismatch")
        players = {sum(c) for c in rows}
        if len(players) != 1:
            raise errors.DimensionMismatchError("inconsistent player count")
        p = players.pop()

        def payoff(profile: Profile, index: int) -> float:
            counts = tuple(profile.count(s) for s in range(k))
            try:
                return rows[counts][profile[index]]
            except KeyError:
                raise errors.DimensionMismatchError(
                    f"missing match-up {counts}")

        if p == 2:
            matrix = np.zeros((k, k))
            for i, j in itertools.product(range(k), repeat=2):
                matrix[i, j] = payoff((i, j), 0)
            return cls((matrix,))
        tensors = []
        for q in range(p):
            tensor = np.zeros((k,) * p)
            for profile in itertools.product(range(k), repeat=p):
                tensor[profile] = payoff(profile, q)
            tensors.append(tensor)
        return cls(tuple(tensors))

    def payoff(self, population: int, profile: Profile) -> float:
        """ Utility of ``population`` at a profile of the chain."""
        if self.is_symmetric:
            return float(self.tensors[0][profile[0], profile[0]])
        return float(self.tensors[population][profile])


def _check_simplex(x: np.ndarray, k: int) -> None:
    if x.shape != (k,):
        raise errors.DimensionMismatchError(f"point {x.shape}, {k} strategies")


def replicator_derivative(payoff: Sequence[Sequence[float]],
                          x: Sequence[float]) -> np.ndarray:
    """
    Single-population replicator dynamics ``x_a * (f_a - mean fitness)``.

    :raises errors.DimensionMismatchError: shapes disagree.
    """
    m = np.asarray(payoff, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise errors.DimensionMismatchError(f"payoff {m.shape}")
    _check_simplex(x, m.shape[0])
    fitness = m @ x
    return x * (fitness - x @ fitness)


def two_population_derivative(row_payoff: Sequence[Sequence[float]],
                              col_payoff: Sequence[Sequence[float]],
                              x: Sequence[float],
                              y: Sequence[float],
                              ) -> Tuple[np.ndarray, np.ndarray]:
    """
    Two-population replicator dynamics: each population responds to the
    other's current mixture.

    :raises errors.DimensionMismatchError: shapes disagree.
    """
    a = np.asarray(row_payoff, dtype=np.float64)
    b = np.asarray(col_payoff, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if a.ndim != 2 or a.shape != b.shape:
        raise errors.DimensionMismatchError(f"{a.shape} vs {b.shape}")
    _check_simplex(x, a.shape[0])
    _check_simplex(y, a.shape[1])
    fx = a @ y
    fy = b.T @ x
    return x * (fx - x @ fx), y * (fy - y @ fy)


def integrate_replicator(payoff: Sequence[Sequence[float]],
                         x0: Sequence[float],
                         dt: float = 1e-3,
                         steps: int = 1000,
                         renormalize: bool = False,
                         ) -> np.ndarray:
    """
    Forward-Euler trajectory of single-population replicator dynamics.

    :returns: array of ``steps + 1`` points, the first being ``x0``.
    """
    x = np.asarray(x0, dtype=np.float64)
    trajectory = [x]
    for _ in range(steps):
        x = x + dt * replicator_derivative(payoff, x)
        if renormalize:
            x = np.clip(x, 0.0, None)
            x = x / x.sum()
        trajectory.append(x)
    return np.asarray(trajectory)


@dataclass
class PhasePortrait:
    columns: List[str]
    rows: List[List[float]] = field(default_factory=list)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(self.columns)
        writer.writerows([[repr(float(v)) for v in row] for row in self.rows])
        return out.getvalue()

    def __len__(self) -> int:
        return len(self.rows)


def phase_portrait_grid(table: PayoffTable, resolution: int) -> PhasePortrait:
    """
    Samples the replicator vector field on an even grid.

    Two strategies give ``resolution + 1`` points on the interval, three a
    triangular lattice of ``resolution`` subdivisions per edge with the
    equilateral projection ``(x, y)``, and a two-population 2x2 table a
    ``resolution x resolution`` square over each population's probability
    of its first strategy.

    :raises errors.UnsupportedDimensionError: any other table shape.
    """
    if resolution < 1:
        raise errors.InvalidParameterError('resolution')
    if table.is_symmetric and table.strategies == (2,):
        portrait = PhasePortrait(['p0', 'p1', 'd0', 'd1', 'magnitude'])
        for i in range(resolution + 1):
            x = np.asarray([i / resolution, 1 - i / resolution])
            d = replicator_derivative(table.tensors[0], x)
            portrait.rows.append([*x, *d, float(np.linalg.norm(d))])
        return portrait
    if table.is_symmetric and table.strategies == (3,):
        portrait = PhasePortrait(['p0', 'p1', 'p2', 'd0', 'd1', 'd2',
                                  'magnitude', 'x', 'y'])
        for i in range(resolution + 1):
            for j in range(resolution + 1 - i):
                x = np.asarray([i, j, resolution - i - j]) / resolution
                d = replicator_derivative(table.tensors[0], x)
                px = x[1] + x[2] / 2
                py = x[2] * math.sqrt(3) / 2
                portrait.rows.append([*x, *d, float(np.linalg.norm(d)),
                                      px, py])
        return portrait
    if table.num_populations == 2 and table.strategies == (2, 2):
        portrait = PhasePortrait(['p', 'q', 'dp', 'dq', 'magnitude'])
        axis = (np.linspace(0.0, 1.0, resolution) if resolution > 1
                else np.asarray([0.5]))
        for p in axis:
            for q in axis:
                dx, dy = two_population_derivative(
                    table.tensors[0], table.tensors[1],
                    [p, 1 - p], [q, 1 - q])
                magnitude = math.hypot(dx[0], dy[0])
                portrait.rows.append([p, q, dx[0], dy[0], magnitude])
        return portrait
    raise errors.UnsupportedDimensionError(
        f"no phase portrait for strategies {table.strategies}")


def _fixation_multi(delta: float, alpha: float, m: int) -> float:
    """ Fermi fixation probability with a constant fitness gap ``delta``."""
    exponents = -alpha * delta * np.arange(m)
    return float(np.exp(-np.logaddexp.reduce(exponents)))


def _fixation_single(payoff: np.ndarray, resident: int, mutant: int,
                     alpha: float, m: int) -> float:
    """
    Fermi fixation probability of ``mutant`` in a population of ``m``
    ``resident`` players, fitness depending on the population composition.
    """
    r, u = resident, mutant
    gaps = []
    for p in range(1, m):
        f_mutant = ((p - 1) * payoff[u, u] + (m - p) * payoff[u, r]) / (m - 1)
        f_resident = (p * payoff[r, u] + (m - p - 1) * payoff[r, r]) / (m - 1)
        gaps.append(f_mutant - f_resident)
    exponents = np.concatenate(([0.0], -alpha * np.cumsum(gaps)))
    return float(np.exp(-np.logaddexp.reduce(exponents)))


def transition_matrix(table: PayoffTable, alpha: float,
                      population_size: int) -> np.ndarray:
    profiles = table.profiles()
    index = {s: i for i, s in enumerate(profiles)}
    c = np.zeros((len(profiles), len(profiles)))
    if table.is_symmetric:
        k = table.strategies[0]
        eta = 1.0 / (k - 1) if k > 1 else 0.0
        for i in range(k):
            for j in range(k):
                if i != j:
                    c[i, j] = eta * _fixation_single(
                        table.tensors[0], i, j, alpha, population_size)
    else:
        eta = 1.0 / sum(k - 1 for k in table.strategies)
        for s in profiles:
            for q, k in enumerate(table.strategies):
                for t in range(k):
                    if t == s[q]:
                        continue
                    target = s[:q] + (t,) + s[q + 1:]
                    delta = table.payoff(q, target) - table.payoff(q, s)
                    c[index[s], index[target]] = eta * _fixation_multi(
                        delta, alpha, population_size)
    for i in range(len(profiles)):
        c[i, i] = 1.0 - (c[i].sum() - c[i, i])
    return c


def closed_classes(c: np.ndarray) -> List[List[int]]:
    """ Closed communicating classes of a row-stochastic matrix."""
    n = c.shape[0]
    reach = ((c > 0) | np.eye(n, dtype=bool)).astype(np.int64)
    while True:
        nxt = ((reach @ reach) > 0).astype(np.int64)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    classes: List[List[int]] = []
    seen = set()
    for i in range(n):
        if i in seen:
            continue
        members = [j for j in range(n) if reach[i, j] and reach[j, i]]
        seen.update(members)
        outside = [j for j in range(n) if reach[i, j] and j not in members]
        if not outside:
            classes.append(members)
    return classes


def stationary_distribution(c: np.ndarray,
                            max_iterations: int = 100000) -> np.ndarray:
    """
    Unique stationary distribution of a row-stochastic matrix.

    Solved as a least-squares linear system; power iteration with damping
    takes over when the solution misses the residual tolerance.

    :raises errors.ReducibleChainError: more than one closed class.
    """
    classes = closed_classes(c)
    if len(classes) != 1:
        raise errors.ReducibleChainError(classes)
    n = c.shape[0]
    a = np.vstack([(c - np.eye(n)).T, np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi = np.linalg.lstsq(a, b, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    if np.max(np.abs(pi @ c - pi)) < STATIONARY_TOLERANCE:
        return pi
    logger.debug("least squares residual too large, power iteration")
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iterations):
        nxt = 0.5 * pi + 0.5 * (pi @ c)
        if np.max(np.abs(nxt - pi)) < STATIONARY_TOLERANCE / 10:
            pi = nxt
            break
        pi = nxt
    return pi / pi.sum()


def profile_label(profile: Profile) -> str:
    return '-'.join(map(str, profile))


@dataclass
class AlphaRankResult:
    alpha: float
    profiles: List[Profile]
    transition: np.ndarray
    stationary: np.ndarray

    @property
    def ranking(self) -> List[Tuple[Profile, float]]:
        """ Profiles by descending mass, equal masses in profile order."""
        pairs = list(zip(self.profiles, map(float, self.stationary)))
        return sorted(pairs, key=lambda p: (-round(p[1], 12), p[0]))

    @property
    def top(self) -> Profile:
        return self.ranking[0][0]

    def mass(self, profile: Profile) -> float:
        return float(self.stationary[self.profiles.index(profile)])


def alpha_rank(table: PayoffTable,
               alpha: float,
               population_size: int = defaults.ALPHARANK_POPULATION_SIZE,
               ) -> AlphaRankResult:
    """
    :raises errors.InvalidParameterError: ``alpha <= 0`` or ``m < 2``.
    :raises errors.ReducibleChainError: no unique stationary distribution.
    """
    if alpha <= 0:
        raise errors.InvalidParameterError('alpha')
    if population_size < 2:
        raise errors.InvalidParameterError('population_size')
    c = transition_matrix(table, alpha, population_size)
    pi = stationary_distribution(c)
    return AlphaRankResult(alpha=alpha, profiles=table.profiles(),
                           transition=c, stationary=pi)


@dataclass
class AlphaSweep:
    results: List[AlphaRankResult]
    stabilized: bool
    """ Top profile unchanged over the final decade of alpha."""

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(['alpha', 'profile', 'mass'])
        for r in self.results:
            for profile, mass in zip(r.profiles, r.stationary):
                writer.writerow([repr(float(r.alpha)), profile_label(profile),
                                 repr(float(mass))])
        return out.getvalue()


def log_grid(low: float, high: float, steps: int) -> List[float]:
    if steps < 1 or low <= 0 or high < low:
        raise errors.InvalidParameterError('alpha_grid')
    if steps == 1:
        return [low]
    return [float(a) for a in np.logspace(math.log10(low), math.log10(high),
                                          steps)]


def alpha_rank_sweep(table: PayoffTable,
                     alphas: Sequence[float],
                     population_size: int = defaults.ALPHARANK_POPULATION_SIZE,
                     ) -> AlphaSweep:
    """
    :raises errors.InvalidParameterError: grid is empty, not positive or not
        strictly increasing.
    """
    if not alphas or alphas[0] <= 0 or any(
            b <= a for a, b in zip(alphas, alphas[1:])):
        raise errors.InvalidParameterError('alpha_grid')
    results = [alpha_rank(table, a, population_size) for a in alphas]
    final = [r for r in results if r.alpha >= alphas[-1] / 10]
    stabilized = len({r.top for r in final}) == 1
    return AlphaSweep(results=results, stabilized=stabilized)