"""Covering-based estimator

Each point gets an activation signature, the bit vector telling which rules of the covering contain it. Points with
equal signatures share a cell of the partition induced by the covering, so the partition never has to be built:
the estimator stores the training mean of every observed signature and looks predictions up by signature.

A point whose signature was never observed in training, or which lies outside every rule, is predicted by the
fallback value: 0 by default, or the training mean.

For testing, 'enumerate_partition_bruteforce' constructs the cells explicitly from a small set of rules.

The covreg project
"""

import itertools
import math
from collections import namedtuple
from typing import Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np

from . import verbose
from .dataset import Dataset, TargetStats, target_stats
from .exceptions import (DimensionMismatchError, EmptyPoolError, InvalidConfigError, PartitionCheckError,
                         TooManyRulesError)
from .glossary import Fallback
from .rules import ALL_SPACE, Rule, rule_contains, rule_intersect
from .selection import Covering

MAX_BRUTEFORCE_RULES = 12

Cell = namedtuple('Cell', ['mean', 'count'])


class ActivationSignature:
    """Bit j is set iff the point lies in rule j of the covering"""

    __slots__ = ('length', 'packed')

    def __init__(self, length: int, packed: bytes):
        self.length = length
        self.packed = packed

    def __eq__(self, other):
        return isinstance(other, ActivationSignature) and (self.length, self.packed) == (other.length, other.packed)

    def __hash__(self):
        return hash((self.length, self.packed))

    def __repr__(self):
        return 'ActivationSignature(%s)' % self.bitstring

    @classmethod
    def from_bits(cls, bits: Sequence[Union[bool, int]]) -> 'ActivationSignature':
        bits = np.asarray(bits, dtype=bool)
        return cls(bits.shape[0], np.packbits(bits).tobytes())

    @classmethod
    def from_bitstring(cls, bitstring: str) -> 'ActivationSignature':
        if any(char not in '01' for char in bitstring):
            raise InvalidConfigError('signature', bitstring, 'a string of 0 and 1')

        return cls.from_bits([char == '1' for char in bitstring])

    @property
    def bits(self) -> Tuple[int, ...]:
        unpacked = np.unpackbits(np.frombuffer(self.packed, dtype=np.uint8))[:self.length]
        return tuple(int(bit) for bit in unpacked)

    @property
    def bitstring(self) -> str:
        return ''.join(str(bit) for bit in self.bits)

    @property
    def covered(self) -> bool:
        return any(self.bits)


def activation_matrix(rules: Sequence[Rule], features: np.ndarray) -> np.ndarray:
    """n x k boolean matrix whose column j is the activation of rule j"""

    features = np.asarray(features, dtype=float)
    activations = np.zeros((features.shape[0], len(rules)), dtype=bool)

    for j, r in enumerate(rules):
        activations[:, j] = r.mask(features)

    return activations


def activation_signature(cov: Covering, x: Sequence[float]) -> ActivationSignature:
    return ActivationSignature.from_bits([rule_contains(r, x) for r in cov.rules])


class CoveringEstimator:
    """Piecewise-constant estimator over the cells of a covering

    :param covering: The selected rules
    :param cells: Training mean and row count per packed signature, uncovered rows excluded
    :param stats: Training target statistics
    :param fallback: Value for unseen and uncovered signatures
    :param feature_names: Training feature names, in column order
    :param target_name: Training target name
    :param metadata: Parameters of the fit, carried into the model file
    """

    def __init__(self, covering: Covering, cells: Dict[bytes, Cell], stats: TargetStats,
                 fallback: Fallback = Fallback.ZERO, feature_names: Sequence[str] = (), target_name: str = 'y',
                 metadata: dict = None):
        self.covering = covering
        self.cells = dict(cells)
        self.stats = stats
        self.fallback = Fallback(fallback)
        self.feature_names = tuple(feature_names)
        self.target_name = target_name
        self.metadata = dict(metadata or {})

    def __repr__(self):
        return 'CoveringEstimator(rules=%d, cells=%d, fallback=%s)' % (
            len(self.covering), len(self.cells), self.fallback.value)

    @property
    def d(self) -> int:
        return len(self.feature_names)

    @property
    def fallback_value(self) -> float:
        return self.stats.mean if self.fallback is Fallback.MEAN else 0.0

    def cell_table(self) -> Iterator[Tuple[ActivationSignature, Cell]]:
        """Cells ordered by signature bit string"""

        signatures = {ActivationSignature(len(self.covering), packed): cell for packed, cell in self.cells.items()}
        return iter(sorted(signatures.items(), key=lambda item: item[0].bitstring))

    def packed_signatures(self, features: np.ndarray) -> np.ndarray:
        return np.packbits(activation_matrix(self.covering.rules, features), axis=1)

    def predict(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)

        if features.ndim != 2 or features.shape[1] != self.d:
            raise DimensionMismatchError(self.d, features.shape[1] if features.ndim == 2 else features.size)

        if features.shape[0] == 0:
            return np.empty(0)

        observed, inverse = np.unique(self.packed_signatures(features), axis=0, return_inverse=True)
        fallback = self.fallback_value
        values = np.array([self.cells.get(row.tobytes(), Cell(fallback, 0)).mean for row in observed])
        return values[inverse.reshape(-1)]


def fit(cov: Covering, ds: Dataset, fallback: Fallback = Fallback.ZERO, metadata: dict = None) -> CoveringEstimator:
    """Store the training mean of every observed covered signature"""

    if len(cov) == 0:
        raise EmptyPoolError()

    packed = np.packbits(activation_matrix(cov.rules, ds.features), axis=1)
    observed, inverse = np.unique(packed, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind='stable')
    groups = np.split(order, np.cumsum(np.bincount(inverse, minlength=observed.shape[0]))[:-1])
    cells = {}

    for row, rows in zip(observed, groups):
        if row.any():
            cells[row.tobytes()] = Cell(float(np.mean(ds.target[rows])), int(rows.shape[0]))

    estimator = CoveringEstimator(cov, cells, target_stats(ds), fallback, ds.feature_names, ds.target_name, metadata)
    verbose.info('Fitted %d cells from %d rules' % (len(cells), len(cov)), fit)
    return estimator


def predict(est: CoveringEstimator, x: np.ndarray) -> Union[float, np.ndarray]:
    """Predict a single point (returns a float) or a matrix of points (returns a vector)"""

    x = np.asarray(x, dtype=float)

    if x.ndim == 1:
        return float(est.predict(x[np.newaxis, :])[0])

    return est.predict(x)


class PartitionCell(namedtuple('PartitionCell', ['signature', 'box', 'excluded'])):
    """A cell of the partition induced by a collection of rules

    The cell is 'box' (the intersection of the rules its signature activates) minus every rule in 'excluded'.
    """

    __slots__ = ()

    @property
    def covered(self) -> bool:
        return any(self.signature)

    def contains(self, x: Sequence[float]) -> bool:
        return rule_contains(self.box, x) and not any(rule_contains(r, x) for r in self.excluded)


def _probe_coordinates(rules: Sequence[Rule], feature: int) -> np.ndarray:
    """One coordinate per atom of the real line cut by the finite interval endpoints on 'feature'"""

    endpoints = sorted({bound for r in rules for bound in r.interval(feature) if math.isfinite(bound)})

    if not endpoints:
        return np.zeros(1)

    gaps = [(a + b) / 2 for a, b in zip(endpoints, endpoints[1:])]
    return np.unique(np.array([endpoints[0] - 1] + endpoints + gaps + [endpoints[-1] + 1]))


def enumerate_partition_bruteforce(rules: Sequence[Rule]) -> List[PartitionCell]:
    """Every non-empty cell of the partition induced by the rules, the uncovered one included

    Every cell is a union of products of per-feature atoms, so probing one point per product of atoms finds every
    non-empty signature.

    :param rules: At most MAX_BRUTEFORCE_RULES rules
    :return: The cells, sorted by signature
    """

    rules = list(rules)

    if len(rules) > MAX_BRUTEFORCE_RULES:
        raise TooManyRulesError(len(rules), MAX_BRUTEFORCE_RULES)

    d = max([feature + 1 for r in rules for feature in r.features] + [1])
    axes = [_probe_coordinates(rules, feature) for feature in range(d)]
    probes = np.stack([axis.reshape(-1) for axis in np.meshgrid(*axes, indexing='ij')], axis=1)
    patterns = np.unique(activation_matrix(rules, probes), axis=0)
    cells = []

    for pattern in patterns:
        box = ALL_SPACE

        for r in itertools.compress(rules, pattern):
            box = rule_intersect(box, r)

        excluded = tuple(r for r, active in zip(rules, pattern) if not active)
        cells.append(PartitionCell(tuple(int(bit) for bit in pattern), box, excluded))

    return sorted(cells, key=lambda cell: cell.signature)


def unit_box(d: int) -> Rule:
    return Rule({j: (0.0, 1.0) for j in range(d)})


def witness_partition(d: int) -> List[Rule]:
    """2d + 1 disjoint boxes tiling the space, one of which is [0, 1]^d

    Box 2j + 1 (resp. 2j + 2) holds the points whose first coordinate outside [0, 1] is x_j < 0 (resp. x_j > 1).
    """

    boxes = [unit_box(d)]

    for j in range(d):
        inside = {i: (0.0, 1.0) for i in range(j)}
        boxes.append(Rule({**inside, j: (-math.inf, float(np.nextafter(0.0, -math.inf)))}))
        boxes.append(Rule({**inside, j: (float(np.nextafter(1.0, math.inf)), math.inf)}))

    return boxes


def covering_vs_partition_cardinality_check(d: int) -> Tuple[int, int]:
    """Compare the smallest partition and the smallest covering whose induced partition contains [0, 1]^d

    Verifies that the witness partition tiles the space and that the covering {[0, 1]^d, all space} induces
    [0, 1]^d as a cell.

    :return: A tuple of (partition size 2d + 1, covering size 2)
    """

    if not isinstance(d, int) or d < 1:
        raise InvalidConfigError('d', d, 'an integer >= 1')

    partition = witness_partition(d)

    for first, second in itertools.combinations(partition, 2):
        if rule_intersect(first, second) is not None:
            raise PartitionCheckError('%r and %r intersect' % (first, second))

    grid = np.array(list(itertools.product([-0.5, 0.0, 0.5, 1.0, 1.5], repeat=d)))
    hits = activation_matrix(partition, grid).sum(axis=1)

    if not np.all(hits == 1):
        raise PartitionCheckError('%s lies in %d boxes' % (grid[np.argmax(hits != 1)], hits[np.argmax(hits != 1)]))

    covering = [unit_box(d), ALL_SPACE]
    cells = {cell.signature: cell for cell in enumerate_partition_bruteforce(covering)}

    if (1, 1) not in cells or cells[(1, 1)].box != unit_box(d) or cells[(1, 1)].excluded:
        raise PartitionCheckError('[0, 1]^%d is not a cell of the covering' % d)

    return len(partition), len(covering)
