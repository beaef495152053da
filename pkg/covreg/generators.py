"""Rule generation from tree ensembles

Regression trees are grown by one of three ensemble methods, and every node and leaf of every tree, except the
root, is harvested as a rule: the conjunction of the tests on the path from the root to that node.

    rf   Random forest. Each tree is grown on a bootstrap resample, evaluating 'mtry' random features per split.
    gb   Gradient boosting. Trees are fit in sequence to the residuals, shrunk by 'learning_rate'.
    sgb  Stochastic gradient boosting. Gradient boosting where each tree sees a 'subsample' fraction of the rows.

Trees are CART regression trees grown best-first: the leaf whose best split reduces the squared error the most is
split next, until the tree has 'tree_size' leaves or no split improves. Thresholds are midpoints between consecutive
distinct values; ties go to the lowest feature index, then to the smallest threshold.

The covreg project
"""

import heapq
import itertools
import math
from collections import deque, namedtuple
from typing import Iterator, List, Optional

import numpy as np
from joblib import Parallel, delayed

from . import conf, verbose
from .dataset import Dataset
from .exceptions import InvalidConfigError
from .glossary import Method
from .rules import ALL_SPACE, Rule

# Relative to the node's sum of squares; smaller reductions are rounding noise
_MIN_GAIN = 1e-12

_Split = namedtuple('_Split', ['gain', 'feature', 'threshold', 'left_rows', 'right_rows'])
Ensemble = namedtuple('Ensemble', ['trees', 'training_errors'])


class TreeNode:
    __slots__ = ('value', 'n_samples', 'path_rule', 'depth', 'feature', 'threshold', 'left', 'right')

    def __init__(self, value: float, n_samples: int, path_rule: Rule, depth: int):
        self.value = value
        self.n_samples = n_samples
        self.path_rule = path_rule
        self.depth = depth
        self.feature = None
        self.threshold = None
        self.left = None
        self.right = None

    def __repr__(self):
        if self.is_leaf:
            return 'TreeNode(leaf=%r, n=%d)' % (self.value, self.n_samples)
        return 'TreeNode(X%d <= %r, n=%d)' % (self.feature + 1, self.threshold, self.n_samples)

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def walk(self) -> Iterator['TreeNode']:
        """Breadth-first traversal, root first"""

        queue = deque([self])

        while queue:
            node = queue.popleft()
            yield node

            if not node.is_leaf:
                queue.append(node.left)
                queue.append(node.right)

    def leaves(self) -> List['TreeNode']:
        return [node for node in self.walk() if node.is_leaf]

    def predict(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        predictions = np.empty(features.shape[0])
        stack = [(self, np.arange(features.shape[0]))]

        while stack:
            node, rows = stack.pop()

            if node.is_leaf:
                predictions[rows] = node.value
                continue

            goes_left = features[rows, node.feature] <= node.threshold
            stack.append((node.left, rows[goes_left]))
            stack.append((node.right, rows[~goes_left]))

        return predictions


class GeneratorConfig:
    """Parameters of the rule generator

    :param method: Ensemble method
    :param tree_size: Maximal number of leaves per tree
    :param max_rules: Maximal number of distinct harvested rules
    :param n_trees: Number of trees; None means ceil(max_rules / (2 * tree_size - 2)), enough trees for their
                    non-root nodes to reach 'max_rules'
    :param learning_rate: Shrinkage of gb and sgb
    :param subsample: Row sampling rate of sgb
    :param mtry: Features evaluated per split by rf; None means ceil(d / 3)
    :param seed: Master seed, from which every tree gets its own seed
    """

    def __init__(self, method: Method = Method.RF, tree_size: int = 8, max_rules: int = 4000, n_trees: int = None,
                 learning_rate: float = 0.1, subsample: float = 0.5, mtry: int = None, seed: int = 0):
        self.method = Method(method)
        self.tree_size = tree_size
        self.max_rules = max_rules
        self.n_trees = n_trees
        self.learning_rate = learning_rate
        self.subsample = subsample
        self.mtry = mtry
        self.seed = seed
        self.validate()

    def __repr__(self):
        return 'GeneratorConfig(%s)' % ', '.join('%s=%r' % item for item in self.export().items())

    @classmethod
    def from_conf(cls, tree: dict) -> 'GeneratorConfig':
        return cls(**{key: tree[key] for key in ('method', 'tree_size', 'max_rules', 'n_trees', 'learning_rate',
                                                 'subsample', 'mtry', 'seed') if tree.get(key) is not None})

    def validate(self) -> None:
        if not isinstance(self.tree_size, int) or self.tree_size < 2:
            raise InvalidConfigError('tree_size', self.tree_size, 'an integer >= 2')

        if not isinstance(self.max_rules, int) or self.max_rules < 1:
            raise InvalidConfigError('max_rules', self.max_rules, 'an integer >= 1')

        if self.n_trees is not None and (not isinstance(self.n_trees, int) or self.n_trees < 1):
            raise InvalidConfigError('n_trees', self.n_trees, 'an integer >= 1')

        if not self.learning_rate > 0:
            raise InvalidConfigError('learning_rate', self.learning_rate, 'a real > 0')

        if not 0 < self.subsample <= 1:
            raise InvalidConfigError('subsample', self.subsample, 'a real in (0, 1]')

        if self.mtry is not None and (not isinstance(self.mtry, int) or self.mtry < 1):
            raise InvalidConfigError('mtry', self.mtry, 'an integer >= 1')

    def replace(self, **changes) -> 'GeneratorConfig':
        fields = {'method': self.method, 'tree_size': self.tree_size, 'max_rules': self.max_rules,
                  'n_trees': self.n_trees, 'learning_rate': self.learning_rate, 'subsample': self.subsample,
                  'mtry': self.mtry, 'seed': self.seed}
        return GeneratorConfig(**{**fields, **changes})

    def trees(self) -> int:
        return self.n_trees if self.n_trees is not None else math.ceil(self.max_rules / (2 * self.tree_size - 2))

    def features_per_split(self, d: int) -> Optional[int]:
        """Number of features evaluated per split, None meaning all of them"""

        if self.method is not Method.RF:
            return None

        return min(d, self.mtry if self.mtry is not None else math.ceil(d / 3))

    def export(self, d: int = None) -> dict:
        """Parameters with the derived defaults resolved, for model metadata"""

        return {'method': self.method.value, 'tree_size': self.tree_size, 'max_rules': self.max_rules,
                'n_trees': self.trees(), 'learning_rate': self.learning_rate, 'subsample': self.subsample,
                'mtry': self.features_per_split(d) if d is not None else self.mtry, 'seed': self.seed}


def _best_split(features: np.ndarray, target: np.ndarray, rows: np.ndarray, candidates: np.ndarray) -> Optional[_Split]:
    """Find the split of 'rows' with the largest reduction of squared error among the candidate features

    :param features: The full feature matrix
    :param target: The full target vector
    :param rows: Rows of the node
    :param candidates: Feature indices to evaluate, in increasing order
    :return: The best split or None if no split improves
    """

    y = target[rows]
    n = rows.shape[0]

    if n < 2 or np.ptp(y) == 0:
        return None

    centered = y - y.mean()
    tolerance = _MIN_GAIN * float(np.dot(centered, centered))

    block = features[np.ix_(rows, candidates)]
    order = np.argsort(block, axis=0, kind='mergesort')
    sorted_x = np.take_along_axis(block, order, axis=0)

    # Reduction of the squared error when the first k sorted rows go left: S_k^2 / k + S_k^2 / (n - k)
    sums = np.cumsum(centered[order], axis=0)[:-1]
    left_counts = np.arange(1, n, dtype=float)[:, np.newaxis]
    gains = sums ** 2 / left_counts + sums ** 2 / (n - left_counts)
    gains = np.where(sorted_x[1:] > sorted_x[:-1], gains, -np.inf)

    best_gain, best_feature, best_threshold = tolerance, None, None

    for column, feature in enumerate(candidates):
        position = int(np.argmax(gains[:, column]))
        gain = gains[position, column]

        if gain > best_gain:
            lo, hi = sorted_x[position, column], sorted_x[position + 1, column]
            threshold = (lo + hi) / 2
            best_gain, best_feature, best_threshold = gain, int(feature), threshold if threshold < hi else lo

    if best_feature is None:
        return None

    goes_left = features[rows, best_feature] <= best_threshold
    return _Split(best_gain, best_feature, best_threshold, rows[goes_left], rows[~goes_left])


def _grow(features: np.ndarray, target: np.ndarray, max_leaves: int, mtry: Optional[int],
          rng: np.random.Generator) -> TreeNode:
    d = features.shape[1]
    counter = itertools.count()
    frontier = []

    def candidates() -> np.ndarray:
        if mtry is None or mtry >= d:
            return np.arange(d)
        return np.sort(rng.choice(d, size=mtry, replace=False))

    def push(node: TreeNode, rows: np.ndarray) -> None:
        split = _best_split(features, target, rows, candidates())

        if split is not None:
            heapq.heappush(frontier, (-split.gain, next(counter), node, split))

    root = TreeNode(float(np.mean(target)), target.shape[0], ALL_SPACE, 0)
    push(root, np.arange(target.shape[0]))
    leaves = 1

    while frontier and leaves < max_leaves:
        _, _, node, split = heapq.heappop(frontier)
        node.feature, node.threshold = split.feature, split.threshold
        node.left = TreeNode(float(np.mean(target[split.left_rows])), split.left_rows.shape[0],
                             node.path_rule.tighten(split.feature, hi=split.threshold), node.depth + 1)
        node.right = TreeNode(float(np.mean(target[split.right_rows])), split.right_rows.shape[0],
                              node.path_rule.tighten(split.feature, lo=float(np.nextafter(split.threshold, np.inf))),
                              node.depth + 1)
        leaves += 1

        push(node.left, split.left_rows)
        push(node.right, split.right_rows)

    return root


def fit_cart_tree(ds: Dataset, max_leaves: int, mtry: int = None, rng: np.random.Generator = None) -> TreeNode:
    """Grow a best-first CART regression tree

    :param ds: Training data
    :param max_leaves: Maximal number of leaves, at least 2
    :param mtry: Number of random features evaluated per split, all of them if None
    :param rng: Source of the feature subsampling
    :return: The root node; a constant target yields a single leaf
    """

    if ds.n < 2:
        raise InvalidConfigError('dataset size', ds.n, 'at least 2 rows to grow a tree')

    if not isinstance(max_leaves, int) or max_leaves < 2:
        raise InvalidConfigError('max_leaves', max_leaves, 'an integer >= 2')

    return _grow(ds.features, ds.target, max_leaves, mtry, rng if rng is not None else np.random.default_rng(0))


def _forest_tree(features: np.ndarray, target: np.ndarray, max_leaves: int, mtry: int,
                 seed: np.random.SeedSequence) -> TreeNode:
    rng = np.random.default_rng(seed)
    resample = rng.integers(0, target.shape[0], size=target.shape[0])
    return _grow(features[resample], target[resample], max_leaves, mtry, rng)


def grow_ensemble(ds: Dataset, cfg: GeneratorConfig) -> Ensemble:
    """Grow the trees of the configured ensemble

    :return: The trees in build order, and for gb/sgb the training mean squared error after each tree
    """

    cfg.validate()
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.trees())

    if cfg.method is Method.RF:
        mtry = cfg.features_per_split(ds.d)
        trees = Parallel(n_jobs=conf.threads(), prefer='threads')(
            delayed(_forest_tree)(ds.features, ds.target, cfg.tree_size, mtry, seed) for seed in seeds)
        return Ensemble(trees, None)

    prediction = np.full(ds.n, float(np.mean(ds.target)))
    trees, errors = [], []

    for seed in seeds:
        rng = np.random.default_rng(seed)
        residual = ds.target - prediction

        if cfg.method is Method.SGB:
            rows = np.sort(rng.choice(ds.n, size=max(2, math.floor(cfg.subsample * ds.n)), replace=False))
        else:
            rows = np.arange(ds.n)

        tree = _grow(ds.features[rows], residual[rows], cfg.tree_size, None, rng)
        prediction = prediction + cfg.learning_rate * tree.predict(ds.features)
        errors.append(float(np.mean((ds.target - prediction) ** 2)))
        trees.append(tree)

    return Ensemble(trees, errors)


def harvest_rules(trees: List[TreeNode], max_rules: int) -> List[Rule]:
    """Collect the distinct path rules of every non-root node, trees in build order and nodes breadth-first"""

    harvested = {}

    for tree in trees:
        for node in itertools.islice(tree.walk(), 1, None):
            harvested.setdefault(node.path_rule, None)

            if len(harvested) >= max_rules:
                return list(harvested)

    return list(harvested)


def generate_rules(ds: Dataset, cfg: GeneratorConfig) -> List[Rule]:
    """Grow the ensemble and harvest its rules

    Rules whose support on the full training sample is empty are dropped.

    :param ds: Training data
    :param cfg: Generator configuration
    :return: The distinct rules, in harvesting order
    """

    ensemble = grow_ensemble(ds, cfg)
    rules = harvest_rules(ensemble.trees, cfg.max_rules)
    kept = [rule for rule in rules if rule.mask(ds.features).any()]

    verbose.info('Grew %d %s trees, harvested %d rules (%d with empty support dropped)'
                 % (len(ensemble.trees), cfg.method.value, len(kept), len(rules) - len(kept)), generate_rules)
    return kept
