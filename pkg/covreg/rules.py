"""Hyperrectangle rules

A rule is the condition part of an If-Then statement: a conjunction of closed per-feature intervals
---
    IF (X_2 in [172, 326]) AND (X_7 in [35.5, 92]) THEN ...
---
Features without an interval are unconstrained. The length of a rule is the number of constrained features, and the
interpretability index of a collection is the sum of the lengths of its rules.

Rules are immutable values. They are compared and hashed by their canonical condition tuple, sorted by feature index,
which also gives the canonical (lexicographic) order used to break ties.

The covreg project
"""

import math
from collections import namedtuple
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .dataset import Dataset
from .exceptions import InvalidConfigError, RuleIndexError

Interval = Tuple[float, float]
Condition = namedtuple('Condition', ['feature', 'lo', 'hi'])


class Rule:
    __slots__ = ('conditions', '_hash')

    def __init__(self, conditions: Dict[int, Interval] = None):
        canonical = []

        for feature, (lo, hi) in sorted((conditions or {}).items()):
            lo, hi = float(lo), float(hi)

            if math.isnan(lo) or math.isnan(hi) or lo > hi or int(feature) < 0:
                raise InvalidConfigError('rule condition', (feature, lo, hi), 'a feature index >= 0 and lo <= hi')

            canonical.append(Condition(int(feature), lo, hi))

        object.__setattr__(self, 'conditions', tuple(canonical))
        object.__setattr__(self, '_hash', hash(self.conditions))

    def __setattr__(self, key, value):
        raise AttributeError('Rule is immutable')

    def __eq__(self, other):
        return isinstance(other, Rule) and self.conditions == other.conditions

    def __lt__(self, other: 'Rule'):
        return self.conditions < other.conditions

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return Rule, (self.as_dict(),)

    def __repr__(self):
        return 'Rule(%s)' % ', '.join('%d: [%r, %r]' % condition for condition in self.conditions)

    @property
    def length(self) -> int:
        return len(self.conditions)

    @property
    def features(self) -> Tuple[int, ...]:
        return tuple(condition.feature for condition in self.conditions)

    def interval(self, feature: int) -> Interval:
        """Interval on 'feature', the whole real line if unconstrained"""

        for condition in self.conditions:
            if condition.feature == feature:
                return condition.lo, condition.hi

        return -math.inf, math.inf

    def as_dict(self) -> Dict[int, Interval]:
        return {condition.feature: (condition.lo, condition.hi) for condition in self.conditions}

    def tighten(self, feature: int, lo: float = -math.inf, hi: float = math.inf) -> 'Rule':
        """Return the rule with the interval on 'feature' intersected with [lo, hi]

        Tree paths use this to fold successive tests on the same feature into a single interval.
        """

        current_lo, current_hi = self.interval(feature)
        conditions = self.as_dict()
        conditions[feature] = (max(current_lo, lo), min(current_hi, hi))
        return Rule(conditions)

    def mask(self, features: np.ndarray) -> np.ndarray:
        """Activation of the rule on every row of a feature matrix

        :param features: An n x d matrix
        :return: A boolean vector of length n
        """

        features = np.asarray(features, dtype=float)
        d = features.shape[1]
        activated = np.ones(features.shape[0], dtype=bool)

        for feature, lo, hi in self.conditions:
            if feature >= d:
                raise RuleIndexError(feature, d)

            column = features[:, feature]
            activated &= (column >= lo) & (column <= hi)

        return activated

    def describe(self, feature_names: Sequence[str] = None) -> str:
        if not self.conditions:
            return 'all'

        def name(feature: int) -> str:
            return feature_names[feature] if feature_names is not None else 'X%d' % (feature + 1)

        return ' AND '.join('%s in [%.6g, %.6g]' % (name(feature), lo, hi) for feature, lo, hi in self.conditions)


class RuleStats(namedtuple('RuleStats', ['coverage', 'support_count', 'cond_mean', 'cond_var'])):
    """Empirical statistics of a rule on a sample

    'cond_mean' and 'cond_var' are None when no row activates the rule.
    """

    __slots__ = ()

    @property
    def defined(self) -> bool:
        return self.support_count > 0

    @property
    def cond_std(self) -> Optional[float]:
        return math.sqrt(self.cond_var) if self.cond_var is not None else None


ALL_SPACE = Rule()


def rule_contains(r: Rule, x: Sequence[float]) -> bool:
    """Whether the point 'x' satisfies every interval of the rule, endpoints included"""

    x = np.asarray(x, dtype=float)

    for feature, lo, hi in r.conditions:
        if feature >= x.shape[0]:
            raise RuleIndexError(feature, x.shape[0])

        if not lo <= x[feature] <= hi:
            return False

    return True


def stats_from_mask(mask: np.ndarray, target: np.ndarray) -> RuleStats:
    """Plug-in coverage, conditional mean and conditional (population) variance of the activated rows"""

    support = int(np.count_nonzero(mask))
    coverage = support / mask.shape[0]

    if support == 0:
        return RuleStats(coverage, 0, None, None)

    activated = target[mask]
    return RuleStats(coverage, support, float(np.mean(activated)), float(np.var(activated)))


def rule_stats(r: Rule, ds: Dataset) -> RuleStats:
    return stats_from_mask(r.mask(ds.features), ds.target)


def interpretability_index(rules: Iterable[Rule]) -> int:
    """Sum of the rule lengths of a collection"""
    return sum(r.length for r in rules)


def rule_intersect(r1: Rule, r2: Rule) -> Optional[Rule]:
    """Per-feature interval intersection of two rules

    :return: The intersection, or None when it is empty
    """

    conditions = r1.as_dict()

    for feature, lo, hi in r2.conditions:
        current_lo, current_hi = conditions.get(feature, (-math.inf, math.inf))
        lo, hi = max(lo, current_lo), min(hi, current_hi)

        if lo > hi:
            return None

        conditions[feature] = (lo, hi)

    return Rule(conditions)


def export_rule(r: Rule, feature_names: Sequence[str]) -> List[Dict[str, Optional[float]]]:
    """JSON-ready conditions of a rule, with infinite bounds written as null"""

    def bound(value: float) -> Optional[float]:
        return None if math.isinf(value) else value

    return [{'feature': feature_names[feature], 'lo': bound(lo), 'hi': bound(hi)} for feature, lo, hi in r.conditions]


def import_rule(conditions: List[Dict[str, Optional[float]]], feature_names: Sequence[str]) -> Rule:
    """Inverse of 'export_rule'"""

    index = {name: j for j, name in enumerate(feature_names)}
    parsed = {}

    for item in conditions:
        if item['feature'] not in index:
            raise InvalidConfigError('rule feature', item['feature'], 'one of %s' % ', '.join(feature_names))

        parsed[index[item['feature']]] = (-math.inf if item['lo'] is None else item['lo'],
                                          math.inf if item['hi'] is None else item['hi'])

    return Rule(parsed)
