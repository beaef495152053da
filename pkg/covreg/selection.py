"""Greedy selection of a quasi-covering

Significant rules are browsed by decreasing coverage, then insignificant rules by increasing conditional variance.
A candidate r is accepted when the rows it shares with the union of the rules selected so far are at most
gamma times its own support, so that every accepted rule brings at least a share (1 - gamma) of new rows. The first
candidate is always accepted. Browsing stops as soon as the selected rules cover every training row.

Ties are broken by the canonical rule order.

The covreg project
"""

from collections import namedtuple
from typing import Iterator, List, Optional, Tuple

import numpy as np

from . import verbose
from .dataset import Dataset
from .exceptions import EmptyPoolError, EmptyUnionError, InvalidConfigError
from .glossary import LoopCondition, Tag
from .rules import Rule, RuleStats, interpretability_index
from .significance import ClassifiedRules

CoveringEntry = namedtuple('CoveringEntry', ['rule', 'tag', 'stats', 'acceptance_index', 'coverage_at_acceptance'])


class SelectionConfig:
    """
    :param gamma: Maximal share of an accepted rule's support already covered, in (0, 1)
    :param loop_condition: 'union' stops when every row is covered; 'sum' stops when the coverages of the selected
                           rules add up to 1
    """

    def __init__(self, gamma: float = 0.9, loop_condition: LoopCondition = LoopCondition.UNION):
        if not 0 < gamma < 1:
            raise InvalidConfigError('gamma', gamma, 'a real in (0, 1)')

        self.gamma = gamma
        self.loop_condition = LoopCondition(loop_condition)

    def __repr__(self):
        return 'SelectionConfig(gamma=%r, loop_condition=%s)' % (self.gamma, self.loop_condition.value)


class Covering:
    """Selected rules in acceptance order, significant ones first"""

    def __init__(self, entries: List[CoveringEntry], union_coverage: float):
        self.entries = list(entries)
        self.union_coverage = union_coverage

    def __repr__(self):
        return 'Covering(rules=%d, union_coverage=%r)' % (len(self.entries), self.union_coverage)

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[CoveringEntry]:
        return iter(self.entries)

    @property
    def rules(self) -> List[Rule]:
        return [entry.rule for entry in self.entries]

    def tagged(self, tag: Tag) -> List[CoveringEntry]:
        return [entry for entry in self.entries if entry.tag is tag]

    @property
    def interpretability(self) -> int:
        return interpretability_index(self.rules)

    def activation_counts(self, features: np.ndarray, tag: Tag = None) -> np.ndarray:
        """Number of selected rules (optionally of one tag) activated by every row"""

        counts = np.zeros(np.asarray(features).shape[0], dtype=int)

        for entry in self.entries:
            if tag is None or entry.tag is tag:
                counts += entry.rule.mask(features)

        return counts

    def union_mask(self, features: np.ndarray) -> np.ndarray:
        return self.activation_counts(features) > 0


def cardinality_bound(n: int, alpha: float, gamma: float) -> float:
    """Largest covering size reachable when every candidate covers more than n^-alpha of the rows"""
    return n ** alpha / (1 - gamma)


def select_covering(classified: ClassifiedRules, ds: Dataset, cfg: SelectionConfig) -> Covering:
    """Select a covering from the significant rules, then from the insignificant ones

    :param classified: Outcome of the significance split on 'ds'
    :param ds: Training data
    :param cfg: Selection parameters
    :return: The covering with the training union coverage
    """

    if classified.empty:
        raise EmptyPoolError()

    def stats(r: Rule) -> RuleStats:
        return classified.stats[r]

    pools = [(Tag.SIGNIFICANT, sorted(classified.significant, key=lambda r: (-stats(r).coverage, r))),
             (Tag.INSIGNIFICANT, sorted(classified.insignificant, key=lambda r: (stats(r).cond_var, r)))]

    covered = np.zeros(ds.n, dtype=bool)
    covered_count, coverage_sum = 0, 0.0
    entries = []
    rejected = 0

    def complete() -> bool:
        if cfg.loop_condition is LoopCondition.SUM:
            return coverage_sum >= 1
        return covered_count == ds.n

    for tag, pool in pools:
        for r in pool:
            if entries and complete():
                break

            activated = r.mask(ds.features)
            support = int(np.count_nonzero(activated))
            overlap = int(np.count_nonzero(activated & covered))

            if overlap <= cfg.gamma * support:
                covered |= activated
                covered_count = int(np.count_nonzero(covered))
                coverage_sum += stats(r).coverage
                entries.append(CoveringEntry(r, tag, stats(r), len(entries), covered_count / ds.n))
            else:
                rejected += 1

    covering = Covering(entries, covered_count / ds.n)
    verbose.info('Selected %d rules (%d rejected), union coverage %.4f'
                 % (len(entries), rejected, covering.union_coverage), select_covering)
    return covering


def redundancy_stats(cov: Covering, ds: Dataset, tag: Optional[Tag] = None) -> Tuple[int, int]:
    """Maximal and minimal number of selected rules activated by a training row inside their union

    :param cov: The covering
    :param ds: Training data
    :param tag: Restrict to the significant or insignificant rules
    :return: A tuple of (M, m)
    """

    counts = cov.activation_counts(ds.features, tag)
    inside = counts[counts > 0]

    if inside.shape[0] == 0:
        raise EmptyUnionError()

    return int(inside.max()), int(inside.min())
