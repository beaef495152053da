"""Coverage filtering, noise variance estimation and the significance split

A rule r is kept when its coverage exceeds n^-alpha and its length is at most l_max. Kept rules are then split with
beta_n = n^(alpha/2 - 1/4) and epsilon_n = beta_n * s_n:
---
    significant    beta_n * |E_n[Y | X in r] - E_n[Y]| >= sqrt((V_n(Y | X in r) - sigma2)+)
    insignificant  not significant and epsilon_n >= sqrt((V_n(Y | X in r) - sigma2)+)
---
Rules passing neither test are discarded with reason 'neither'. The noise variance sigma2 is estimated by the
smallest conditional variance among the kept rules unless it is supplied.

The covreg project
"""

import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import verbose
from .dataset import Dataset, target_stats
from .exceptions import InvalidConfigError, NoRulesError
from .glossary import Reason, Tag
from .rules import Rule, RuleStats, export_rule, rule_stats

Discard = Tuple[Rule, Reason]


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 0.5:
        raise InvalidConfigError('alpha', alpha, 'a real in (0, 0.5)')


def coverage_threshold(n: int, alpha: float) -> float:
    return n ** -alpha


def beta(n: int, alpha: float) -> float:
    return n ** (alpha / 2 - 0.25)


class SignificanceConfig:
    """Thresholds of the significance split

    :param alpha: Coverage exponent in (0, 1/2)
    :param l_max: Maximal rule length
    :param beta_n: Scale of the significance test
    :param epsilon_n: Bound of the insignificance test
    :param sigma2_hat: Noise variance, None until estimated
    """

    def __init__(self, alpha: float, l_max: int, beta_n: float, epsilon_n: float, sigma2_hat: float = None):
        _check_alpha(alpha)

        if not isinstance(l_max, int) or l_max < 1:
            raise InvalidConfigError('l_max', l_max, 'an integer >= 1')

        if sigma2_hat is not None and not sigma2_hat >= 0:
            raise InvalidConfigError('sigma2', sigma2_hat, 'a real >= 0')

        if not epsilon_n >= 0:
            raise InvalidConfigError('epsilon', epsilon_n, 'a real >= 0')

        self.alpha = alpha
        self.l_max = l_max
        self.beta_n = beta_n
        self.epsilon_n = epsilon_n
        self.sigma2_hat = sigma2_hat

    def __repr__(self):
        return 'SignificanceConfig(alpha=%r, l_max=%r, beta_n=%r, epsilon_n=%r, sigma2_hat=%r)' % (
            self.alpha, self.l_max, self.beta_n, self.epsilon_n, self.sigma2_hat)

    @classmethod
    def derive(cls, ds: Dataset, alpha: float, l_max: int, sigma2_hat: float = None,
               epsilon_n: float = None) -> 'SignificanceConfig':
        """Derive beta_n from the sample size and epsilon_n = beta_n * s_n from the target standard deviation"""

        _check_alpha(alpha)
        beta_n = beta(ds.n, alpha)
        epsilon_n = epsilon_n if epsilon_n is not None else beta_n * target_stats(ds).std
        return cls(alpha, l_max, beta_n, epsilon_n, sigma2_hat)

    def with_sigma2(self, sigma2_hat: float) -> 'SignificanceConfig':
        return SignificanceConfig(self.alpha, self.l_max, self.beta_n, self.epsilon_n, sigma2_hat)

    def export(self) -> dict:
        return {'alpha': self.alpha, 'l_max': self.l_max, 'beta_n': self.beta_n, 'epsilon_n': self.epsilon_n,
                'sigma2_hat': self.sigma2_hat}


class ClassifiedRules:
    """Outcome of the significance split

    'significant' and 'insignificant' keep the input order. 'stats' holds the statistics of every rule seen,
    discarded ones included, for the diagnostics report.
    """

    def __init__(self, significant: List[Rule], insignificant: List[Rule], discarded: List[Discard],
                 stats: Dict[Rule, RuleStats], grand_mean: float, cfg: SignificanceConfig):
        self.significant = significant
        self.insignificant = insignificant
        self.discarded = discarded
        self.stats = stats
        self.grand_mean = grand_mean
        self.cfg = cfg
        self._tags = {**{r: Tag.INSIGNIFICANT for r in insignificant}, **{r: Tag.SIGNIFICANT for r in significant}}

    def __repr__(self):
        return 'ClassifiedRules(significant=%d, insignificant=%d, discarded=%d)' % (
            len(self.significant), len(self.insignificant), len(self.discarded))

    @property
    def empty(self) -> bool:
        return not self.significant and not self.insignificant

    def tag(self, r: Rule) -> Tag:
        return self._tags.get(r, Tag.DISCARDED)


def coverage_filter(rules: Iterable[Rule], ds: Dataset, alpha: float, l_max: int) -> Tuple[List[Rule], List[Discard]]:
    """Keep the rules with coverage strictly above n^-alpha and length at most l_max

    :return: A tuple of (kept rules in input order, discarded rules with their reason)
    """

    _check_alpha(alpha)
    threshold = coverage_threshold(ds.n, alpha)
    kept, discarded = [], []

    for r in rules:
        if r.length > l_max:
            discarded.append((r, Reason.LENGTH))
        elif not rule_stats(r, ds).coverage > threshold:
            discarded.append((r, Reason.COVERAGE))
        else:
            kept.append(r)

    verbose.info('Coverage threshold %.6g, length cap %d: kept %d rules, discarded %d'
                 % (threshold, l_max, len(kept), len(discarded)), coverage_filter)
    return kept, discarded


def estimate_noise_variance(rules: Iterable[Rule], ds: Dataset) -> float:
    """Smallest conditional variance among the rules activated by at least two rows

    :raise NoRulesError: No rule qualifies; the variance has to be supplied instead
    """

    variances = [stats.cond_var for stats in (rule_stats(r, ds) for r in rules) if stats.support_count >= 2]

    if not variances:
        raise NoRulesError()

    return float(min(variances))


def _excess_std(stats: RuleStats, sigma2_hat: float) -> float:
    return math.sqrt(max(stats.cond_var - sigma2_hat, 0.0))


def classify_rules(rules: Iterable[Rule], ds: Dataset, cfg: SignificanceConfig,
                   discarded: Sequence[Discard] = ()) -> ClassifiedRules:
    """Split coverage-filtered rules into significant and insignificant ones

    :param rules: Rules which passed 'coverage_filter'
    :param ds: Training data
    :param cfg: Thresholds, with 'sigma2_hat' set
    :param discarded: Earlier discards to carry into the result
    """

    if cfg.sigma2_hat is None:
        raise InvalidConfigError('sigma2', None, 'an estimated or supplied noise variance')

    grand_mean = float(np.mean(ds.target))
    significant, insignificant, rejected = [], [], list(discarded)
    stats = {r: rule_stats(r, ds) for r, _ in rejected}

    for r in rules:
        stats[r] = rule_stats(r, ds)

        if not stats[r].defined:
            rejected.append((r, Reason.COVERAGE))
            continue

        excess = _excess_std(stats[r], cfg.sigma2_hat)

        if cfg.beta_n * abs(stats[r].cond_mean - grand_mean) >= excess:
            significant.append(r)
        elif cfg.epsilon_n >= excess:
            insignificant.append(r)
        else:
            rejected.append((r, Reason.NEITHER))

    verbose.info('beta_n %.6g, epsilon_n %.6g, sigma2 %.6g: %d significant, %d insignificant, %d discarded'
                 % (cfg.beta_n, cfg.epsilon_n, cfg.sigma2_hat, len(significant), len(insignificant), len(rejected)),
                 classify_rules)
    return ClassifiedRules(significant, insignificant, rejected, stats, grand_mean, cfg)


def significance_report(classified: ClassifiedRules, feature_names: Sequence[str]) -> List[dict]:
    """One JSON-ready row per rule: conditions, coverage, mean, variance, class and discard reason"""

    rows = []

    def row(r: Rule, tag: Tag, reason: Optional[Reason]) -> dict:
        stats = classified.stats[r]
        return {'conditions': export_rule(r, feature_names), 'length': r.length, 'coverage': stats.coverage,
                'mean': stats.cond_mean, 'var': stats.cond_var, 'class': tag.value,
                'reason': reason.value if reason is not None else None}

    rows.extend(row(r, Tag.SIGNIFICANT, None) for r in classified.significant)
    rows.extend(row(r, Tag.INSIGNIFICANT, None) for r in classified.insignificant)
    rows.extend(row(r, Tag.DISCARDED, reason) for r, reason in classified.discarded)
    return rows
