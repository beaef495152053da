"""End-to-end covering pipeline, metrics, studies and reports

'run_pipeline' chains the stages of a fit:
---
    generate   grow the tree ensemble and harvest its rules
    filter     keep the rules with enough coverage and a short enough length
    noise      estimate the noise variance (skipped when supplied)
    classify   split the kept rules into significant and insignificant ones
    select     extract the covering
    fit        compute the cell means
---
Any failure inside a stage surfaces as a PipelineError naming that stage.

The studies repeat the pipeline over seeded runs: fresh synthetic samples ('run_synthetic_study') or seeded
train/test splits of user-supplied datasets ('run_real_study'), and aggregate the per-run reports.

The covreg project
"""

import math
import os
import time
from collections import namedtuple
from contextlib import contextmanager
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from . import conf, verbose
from .dataset import Dataset, friedman_synthetic, load_csv, train_test_split
from .estimator import CoveringEstimator, fit
from .exceptions import CovregError, InvalidConfigError, MissingDatasetError, PipelineError, ZeroVarianceError
from .generators import GeneratorConfig, generate_rules
from .glossary import Fallback, LoopCondition, Method, Tag
from .rules import rule_stats
from .selection import Covering, SelectionConfig, cardinality_bound, redundancy_stats, select_covering
from .significance import (SignificanceConfig, classify_rules, coverage_filter, coverage_threshold,
                           estimate_noise_variance)

METRICS = ['nb_rules', 'interpretability', 'coverage', 'mse', 'mse_star', 'timing']

FitResult = namedtuple('FitResult', ['estimator', 'classified', 'rules_generated'])
RunReport = namedtuple('RunReport', ['run', 'method', 'nb_rules', 'interpretability', 'coverage', 'mse', 'mse_star',
                                     'variable_occurrence', 'timing'])
DatasetSpec = namedtuple('DatasetSpec', ['name', 'path', 'target', 'drop'])
SuitabilityCheck = namedtuple('SuitabilityCheck', ['name', 'value', 'threshold', 'passed', 'enforced'])


class CoveringSettings:
    """Every parameter of a fit

    :param generator: Rule generator configuration
    :param alpha: Coverage exponent in (0, 1/2)
    :param gamma: Overlap tolerance of the selection, in (0, 1)
    :param l_max: Maximal rule length
    :param sigma2: Noise variance; estimated from the rules if None
    :param epsilon: Bound of the insignificance test; beta_n * s_n if None
    :param loop_condition: Stopping test of the selection
    :param fallback: Prediction outside the observed cells
    """

    def __init__(self, generator: GeneratorConfig = None, alpha: float = 0.49, gamma: float = 0.9, l_max: int = 3,
                 sigma2: float = None, epsilon: float = None, loop_condition: LoopCondition = LoopCondition.UNION,
                 fallback: Fallback = Fallback.ZERO):
        self.generator = generator if generator is not None else GeneratorConfig()
        self.alpha = alpha
        self.gamma = gamma
        self.l_max = l_max
        self.sigma2 = sigma2
        self.epsilon = epsilon
        self.loop_condition = LoopCondition(loop_condition)
        self.fallback = Fallback(fallback)

        # Parameter errors surface here rather than inside a stage
        self.selection = SelectionConfig(gamma, self.loop_condition)
        SignificanceConfig(alpha, l_max, 1.0, epsilon if epsilon is not None else 0.0, sigma2)

    def __repr__(self):
        return 'CoveringSettings(generator=%r, alpha=%r, gamma=%r, l_max=%r, sigma2=%r, epsilon=%r)' % (
            self.generator, self.alpha, self.gamma, self.l_max, self.sigma2, self.epsilon)

    @classmethod
    def from_conf(cls, tree: dict = None) -> 'CoveringSettings':
        """Build the settings from a configuration tree, the package defaults if None"""

        tree = tree if tree is not None else conf.defaults()
        covering = conf.resolve('covering', tree)

        try:
            return cls(GeneratorConfig.from_conf(conf.resolve('generator', tree)), covering['alpha'],
                       covering['gamma'], covering['l_max'], covering.get('sigma2'), covering.get('epsilon'),
                       covering.get('loop_condition', LoopCondition.UNION.value),
                       conf.resolve('estimator.fallback', tree))
        except ValueError as error:
            raise InvalidConfigError('configuration', str(error), 'a known method, loop condition or fallback')

    def replace(self, **changes) -> 'CoveringSettings':
        fields = {'generator': self.generator, 'alpha': self.alpha, 'gamma': self.gamma, 'l_max': self.l_max,
                  'sigma2': self.sigma2, 'epsilon': self.epsilon, 'loop_condition': self.loop_condition,
                  'fallback': self.fallback}
        return CoveringSettings(**{**fields, **changes})

    def with_seed(self, seed: int) -> 'CoveringSettings':
        return self.replace(generator=self.generator.replace(seed=seed))

    def with_method(self, method: Method) -> 'CoveringSettings':
        return self.replace(generator=self.generator.replace(method=method))


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except CovregError as error:
        raise PipelineError(name, error) from error


def run_pipeline(ds: Dataset, settings: CoveringSettings) -> FitResult:
    """Fit a covering estimator on a training set

    :param ds: Training data
    :param settings: Fit parameters
    :return: The estimator with the intermediate results
    """

    significance = SignificanceConfig.derive(ds, settings.alpha, settings.l_max, settings.sigma2, settings.epsilon)

    with _stage('generate'):
        rules = generate_rules(ds, settings.generator)

    with _stage('filter'):
        kept, discarded = coverage_filter(rules, ds, settings.alpha, settings.l_max)

    with _stage('noise'):
        sigma2_hat = settings.sigma2 if settings.sigma2 is not None else estimate_noise_variance(kept, ds)

    with _stage('classify'):
        classified = classify_rules(kept, ds, significance.with_sigma2(sigma2_hat), discarded)

    with _stage('select'):
        covering = select_covering(classified, ds, settings.selection)

    metadata = {'n': ds.n, 'd': ds.d, 'gamma': settings.gamma, 'loop_condition': settings.loop_condition.value,
                'generator': settings.generator.export(ds.d), 'rules_generated': len(rules),
                'rules_kept': len(kept), **classified.cfg.export()}

    with _stage('fit'):
        estimator = fit(covering, ds, settings.fallback, metadata)

    verbose.success('%d rules, interpretability %d, union coverage %.4f, sigma2 %.6g'
                    % (len(covering), covering.interpretability, covering.union_coverage, sigma2_hat), run_pipeline)
    return FitResult(estimator, classified, len(rules))


def mse(est: CoveringEstimator, test: Dataset) -> float:
    """Mean squared prediction error divided by the test target variance"""

    variance = float(np.var(test.target))

    if variance == 0:
        raise ZeroVarianceError('the test target')

    return float(np.mean((test.target - est.predict(test.features)) ** 2)) / variance


def mse_star(est: CoveringEstimator, features: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared deviation from the regression function divided by its variance"""

    truth = np.asarray(truth, dtype=float)
    variance = float(np.var(truth))

    if variance == 0:
        raise ZeroVarianceError('the regression function')

    return float(np.mean((truth - est.predict(features)) ** 2)) / variance


def mse_decomposition(est: CoveringEstimator, test: Dataset) -> Dict[str, float]:
    """Split the normalised error between the test rows inside and outside the union of the covering

    The two parts add up to 'mse' up to rounding.
    """

    variance = float(np.var(test.target))

    if variance == 0:
        raise ZeroVarianceError('the test target')

    squared = (test.target - est.predict(test.features)) ** 2
    inside = est.covering.union_mask(test.features)
    return {'covered': float(np.sum(squared[inside])) / test.n / variance,
            'uncovered': float(np.sum(squared[~inside])) / test.n / variance,
            'uncovered_share': float(np.mean(~inside)),
            'total': float(np.mean(squared)) / variance}


def variable_occurrence(cov: Covering, feature_names: Sequence[str]) -> Dict[str, bool]:
    used = {feature for r in cov.rules for feature in r.features}
    return {name: j in used for j, name in enumerate(feature_names)}


def run_report(est: CoveringEstimator, test: Dataset, truth: np.ndarray = None, run: int = 0,
               timing: float = None) -> RunReport:
    return RunReport(run=run,
                     method=est.metadata.get('generator', {}).get('method'),
                     nb_rules=len(est.covering),
                     interpretability=est.covering.interpretability,
                     coverage=est.covering.union_coverage,
                     mse=mse(est, test),
                     mse_star=mse_star(est, test.features, truth) if truth is not None else None,
                     variable_occurrence=variable_occurrence(est.covering, est.feature_names),
                     timing=timing)


def aggregate(values: Iterable[float]) -> Dict[str, float]:
    """Mean, standard deviation, extremes and quartiles of a metric over runs"""

    values = np.asarray(list(values), dtype=float)
    q25, q50, q75 = np.percentile(values, [25, 50, 75])
    return {'mean': float(np.mean(values)), 'std': float(np.std(values)), 'min': float(np.min(values)),
            'q25': float(q25), 'q50': float(q50), 'q75': float(q75), 'max': float(np.max(values))}


def summarize(reports: Sequence[RunReport], timing: bool = False) -> dict:
    """Aggregate per-run reports into a JSON-ready study report

    :param reports: Reports sorted by run index
    :param timing: Keep run times; they vary between identical invocations
    """

    metrics = [metric for metric in METRICS if metric != 'timing' or timing]
    summary = {metric: aggregate(getattr(report, metric) for report in reports)
               for metric in metrics if all(getattr(report, metric) is not None for report in reports)}
    names = list(reports[0].variable_occurrence) if reports else []
    occurrence = {name: float(np.mean([report.variable_occurrence[name] for report in reports])) for name in names}

    runs = []

    for report in reports:
        row = report._asdict()

        if not timing:
            del row['timing']

        runs.append(row)

    return {'aggregate': summary, 'variable_occurrence': occurrence, 'runs': runs}


def runs_frame(reports: Sequence[RunReport], timing: bool = False) -> pd.DataFrame:
    """One row per run with a column per metric and an 'occurs_<feature>' column per feature, for plotting"""

    rows = []

    for report in reports:
        row = {key: value for key, value in report._asdict().items() if key != 'variable_occurrence'}
        row.update({'occurs_%s' % name: int(used) for name, used in report.variable_occurrence.items()})

        if not timing:
            del row['timing']

        rows.append(row)

    return pd.DataFrame(rows)


def _run_seeds(seed: int, runs: int) -> List[List[int]]:
    return [[int(value) for value in child.generate_state(3)] for child in np.random.SeedSequence(seed).spawn(runs)]


def _synthetic_run(run: int, seeds: List[int], n: int, d: int, test_size: int,
                   settings: CoveringSettings) -> RunReport:
    started = time.perf_counter()
    train, _, noise_sd = friedman_synthetic(n, d, seeds[0])
    test, truth, _ = friedman_synthetic(test_size, d, seeds[1], noise_sd=noise_sd)
    result = run_pipeline(train, settings.with_seed(seeds[2]))
    return run_report(result.estimator, test, truth, run, time.perf_counter() - started)


def run_synthetic_study(runs: int, n: int, d: int, settings: CoveringSettings, seed: int = 0,
                        test_size: int = 10000) -> List[RunReport]:
    """Repeat the pipeline on fresh samples of the synthetic model

    The test sample of each run is drawn with the noise level of its training sample.

    :return: Per-run reports, sorted by run index
    """

    if runs < 1 or n < 2 or test_size < 2:
        raise InvalidConfigError('runs, n, test_size', (runs, n, test_size), 'runs >= 1, n >= 2, test_size >= 2')

    verbose.info('Synthetic study: %d runs, n=%d, d=%d, %d test points' % (runs, n, d, test_size), run_synthetic_study)
    return Parallel(n_jobs=conf.threads(), prefer='threads')(
        delayed(_synthetic_run)(run, seeds, n, d, test_size, settings)
        for run, seeds in enumerate(_run_seeds(seed, runs)))


def _real_run(run: int, seeds: List[int], ds: Dataset, train_fraction: float,
              settings: CoveringSettings) -> RunReport:
    started = time.perf_counter()
    train, test = train_test_split(ds, train_fraction, seeds[0])
    result = run_pipeline(train, settings.with_seed(seeds[1]))
    return run_report(result.estimator, test, None, run, time.perf_counter() - started)


def run_real_study(datasets: Sequence[DatasetSpec], executions: int, settings: CoveringSettings,
                   methods: Sequence[Method] = (Method.RF, Method.GB, Method.SGB), train_fraction: float = 0.7,
                   seed: int = 0) -> Dict[str, Dict[str, List[RunReport]]]:
    """Repeat the pipeline over seeded train/test splits of every dataset, with every generator

    Execution k uses the same split for every generator.

    :return: Per-run reports keyed by dataset name, then by generator method
    """

    missing = [spec.path for spec in datasets if not os.path.isfile(spec.path)]

    if missing:
        raise MissingDatasetError(missing[0])

    seeds = _run_seeds(seed, executions)
    results = {}

    for spec in datasets:
        ds = load_csv(spec.path, spec.target, spec.drop)
        results[spec.name] = {}

        for method in methods:
            verbose.info('%s with %s: %d executions' % (spec.name, Method(method).value, executions), run_real_study)
            results[spec.name][Method(method).value] = Parallel(n_jobs=conf.threads(), prefer='threads')(
                delayed(_real_run)(run, run_seeds, ds, train_fraction, settings.with_method(Method(method)))
                for run, run_seeds in enumerate(seeds))

    return results


def real_study_table(results: Dict[str, Dict[str, List[RunReport]]]) -> pd.DataFrame:
    """Means of the number of rules, coverage, interpretability and MSE per dataset and generator"""

    rows = []

    for name, by_method in results.items():
        for method, reports in by_method.items():
            rows.append({'dataset': name, 'generator': method,
                         'nb_rules': float(np.mean([report.nb_rules for report in reports])),
                         'coverage': float(np.mean([report.coverage for report in reports])),
                         'interpretability': float(np.mean([report.interpretability for report in reports])),
                         'mse': float(np.mean([report.mse for report in reports]))})

    return pd.DataFrame(rows, columns=['dataset', 'generator', 'nb_rules', 'coverage', 'interpretability', 'mse'])


def mean_deviation_ratio(cond_mean: Optional[float], grand_mean: float) -> Optional[float]:
    if cond_mean is None or grand_mean == 0:
        return None
    return (cond_mean - grand_mean) / abs(grand_mean)


class ExplainReport:
    """Selected rules with their statistics, and a summary of the variables they involve

    :param rules: One row per rule: name, conditions, tag, coverage, prediction, std and deviation ratio
    :param variables: Descriptive statistics of the target and of the involved features, None without data
    """

    def __init__(self, rules: pd.DataFrame, variables: Optional[pd.DataFrame]):
        self.rules = rules
        self.variables = variables

    @property
    def all_significant(self) -> bool:
        return bool((self.rules['tag'] == Tag.SIGNIFICANT.value).all())

    def as_dict(self) -> dict:
        rules = self.rules.astype(object).where(self.rules.notna(), None)
        return {'rules': rules.to_dict(orient='records'),
                'variables': self.variables.to_dict() if self.variables is not None else None,
                'all_significant': self.all_significant}

    def to_text(self) -> str:
        table = self.rules.copy()
        table['coverage'] = table['coverage'].map('{:.2f}'.format)
        table['prediction'] = table['prediction'].map(lambda value: '-' if pd.isna(value) else '%.2f' % value)
        table['std'] = table['std'].map(lambda value: '-' if pd.isna(value) else '%.2f' % value)
        table['delta'] = table['delta'].map(lambda value: '-' if pd.isna(value) else '%.1f' % value)
        lines = [table.to_string(index=False)]

        if self.all_significant:
            lines.append('All rules are significant.')

        if self.variables is not None:
            lines.extend(['', self.variables.to_string(float_format='%.2f')])

        return '\n'.join(lines) + '\n'


def _rule_rows(cov: Covering, stats: list, grand_mean: float, feature_names: Sequence[str]) -> pd.DataFrame:
    rows = [{'rule': 'R%d' % (k + 1),
             'conditions': entry.rule.describe(feature_names),
             'tag': entry.tag.value,
             'coverage': rule.coverage,
             'prediction': rule.cond_mean,
             'std': rule.cond_std,
             'delta': mean_deviation_ratio(rule.cond_mean, grand_mean)} for k, (entry, rule) in enumerate(zip(cov, stats))]
    return pd.DataFrame(rows, columns=['rule', 'conditions', 'tag', 'coverage', 'prediction', 'std', 'delta'])


def variable_summary(cov: Covering, ds: Dataset) -> pd.DataFrame:
    """Descriptive statistics of the target and of every feature involved in the covering"""

    used = sorted({feature for r in cov.rules for feature in r.features})
    frame = pd.DataFrame({ds.target_name: ds.target,
                          **{ds.feature_names[j]: ds.features[:, j] for j in used}})
    return frame.describe().drop(index='count')


def explain_report(cov: Covering, ds: Dataset) -> ExplainReport:
    """Rule table with statistics recomputed on 'ds', and the variable summary"""

    stats = [rule_stats(r, ds) for r in cov.rules]
    return ExplainReport(_rule_rows(cov, stats, float(np.mean(ds.target)), ds.feature_names),
                         variable_summary(cov, ds))


def explain_model(est: CoveringEstimator) -> ExplainReport:
    """Rule table from the training statistics stored with the estimator"""

    return ExplainReport(_rule_rows(est.covering, [entry.stats for entry in est.covering], est.stats.mean,
                                    est.feature_names), None)


def suitability_report(est: CoveringEstimator, ds: Dataset, uncovered_tolerance: float = 0.05) -> List[SuitabilityCheck]:
    """Empirical checks of the conditions making the covering suitable, on the training data

    Enforced: every rule covers more than n^-alpha of the rows; every rule passes the test of its tag; the
    covering is no larger than n^alpha / (1 - gamma). Advisory: the uncovered share stays below
    'uncovered_tolerance'; the redundancy ratio M/m of each tag stays below its bound.
    """

    metadata = est.metadata

    try:
        alpha, gamma = metadata['alpha'], metadata['gamma']
        beta_n, epsilon_n, sigma2_hat = metadata['beta_n'], metadata['epsilon_n'], metadata['sigma2_hat']
    except KeyError as error:
        raise InvalidConfigError('model metadata', str(error), 'alpha, gamma, beta_n, epsilon_n and sigma2_hat')

    if ds.d != est.d:
        raise InvalidConfigError('training data', ds.d, '%d features' % est.d)

    cov = est.covering
    stats = [rule_stats(r, ds) for r in cov.rules]
    grand_mean = float(np.mean(ds.target))
    checks = []

    threshold = coverage_threshold(ds.n, alpha)
    smallest = min(rule.coverage for rule in stats)
    checks.append(SuitabilityCheck('H1', smallest, threshold, smallest > threshold, True))

    uncovered = float(np.mean(~cov.union_mask(ds.features)))
    checks.append(SuitabilityCheck('H2', uncovered, uncovered_tolerance, uncovered <= uncovered_tolerance, False))

    violations = 0

    for entry, rule in zip(cov, stats):
        if not rule.defined:
            violations += 1
            continue

        excess = math.sqrt(max(rule.cond_var - sigma2_hat, 0.0))
        significant = beta_n * abs(rule.cond_mean - grand_mean) >= excess

        if entry.tag is Tag.SIGNIFICANT and not significant:
            violations += 1
        elif entry.tag is Tag.INSIGNIFICANT and (significant or epsilon_n < excess):
            violations += 1

    checks.append(SuitabilityCheck('H3', violations, 0, violations == 0, True))

    for tag, scale in ((Tag.SIGNIFICANT, beta_n), (Tag.INSIGNIFICANT, epsilon_n)):
        if not cov.tagged(tag):
            continue

        largest, smallest_count = redundancy_stats(cov, ds, tag)
        bound = min(scale ** -2 if scale > 0 else math.inf, ds.n ** (0.5 - alpha))
        ratio = largest / smallest_count
        checks.append(SuitabilityCheck('H4-%s' % tag.value, ratio, bound, ratio <= bound, False))

    limit = cardinality_bound(ds.n, alpha, gamma)
    checks.append(SuitabilityCheck('cardinality', len(cov), limit, len(cov) <= limit, True))
    return checks


def failed_checks(checks: Sequence[SuitabilityCheck], strict: bool = False) -> List[str]:
    """Names of the failed checks that count; advisory checks count only when 'strict'"""
    return [check.name for check in checks if not check.passed and (check.enforced or strict)]
