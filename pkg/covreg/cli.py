"""Command-line interface

Usage example:
---
covreg fit --data ozone.csv --target ozone --model ozone.json
covreg predict --model ozone.json --data ozone.csv --out predictions.csv
covreg explain --model ozone.json --data ozone.csv --target ozone
covreg diagnose --model ozone.json --data ozone.csv --target ozone
covreg bench-synthetic --runs 10 --out synthetic.json --csv synthetic.csv
covreg bench-real --data ozone.csv --target ozone --data mpg.csv --target mpg --out real.json
---

Parameters come from the package defaults, overlaid with '--config FILE', overlaid with the flags given on the
command line. Every command returns an exit code: 0 on success, 2 on input errors, 3 on pipeline errors and 4 when
'diagnose' finds a failed check.

The covreg project
"""

import argparse
import os
import sys
from typing import List, Sequence

import pandas as pd

from . import __version__, conf, store, verbose
from .dataset import load_csv, load_features
from .decorators import COMMANDS, command
from .exceptions import DimensionMismatchError, InvalidConfigError, SchemaMismatchError, SuitabilityError
from .experiments import (CoveringSettings, DatasetSpec, explain_model, explain_report, failed_checks,
                          real_study_table, run_pipeline, run_real_study, run_synthetic_study, runs_frame,
                          suitability_report, summarize)
from .glossary import Fallback, Method
from .significance import significance_report


def _tree(args: argparse.Namespace) -> dict:
    """Configuration tree: defaults < --config file < flags"""

    tree = conf.defaults()

    if args.config is not None:
        tree = conf.merge(tree, conf.load(args.config))

    flags = {'generator': {'method': getattr(args, 'generator', None),
                           'tree_size': getattr(args, 'tree_size', None),
                           'max_rules': getattr(args, 'max_rules', None),
                           'n_trees': getattr(args, 'n_trees', None),
                           'seed': getattr(args, 'seed', None)},
             'covering': {'alpha': getattr(args, 'alpha', None),
                          'gamma': getattr(args, 'gamma', None),
                          'l_max': getattr(args, 'l_max', None),
                          'sigma2': getattr(args, 'sigma2', None)},
             'estimator': {'fallback': getattr(args, 'fallback', None)},
             'synthetic': {'runs': getattr(args, 'runs', None),
                           'n': getattr(args, 'n', None),
                           'd': getattr(args, 'd', None),
                           'test_size': getattr(args, 'test_size', None)},
             'real': {'executions': getattr(args, 'runs', None)}}

    return conf.merge(tree, flags)


def _emit(text: str, path: str = None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, 'w') as file:
            file.write(text)


def _diagnostics_path(model_path: str) -> str:
    return os.path.splitext(model_path)[0] + '.diagnostics.json'


@command('fit')
def cmd_fit(args: argparse.Namespace) -> None:
    ds = load_csv(args.data, args.target, args.drop)
    result = run_pipeline(ds, CoveringSettings.from_conf(_tree(args)))
    est = result.estimator

    store.save_model(est, args.model)
    store.write_json({'metadata': est.metadata, 'rules': significance_report(result.classified, ds.feature_names)},
                     args.out if args.out is not None else _diagnostics_path(args.model))

    sys.stdout.write('nb_rules          %d\n' % len(est.covering))
    sys.stdout.write('interpretability  %d\n' % est.covering.interpretability)
    sys.stdout.write('coverage          %.4f\n' % est.covering.union_coverage)
    sys.stdout.write('sigma2            %.6g\n' % est.metadata['sigma2_hat'])


@command('predict')
def cmd_predict(args: argparse.Namespace) -> None:
    est = store.load_model(args.model)
    features, names = load_features(args.data, drop=[args.target or est.target_name] + list(args.drop))

    if len(names) != est.d:
        raise DimensionMismatchError(est.d, len(names))

    if tuple(names) != est.feature_names:
        raise SchemaMismatchError(est.feature_names, names)

    frame = pd.DataFrame({'prediction': est.predict(features)})
    _emit(frame.to_csv(index=False), args.out)


@command('explain')
def cmd_explain(args: argparse.Namespace) -> None:
    est = store.load_model(args.model)

    if args.data is not None:
        ds = load_csv(args.data, args.target or est.target_name, args.drop)

        if ds.feature_names != est.feature_names:
            raise SchemaMismatchError(est.feature_names, ds.feature_names)

        report = explain_report(est.covering, ds)
    else:
        report = explain_model(est)

    sys.stdout.write(report.to_text())

    if args.out is not None:
        store.write_json(report.as_dict(), args.out)


@command('diagnose')
def cmd_diagnose(args: argparse.Namespace) -> None:
    est = store.load_model(args.model)
    ds = load_csv(args.data, args.target or est.target_name, args.drop)

    if ds.feature_names != est.feature_names:
        raise SchemaMismatchError(est.feature_names, ds.feature_names)

    checks = suitability_report(est, ds, conf.resolve('diagnose.uncovered_tolerance', _tree(args)))
    frame = pd.DataFrame([check._asdict() for check in checks])
    sys.stdout.write(frame.to_string(index=False) + '\n')

    if args.out is not None:
        store.write_json([check._asdict() for check in checks], args.out)

    failed = failed_checks(checks, args.strict)

    if failed and args.soft_fail:
        verbose.warn('Failed checks: %s' % ', '.join(failed), cmd_diagnose)
    elif failed:
        raise SuitabilityError(failed)


@command('bench-synthetic')
def cmd_bench_synthetic(args: argparse.Namespace) -> None:
    tree = _tree(args)
    synthetic = conf.resolve('synthetic', tree)
    reports = run_synthetic_study(synthetic['runs'], synthetic['n'], synthetic['d'], CoveringSettings.from_conf(tree),
                                  conf.resolve('generator.seed', tree), synthetic['test_size'])
    summary = summarize(reports, args.timing)

    sys.stdout.write(pd.DataFrame(summary['aggregate']).T.to_string(float_format='%.4f') + '\n')

    if args.out is not None:
        store.write_json(summary, args.out)

    if args.csv is not None:
        runs_frame(reports, args.timing).to_csv(args.csv, index=False)


def _dataset_specs(args: argparse.Namespace, tree: dict) -> List[DatasetSpec]:
    if args.data:
        targets = args.target or []

        if len(targets) != len(args.data):
            raise InvalidConfigError('--target', targets, 'one target per --data file')

        return [DatasetSpec(os.path.splitext(os.path.basename(path))[0], path, target, ())
                for path, target in zip(args.data, targets)]

    datasets = conf.resolve('real', tree).get('datasets') or []

    if not datasets:
        raise InvalidConfigError('real.datasets', datasets, 'at least one dataset, or --data and --target')

    return [DatasetSpec(item.get('name', item['path']), item['path'], item['target'], tuple(item.get('drop') or ()))
            for item in datasets]


@command('bench-real')
def cmd_bench_real(args: argparse.Namespace) -> None:
    tree = _tree(args)
    methods = [Method(args.generator)] if args.generator is not None else list(Method)
    results = run_real_study(_dataset_specs(args, tree), conf.resolve('real.executions', tree),
                             CoveringSettings.from_conf(tree), methods, conf.resolve('real.train_fraction', tree),
                             conf.resolve('generator.seed', tree))

    sys.stdout.write(real_study_table(results).to_string(index=False, float_format='%.2f') + '\n')

    if args.out is not None:
        store.write_json({name: {method: summarize(reports, args.timing) for method, reports in by_method.items()}
                          for name, by_method in results.items()}, args.out)

    if args.csv is not None:
        frames = [runs_frame(reports, args.timing).assign(dataset=name)
                  for name, by_method in results.items() for reports in by_method.values()]
        pd.concat(frames, ignore_index=True).to_csv(args.csv, index=False)


def _covering_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--generator', choices=[method.value for method in Method])
    parser.add_argument('--alpha', type=float)
    parser.add_argument('--gamma', type=float)
    parser.add_argument('--l-max', dest='l_max', type=int)
    parser.add_argument('--tree-size', dest='tree_size', type=int)
    parser.add_argument('--max-rules', dest='max_rules', type=int)
    parser.add_argument('--n-trees', dest='n_trees', type=int)
    parser.add_argument('--sigma2', type=float)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--fallback', choices=[fallback.value for fallback in Fallback])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='covreg', description='Regression on data-dependent coverings of rules')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='YAML or JSON file overriding the default parameters')
    common.add_argument('--verbose', action='store_true')
    common.add_argument('--out')
    commands = parser.add_subparsers(dest='command', required=True)

    fit = commands.add_parser('fit', parents=[common], help='fit a covering estimator and save it')
    fit.add_argument('--data', required=True)
    fit.add_argument('--target', required=True)
    fit.add_argument('--model', required=True)
    fit.add_argument('--drop', action='append', default=[])
    _covering_flags(fit)

    predict = commands.add_parser('predict', parents=[common], help='predict the rows of a CSV file')
    predict.add_argument('--model', required=True)
    predict.add_argument('--data', required=True)
    predict.add_argument('--target', help='column to ignore, the training target by default')
    predict.add_argument('--drop', action='append', default=[])

    explain = commands.add_parser('explain', parents=[common], help='summarize the rules of a model')
    explain.add_argument('--model', required=True)
    explain.add_argument('--data')
    explain.add_argument('--target')
    explain.add_argument('--drop', action='append', default=[])

    diagnose = commands.add_parser('diagnose', parents=[common], help='check the suitability of a model')
    diagnose.add_argument('--model', required=True)
    diagnose.add_argument('--data', required=True)
    diagnose.add_argument('--target')
    diagnose.add_argument('--drop', action='append', default=[])
    diagnose.add_argument('--strict', action='store_true', help='count the advisory checks as failures')
    diagnose.add_argument('--soft-fail', dest='soft_fail', action='store_true', help='exit with 0 on failed checks')

    synthetic = commands.add_parser('bench-synthetic', parents=[common], help='Monte-Carlo study on synthetic data')
    synthetic.add_argument('--runs', type=int)
    synthetic.add_argument('--n', type=int)
    synthetic.add_argument('--d', type=int)
    synthetic.add_argument('--test-size', dest='test_size', type=int)
    synthetic.add_argument('--csv', help='per-run CSV output')
    synthetic.add_argument('--timing', action='store_true', help='include run times in the outputs')
    _covering_flags(synthetic)

    real = commands.add_parser('bench-real', parents=[common], help='repeated train/test study on real datasets')
    real.add_argument('--data', action='append')
    real.add_argument('--target', action='append')
    real.add_argument('--runs', type=int)
    real.add_argument('--csv', help='per-run CSV output')
    real.add_argument('--timing', action='store_true', help='include run times in the outputs')
    _covering_flags(real)

    return parser


def main(argv: Sequence[str] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.verbose:
        verbose.verbose(True)

    return COMMANDS[args.command](args)
