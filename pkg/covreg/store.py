"""JSON persistence of coverings, fitted estimators and reports

A model file holds everything 'predict' needs: the feature names, the covering with its tags and statistics, and the
cell table. Floats are written with their shortest round-tripping representation, so a reloaded model predicts
bit-for-bit what the in-memory estimator predicted. Model files carry no timestamp; fitting twice with the same
inputs and seed yields the same bytes.

The covreg project
"""

import json
from typing import Any

from .dataset import TargetStats
from .estimator import ActivationSignature, Cell, CoveringEstimator
from .exceptions import CovregError, ModelFileError
from .glossary import Fallback, Tag
from .rules import RuleStats, export_rule, import_rule
from .selection import Covering, CoveringEntry

MODEL_FORMAT = 'covreg-model'
MODEL_VERSION = 1


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + '\n'


def write_json(obj: Any, path: str) -> None:
    with open(path, 'w') as file:
        file.write(dumps(obj))


def export_covering(cov: Covering, feature_names) -> dict:
    return {'union_coverage': cov.union_coverage,
            'rules': [{'conditions': export_rule(entry.rule, feature_names),
                       'length': entry.rule.length,
                       'tag': entry.tag.value,
                       'acceptance_index': entry.acceptance_index,
                       'coverage_at_acceptance': entry.coverage_at_acceptance,
                       'stats': entry.stats._asdict()} for entry in cov]}


def import_covering(tree: dict, feature_names) -> Covering:
    entries = [CoveringEntry(import_rule(item['conditions'], feature_names), Tag(item['tag']),
                             RuleStats(**item['stats']), item['acceptance_index'], item['coverage_at_acceptance'])
               for item in tree['rules']]
    return Covering(entries, tree['union_coverage'])


def export_model(est: CoveringEstimator) -> dict:
    return {'format': MODEL_FORMAT,
            'version': MODEL_VERSION,
            'feature_names': list(est.feature_names),
            'target_name': est.target_name,
            'metadata': est.metadata,
            'target_stats': est.stats._asdict(),
            'fallback': est.fallback.value,
            'covering': export_covering(est.covering, est.feature_names),
            'cells': [{'signature': signature.bitstring, 'mean': cell.mean, 'count': cell.count}
                      for signature, cell in est.cell_table()]}


def import_model(tree: dict) -> CoveringEstimator:
    if tree.get('format') != MODEL_FORMAT or tree.get('version') != MODEL_VERSION:
        raise ValueError('expected format %s version %d, got %s version %s'
                         % (MODEL_FORMAT, MODEL_VERSION, tree.get('format'), tree.get('version')))

    feature_names = tree['feature_names']
    covering = import_covering(tree['covering'], feature_names)
    cells = {}

    for item in tree['cells']:
        signature = ActivationSignature.from_bitstring(item['signature'])

        if signature.length != len(covering):
            raise ValueError("signature '%s' does not match %d rules" % (item['signature'], len(covering)))

        cells[signature.packed] = Cell(item['mean'], item['count'])

    return CoveringEstimator(covering, cells, TargetStats(**tree['target_stats']), Fallback(tree['fallback']),
                             feature_names, tree['target_name'], tree['metadata'])


def save_model(est: CoveringEstimator, path: str) -> None:
    write_json(export_model(est), path)


def load_model(path: str) -> CoveringEstimator:
    """Read a model file written by 'save_model'

    :raise ModelFileError: The file is missing, is not JSON or does not hold a covreg model
    """

    try:
        with open(path, 'r') as file:
            tree = json.load(file)
    except FileNotFoundError:
        raise ModelFileError(path, 'no such file')
    except (OSError, ValueError) as error:
        raise ModelFileError(path, str(error))

    try:
        return import_model(tree)
    except CovregError as error:
        raise ModelFileError(path, str(error))
    except (KeyError, TypeError, ValueError, AttributeError) as error:
        raise ModelFileError(path, '%s: %s' % (type(error).__name__, error))
