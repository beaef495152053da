"""Configuration manager

The 'resolve' function reads a branch of the configuration tree. The tree is built from 'defaults.yaml', shipped
with the package, and may be overlaid with a user's YAML or JSON file having the same keys.

For example, suppose there is a file named 'study.yaml' with the following content:
---
covering:
    gamma: 0.8
---
Calling 'conf.resolve("covering", conf.merge(conf.defaults(), conf.load("study.yaml")))' would return the default
covering parameters with 'gamma' replaced, and calling 'conf.resolve("covering.gamma")' would return the default 0.9.

The covreg project
"""

import copy
import json
import os
import re
from typing import Any, Dict, List

import yaml

from .exceptions import InvalidConfigError, UnsupportedFileTypeError


SUPPORTED_FILE_TYPES = ['yml', 'yaml', 'json']
DEFAULTS_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'defaults.yaml')
THREADS_VARIABLE = 'COVREG_THREADS'


def _load(path: str) -> dict:
    """Select appropriate loader (YAML or JSON) based on file type

    :param path: Path to the configuration file
    :return: An unprocessed configuration dictionary
    """

    if re.search(r'\.(yml|yaml)$', path):
        with open(path, 'r') as file:
            try:
                return yaml.safe_load(file) or {}
            except yaml.YAMLError as error:
                raise InvalidConfigError(path, str(error), 'a valid YAML document')

    elif re.search(r'\.json$', path):
        with open(path, 'r') as file:
            try:
                return json.load(file)
            except ValueError as error:
                raise InvalidConfigError(path, str(error), 'a valid JSON document')

    else:
        raise UnsupportedFileTypeError(path, SUPPORTED_FILE_TYPES)


def _traverse(tree: Dict[str, Any], active_branch: List[str]) -> Any:
    """Traverse the tree-structure configuration dictionary

    :param tree: The configuration dictionary
    :param active_branch: A list of node names in the branch of interest
    :return: A subtree or value of a leaf
    """
    if len(active_branch) > 1:
        return _traverse(tree[active_branch[0]], active_branch[1:])
    else:
        return tree[active_branch[0]]


def load(path: str) -> dict:
    """Load a user configuration file

    :param path: Path to a YAML or JSON file
    :return: An unprocessed configuration dictionary
    """
    return _load(path)


def defaults() -> dict:
    """Return a private copy of the package defaults"""
    return copy.deepcopy(_conf)


def merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Overlay 'override' onto 'base' branch by branch

    Leaves of 'override' which are None do not replace anything, so that unset command-line flags keep the values
    coming from configuration files.

    :param base: The configuration tree with lower priority
    :param override: The configuration tree with higher priority
    :return: A new merged tree
    """
    merged = copy.deepcopy(base)

    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        elif value is not None:
            merged[key] = copy.deepcopy(value)

    return merged


def resolve(branch: str = None, tree: Dict[str, Any] = None) -> Any:
    """Retrieve a subtree or value of specified node or leaf within the tree-structure configuration dictionary

    :param branch: A branch to node or leaf of interest, e.g. 'covering.alpha'
    :param tree: The configuration tree to look into, the package defaults if None
    :return: A subtree or value of a leaf
    """
    tree = _conf if tree is None else tree
    return _traverse(tree, branch.split('.')) if branch is not None else tree


def threads() -> int:
    """Number of joblib workers, capped by the COVREG_THREADS environment variable"""

    value = os.environ.get(THREADS_VARIABLE, '1')

    try:
        count = int(value)
    except ValueError:
        raise InvalidConfigError(THREADS_VARIABLE, value, 'a positive integer')

    if count < 1:
        raise InvalidConfigError(THREADS_VARIABLE, value, 'a positive integer')

    return count


_conf = _load(DEFAULTS_PATH)
