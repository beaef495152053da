"""Data ingestion, splitting, target statistics and the synthetic regression model

A 'Dataset' is an immutable pair of a feature matrix and a target vector, together with the feature names. The names
travel with the data into the model file so that 'predict' can refuse a CSV whose columns do not match.

The synthetic model follows the Monte-Carlo study of the Covering Algorithm:
---
    g*(X) = 9 * prod_{j=1..3} exp(-3 (1 - X_j)^2) - 0.8 exp(-2 (X_4 - X_5)) + 2 sin^2(pi X_6) - 2.5 (X_7 - X_8)
---
with every coordinate drawn uniformly from {0.0, 0.1, ..., 0.9} and only the first eight coordinates informative.

The covreg project
"""

import math
import os
from collections import namedtuple
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .exceptions import (DegenerateSplitError, EmptyFileError, InvalidDatasetError, MissingColumnError,
                         NonNumericCellError)

INFORMATIVE_FEATURES = 8
SIGNAL_TO_NOISE = 2.0

TargetStats = namedtuple('TargetStats', ['mean', 'std', 'min', 'max', 'variance'])


class Dataset:
    """A feature matrix with its target vector and feature names

    Arrays are copied and frozen on construction, so a Dataset can be shared between threads.
    """

    __slots__ = ('features', 'target', 'feature_names', 'target_name')

    def __init__(self, features: np.ndarray, target: np.ndarray, feature_names: Sequence[str] = None,
                 target_name: str = 'y'):
        features = np.array(features, dtype=float)
        target = np.array(target, dtype=float)

        if features.ndim != 2:
            raise InvalidDatasetError('features must be a matrix, got %d dimension(s)' % features.ndim)

        n, d = features.shape

        if n < 1 or d < 1:
            raise InvalidDatasetError('expected at least one row and one feature, got %d x %d' % (n, d))

        if target.shape != (n,):
            raise InvalidDatasetError('target has shape %s, expected (%d,)' % (target.shape, n))

        if not np.all(np.isfinite(features)) or not np.all(np.isfinite(target)):
            raise InvalidDatasetError('non-finite entries are not allowed')

        names = tuple(str(name) for name in feature_names) if feature_names is not None \
            else tuple('X%d' % (j + 1) for j in range(d))

        if len(names) != d or len(set(names)) != d:
            raise InvalidDatasetError('expected %d unique feature names, got %s' % (d, list(names)))

        features.setflags(write=False)
        target.setflags(write=False)

        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'target', target)
        object.__setattr__(self, 'feature_names', names)
        object.__setattr__(self, 'target_name', str(target_name))

    def __setattr__(self, key, value):
        raise AttributeError('Dataset is immutable')

    def __reduce__(self):
        return Dataset, (self.features, self.target, self.feature_names, self.target_name)

    def __repr__(self):
        return 'Dataset(n=%d, d=%d)' % (self.n, self.d)

    def __len__(self):
        return self.n

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, rows: np.ndarray) -> 'Dataset':
        """Return the rows at the given indices, in that order"""
        return Dataset(self.features[rows], self.target[rows], self.feature_names, self.target_name)

    def with_target(self, target: np.ndarray) -> 'Dataset':
        return Dataset(self.features, target, self.feature_names, self.target_name)

    def frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.features, columns=list(self.feature_names))
        frame[self.target_name] = self.target
        return frame


def _numeric_frame(frame: pd.DataFrame, path: str) -> pd.DataFrame:
    """Convert every column to float, reporting the first cell which does not parse"""

    converted = {}

    for column in frame.columns:
        raw = frame[column]
        stripped = raw.str.strip()
        bad = pd.to_numeric(stripped, errors='coerce').isna().to_numpy()

        if bad.any():
            row = int(np.argmax(bad))
            raise NonNumericCellError(path, str(column), row + 1, raw.iloc[row])

        # Parsed by float() so that repr-written values load back bit for bit
        converted[column] = stripped.astype(float)

    return pd.DataFrame(converted, columns=frame.columns)


def _read_frame(path: str) -> pd.DataFrame:
    if not os.path.isfile(path):
        raise FileNotFoundError(path)

    if os.path.getsize(path) == 0:
        raise EmptyFileError(path)

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise EmptyFileError(path)

    if len(frame) == 0:
        raise EmptyFileError(path)

    header = pd.read_csv(path, header=None, nrows=1, dtype=str, keep_default_na=False).iloc[0]
    duplicated = sorted(set(header[header.duplicated()]))

    if duplicated:
        raise InvalidDatasetError("'%s' has duplicate column names: %s" % (path, ', '.join(duplicated)))

    return frame


def load_csv(path: str, target_column: str, drop: Sequence[str] = ()) -> Dataset:
    """Read a comma-separated file with a header row into a Dataset

    :param path: Path to the CSV file
    :param target_column: Name of the column holding the target
    :param drop: Columns removed before the numeric check (e.g. 'G1' and 'G2' for the Student dataset)
    :return: A Dataset whose features are all remaining columns, in file order
    """

    frame = _read_frame(path)

    for column in [target_column] + list(drop):
        if column not in frame.columns:
            raise MissingColumnError(path, column)

    frame = _numeric_frame(frame.drop(columns=list(drop)), path)
    features = frame.drop(columns=[target_column])

    if features.shape[1] == 0:
        raise InvalidDatasetError("'%s' has no feature column besides '%s'" % (path, target_column))

    return Dataset(features.to_numpy(), frame[target_column].to_numpy(), list(features.columns), target_column)


def load_features(path: str, drop: Sequence[str] = ()) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Read a CSV of features only (used by 'predict')

    :param path: Path to the CSV file
    :param drop: Columns to ignore, typically the target column when present
    :return: A tuple of (feature matrix, feature names)
    """

    frame = _read_frame(path)
    frame = frame.drop(columns=[column for column in drop if column in frame.columns])
    frame = _numeric_frame(frame, path)
    return frame.to_numpy(), tuple(frame.columns)


def write_csv(ds: Dataset, path: str, extra: Optional[Dict[str, np.ndarray]] = None) -> None:
    """Write a Dataset in the format read by 'load_csv', with optional sidecar columns such as 'g_star'"""

    frame = ds.frame()

    for name, values in (extra or {}).items():
        frame[name] = values

    frame.to_csv(path, index=False)


def train_test_split(ds: Dataset, train_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Split the rows with a seeded uniform shuffle

    :param ds: The dataset
    :param train_fraction: Fraction of rows in the training part, in (0, 1)
    :param seed: Seed of the shuffle
    :return: A tuple of (train, test) of sizes floor(n * f) and n - floor(n * f)
    """

    size = math.floor(ds.n * train_fraction)

    if not 0 < train_fraction < 1 or size < 1 or ds.n - size < 1:
        raise DegenerateSplitError(ds.n, train_fraction)

    order = np.random.default_rng(seed).permutation(ds.n)
    return ds.subset(order[:size]), ds.subset(order[size:])


def friedman_truth(features: np.ndarray) -> np.ndarray:
    """Regression function of the synthetic model, evaluated row-wise on the first eight columns"""

    x = np.asarray(features, dtype=float)
    return 9 * np.prod(np.exp(-3 * (1 - x[:, :3]) ** 2), axis=1) \
        - 0.8 * np.exp(-2 * (x[:, 3] - x[:, 4])) \
        + 2 * np.sin(np.pi * x[:, 5]) ** 2 \
        - 2.5 * (x[:, 6] - x[:, 7])


def friedman_synthetic(n: int, d: int, seed: int, noise_sd: float = None) -> Tuple[Dataset, np.ndarray, float]:
    """Draw a sample of the synthetic model

    :param n: Number of observations
    :param d: Dimension, at least 8 (columns 9..d are noise)
    :param seed: Seed of the draw
    :param noise_sd: Noise standard deviation; if None it is set so that the sample variance of g*(X) is twice the
                     noise variance
    :return: A tuple of (dataset, g*(X), noise standard deviation)
    """

    if d < INFORMATIVE_FEATURES:
        raise InvalidDatasetError('the synthetic model needs d >= %d, got %d' % (INFORMATIVE_FEATURES, d))

    rng = np.random.default_rng(seed)
    features = rng.integers(0, 10, size=(n, d)) / 10
    truth = friedman_truth(features)

    if noise_sd is None:
        noise_sd = math.sqrt(float(np.var(truth)) / SIGNAL_TO_NOISE)

    target = truth + rng.normal(0.0, noise_sd, size=n)
    return Dataset(features, target), truth, noise_sd


def target_stats(ds: Dataset) -> TargetStats:
    """Summary of the target with the population (divide-by-n) variance"""

    variance = float(np.var(ds.target))
    low, high = float(np.min(ds.target)), float(np.max(ds.target))

    # Rounding may push the mean of a constant target just outside [min, max]
    mean = min(max(float(np.mean(ds.target)), low), high)
    return TargetStats(mean=mean, std=math.sqrt(variance), min=low, max=high, variance=variance)
