"""Exceptions for covreg

Every exception keeps the offending values as attributes so that callers (mostly the command-line surface)
can report them without parsing messages.

The covreg project
"""

from typing import Any, List, Sequence


class CovregError(Exception):
    """Base class of every error raised by covreg"""


class InputError(CovregError):
    """Malformed or inconsistent user input (files, schemas, parameters)"""


class UnsupportedFileTypeError(InputError):
    """A configuration file must be in either YAML or JSON formats"""

    def __init__(self, path: str, supported_types: List[str]):
        self.path = path
        self.supported_types = supported_types

    def __str__(self):
        return "Unsupported file type for '%s'. Accept: %s" % (self.path, ', '.join(self.supported_types))


class EmptyFileError(InputError):
    def __init__(self, path: str):
        self.path = path

    def __str__(self):
        return "File '%s' contains no data rows" % self.path


class MissingColumnError(InputError):
    def __init__(self, path: str, column: str):
        self.path = path
        self.column = column

    def __str__(self):
        return "Column '%s' not found in '%s'" % (self.column, self.path)


class NonNumericCellError(InputError):
    def __init__(self, path: str, column: str, row: int, value: Any):
        self.path = path
        self.column = column
        self.row = row
        self.value = value

    def __str__(self):
        return "Non-numeric value '%s' in '%s' at column '%s', row %d" % (self.value, self.path, self.column, self.row)


class InvalidDatasetError(InputError):
    def __init__(self, reason: str):
        self.reason = reason

    def __str__(self):
        return 'Invalid dataset: %s' % self.reason


class DegenerateSplitError(InputError):
    def __init__(self, n: int, train_fraction: float):
        self.n = n
        self.train_fraction = train_fraction

    def __str__(self):
        return 'Train fraction %s leaves an empty side when splitting %d rows' % (self.train_fraction, self.n)


class InvalidConfigError(InputError):
    def __init__(self, key: str, value: Any, expected: str):
        self.key = key
        self.value = value
        self.expected = expected

    def __str__(self):
        return "Invalid value %r for '%s' (expected %s)" % (self.value, self.key, self.expected)


class DimensionMismatchError(InputError):
    def __init__(self, expected: int, received: int):
        self.expected = expected
        self.received = received

    def __str__(self):
        return 'Expected %d features, received %d' % (self.expected, self.received)


class SchemaMismatchError(InputError):
    def __init__(self, expected: Sequence[str], received: Sequence[str]):
        self.expected = list(expected)
        self.received = list(received)

    def __str__(self):
        return 'Feature names do not match the model. Expected: %s; received: %s' % (
            ', '.join(self.expected), ', '.join(self.received))


class RuleIndexError(InputError):
    def __init__(self, feature: int, d: int):
        self.feature = feature
        self.d = d

    def __str__(self):
        return 'Rule constrains feature %d but points have only %d features' % (self.feature, self.d)


class ModelFileError(InputError):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason

    def __str__(self):
        return "Cannot read model '%s': %s" % (self.path, self.reason)


class MissingDatasetError(InputError):
    def __init__(self, path: str):
        self.path = path

    def __str__(self):
        return "Dataset file '%s' does not exist" % self.path


class NoRulesError(CovregError):
    def __str__(self):
        return 'No rule fulfils the coverage condition with at least two rows; ' \
               'the noise variance cannot be estimated, supply it with --sigma2'


class EmptyPoolError(CovregError):
    def __str__(self):
        return 'Both the significant and the insignificant rule sets are empty'


class EmptyUnionError(CovregError):
    def __str__(self):
        return 'No point of the sample lies inside the union of the covering'


class ZeroVarianceError(CovregError):
    def __init__(self, what: str):
        self.what = what

    def __str__(self):
        return 'The variance of %s is zero' % self.what


class TooManyRulesError(CovregError):
    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit

    def __str__(self):
        return 'Cannot enumerate the partition of %d rules (limit %d)' % (self.count, self.limit)


class PartitionCheckError(CovregError):
    def __init__(self, reason: str):
        self.reason = reason

    def __str__(self):
        return 'Partition check failed: %s' % self.reason


class PipelineError(CovregError):
    """Raised by the covering pipeline with the stage in which the underlying error happened"""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause

    def __str__(self):
        return "Stage '%s' failed: %s" % (self.stage, self.cause)


class SuitabilityError(CovregError):
    def __init__(self, failed_checks: List[str]):
        self.failed_checks = failed_checks

    def __str__(self):
        return 'Suitability checks failed: %s' % ', '.join(self.failed_checks)
