"""Closed vocabularies shared across the covering pipeline

The covreg project
"""

from enum import Enum


class Method(Enum):
    RF = 'rf'
    GB = 'gb'
    SGB = 'sgb'


class Tag(Enum):
    SIGNIFICANT = 'S'
    INSIGNIFICANT = 'I'
    DISCARDED = 'discarded'


class Reason(Enum):
    COVERAGE = 'coverage'
    LENGTH = 'length'
    NEITHER = 'neither'


class Fallback(Enum):
    ZERO = 'zero'
    MEAN = 'mean'


class LoopCondition(Enum):
    UNION = 'union'
    SUM = 'sum'


class ExitCode(Enum):
    SUCCESS = 0
    INPUT_ERROR = 2
    PIPELINE_ERROR = 3
    SUITABILITY_FAILURE = 4
