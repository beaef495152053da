import numpy as np
import pytest

from covreg.dataset import Dataset, friedman_synthetic
from covreg.rules import Rule, rule_stats
from covreg.glossary import Tag
from covreg.selection import Covering, CoveringEntry


def step_dataset(copies: int = 4, seed: int = 0) -> Dataset:
    """A 10 x 10 grid on [0, 0.9]^2, repeated, with a jump of 10 at x0 = 0.5 and small noise"""

    x0 = np.tile(np.repeat(np.arange(10), 10), copies) / 10
    x1 = np.tile(np.arange(10), 10 * copies) / 10
    noise = np.random.default_rng(seed).normal(0.0, 0.1, size=x0.shape[0])
    return Dataset(np.column_stack([x0, x1]), 10 * (x0 >= 0.5) + noise, ['x0', 'x1'], 'y')


def make_covering(rules, ds: Dataset, tags=None) -> Covering:
    """A covering holding the given rules in order, without running the selection"""

    tags = tags or [Tag.SIGNIFICANT] * len(rules)
    entries = [CoveringEntry(r, tag, rule_stats(r, ds), k, 0.0) for k, (r, tag) in enumerate(zip(rules, tags))]
    covered = np.zeros(ds.n, dtype=bool)

    for r in rules:
        covered |= r.mask(ds.features)

    return Covering(entries, float(np.mean(covered)))


@pytest.fixture
def step():
    return step_dataset()


@pytest.fixture
def synthetic():
    ds, truth, noise_sd = friedman_synthetic(300, 10, seed=1)
    return ds


@pytest.fixture
def overlapping_boxes():
    """Five overlapping rectangles of the unit square whose induced partition has eleven covered cells"""

    return [Rule({0: (0.0, 0.6), 1: (0.0, 0.6)}),
            Rule({0: (0.4, 1.0), 1: (0.0, 0.6)}),
            Rule({0: (0.0, 0.6), 1: (0.4, 1.0)}),
            Rule({0: (0.4, 1.0), 1: (0.4, 1.0)}),
            Rule({0: (0.7, 0.9), 1: (0.3, 0.5)})]


@pytest.fixture
def axis_rules():
    return [Rule({0: (0.0, 0.2)}), Rule({1: (0.5, 1.0)}), Rule({0: (0.3, 1.0)})]


def quick_settings(**changes):
    """Fit settings with a small rule budget"""

    from covreg.experiments import CoveringSettings
    from covreg.generators import GeneratorConfig

    return CoveringSettings(GeneratorConfig(max_rules=200, seed=0)).replace(**changes)


@pytest.fixture
def step_fit(step):
    from covreg.experiments import run_pipeline

    return run_pipeline(step, quick_settings())
