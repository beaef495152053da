import itertools

import numpy as np
import pytest

from conftest import make_covering
from covreg.dataset import Dataset
from covreg.estimator import (MAX_BRUTEFORCE_RULES, ActivationSignature, activation_matrix, activation_signature,
                              covering_vs_partition_cardinality_check, enumerate_partition_bruteforce, fit, predict,
                              unit_box, witness_partition)
from covreg.exceptions import DimensionMismatchError, EmptyPoolError, InvalidConfigError, TooManyRulesError
from covreg.glossary import Fallback
from covreg.rules import ALL_SPACE, Rule, rule_contains, rule_intersect
from covreg.selection import Covering


def random_rules(rng, d, count):
    """Rules on the first d features with interval endpoints on the 0.1 grid of [0, 1]"""

    rules = []

    for _ in range(count):
        features = rng.choice(d, size=rng.integers(1, d + 1), replace=False)
        rules.append(Rule({int(j): tuple(np.sort(rng.choice(11, 2, replace=False)) / 10) for j in features}))

    return rules


def line(features, target):
    return Dataset(np.asarray(features, dtype=float).reshape(-1, 1), target)


def test_signature_of_a_point(axis_rules):
    ds = Dataset(np.zeros((1, 2)), [0.0])
    signature = activation_signature(make_covering(axis_rules, ds), [0.1, 0.7])

    assert signature.bitstring == '110'
    assert signature.bits == (1, 1, 0)
    assert signature.covered
    assert ActivationSignature.from_bitstring('110') == signature
    assert not ActivationSignature.from_bitstring('000').covered


def test_long_signatures_keep_their_length():
    signature = ActivationSignature.from_bitstring('1' + '0' * 9 + '1')

    assert len(signature.packed) == 2
    assert signature.bitstring == '10000000001'
    assert signature != ActivationSignature.from_bitstring('1' + '0' * 9 + '10')


def test_bad_bitstring():
    with pytest.raises(InvalidConfigError):
        ActivationSignature.from_bitstring('102')


def test_single_rule_over_everything_predicts_the_mean():
    ds = line([0, 1, 2, 3], [1.0, 2.0, 4.0, 9.0])
    est = fit(make_covering([ALL_SPACE], ds), ds)

    assert np.array_equal(est.predict(ds.features), np.full(4, 4.0))
    assert predict(est, [100.0]) == 4.0


def test_two_disjoint_rules():
    ds = line([0, 1, 2, 3], [1.0, 3.0, 10.0, 20.0])
    est = fit(make_covering([Rule({0: (0, 1)}), Rule({0: (2, 3)})], ds), ds)

    assert list(est.predict([[0.5], [2.5]])) == [2.0, 15.0]
    assert len(est.cells) == 2


class TestFallback:
    rules = [Rule({0: (0, 2)}), Rule({0: (1, 3)})]
    ds = line([0, 0.5, 2.5, 3], [1.0, 3.0, 5.0, 7.0])

    def estimator(self, fallback):
        return fit(make_covering(self.rules, self.ds), self.ds, fallback)

    def test_observed_cells(self):
        est = self.estimator(Fallback.ZERO)

        assert list(est.predict([[0.2], [2.8]])) == [2.0, 6.0]
        assert [(signature.bitstring, cell.count) for signature, cell in est.cell_table()] == [('01', 2), ('10', 2)]

    def test_unseen_signature_gets_zero(self):
        assert predict(self.estimator(Fallback.ZERO), [1.5]) == 0.0

    def test_uncovered_point_gets_zero(self):
        assert predict(self.estimator(Fallback.ZERO), [10.0]) == 0.0

    def test_mean_fallback(self):
        est = self.estimator(Fallback.MEAN)

        assert predict(est, [1.5]) == 4.0
        assert predict(est, [10.0]) == 4.0
        assert predict(est, [0.2]) == 2.0


def test_in_sample_predictions_are_cell_means(synthetic):
    rules = [Rule({0: (0.0, 0.5)}), Rule({1: (0.3, 1.0)}), Rule({0: (0.2, 0.8), 2: (0.0, 0.6)})]
    est = fit(make_covering(rules, synthetic), synthetic)
    predictions = est.predict(synthetic.features)
    bits = np.column_stack([r.mask(synthetic.features) for r in rules])

    for pattern in {tuple(row) for row in bits}:
        rows = np.all(bits == pattern, axis=1)
        expected = np.mean(synthetic.target[rows]) if any(pattern) else 0.0
        assert np.allclose(predictions[rows], expected, rtol=0, atol=1e-12)


def test_no_single_cell_shift_lowers_the_training_error():
    rng = np.random.default_rng(7)

    for _ in range(50):
        ds = Dataset(rng.integers(0, 10, size=(80, 2)) / 10, rng.normal(size=80))
        est = fit(make_covering(random_rules(rng, 2, int(rng.integers(1, 5))), ds), ds)
        predictions = est.predict(ds.features)
        packed = est.packed_signatures(ds.features)
        risk = np.mean((ds.target - predictions) ** 2)

        for key in est.cells:
            members = np.all(packed == np.frombuffer(key, dtype=np.uint8), axis=1)

            for shift in (-0.1, 0.1):
                assert np.mean((ds.target - predictions - shift * members) ** 2) >= risk - 1e-12


def test_rule_order_does_not_change_predictions(synthetic):
    rules = [Rule({0: (0.0, 0.5)}), Rule({1: (0.3, 1.0)}), Rule({4: (0.1, 0.7)}), Rule({0: (0.4, 0.9)})]
    probes = np.random.default_rng(3).uniform(-0.1, 1.1, size=(500, synthetic.d))
    reference = fit(make_covering(rules, synthetic), synthetic).predict(probes)

    for permutation in [(3, 2, 1, 0), (1, 3, 0, 2)]:
        shuffled = [rules[k] for k in permutation]
        assert np.array_equal(fit(make_covering(shuffled, synthetic), synthetic).predict(probes), reference)


def test_dimension_mismatch(step):
    est = fit(make_covering([Rule({0: (0.0, 0.4)})], step), step)

    with pytest.raises(DimensionMismatchError):
        est.predict(np.zeros((3, 5)))

    with pytest.raises(DimensionMismatchError):
        predict(est, [0.1, 0.2, 0.3])


def test_fit_needs_rules(step):
    with pytest.raises(EmptyPoolError):
        fit(Covering([], 0.0), step)


def test_empty_input():
    ds = line([0, 1], [1.0, 2.0])
    assert fit(make_covering([ALL_SPACE], ds), ds).predict(np.empty((0, 1))).shape == (0,)


class TestBruteforce:
    def test_single_rule(self):
        cells = enumerate_partition_bruteforce([Rule({0: (0, 1)})])

        assert [cell.signature for cell in cells] == [(0,), (1,)]
        assert cells[1].box == Rule({0: (0, 1)})

    def test_two_overlapping_intervals(self):
        cells = enumerate_partition_bruteforce([Rule({0: (0, 2)}), Rule({0: (1, 3)})])

        assert [cell.signature for cell in cells if cell.covered] == [(0, 1), (1, 0), (1, 1)]
        assert cells[-1].box == Rule({0: (1, 2)})
        assert cells[1].contains([2.5]) and not cells[1].contains([1.5])

    def test_overlapping_boxes(self, overlapping_boxes):
        cells = enumerate_partition_bruteforce(overlapping_boxes)

        assert len(cells) == 12
        assert sum(cell.covered for cell in cells) == 11

    def test_too_many_rules(self):
        rules = [Rule({0: (k, k + 1)}) for k in range(MAX_BRUTEFORCE_RULES + 1)]

        with pytest.raises(TooManyRulesError):
            enumerate_partition_bruteforce(rules)

    def test_cells_match_the_signature_groups_on_a_grid(self):
        rng = np.random.default_rng(11)

        for _ in range(200):
            d = int(rng.integers(1, 4))
            rules = random_rules(rng, d, int(rng.integers(1, 7)))
            grid = np.stack(np.meshgrid(*[np.arange(21) / 20] * d, indexing='ij'), axis=-1).reshape(-1, d)
            activations = activation_matrix(rules, grid)
            owners = np.full(grid.shape[0], -1)
            populated = set()

            for k, cell in enumerate(enumerate_partition_bruteforce(rules)):
                inside = cell.box.mask(grid)

                for r in cell.excluded:
                    inside &= ~r.mask(grid)

                assert not np.any(owners[inside] >= 0)
                assert np.all(activations[inside] == np.array(cell.signature, dtype=bool))
                owners[inside] = k

                if cell.covered and inside.any():
                    populated.add(ActivationSignature.from_bits(cell.signature).packed)

            assert np.all(owners >= 0)

            ds = Dataset(grid, rng.normal(size=grid.shape[0]))
            assert set(fit(make_covering(rules, ds), ds).cells) == populated

    def test_cell_membership_agrees_with_the_signature(self):
        rules = [Rule({0: (0.0, 0.6), 1: (0.2, 0.8)}), Rule({0: (0.4, 1.0)}), Rule({1: (0.5, 0.5)})]
        cells = enumerate_partition_bruteforce(rules)
        cov = make_covering(rules, Dataset(np.zeros((1, 2)), [0.0]))

        for x in itertools.product(np.arange(-1, 22) / 20, repeat=2):
            owners = [cell for cell in cells if cell.contains(x)]
            assert len(owners) == 1
            assert owners[0].signature == activation_signature(cov, x).bits


def test_witness_partition_tiles_the_space():
    boxes = witness_partition(2)

    assert len(boxes) == 5
    assert boxes[0] == unit_box(2)
    assert all(rule_intersect(a, b) is None for a, b in itertools.combinations(boxes, 2))
    assert sum(rule_contains(box, [-3.0, 7.0]) for box in boxes) == 1


@pytest.mark.parametrize('d', [1, 2, 3, 5])
def test_covering_is_smaller_than_the_partition(d):
    assert covering_vs_partition_cardinality_check(d) == (2 * d + 1, 2)


def test_cardinality_check_needs_a_positive_dimension():
    with pytest.raises(InvalidConfigError):
        covering_vs_partition_cardinality_check(0)
