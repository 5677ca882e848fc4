import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from sboc.core import (
    BoxDomain,
    Dataset,
    DuplicatePoint,
    EmptyDataset,
    InvalidConfig,
    ObjectiveFailure,
    OutOfBounds,
    RngStream,
    SamplePoint,
    default_epsilon,
    denormalize,
    incumbent,
    min_separation_ok,
    normalize,
)


class TestBoxDomain:
    def test_from_string(self):
        domain = BoxDomain.from_string("-2,2; -1,1")
        assert_array_equal(domain.lower, [-2, -1])
        assert_array_equal(domain.upper, [2, 1])
        assert domain.dimension == 2

    @pytest.mark.parametrize("text", ["1,0", "0,1;2", "a,b", ""])
    def test_from_string_invalid(self, text):
        with pytest.raises(InvalidConfig):
            BoxDomain.from_string(text)

    def test_lower_must_be_below_upper(self):
        with pytest.raises(InvalidConfig):
            BoxDomain([0.0, 1.0], [1.0, 1.0])

    def test_infinite_bounds(self):
        with pytest.raises(InvalidConfig):
            BoxDomain([0.0], [np.inf])


class TestNormalize:
    def test_lower_corner(self, shcb_domain):
        assert_array_equal(normalize([-2, -1], shcb_domain), [0.0, 0.0])

    def test_shcb_minimizer(self, shcb_domain):
        assert_allclose(normalize([0.0898, -0.7126], shcb_domain), [0.5225, 0.1437], atol=1e-4)

    def test_roundtrip(self, shcb_domain):
        x = np.array([0.3, 0.9])
        assert_allclose(normalize(denormalize(x, shcb_domain), shcb_domain), x, atol=1e-15)

    def test_upper_corner_stays_inside(self):
        domain = BoxDomain([-0.1], [0.2])
        assert denormalize(np.array([1.0]), domain)[0] <= 0.2
        rng = np.random.default_rng(0)
        lower, upper = rng.uniform(-5, 0, 50), rng.uniform(0.1, 5, 50)
        for corner in (np.zeros(50), np.ones(50)):
            x_raw = denormalize(corner, BoxDomain(lower, upper))
            assert np.all((x_raw >= lower) & (x_raw <= upper))

    def test_rounding_noise_is_clamped(self, shcb_domain):
        assert_array_equal(normalize([2.0 + 1e-13, -1.0], shcb_domain), [1.0, 0.0])

    def test_outside_raises(self, shcb_domain):
        with pytest.raises(OutOfBounds):
            normalize([2.1, 0.0], shcb_domain)

    def test_wrong_dimension(self, shcb_domain):
        with pytest.raises(OutOfBounds):
            normalize([0.0], shcb_domain)


class TestDataset:
    def test_incumbent_shcb_start(self, shcb_start_points):
        points, values = shcb_start_points
        dataset = Dataset(2)
        for x, y in zip(points, values):
            dataset.add(x, y)
        x_best, f_best = incumbent(dataset)
        assert_array_equal(x_best, [0.3853, 0.8083])
        assert f_best == -0.4732

    def test_singleton(self):
        dataset = Dataset(1)
        dataset.add([0.25], 3.0)
        x_best, f_best = incumbent(dataset)
        assert_array_equal(x_best, [0.25])
        assert f_best == 3.0

    def test_tie_keeps_earlier_point(self):
        dataset = Dataset(1)
        dataset.add([0.1], 1.0)
        dataset.add([0.9], 1.0)
        assert dataset.best_index == 0

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            incumbent(Dataset(2))

    def test_duplicate_rejected(self):
        dataset = Dataset(2)
        dataset.add([0.5, 0.5], 1.0)
        with pytest.raises(DuplicatePoint):
            dataset.add([0.5, 0.5], 2.0)

    def test_arrays_are_read_only(self):
        dataset = Dataset(2)
        dataset.add([0.5, 0.5], 1.0)
        with pytest.raises(ValueError):
            dataset.X[0, 0] = 0.0

    def test_nearest_is_stable(self):
        dataset = Dataset(1)
        for x in (0.25, 0.75, 0.5, 0.9):
            dataset.add([x], 0.0)
        # 0.25 und 0.75 gleich weit entfernt: niedrigerer Index zuerst
        assert_array_equal(dataset.nearest([0.5], 3), [2, 0, 1])


class TestSamplePoint:
    def test_outside_unit_cube(self):
        with pytest.raises(OutOfBounds):
            SamplePoint(np.array([1.2, 0.0]), 1.0)

    def test_nonfinite_value(self):
        with pytest.raises(ObjectiveFailure):
            SamplePoint(np.array([0.2, 0.0]), np.nan)


class TestMinSeparation:
    def test_existing_point(self):
        dataset = Dataset(2)
        dataset.add([0.2, 0.2], 0.0)
        assert not min_separation_ok([0.2, 0.2], dataset, default_epsilon(2))

    def test_two_dimensions_accepts(self):
        dataset = Dataset(2)
        dataset.add([0.2, 0.2], 0.0)
        assert min_separation_ok([0.201, 0.2], dataset, default_epsilon(2))

    def test_four_dimensions_rejects(self):
        dataset = Dataset(4)
        dataset.add([0.2, 0.2, 0.2, 0.2], 0.0)
        assert not min_separation_ok([0.2001, 0.2, 0.2, 0.2], dataset, default_epsilon(4))

    def test_empty_dataset(self):
        assert min_separation_ok([0.5], Dataset(1), 0.1)


class TestRngStream:
    def test_same_seed_and_label(self):
        a = RngStream(42, "kmeans").generator.random(5)
        b = RngStream(42, "kmeans").generator.random(5)
        assert_array_equal(a, b)

    def test_labels_are_independent(self):
        a = RngStream(42, "kmeans").generator.random(5)
        b = RngStream(42, "psi-split").generator.random(5)
        assert not np.array_equal(a, b)

    def test_child_label(self):
        child = RngStream(3).child("iter-1")
        assert child.label == "root/iter-1"
        assert_array_equal(child.generator.random(3), RngStream(3, "root/iter-1").generator.random(3))

    def test_large_seed(self):
        assert 0 <= RngStream(2 ** 64 - 1).seed_int() < 2 ** 31

    def test_negative_seed(self):
        with pytest.raises(InvalidConfig):
            RngStream(-1)
