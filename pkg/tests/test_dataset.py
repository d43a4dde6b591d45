import numpy as np
import pytest

from plgam import (ConfigurationError, Dataset, IngestionError, ValidationError,
                   apply_normalization, fit_normalization, kfold, load_csv,
                   multiply_weights)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_default_weights(self, tmp_path):
        p = write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n7,8,9\n")
        d = load_csv(p, "y")
        assert d.n_rows == 3
        assert np.array_equal(d.weights, [1, 1, 1])
        assert d.feature_names == ("a", "b")

    def test_weight_column_passthrough(self, tmp_path):
        p = write(tmp_path, "a,y,w\n1,3,2\n4,6,0.5\n")
        d = load_csv(p, "y", weight_column="w")
        assert np.array_equal(d.weights, [2, 0.5])
        assert d.n_features == 1

    def test_unparsable_cell_names_row(self, tmp_path):
        p = write(tmp_path, "a,y\nabc,3\n")
        with pytest.raises(IngestionError, match="row 1"):
            load_csv(p, "y")

    def test_missing_column(self, tmp_path):
        p = write(tmp_path, "a,y\n1,2\n")
        with pytest.raises(ConfigurationError):
            load_csv(p, "z")

    def test_non_positive_weight(self, tmp_path):
        p = write(tmp_path, "a,y,w\n1,2,0\n")
        with pytest.raises(ValidationError):
            load_csv(p, "y", weight_column="w")


class TestNormalization:
    def test_population_std(self):
        d = Dataset(np.array([[0.0], [2.0]]), np.zeros(2), np.ones(2), ("x",))
        s = fit_normalization(d)
        assert s.feature_means[0] == 1.0
        assert s.feature_scales[0] == 1.0   # population std, divide by N

    def test_constant_column_scale_one(self):
        d = Dataset(np.full((3, 1), 5.0), np.zeros(3), np.ones(3), ("x",))
        s = fit_normalization(d)
        assert s.feature_means[0] == 5.0
        assert s.feature_scales[0] == 1.0

    def test_idempotent_on_standardized(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=50)
        x = (x - x.mean()) / x.std()
        d = Dataset(x[:, None], np.zeros(50), np.ones(50), ("x",))
        s = fit_normalization(d)
        assert abs(s.feature_means[0]) < 1e-12
        assert abs(s.feature_scales[0] - 1.0) < 1e-12

    def test_apply_example(self):
        d = Dataset(np.array([[0.0], [2.0]]), np.zeros(2), np.ones(2), ("x",))
        s = fit_normalization(d)
        dn = apply_normalization(d, s)
        assert np.array_equal(dn.features[:, 0], [-1.0, 1.0])

    def test_round_trip_identity(self):
        rng = np.random.default_rng(3)
        x = rng.normal(5, 7, size=(40, 3))
        d = Dataset(x, rng.normal(size=40), np.ones(40), ("a", "b", "c"))
        s = fit_normalization(d, standardize_target=True)
        dn = apply_normalization(d, s)
        back = s.inverse_features(dn.features)
        assert np.allclose(back, x, rtol=1e-12)
        assert np.allclose(s.inverse_target(dn.target), d.target, rtol=1e-12)

    def test_schema_mismatch(self):
        d = Dataset(np.zeros((3, 2)), np.zeros(3), np.ones(3), ("a", "b"))
        s = fit_normalization(d)
        other = Dataset(np.zeros((3, 2)), np.zeros(3), np.ones(3), ("a", "c"))
        with pytest.raises(ValidationError):
            apply_normalization(other, s)

    def test_needs_two_rows(self):
        d = Dataset(np.zeros((1, 1)), np.zeros(1), np.ones(1), ("x",))
        with pytest.raises(ValidationError):
            fit_normalization(d)


class TestWeights:
    def setup_method(self):
        self.d = Dataset(np.zeros((3, 1)), np.zeros(3), np.ones(3), ("x",))

    def test_direct_multiply(self):
        d2 = multiply_weights(self.d, [0, 1], 2.0)
        assert np.array_equal(d2.weights, [2, 2, 1])
        assert np.array_equal(self.d.weights, [1, 1, 1])  # original untouched

    def test_power_of_two_round_trip_exact(self):
        d2 = multiply_weights(multiply_weights(self.d, [0, 1], 2.0), [0, 1], 0.5)
        assert np.array_equal(d2.weights, self.d.weights)

    def test_empty_edit(self):
        d2 = multiply_weights(self.d, [], 2.0)
        assert np.array_equal(d2.weights, self.d.weights)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            multiply_weights(self.d, [7], 2.0)


class TestKfold:
    def make(self, n):
        return Dataset(np.zeros((n, 1)), np.zeros(n), np.ones(n), ("x",))

    def test_even_split(self):
        plan = kfold(self.make(10), 5, seed=0)
        assert sorted(np.bincount(plan.assignments)) == [2] * 5

    def test_balanced_remainder(self):
        plan = kfold(self.make(7), 5, seed=0)
        assert sorted(np.bincount(plan.assignments)) == [1, 1, 1, 2, 2]

    def test_deterministic(self):
        a = kfold(self.make(20), 4, seed=9).assignments
        b = kfold(self.make(20), 4, seed=9).assignments
        assert np.array_equal(a, b)

    def test_partition(self):
        plan = kfold(self.make(13), 4, seed=1)
        seen = np.concatenate([plan.test_rows(f) for f in range(4)])
        assert sorted(seen) == list(range(13))

    def test_k_too_large(self):
        with pytest.raises(ValidationError):
            kfold(self.make(3), 4, seed=0)
