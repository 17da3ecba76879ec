"""Dataset ingestion, splitting, and normalization."""

import numpy as np
import pytest

from spadplus.dataset import (
    CsvParseError,
    EvalSplit,
    LabeledDataset,
    MinMaxParams,
    load_csv,
    minmax_apply,
    minmax_fit,
    save_csv,
    semi_supervised_split,
)


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_three_row_example(self, tmp_path):
        path = _write(tmp_path, "a,b,cls\n1,2,n\n3,4,n\n5,6,x\n")
        data = load_csv(path, "cls", "x")
        assert data.n_rows == 3
        assert data.n_features == 2
        assert data.n_anomalies == 1
        assert data.feature_names == ("a", "b")
        assert data.labels.tolist() == [False, False, True]
        np.testing.assert_array_equal(data.values, [[1, 2], [3, 4], [5, 6]])

    def test_parse_error_names_row_and_column(self, tmp_path):
        path = _write(tmp_path, "a,b,cls\n1,2,n\n3,abc,n\n")
        with pytest.raises(CsvParseError, match=r"row 2, column 'b'"):
            load_csv(path, "cls", "x")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "absent.csv", "cls", "x")

    def test_missing_label_column(self, tmp_path):
        path = _write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(CsvParseError, match="no column named 'cls'"):
            load_csv(path, "cls", "x")

    def test_zero_feature_columns(self, tmp_path):
        path = _write(tmp_path, "cls\nn\n")
        with pytest.raises(CsvParseError, match="zero feature columns"):
            load_csv(path, "cls", "x")

    def test_ragged_row(self, tmp_path):
        path = _write(tmp_path, "a,b,cls\n1,2,n\n1,n\n")
        with pytest.raises(CsvParseError, match="row 2 has 2 cells"):
            load_csv(path, "cls", "x")

    def test_non_finite_cell(self, tmp_path):
        path = _write(tmp_path, "a,cls\ninf,n\n")
        with pytest.raises(CsvParseError, match="non-finite"):
            load_csv(path, "cls", "x")

    def test_empty_file(self, tmp_path):
        path = _write(tmp_path, "")
        with pytest.raises(CsvParseError, match="empty"):
            load_csv(path, "cls", "x")

    def test_roundtrip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(11)
        data = LabeledDataset(
            values=rng.standard_normal((40, 3)) * rng.uniform(1e-3, 1e3),
            labels=rng.random(40) < 0.3,
            feature_names=("f0", "f1", "f2"),
        )
        path = tmp_path / "round.csv"
        save_csv(data, path)
        back = load_csv(path, "label", "anomaly")
        assert np.array_equal(back.values, data.values)
        assert np.array_equal(back.labels, data.labels)
        assert back.feature_names == data.feature_names


class TestLabeledDataset:
    def test_label_length_mismatch(self):
        with pytest.raises(ValueError, match="labels length"):
            LabeledDataset(np.zeros((3, 2)), np.zeros(2, dtype=bool), ("a", "b"))

    def test_feature_name_count_mismatch(self):
        with pytest.raises(ValueError, match="feature names"):
            LabeledDataset(np.zeros((3, 2)), np.zeros(3, dtype=bool), ("a",))

    def test_rejects_non_finite(self):
        values = np.array([[1.0], [np.nan]])
        with pytest.raises(ValueError, match="finite"):
            LabeledDataset(values, np.zeros(2, dtype=bool), ("a",))

    def test_arrays_are_read_only(self):
        data = LabeledDataset(np.zeros((2, 1)), np.zeros(2, dtype=bool), ("a",))
        with pytest.raises(ValueError):
            data.values[0, 0] = 1.0


class TestSplit:
    @staticmethod
    def _dataset(n_normal, n_anomaly, seed=0):
        rng = np.random.default_rng(seed)
        values = rng.standard_normal((n_normal + n_anomaly, 2))
        labels = np.array([False] * n_normal + [True] * n_anomaly)
        return LabeledDataset(values, labels, ("a", "b"))

    def test_sizes(self):
        split = semi_supervised_split(self._dataset(10, 4), seed=1)
        assert split.train.n_rows == 5
        assert split.test.n_rows == 9
        assert split.train.n_anomalies == 0
        assert split.test.n_anomalies == 4

    def test_partition_is_exact(self):
        data = self._dataset(25, 6)
        split = semi_supervised_split(data, seed=3)
        train_rows = {tuple(r) for r in split.train.values}
        test_normals = {
            tuple(r) for r, a in zip(split.test.values, split.test.labels) if not a
        }
        all_normals = {tuple(r) for r, a in zip(data.values, data.labels) if not a}
        assert train_rows | test_normals == all_normals
        assert not train_rows & test_normals

    def test_determinism_and_seed_sensitivity(self):
        data = self._dataset(30, 5)
        a = semi_supervised_split(data, seed=1)
        b = semi_supervised_split(data, seed=1)
        c = semi_supervised_split(data, seed=2)
        assert np.array_equal(a.train.values, b.train.values)
        assert not np.array_equal(a.train.values, c.train.values)

    def test_too_few_normals(self):
        with pytest.raises(ValueError, match="at least 2 normal"):
            semi_supervised_split(self._dataset(1, 3), seed=0)

    def test_eval_split_rejects_anomalous_train(self):
        data = self._dataset(4, 2)
        with pytest.raises(ValueError, match="must not contain anomalies"):
            EvalSplit(train=data, test=data, seed=0)


class TestMinMax:
    def test_midpoint(self):
        params = minmax_fit(np.array([[2.0], [4.0], [6.0]]))
        assert params.mins[0] == 2.0 and params.maxs[0] == 6.0
        assert minmax_apply(params, np.array([[4.0]]))[0, 0] == 0.5

    def test_constant_dimension_maps_to_zero(self):
        params = minmax_fit(np.array([[5.0], [5.0], [5.0]]))
        out = minmax_apply(params, np.array([[5.0], [7.0]]))
        assert (out == 0.0).all()

    def test_extrapolation_not_clamped(self):
        params = minmax_fit(np.array([[2.0], [6.0]]))
        assert minmax_apply(params, np.array([[8.0]]))[0, 0] == 1.5

    def test_train_extremes_map_to_unit_interval(self):
        rng = np.random.default_rng(5)
        train = rng.uniform(-50, 50, size=(30, 4))
        params = minmax_fit(train)
        out = minmax_apply(params, train)
        np.testing.assert_allclose(out.min(axis=0), 0.0, atol=1e-15)
        np.testing.assert_allclose(out.max(axis=0), 1.0, atol=1e-15)

    def test_dimension_mismatch(self):
        params = minmax_fit(np.zeros((3, 2)))
        with pytest.raises(ValueError, match="expected 2 columns"):
            minmax_apply(params, np.zeros((3, 3)))

    def test_min_above_max_rejected(self):
        with pytest.raises(ValueError, match="min exceeds max"):
            MinMaxParams(mins=np.array([1.0]), maxs=np.array([0.0]))
