"""Model file round trips and format error handling."""

import numpy as np
import pytest

from spadplus.dataset import minmax_apply, minmax_fit
from spadplus.histogram import fit_histograms, spad_scores
from spadplus.model_io import ModelFormatError, SavedModel, load_model, save_model
from spadplus.pca import fit_spad_plus, spad_plus_scores


def _train_and_queries(seed=0, n=80, m=4):
    rng = np.random.default_rng(seed)
    # Mix magnitudes so repr() round-tripping is exercised on awkward floats.
    train = rng.standard_normal((n, m)) * np.logspace(-3, 3, m)
    queries = rng.standard_normal((25, m)) * np.logspace(-3, 3, m)
    return train, queries


def _fitted_spad(seed=0):
    train, queries = _train_and_queries(seed)
    mm = minmax_fit(train)
    scaled = minmax_apply(mm, train)
    return SavedModel(kind="spad", model=fit_histograms(scaled), minmax=mm), queries


def _fitted_spad_plus(seed=0):
    train, queries = _train_and_queries(seed)
    mm = minmax_fit(train)
    scaled = minmax_apply(mm, train)
    return SavedModel(kind="spad+", model=fit_spad_plus(scaled), minmax=mm), queries


class TestRoundTrip:
    def test_spad_fields_and_scores_bit_exact(self, tmp_path):
        saved, queries = _fitted_spad()
        path = tmp_path / "model.txt"
        save_model(saved, path)
        back = load_model(path)

        assert back.kind == "spad"
        assert np.array_equal(back.minmax.mins, saved.minmax.mins)
        assert np.array_equal(back.minmax.maxs, saved.minmax.maxs)
        assert np.array_equal(back.model.mu, saved.model.mu)
        assert np.array_equal(back.model.sigma, saved.model.sigma)
        assert np.array_equal(back.model.counts, saved.model.counts)
        assert back.model.bin_count == saved.model.bin_count
        assert back.model.train_size == saved.model.train_size

        scaled = minmax_apply(back.minmax, queries)
        assert np.array_equal(
            spad_scores(back.model, scaled), spad_scores(saved.model, scaled)
        )

    def test_spad_plus_fields_and_scores_bit_exact(self, tmp_path):
        saved, queries = _fitted_spad_plus()
        path = tmp_path / "model.txt"
        save_model(saved, path)
        back = load_model(path)

        assert back.kind == "spad+"
        t_old, t_new = saved.model.transform, back.model.transform
        assert np.array_equal(t_new.mean, t_old.mean)
        assert np.array_equal(t_new.components, t_old.components)
        assert np.array_equal(t_new.eigenvalues, t_old.eigenvalues)
        for old, new in (
            (saved.model.input_hist, back.model.input_hist),
            (saved.model.pc_hist, back.model.pc_hist),
        ):
            assert np.array_equal(new.mu, old.mu)
            assert np.array_equal(new.sigma, old.sigma)
            assert np.array_equal(new.counts, old.counts)

        scaled = minmax_apply(back.minmax, queries)
        assert np.array_equal(
            spad_plus_scores(back.model, scaled),
            spad_plus_scores(saved.model, scaled),
        )

    def test_blank_lines_are_tolerated(self, tmp_path):
        saved, _ = _fitted_spad()
        path = tmp_path / "model.txt"
        save_model(saved, path)
        padded = tmp_path / "padded.txt"
        padded.write_text(
            "\n" + path.read_text().replace("\nkind", "\n\nkind") + "\n\n"
        )
        assert load_model(padded).kind == "spad"

    def test_n_features_property(self, tmp_path):
        saved, _ = _fitted_spad_plus()
        assert saved.n_features == 4


def _corrupt(tmp_path, mutate, seed=0, plus=False):
    """Save a valid model, apply `mutate` to its lines, reload."""
    saved, _ = _fitted_spad_plus(seed) if plus else _fitted_spad(seed)
    path = tmp_path / "model.txt"
    save_model(saved, path)
    lines = path.read_text().splitlines()
    mutated = tmp_path / "corrupt.txt"
    mutated.write_text("\n".join(mutate(lines)) + "\n")
    return mutated


class TestFormatErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_model(tmp_path / "absent.txt")

    def test_wrong_magic(self, tmp_path):
        path = _corrupt(tmp_path, lambda ls: ["other-model 1"] + ls[1:])
        with pytest.raises(ModelFormatError, match="expected 'spadplus-model'"):
            load_model(path)

    def test_unsupported_version(self, tmp_path):
        path = _corrupt(tmp_path, lambda ls: ["spadplus-model 2"] + ls[1:])
        with pytest.raises(ModelFormatError, match="unsupported version"):
            load_model(path)

    def test_unknown_kind(self, tmp_path):
        path = _corrupt(
            tmp_path, lambda ls: [ls[0], "kind banana"] + ls[2:]
        )
        with pytest.raises(ModelFormatError, match="unknown kind"):
            load_model(path)

    def test_truncated_file(self, tmp_path):
        path = _corrupt(tmp_path, lambda ls: ls[:4])
        with pytest.raises(ModelFormatError, match="truncated"):
            load_model(path)

    def test_non_numeric_value(self, tmp_path):
        def swap_min(lines):
            i = next(i for i, l in enumerate(lines) if l.startswith("mins "))
            tokens = lines[i].split()
            tokens[1] = "abc"
            lines[i] = " ".join(tokens)
            return lines

        path = _corrupt(tmp_path, swap_min)
        with pytest.raises(ModelFormatError, match="non-numeric"):
            load_model(path)

    def test_wrong_value_count(self, tmp_path):
        def drop_last_max(lines):
            i = next(i for i, l in enumerate(lines) if l.startswith("maxs "))
            lines[i] = " ".join(lines[i].split()[:-1])
            return lines

        path = _corrupt(tmp_path, drop_last_max)
        with pytest.raises(ModelFormatError, match="expected 4 values, got 3"):
            load_model(path)

    def test_inconsistent_bin_counts(self, tmp_path):
        def bump_count(lines):
            i = next(i for i, l in enumerate(lines) if l.startswith("dim 0 "))
            tokens = lines[i].split()
            tokens[-1] = str(int(tokens[-1]) + 1)
            lines[i] = " ".join(tokens)
            return lines

        path = _corrupt(tmp_path, bump_count)
        with pytest.raises(ModelFormatError, match="inconsistent input histogram"):
            load_model(path)

    def test_trailing_garbage(self, tmp_path):
        path = _corrupt(tmp_path, lambda ls: ls + ["leftover junk"], plus=True)
        with pytest.raises(ModelFormatError, match="trailing content"):
            load_model(path)

    def test_dim_lines_out_of_order(self, tmp_path):
        def swap_dims(lines):
            i = next(i for i, l in enumerate(lines) if l.startswith("dim 0 "))
            lines[i], lines[i + 1] = lines[i + 1], lines[i]
            return lines

        path = _corrupt(tmp_path, swap_dims)
        with pytest.raises(ModelFormatError, match="out of order"):
            load_model(path)

    def test_error_messages_carry_line_numbers(self, tmp_path):
        path = _corrupt(tmp_path, lambda ls: [ls[0], "kind banana"] + ls[2:])
        with pytest.raises(ModelFormatError, match="line 2"):
            load_model(path)


class TestSavedModelValidation:
    def test_kind_model_type_mismatch(self):
        spad, _ = _fitted_spad()
        plus, _ = _fitted_spad_plus()
        with pytest.raises(ValueError, match="requires a SpadPlusModel"):
            SavedModel(kind="spad+", model=spad.model, minmax=spad.minmax)
        with pytest.raises(ValueError, match="requires a HistogramModel"):
            SavedModel(kind="spad", model=plus.model, minmax=plus.minmax)

    def test_unknown_kind(self):
        spad, _ = _fitted_spad()
        with pytest.raises(ValueError, match="unknown model kind"):
            SavedModel(kind="other", model=spad.model, minmax=spad.minmax)

    def test_feature_count_mismatch(self):
        spad, _ = _fitted_spad()
        mm = minmax_fit(np.zeros((3, 2)))
        with pytest.raises(ValueError, match="minmax has 2"):
            SavedModel(kind="spad", model=spad.model, minmax=mm)
