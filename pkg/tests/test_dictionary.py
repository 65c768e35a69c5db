"""Dictionary construction, CSV loading and per-column sup norms."""

import warnings

import numpy as np
import pytest

from hazlasso import DataValidationError, DictionaryMatrix, linear_dictionary, load_dictionary, sup_norms
from hazlasso.survival import SurvivalDataset


class TestDictionaryMatrix:
    def test_linear_dictionary_copies_covariates(self):
        ds = SurvivalDataset(
            times=[0.5, 1.0],
            status=[1, 0],
            covariates=[[1.0, -3.0], [2.0, 0.5]],
            labels=["a", "b"],
        )
        dic = linear_dictionary(ds)
        assert dic.n == 2 and dic.M == 2
        assert dic.labels == ["a", "b"]
        np.testing.assert_array_equal(dic.values, ds.covariates)
        # independent storage: mutating the dictionary must not touch the data
        dic.values[0, 0] = 99.0
        assert ds.covariates[0, 0] == 1.0

    def test_validation(self):
        with pytest.raises(DataValidationError, match="2-d"):
            DictionaryMatrix(values=np.ones(3), labels=["a"])
        with pytest.raises(DataValidationError, match="label"):
            DictionaryMatrix(values=np.ones((2, 2)), labels=["a"])
        with pytest.raises(DataValidationError, match="duplicate"):
            DictionaryMatrix(values=np.ones((2, 2)), labels=["a", "a"])
        with pytest.raises(DataValidationError, match="finite"):
            DictionaryMatrix(values=np.array([[1.0, np.nan]]), labels=["a", "b"])

    def test_all_zero_column_warns_by_name(self):
        with pytest.warns(UserWarning, match="dead"):
            DictionaryMatrix(values=np.array([[1.0, 0.0], [2.0, 0.0]]), labels=["ok", "dead"])

    def test_nonzero_columns_do_not_warn(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            DictionaryMatrix(values=np.array([[1.0, -1.0]]), labels=["a", "b"])


class TestLoadDictionary:
    def _write(self, tmp_path, text):
        path = tmp_path / "dict.csv"
        path.write_text(text)
        return path

    def test_round_trip(self, tmp_path):
        path = self._write(tmp_path, "f,g\n1.0,2.0\n-0.5,0.25\n")
        dic = load_dictionary(path)
        assert dic.labels == ["f", "g"]
        np.testing.assert_array_equal(dic.values, [[1.0, 2.0], [-0.5, 0.25]])

    def test_row_count_checked_against_dataset(self, tmp_path):
        path = self._write(tmp_path, "f\n1.0\n2.0\n")
        with pytest.raises(DataValidationError, match="3 records"):
            load_dictionary(path, n_expected=3)

    def test_bad_cell_names_line(self, tmp_path):
        path = self._write(tmp_path, "f,g\n1.0,2.0\n1.0,oops\n")
        with pytest.raises(DataValidationError, match="line 3"):
            load_dictionary(path)

    def test_non_finite_cell_names_column(self, tmp_path):
        path = self._write(tmp_path, "f,g\n1.0,inf\n")
        with pytest.raises(DataValidationError, match="column g"):
            load_dictionary(path)

    def test_empty_and_headerless_files(self, tmp_path):
        with pytest.raises(DataValidationError, match="empty"):
            load_dictionary(self._write(tmp_path, ""))
        with pytest.raises(DataValidationError, match="header"):
            load_dictionary(self._write(tmp_path, "f,,g\n1,2,3\n"))
        with pytest.raises(DataValidationError, match="no data rows"):
            load_dictionary(self._write(tmp_path, "f,g\n"))

    def test_ragged_row_names_line(self, tmp_path):
        path = self._write(tmp_path, "f,g\n1.0\n")
        with pytest.raises(DataValidationError, match="line 2"):
            load_dictionary(path)


class TestSupNorms:
    def test_examples(self):
        dic = DictionaryMatrix(values=np.array([[-3.0, 1.0], [2.0, -1.0]]), labels=["a", "b"])
        np.testing.assert_array_equal(sup_norms(dic), [3.0, 1.0])

    def test_single_row(self):
        dic = DictionaryMatrix(values=np.array([[-0.5]]), labels=["a"])
        np.testing.assert_array_equal(sup_norms(dic), [0.5])

    def test_row_permutation_invariant(self):
        rng = np.random.default_rng(3)
        values = rng.normal(size=(20, 4))
        dic = DictionaryMatrix(values=values, labels=["a", "b", "c", "d"])
        perm = rng.permutation(20)
        shuffled = DictionaryMatrix(values=values[perm], labels=dic.labels)
        np.testing.assert_array_equal(sup_norms(dic), sup_norms(shuffled))

    def test_absolute_homogeneity(self):
        rng = np.random.default_rng(4)
        values = rng.normal(size=(10, 3))
        dic = DictionaryMatrix(values=values, labels=["a", "b", "c"])
        scaled = DictionaryMatrix(values=-2.5 * values, labels=dic.labels)
        np.testing.assert_allclose(sup_norms(scaled), 2.5 * sup_norms(dic), rtol=1e-15)
