import json

import numpy as np
import pytest

from abcboost.boost import BoostConfig, train
from abcboost.data import RawDataset
from abcboost.logit import softmax
from abcboost.model import (
    FORMAT_VERSION,
    ModelFormatError,
    evaluate,
    load_model,
    predict,
    save_model,
)


@pytest.fixture(scope="module")
def abc_model(blobs4):
    return train(BoostConfig("abcrobustlogit", J=8, M=12, s=2, g=3, w=2), blobs4)


@pytest.fixture(scope="module")
def mart_model(blobs4):
    return train(BoostConfig("mart", J=8, M=6), blobs4)


class TestRoundTrip:
    @pytest.mark.parametrize("which", ["abc_model", "mart_model"])
    def test_predictions_bit_identical(self, request, tmp_path, blobs4, which):
        model = request.getfixturevalue(which)
        path = tmp_path / "m.json"
        save_model(model, path)
        back = load_model(path)
        rng = np.random.default_rng(0)
        X = np.vstack([blobs4.features, rng.normal(scale=4, size=(200, blobs4.n_features))])
        np.testing.assert_array_equal(back.decision_function(X), model.decision_function(X))
        assert back.base_classes == model.base_classes
        assert (back.method, back.n_classes, back.nu, back.J, back.w) == \
            (model.method, model.n_classes, model.nu, model.J, model.w)

    def test_file_is_stable_json(self, tmp_path, abc_model):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_model(abc_model, a)
        save_model(load_model(a), b)
        assert a.read_bytes() == b.read_bytes()
        d = json.loads(a.read_text())
        assert list(d)[:8] == ["version", "method", "K", "nu", "J", "M", "w", "s"]
        assert d["version"] == FORMAT_VERSION
        assert [it["base_class"] for it in d["iterations"]][:2] == [None, None]
        assert all(len(it["trees"]) == 3 for it in d["iterations"][2:])

    def test_version_guard(self, tmp_path, abc_model):
        d = abc_model.to_dict()
        d["version"] = 99
        path = tmp_path / "m.json"
        path.write_text(json.dumps(d))
        with pytest.raises(ModelFormatError, match="unsupported model version"):
            load_model(path)

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"version": 1, "method": ')
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_wrong_tree_count(self, tmp_path, abc_model):
        d = abc_model.to_dict()
        d["iterations"][-1]["trees"].pop()
        path = tmp_path / "m.json"
        path.write_text(json.dumps(d))
        with pytest.raises(ModelFormatError, match="expected 3"):
            load_model(path)

    def test_size_linear_in_tree_count(self, tmp_path, blobs4):
        sizes = {}
        for M in (10, 100):
            path = tmp_path / f"m{M}.json"
            save_model(train(BoostConfig("robustlogit", J=4, M=M), blobs4), path)
            sizes[M] = path.stat().st_size
        # header plus bin map is a fixed cost; per-tree bytes scale by M
        ratio = sizes[100] / sizes[10]
        assert 5 < ratio < 10.5


class TestPredict:
    def test_empty_ensemble(self, blobs4):
        model = train(BoostConfig("mart", M=0), blobs4)
        F, p, labels = predict(model, blobs4.features[:7])
        assert np.all(F == 0) and np.allclose(p, 0.25) and np.all(labels == 0)

    def test_matches_trainer(self, abc_model, blobs4):
        F, p, _ = predict(abc_model, blobs4.features)
        np.testing.assert_allclose(p, softmax(abc_model.train_scores), rtol=0, atol=1e-12)
        np.testing.assert_array_equal(F, abc_model.train_scores)

    def test_abc_rows_sum_to_zero(self, abc_model):
        rng = np.random.default_rng(3)
        F, p, _ = predict(abc_model, rng.normal(scale=3, size=(300, 5)))
        assert np.max(np.abs(F.sum(axis=1))) < 1e-8
        np.testing.assert_allclose(p.sum(axis=1), 1, atol=1e-12)

    def test_feature_count_mismatch(self, abc_model):
        with pytest.raises(ValueError):
            predict(abc_model, np.zeros((3, 4)))


class TestEvaluate:
    def test_against_row_loop(self, abc_model, blobs4):
        report = evaluate(abc_model, blobs4)
        F = abc_model.decision_function(blobs4.features)
        errors = 0
        logloss = 0.0
        for row, y in zip(F, blobs4.labels):
            best = 0
            for k in range(1, len(row)):
                if row[k] > row[best]:
                    best = k
            errors += best != y
            logloss += np.log(np.exp(row).sum()) - row[y]
        assert report.errors == errors
        assert report.logloss == pytest.approx(logloss, rel=1e-10)
        assert report.errors == report.confusion.sum() - np.trace(report.confusion)
        assert 0 <= report.error_rate <= 1

    def test_chance_level(self):
        y = np.arange(400) % 4
        data = RawDataset.from_arrays(np.zeros((400, 1)), y)
        report = evaluate(train(BoostConfig("mart", M=0), data), data)
        assert report.error_rate == pytest.approx(0.75)
        assert report.summary().startswith("errors=300 rate=0.75 logloss=")

    def test_perfect_predictor(self):
        data = RawDataset.from_arrays(np.repeat(np.arange(3.0), 10)[:, None], np.repeat(np.arange(3), 10))
        model = train(BoostConfig("robustlogit", J=3, nu=1.0, M=5), data)
        assert evaluate(model, data).errors == 0
