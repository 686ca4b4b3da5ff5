import csv
import subprocess
import sys

import numpy as np
import pytest

from abcboost.cli import LOG_HEADER, main
from abcboost.model import load_model

from .synth import gaussian_classes


def write_csv(path, data, labels=None):
    labels = data.classes[data.labels] if labels is None else labels
    with open(path, "w") as fh:
        for y, row in zip(labels, data.features):
            fh.write(",".join([str(int(y))] + [repr(float(v)) for v in row]) + "\n")
    return str(path)


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    train = gaussian_classes(n=200, K=3, F=4, seed=3)
    test = gaussian_classes(n=90, K=3, F=4, seed=4)
    # non-contiguous label values exercise the class remapping
    return {
        "root": root,
        "train": write_csv(root / "train.csv", train, train.labels * 5 + 1),
        "test": write_csv(root / "test.csv", test, test.labels * 5 + 1),
    }


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def run_train(files, tmp_path, *extra, name="m"):
    model = tmp_path / f"{name}.json"
    log = tmp_path / f"{name}.csv"
    argv = ["--quiet", "train", "--train", files["train"], "--test", files["test"],
            "--model", str(model), "--log", str(log), "-J", "6", "-M", "15", *extra]
    return main(argv), model, log


def test_train_writes_model_and_log(files, tmp_path):
    status, model, log = run_train(files, tmp_path, "--method", "abcrobustlogit",
                                   "-s", "2", "-g", "3", "-w", "2")
    assert status == 0
    rows = read_rows(log)
    assert rows[0] == LOG_HEADER
    assert len(rows) == 16
    assert [r[0] for r in rows[1:]] == [str(m) for m in range(1, 16)]
    assert rows[1][3] == "" and rows[3][3] != ""
    trees = sum(int(r[5]) for r in rows[1:])
    # two warm-up iterations, searches at m = 3, 7, 11, 15, reuse elsewhere
    assert trees == 3 * 2 + 2 * 2 * 4 + 2 * 9
    assert load_model(model).M == 15


def test_eval_matches_final_log_row(files, tmp_path, capsys):
    _, model, log = run_train(files, tmp_path, "--method", "mart")
    capsys.readouterr()
    assert main(["eval", "--model", str(model), "--data", files["test"]]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    last = out[-1]
    assert last.startswith("errors=")
    errors = int(last.split()[0].split("=")[1])
    assert errors == int(read_rows(log)[-1][2])


def test_predict_reproduces_training_labels(files, tmp_path):
    from abcboost.data import load_dataset

    _, model_path, _ = run_train(files, tmp_path, "--method", "abcmart", "-s", "3", "-g", "0")
    out = tmp_path / "pred.csv"
    assert main(["predict", "--model", str(model_path), "--input", files["train"],
                 "--output", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 200
    model = load_model(model_path)
    data = load_dataset(files["train"], classes=model.classes)
    expect = model.classes[model.predict(data.features)]
    assert [int(r[0]) for r in rows] == expect.astype(int).tolist()
    probs = np.array([[float(v) for v in r[1:]] for r in rows])
    np.testing.assert_allclose(probs.sum(axis=1), 1, atol=1e-12)
    assert set(int(r[0]) for r in rows) <= {1, 6, 11}


def test_predict_unlabeled(files, tmp_path):
    _, model_path, _ = run_train(files, tmp_path, "--method", "mart")
    src = tmp_path / "x.csv"
    src.write_text("".join(line.split(",", 1)[1] for line in open(files["test"])))
    out = tmp_path / "p.csv"
    assert main(["predict", "--model", str(model_path), "--input", str(src),
                 "--output", str(out), "--unlabeled"]) == 0
    assert len(read_rows(out)) == 90


def test_zero_iterations(files, tmp_path, capsys):
    status, model, log = run_train(files, tmp_path, "-M", "0", "--method", "robustlogit")
    assert status == 0
    assert read_rows(log) == [LOG_HEADER]
    main(["eval", "--model", str(model), "--data", files["test"]])
    assert "rate=0.666667" in capsys.readouterr().out


def test_identical_runs_are_byte_identical(files, tmp_path):
    _, m1, l1 = run_train(files, tmp_path, "--method", "abcrobustlogit", name="a")
    _, m2, l2 = run_train(files, tmp_path, "--method", "abcrobustlogit", "--threads", "1", name="b")
    assert m1.read_bytes() == m2.read_bytes()
    assert l1.read_bytes() == l2.read_bytes()


def test_empty_predict_input(files, tmp_path):
    _, model, _ = run_train(files, tmp_path, "--method", "mart", "-M", "2")
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    out = tmp_path / "out.csv"
    assert main(["predict", "--model", str(model), "--input", str(empty), "--output", str(out)]) == 0
    assert out.read_text() == ""


def test_missing_train_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--test", "x.csv"])
    assert exc.value.code != 0
    assert "--train" in capsys.readouterr().err


def test_missing_model_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--data", "x.csv"])
    assert exc.value.code != 0


def test_corrupted_model(files, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["predict", "--model", str(bad), "--input", files["test"]]) != 0
    assert "error" in capsys.readouterr().err


def test_binary_data_with_abc_method(tmp_path, capsys):
    path = tmp_path / "bin.csv"
    path.write_text("".join(f"{i % 2},{i}\n" for i in range(20)))
    status = main(["train", "--train", str(path), "--method", "abcmart", "-M", "3",
                   "--model", str(tmp_path / "m.json")])
    assert status != 0
    assert "K >= 3" in capsys.readouterr().err


def test_s_larger_than_k(files, tmp_path, capsys):
    status, _, _ = run_train(files, tmp_path, "--method", "abcmart", "-s", "5")
    assert status != 0
    assert "exceeds" in capsys.readouterr().err


def test_unknown_label_in_eval(files, tmp_path):
    _, model, _ = run_train(files, tmp_path, "--method", "mart", "-M", "2")
    bad = tmp_path / "bad.csv"
    bad.write_text("42,0,0,0,0\n")
    assert main(["eval", "--model", str(model), "--data", str(bad)]) != 0


def test_feature_mismatch_in_predict(files, tmp_path):
    _, model, _ = run_train(files, tmp_path, "--method", "mart", "-M", "2")
    bad = tmp_path / "bad.csv"
    bad.write_text("1,0,0\n")
    assert main(["predict", "--model", str(model), "--input", str(bad)]) != 0


def test_module_entry_point(files, tmp_path):
    model = tmp_path / "m.json"
    proc = subprocess.run(
        [sys.executable, "-m", "abcboost", "train", "--train", files["train"],
         "--model", str(model), "-M", "2", "-J", "4", "--method", "mart"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "trained 2 iterations" in proc.stderr
