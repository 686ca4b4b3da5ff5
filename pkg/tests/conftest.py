import pytest

from .synth import gaussian_classes

_CRITERIA = {}


def record_criterion(number, ok, detail):
    _CRITERIA[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def blobs4():
    return gaussian_classes(n=500, K=4, seed=0)


@pytest.fixture(scope="session")
def blobs3_small():
    return gaussian_classes(n=120, K=3, F=3, seed=1)


@pytest.fixture(scope="session")
def letter_runs():
    """Final test errors of full Letter runs, trained once per session."""
    from abcboost.boost import BoostConfig, train
    from abcboost.data import load_dataset
    from abcboost.datasets import fetch_letter

    try:
        train_csv, test_csv = fetch_letter()
    except OSError as exc:
        pytest.skip(f"Letter data unavailable: {exc}")
    data = load_dataset(train_csv)
    test = load_dataset(test_csv, classes=data.classes)
    cache = {}

    def run(method, s=2, g=0, w=0):
        key = (method, s, g, w)
        if key not in cache:
            cfg = BoostConfig(method, J=20, nu=0.1, M=1000, s=s, g=g, w=w)
            model = train(cfg, data, test=test)
            cache[key] = model.records[-1].test_errors
        return cache[key]

    return run
