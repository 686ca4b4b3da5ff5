"""Benchmark data helpers.

The UCI Letter data (20000 rows, 16 integer features, 26 classes) is taken
from the ``keel-ds`` wheel on PyPI, which bundles the original file, and is
split into the first 10000 rows for training and the last 10000 for testing.
"""
from __future__ import annotations

import hashlib
import io
import os
import urllib.request
import zipfile
from pathlib import Path

KEEL_WHEEL_URL = (
    "https://files.pythonhosted.org/packages/77/88/"
    "c99136c61bb85663bd8cfb328fada55846eb10bd7271058160526e9674bf/"
    "keel_ds-0.2.5-py3-none-any.whl"
)
KEEL_WHEEL_SHA256 = "79faf1bd2f3ac2082d16eb9c8c49b2b1a60a5182e94464c5d32c7c642ea9650e"
LETTER_MEMBER = "keel_ds/data/balanced/raw/letter.dat"
LETTER_SHA256 = "8ff8ec650859678e78cf6c4c4cf5063a5fdf39b5b938bc0c1406116d1e23f4fa"
N_TRAIN = 10000


def default_cache_dir() -> Path:
    return Path(os.environ.get("ABCBOOST_DATA", Path.home() / ".cache" / "abcboost"))


def _download_letter_rows() -> bytes:
    with urllib.request.urlopen(KEEL_WHEEL_URL, timeout=300) as resp:
        wheel = resp.read()
    digest = hashlib.sha256(wheel).hexdigest()
    if digest != KEEL_WHEEL_SHA256:
        raise RuntimeError(f"keel-ds wheel checksum mismatch: {digest}")
    with zipfile.ZipFile(io.BytesIO(wheel)) as zf:
        return zf.read(LETTER_MEMBER)


def _to_csv_rows(raw: bytes) -> list:
    rows = []
    for line in raw.decode().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        *feats, letter = line.split(",")
        rows.append(f"{ord(letter.strip()) - ord('A')}," + ",".join(f.strip() for f in feats))
    return rows


def fetch_letter(cache_dir=None, check_hash: bool = True) -> tuple[Path, Path]:
    """Paths of ``letter.train.csv`` and ``letter.test.csv``, downloading once.

    Labels are the letters mapped to 0..25 in the first column.
    """
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    train_path = cache / "letter.train.csv"
    test_path = cache / "letter.test.csv"
    if train_path.exists() and test_path.exists():
        return train_path, test_path
    raw = _download_letter_rows()
    digest = hashlib.sha256(raw).hexdigest()
    if check_hash and digest != LETTER_SHA256:
        raise RuntimeError(f"letter.dat checksum mismatch: {digest}")
    rows = _to_csv_rows(raw)
    cache.mkdir(parents=True, exist_ok=True)
    train_path.write_text("\n".join(rows[:N_TRAIN]) + "\n")
    test_path.write_text("\n".join(rows[N_TRAIN:]) + "\n")
    return train_path, test_path
