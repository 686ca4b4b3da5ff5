"""
Test-error curves on Letter
===========================

Trains MART, Robust LogitBoost and the two ABC methods on Letter
(10000 training rows, 10000 test rows, 26 classes, 16 features) and writes
one CSV of per-iteration test errors per run, in the same format as the
command line log. Use ``M`` below to shorten the runs; the exhaustive ABC
runs grow 650 trees per iteration and dominate the time.
"""

# %%
import os
import sys

from abcboost import BoostConfig, load_dataset, train
from abcboost.cli import write_log
from abcboost.datasets import fetch_letter

M = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
out_dir = os.environ.get("ABCBOOST_OUT", "letter_curves")
os.makedirs(out_dir, exist_ok=True)

train_csv, test_csv = fetch_letter()
data = load_dataset(train_csv)
test = load_dataset(test_csv, classes=data.classes)
print(data.n_samples, "training rows,", test.n_samples, "test rows,", data.n_classes, "classes")

# %%
runs = {
    "mart": dict(method="mart"),
    "robustlogit": dict(method="robustlogit"),
    "abcmart_exhaustive": dict(method="abcmart", s=26, g=0),
    "abcrobustlogit_exhaustive": dict(method="abcrobustlogit", s=26, g=0),
    "abcmart_worst": dict(method="abcmart", s=1, g=0),
    "abcmart_worst_w10": dict(method="abcmart", s=1, g=0, w=10),
    "abcrobustlogit_s2_g10": dict(method="abcrobustlogit", s=2, g=10),
}

for name, kw in runs.items():
    if kw.get("w", 0) >= M:
        continue
    model = train(BoostConfig(J=20, nu=0.1, M=M, **kw), data, test=test)
    write_log(model.records, os.path.join(out_dir, f"{name}.csv"))
    errors = [r.test_errors for r in model.records]
    print(f"{name:28s} final {errors[-1]:5d}  best {min(errors):5d}")
