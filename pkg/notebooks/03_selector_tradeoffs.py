"""
Search width, gap and warm-up
=============================

On a small synthetic problem, compares the number of trees grown and the
final training loss for a few (s, g, w) settings of the base-class
selector. The exhaustive search (s = K, g = 0) is the reference.
"""

# %%
import numpy as np

from abcboost import BoostConfig, RawDataset, train
from abcboost.boost import expected_tree_count

rng = np.random.default_rng(7)
K, n = 6, 1200
centers = rng.normal(scale=1.2, size=(K, 8))
y = rng.integers(K, size=n)
X = centers[y] + rng.normal(size=(n, 8))
data = RawDataset.from_arrays(X, y)

# %%
M = 60
print(f"{'s':>3} {'g':>3} {'w':>3} {'trees grown':>12} {'train loss':>12}")
for s, g, w in [(K, 0, 0), (1, 0, 0), (2, 0, 0), (2, 10, 0), (2, 10, 10), (1, 0, 10)]:
    model = train(BoostConfig("abcrobustlogit", J=8, nu=0.1, M=M, s=s, g=g, w=w), data)
    grown = sum(r.trees_trained for r in model.records)
    assert grown == expected_tree_count(K, M, s, g, w)
    print(f"{s:3d} {g:3d} {w:3d} {grown:12d} {model.records[-1].train_loss:12.4f}")

# %%
# Which base classes did the worst-class rule pick?
model = train(BoostConfig("abcmart", J=8, M=20, s=1, g=0), data)
print("base classes:", model.base_classes)
