"""
Group-wise complexity of a small dataset
========================================

"""

import numpy as np

from complexfair import TabularDataset, compute_profile

# two features, the unprivileged group (A = 0) has a skewed label balance
rng = np.random.default_rng(0)
X = rng.normal(size=(200, 2))
a = np.array([1] * 100 + [0] * 100)
y = np.concatenate([rng.integers(0, 2, 100), (rng.random(100) < 0.85).astype(int)])
ds = TabularDataset(X, ["x1", "x2"], y, a, dataset_id="toy")

# one value per metric and group, CMD is the absolute difference
prof = compute_profile(ds)
for m, v in sorted(prof.cmd.items(), key=lambda kv: -kv[1]):
    print(f"{m:9s} priv {prof.privileged[m]:.3f}  unpriv {prof.unprivileged[m]:.3f}  cmd {v:.3f}")
