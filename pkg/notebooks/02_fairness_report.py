"""
Cross-validated fairness of three learners
==========================================

"""

import numpy as np

from complexfair import TabularDataset, fairness_report

# the label depends on the feature for A = 1 only; A = 0 rows are mostly negative
rng = np.random.default_rng(1)
n = 600
a = (rng.random(n) < 0.5).astype(int)
x = rng.normal(size=n)
y = np.where(a == 1, x > 0, rng.random(n) < 0.2).astype(int)
ds = TabularDataset(x[:, None], ["x"], y, a, dataset_id="skewed")

# negative SP: the unprivileged group gets fewer favorable predictions
report = fairness_report(ds, seed=0, k=10)
for name, value in report.flat().items():
    print(f"{name:6s} {value:+.3f}")
