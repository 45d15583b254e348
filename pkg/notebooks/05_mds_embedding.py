"""
Embedding CMD vectors in the plane
==================================

"""

import numpy as np

from complexfair import classical_mds

# three corpora-like vectors whose pairwise distances are 3, 4 and 5
V = np.zeros((3, 14))
V[1, 0], V[2, 1] = 3.0, 4.0
res = classical_mds(V)
print(np.round(res.coords, 6))
print("eigenvalues", np.round(res.eigenvalues, 6), "stress", res.stress)

# identical vectors collapse to the origin and both axes are flagged
print(classical_mds(np.full((4, 14), 0.2)).flags)
