# Midpoint averaging over dictionary pairs followed by iterative normalization,
# written directly from the update rules.
import numpy as np
from iterative_normalize import iterate

x = np.array([[1.0, 0.2, -0.3], [0.1, 1.1, 0.4], [-0.5, 0.3, 0.9],
              [0.7, -0.8, 0.2], [0.3, 0.3, 0.3], [-0.2, -0.6, -0.4]])
z = np.array([[0.9, 0.3, -0.2], [0.2, 1.0, 0.5], [-0.4, 0.2, 1.0],
              [-0.6, 0.5, 0.1], [0.4, -0.9, 0.3], [0.8, 0.1, -0.7]])
pairs = [(0, 0), (2, 1), (5, 4)]
for w, v in pairs:
    mu = (x[w] + z[v]) / 2
    x[w] = mu
    z[v] = mu
xr, kx, _ = iterate(x, 5, 1e-6)
zr, kz, _ = iterate(z, 5, 1e-6)
np.set_printoptions(precision=17)
print(kx, kz)
print(repr(xr.tolist()))
print(repr(zr.tolist()))
