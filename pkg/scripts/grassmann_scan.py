"""Locate the minimum of the Grassmann test function along a geodesic from the reference.

The objective depends on the point only through its distance d to the reference subspace,
so a dense 1-D scan on [0, diameter] followed by a bracketed refinement finds the optimum.
"""
import math

import numpy as np
from scipy.optimize import minimize_scalar

from ersdfo.benchmarks import gramacy_lee

diameter = math.pi / 2 * math.sqrt(2)
ds = np.linspace(0.0, diameter, 200_001)
vals = np.array([gramacy_lee(d) for d in ds])
i = int(vals.argmin())
res = minimize_scalar(gramacy_lee, bracket=(ds[i - 1], ds[i], ds[i + 1]))
print(f"scan: d = {ds[i]:.6f}, f = {vals[i]:.10f}")
print(f"refined: d = {res.x:.8f}, f = {res.fun:.11f}")
