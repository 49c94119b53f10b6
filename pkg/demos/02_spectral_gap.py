"""
Second eigenvalue of the lazy Metropolis matrix
===============================================

The lazy Metropolis matrix M' = I/2 + M/2 of any connected graph has its
second eigenvalue below 1 - 1/(71 n^2). Check it on a few families and show
how each non-principal mode of the accelerated iteration is damped.
"""

import numpy as np

from linconsensus import (complete_graph, connectivity_radius, geometric_random_graph, grid_2d,
                          lazy_metropolis, line_graph, lollipop_graph, momentum_default, spectral_report)
from linconsensus.consensus import block_second_trace

graphs = {
    "line 50": line_graph(50),
    "lollipop 50": lollipop_graph(50),
    "grid 7x7": grid_2d(7),
    "complete 50": complete_graph(50),
}
g = geometric_random_graph(60, connectivity_radius(60), seed=3)
if g.connected:
    graphs["geometric 60"] = g

print("graph          lambda2     bound        1-lambda2")
for name, g in graphs.items():
    rep = spectral_report(lazy_metropolis(g))
    print(f"{name:13s}  {rep.lambda2:.6f}  {rep.gap_bound:.8f}  {1 - rep.lambda2:.2e}")

# every mode lam < 1 evolves through the 2x2 block [[a lam, -(a-1) lam], [1, 0]];
# its squared amplitude stays under 2 (1 - 1/(9n))^(t-1)
g = line_graph(20)
lams = spectral_report(lazy_metropolis(g)).eigenvalues[1:]
tr = block_second_trace(lams, momentum_default(g.n), 1.0, 300)
t = np.arange(1, 301)
env = 2 * (1 - 1 / (9 * g.n)) ** (t - 1)
print("\nline 20: worst mode / envelope at t = 1, 50, 150, 300:")
print(np.round((tr ** 2).max(axis=1)[[0, 49, 149, 299]] / env[[0, 49, 149, 299]], 4))
