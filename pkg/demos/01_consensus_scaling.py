"""
Linear-time averaging on the line and the lollipop
==================================================

Start with a single unit of mass at node 0 and count the rounds until every
node is within 1/100 of the average. Doubling n should roughly double the
round count, even on the line where plain Metropolis averaging needs
quadratic time.
"""

import numpy as np

from linconsensus import line_graph, lollipop_graph, momentum_default, run_consensus, theorem_round_bound

sizes = [8, 16, 32, 64, 128, 256]

for name, make in [("line", line_graph), ("lollipop", lollipop_graph)]:
    print(f"\n{name}")
    print("     n  rounds  guaranteed  ratio")
    prev = None
    for n in sizes:
        x1 = np.zeros(n)
        x1[0] = 1.0
        p = momentum_default(n)          # U = n
        rep = run_consensus(make(n), x1, p, eps=1e-2)
        guaranteed = theorem_round_bound(rep.l2sq[0], p, 1e-2)
        ratio = "" if prev is None else f"{rep.rounds / prev:.2f}"
        print(f"{n:6d}  {rep.rounds:6d}  {guaranteed:10d}  {ratio}")
        prev = rep.rounds

# For comparison: the same walk without momentum (gamma = 1) on the line.
from linconsensus.consensus import MomentumParams
n = 64
x1 = np.zeros(n)
x1[0] = 1.0
plain = run_consensus(line_graph(n), x1, MomentumParams(n, 1.0, 1.0, 1.0), eps=1e-2)
fast = run_consensus(line_graph(n), x1, momentum_default(n), eps=1e-2)
print(f"\nline n={n}: {plain.rounds} rounds without momentum, {fast.rounds} with")

# On the lollipop with large n the mass at node 0 sits in the clique and the
# average is already below 1/100, so one extrapolated step is enough.
