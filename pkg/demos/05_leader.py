"""
Leader-following
================

A few nodes are pinned to a value v and everyone else runs the accelerated
averaging round with the slower momentum 1 - 2/(18U+1). The followers
converge to v at rate (1 - 1/(18U)).

The analysis behind that rate mirrors every follower i into a copy holding
x_i - v and one holding -(x_i - v). The copies average to zero, like the
leaders. The mirrored system only reproduces leader-following exactly when
each doubled edge keeps the weight of the original edge. Plain Metropolis
weights on the doubled graph change the leaders' degrees. Both are shown.
"""

import numpy as np

from linconsensus import (ConsensusState, LeaderConfig, consensus_step, doubled_graph, leader_step,
                          lollipop_graph, mirrored_initial, momentum_default, run_leader_follow)
from linconsensus.multiagent import inherited_operator, leader_initial

n = 16
g = lollipop_graph(n)
S = {0, 12}
v = 0.25
x1 = np.linspace(-1, 1, n)
cfg = LeaderConfig(S, v, U=n)

rep = run_leader_follow(g, cfg, x1, eps=1e-6)
print(f"followers within 1e-6 of v after {rep.rounds} rounds; bound respected: {rep.bound_holds()}")

dg = doubled_graph(g, S)
fol = [i for i in range(n) if i not in S]
s = leader_initial(x1, cfg)
a = b = ConsensusState.initial(mirrored_initial(dg, x1, v))
w = inherited_operator(g, dg)
p = momentum_default(2 * n)
gap_inherited = gap_plain = 0.0
for _ in range(200):
    s = leader_step(s, g, cfg)
    a = consensus_step(a, w, p)
    b = consensus_step(b, dg.graph, p)
    gap_inherited = max(gap_inherited, np.abs(a.x[dg.a_of[fol]] - (s.x[fol, 0] - v)).max())
    gap_plain = max(gap_plain, np.abs(b.x[dg.a_of[fol]] - (s.x[fol, 0] - v)).max())
print(f"doubled graph, original weights:   max gap {gap_inherited:.1e}")
print(f"doubled graph, Metropolis weights: max gap {gap_plain:.1e}")
