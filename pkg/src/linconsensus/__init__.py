"""Accelerated linear-time average consensus and its applications.

Submodules:

* ``graphs``     graph families, Metropolis matrices, spectral checks
* ``consensus``  the accelerated averaging protocol and its spectral oracle
* ``optimize``   decentralized subgradient optimization on top of it
* ``multiagent`` formation maintenance and leader-following
* ``bench``      experiment harness behind the ``bench`` command
"""

from .errors import *  # noqa: F401,F403
from .graphs import (Graph, SpectralReport, StochasticMatrix, complete_graph, connectivity_radius,
                     cycle_graph, geometric_random_graph, grid_2d, is_connected, lazy_metropolis,
                     second_eigenvalue_bound, line_graph, lollipop_graph, metropolis, random_connected_graph,
                     read_edgelist, spectral_report, star_graph, write_edgelist)
from .consensus import (ConsensusState, ConvergenceReport, MomentumParams, block_iterate,
                        consensus_step, momentum_default, momentum_grid, momentum_leader,
                        run_consensus, spectral_simulate, theorem_round_bound)
from .optimize import (AbsoluteLoss, CallableObjective, QuadraticLoss, ZeroObjective, dispersion,
                       error_metric, median_instance, optimize_step, run_baseline, run_optimize)
from .multiagent import (DoubledGraph, FormationSpec, LeaderConfig, doubled_graph, formation_step,
                         leader_step, load_formation, mirrored_initial, run_formation,
                         run_leader_follow, target_formation, validate_formation)
from .rng import SplitMix64, derive_seed

__version__ = "0.1.0"
