import math

import numpy as np
import pytest

from linconsensus import graphs as G
from linconsensus.consensus import (ConsensusState, block_iterate, block_second_trace, consensus_step,
                                    momentum_default, momentum_grid, momentum_leader, run_consensus,
                                    spectral_coordinates, spectral_simulate, theorem_round_bound)
from linconsensus.errors import InvalidParameterError, ShapeError, TopologyError

from helpers import random_instance, reference_consensus


def test_momentum_default_examples():
    p = momentum_default(1)
    assert math.isclose(p.gamma, 0.2) and math.isclose(p.alpha, 1.8) and math.isclose(p.eta, 8 / 9)
    assert math.isclose(momentum_default(2).alpha - 1, 17 / 19)
    with pytest.raises(InvalidParameterError):
        momentum_default(0.5)


def test_momentum_grid_examples():
    p = momentum_grid(math.e ** 2, c=1)
    assert math.isclose(p.gamma, 2 / (math.e * math.sqrt(2) + 1))
    assert math.isclose(p.eta, 1 - p.gamma)
    gammas = [momentum_grid(50, c).gamma for c in (0.5, 1, 3, 10, 1e6)]
    assert all(a > b for a, b in zip(gammas, gammas[1:])) and gammas[-1] < 1e-6
    with pytest.raises(InvalidParameterError):
        momentum_grid(1.5)


def test_leader_schedule_is_default_at_double_bound():
    a, b = momentum_leader(7), momentum_default(14)
    assert math.isclose(a.gamma, b.gamma) and math.isclose(a.eta, b.eta)


def test_step_examples():
    g = G.line_graph(2)
    s = consensus_step(ConsensusState.initial([1.0, 0.0]), g, momentum_default(2))
    assert np.allclose(s.y, [0.5, 0.5], atol=1e-15)
    assert np.allclose(s.x, [1 / 19, 18 / 19], atol=1e-15)
    assert s.t == 2
    s3 = consensus_step(ConsensusState.initial([1.0, 0, 0]), G.line_graph(3), momentum_default(3))
    assert math.isclose(s3.y.mean(), 1 / 3)
    c = ConsensusState.initial(np.full(6, 0.3))
    out = consensus_step(c, G.lollipop_graph(6), momentum_default(6))
    assert np.array_equal(out.x, c.x) and np.array_equal(out.y, c.y)
    with pytest.raises(ShapeError):
        consensus_step(ConsensusState.initial([1.0, 0, 0]), G.line_graph(2), momentum_default(2))


@pytest.mark.parametrize("seed", range(10))
def test_matches_plain_loop_and_dense_form(seed):
    g, x1 = random_instance(seed, 2, 20)
    p = momentum_default(g.n)
    xs, ys = reference_consensus(g, x1, p.gamma, 40)
    s = d = ConsensusState.initial(x1)
    m = G.lazy_metropolis(g)
    for t in range(40):
        s = consensus_step(s, g, p)
        d = consensus_step(d, m, p)
        assert np.allclose(s.x, xs[t + 1], atol=1e-12) and np.allclose(s.y, ys[t + 1], atol=1e-12)
        assert np.allclose(d.y, s.y, atol=1e-12)
        assert abs(s.y.mean() - x1.mean()) <= 1e-9 and abs(s.x.mean() - x1.mean()) <= 1e-9


def test_shift_equivariance():
    g, x1 = random_instance(3, 10, 20)
    p = momentum_default(g.n)
    a = ConsensusState.initial(x1)
    b = ConsensusState.initial(x1 + 2.5)
    for _ in range(50):
        a, b = consensus_step(a, g, p), consensus_step(b, g, p)
        assert np.allclose(b.x, a.x + 2.5, atol=1e-12) and np.allclose(b.y, a.y + 2.5, atol=1e-12)


def test_run_consensus_examples():
    assert run_consensus(G.line_graph(5), np.ones(5), momentum_default(5)).rounds == 1
    x1 = np.zeros(8)
    x1[0] = 1
    rep = run_consensus(G.line_graph(8), x1, momentum_default(8), eps=1e-2)
    assert rep.converged and rep.rounds <= 700
    assert rep.bound_holds()
    assert rep.rounds <= theorem_round_bound(rep.l2sq[0], momentum_default(8), 1e-2)
    assert rep.linf[-1] < 1e-2 and rep.linf[-2] >= 1e-2
    rep2 = run_consensus(G.complete_graph(2), [1.0, 0.0], momentum_default(2))
    assert rep2.converged and rep2.rounds <= 10
    assert np.allclose(rep2.final.x, 0.5, atol=1e-2)


def test_run_consensus_errors():
    with pytest.raises(InvalidParameterError):
        run_consensus(G.line_graph(3), [1, 0, 0], momentum_default(3), eps=0)
    with pytest.raises(TopologyError):
        run_consensus(G.Graph.from_edges(4, [(0, 1), (2, 3)]), np.zeros(4), momentum_default(4))


def test_max_iter_reports_nonconvergence():
    x1 = np.zeros(30)
    x1[0] = 1
    rep = run_consensus(G.line_graph(30), x1, momentum_default(30), max_iter=5)
    assert not rep.converged and rep.rounds == 5


def test_theorem_round_bound_is_a_guarantee():
    # after the returned round the bound, not just the run, forces the inf-norm below eps
    p = momentum_default(10)
    t = theorem_round_bound(0.9, p, 1e-3)
    q = math.sqrt(p.eta)
    coef = math.sqrt(1.8) * (p.alpha + (p.alpha - 1) / q)
    assert coef * q ** (t - 1) < 1e-3 <= coef * q ** (t - 2)
    assert theorem_round_bound(0.0, p, 1e-3) == 1


def test_trace_csv(tmp_path):
    rep = run_consensus(G.line_graph(4), [1.0, 0, 0, 0], momentum_default(4))
    rep.write_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,l2sq_dev,linf_dev,theorem_bound" and len(lines) == rep.rounds + 1


# --- block matrix and spectral oracle ---------------------------------------------

def test_block_iterate_examples():
    p = momentum_default(3)
    assert block_iterate(0.4, p, 2.0, 1) == (2.0, 2.0)
    assert block_iterate(0.0, p, 2.0, 2) == (0.0, 2.0)
    assert block_iterate(0.0, p, 2.0, 3) == (0.0, 0.0)
    sec = block_second_trace([0.75], p, 1.0, 200)[:, 0]
    t = np.arange(1, 201)
    assert np.all(sec ** 2 <= 2 * (1 - 1 / 27) ** (t - 1) + 1e-9)
    for lam in (1.0, -0.1):
        with pytest.raises(InvalidParameterError):
            block_iterate(lam, p, 1.0, 2)


def test_block_matches_matrix_power():
    p = momentum_default(5)
    lam = 0.6
    b = np.array([[p.alpha * lam, -(p.alpha - 1) * lam], [1.0, 0.0]])
    for t in (1, 2, 7, 30):
        want = np.linalg.matrix_power(b, t - 1) @ np.array([0.3, 0.3])
        assert np.allclose(block_iterate(lam, p, 0.3, t), want, atol=1e-14)


def test_spectral_simulate_examples():
    x1 = np.array([1.0, 0, 0])
    g = G.line_graph(3)
    p = momentum_default(3)
    assert np.array_equal(spectral_simulate(g, x1, p, 1), x1)
    s = ConsensusState.initial(x1)
    for _ in range(4):
        s = consensus_step(s, g, p)
    assert np.allclose(spectral_simulate(g, x1, p, 5), s.y, atol=1e-8)


def test_distance_identity_complete_graph():
    g = G.complete_graph(4)
    x1 = np.array([0.3, -1.0, 2.0, 0.25])
    p = momentum_default(4)
    s = ConsensusState.initial(x1)
    for _ in range(9):
        s = consensus_step(s, g, p)
    lams, q, z = spectral_coordinates(g, x1, p, 10)
    lhs = np.sum((s.y - x1.mean()) ** 2)
    assert math.isclose(lhs, float(np.sum(z[1:] ** 2)), abs_tol=1e-8)
    assert math.isclose(abs(z[0]), abs(x1.mean()) * 2, abs_tol=1e-12)
