import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import bell, best_wellformedness, partition_point, set_partitions
from srsa import frontiers, metrics
from srsa.color import meaning_distribution, perceptual_similarity
from srsa.errors import ScheduleEmpty


def random_problem(rng, n, k):
    prior = rng.dirichlet(np.ones(n))
    M = rng.dirichlet(np.ones(n) * 0.5, size=n)
    Q = rng.dirichlet(np.ones(k), size=n)
    return prior, M, Q


@given(st.integers(2, 7), st.integers(1, 7), st.floats(0.1, 50.0), st.integers(0, 10 ** 6))
def test_ib_step_keeps_rows_stochastic_and_lowers_objective(n, k, beta, seed):
    rng = np.random.default_rng(seed)
    prior, M, Q = random_problem(rng, n, k)
    before = metrics.ib_objective(Q, prior, M, beta)
    for _ in range(5):
        Q = frontiers.ib_step(Q, prior, M, beta)
        np.testing.assert_allclose(Q.sum(axis=1), 1.0, atol=1e-12)
        after = metrics.ib_objective(Q, prior, M, beta)
        assert after <= before + 1e-10
        before = after


def test_small_beta_collapses(toy_chart):
    n = len(toy_chart)
    prior = np.full(n, 1 / n)
    M = meaning_distribution(toy_chart)
    Q = np.random.default_rng(0).dirichlet(np.ones(n), size=n)
    for _ in range(300):
        Q = frontiers.ib_step(Q, prior, M, 0.05)
    assert metrics.complexity(Q, prior) < 1e-6


def test_identity_is_fixed_point_for_delta_meanings():
    n = 5
    Q = frontiers.ib_step(np.eye(n), np.full(n, 1 / n), np.eye(n), 200.0)
    np.testing.assert_allclose(Q, np.eye(n), atol=1e-12)


def test_merge_words_preserves_information():
    rng = np.random.default_rng(2)
    prior, M, _ = random_problem(rng, 6, 3)
    Q = np.eye(3)[[0, 1, 2, 0, 1, 2]]
    Q2 = np.hstack([Q[:, :1] * 0.5, Q[:, :1] * 0.5, Q[:, 1:], np.zeros((6, 1))])
    merged = frontiers.merge_words(Q2, prior)
    assert merged.shape[1] == 3
    assert metrics.complexity(merged, prior) == pytest.approx(metrics.complexity(Q, prior))
    assert metrics.accuracy(merged, prior, M) == pytest.approx(metrics.accuracy(Q, prior, M))


def exhaustive_points(prior, M):
    n = len(prior)
    return [partition_point(list(lab), prior.tolist(), M.tolist()) for lab in set_partitions(n)]


@pytest.fixture(scope="module")
def toy_problem(toy_chart):
    n = len(toy_chart)
    prior = np.full(n, 1 / n)
    M = meaning_distribution(toy_chart)
    return prior, M, exhaustive_points(prior, M)


def test_partition_count(toy_problem):
    assert len(toy_problem[2]) == bell(8) == 4140


@pytest.mark.parametrize("direction", ["reverse", "forward"])
def test_ib_frontier_dominates_every_partition(toy_problem, direction):
    prior, M, pts = toy_problem
    curve = frontiers.ib_frontier(prior, M, frontiers.log_beta_schedule(1.0, 2 ** 10, 200),
                                  tol=1e-10, max_iters=2000, direction=direction)
    assert np.all(np.diff(curve.complexities) >= 0)
    assert np.all(np.diff(curve.accuracies) >= -1e-6)
    for c, a in pts:
        assert metrics.frontier_accuracy_at(curve, min(c, curve.complexities[-1])) >= a - 1e-3


def test_ib_frontier_endpoints(toy_problem):
    prior, M, pts = toy_problem
    curve = frontiers.ib_frontier(prior, M, frontiers.log_beta_schedule(1.0, 2 ** 10, 64),
                                  tol=1e-10, max_iters=2000)
    assert curve.complexities[0] < 0.01
    assert curve.accuracies[-1] >= max(a for _, a in pts) - 1e-3


def test_schedule_errors():
    with pytest.raises(ScheduleEmpty):
        frontiers.ib_frontier(np.ones(2) / 2, np.eye(2), [])
    with pytest.raises(ValueError):
        frontiers.ib_frontier(np.ones(2) / 2, np.eye(2), [2.0, 1.0])


def test_upper_envelope_prunes_dominated():
    a = frontiers.FrontierCurve(np.array([1, 2.0]), np.array([0.1, 0.5]), np.array([0.1, 0.3]))
    b = frontiers.FrontierCurve(np.array([3.0]), np.array([0.4]), np.array([0.35]))
    env = frontiers.upper_envelope(a, b)
    assert env.complexities.tolist() == [0.1, 0.4]


# --- well-formedness frontier ------------------------------------------------------

def test_cc_three_chip_example():
    sim = np.array([[1, 0.9, 0.1], [0.9, 1, 0.1], [0.1, 0.1, 1]])
    labels, val = frontiers.cc_partition(sim, 2, restarts=5, rng=0)
    assert val == pytest.approx(2.7)
    assert labels[0] == labels[1] != labels[2]


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_cc_two_chip_rule(s):
    sim = np.array([[1, s], [s, 1]])
    labels, _ = frontiers.cc_partition(sim, 2, restarts=5, rng=0)
    assert (labels[0] == labels[1]) == (s > 0.5)


@given(st.integers(2, 7), st.integers(0, 10 ** 6))
def test_cc_frontier_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    labs = rng.uniform(-40, 40, (n, 3))
    from srsa.color import MunsellChart
    sim = perceptual_similarity(MunsellChart.from_labs(labs))
    front = frontiers.cc_frontier(sim, range(1, 5), restarts=10, rng_seed=seed)
    for k, v in zip(front.ks, front.values):
        assert v == pytest.approx(best_wellformedness(sim, k), abs=1e-9)
        assert front.partitions[k].max() + 1 <= k
    assert all(b >= a - 1e-12 for a, b in zip(front.values, front.values[1:]))


def test_cc_frontier_beats_mode_maps(toy_chart):
    sim = perceptual_similarity(toy_chart)
    front = frontiers.cc_frontier(sim, range(1, 6), restarts=10)
    rng = np.random.default_rng(4)
    for _ in range(50):
        k = int(rng.integers(1, 6))
        S = rng.dirichlet(np.ones(k), size=len(toy_chart))
        lab = metrics.mode_map(S)
        assert front.value_at(k) >= metrics.well_formedness(lab, sim) - 1e-9


def test_value_at_saturates():
    f = frontiers.WellformednessFrontier([1, 2], [3.0, 5.0])
    assert f.value_at(7) == 5.0
    with pytest.raises(KeyError):
        f.value_at(0)
