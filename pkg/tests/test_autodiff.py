import numpy as np
import pytest

from oracles import central_difference
from srsa.autodiff import GradTape


def check_op(build, shapes, seed=0, positive=False):
    rng = np.random.default_rng(seed)
    xs = [rng.uniform(0.2, 2.0, s) if positive else rng.normal(size=s) for s in shapes]
    w = rng.normal(size=build(GradTape(), *[GradTape().leaf(x) for x in xs]).shape)

    def f_of(i):
        def f(xi):
            tape = GradTape()
            args = [tape.leaf(xi if j == i else x) for j, x in enumerate(xs)]
            return float(np.sum(build(tape, *args).value * w))
        return f

    tape = GradTape()
    leaves = [tape.leaf(x) for x in xs]
    out = tape.weighted_sum(build(tape, *leaves), w)
    grads = tape.gradient(out, leaves)
    for i, x in enumerate(xs):
        np.testing.assert_allclose(grads[i], central_difference(f_of(i), x), rtol=1e-6, atol=1e-8)


def test_affine():
    check_op(lambda t, x, W, b: t.affine(x, W, b), [(2, 4, 3), (5, 3), (5,)])


def test_elementwise():
    check_op(lambda t, x: t.relu(x), [(3, 4)], seed=1)
    check_op(lambda t, x: t.sigmoid(x), [(3, 4)])
    check_op(lambda t, x: t.log_sigmoid(x), [(3, 4)])
    check_op(lambda t, x: t.exp(x), [(3, 4)])
    check_op(lambda t, x: t.log(x), [(3, 4)], positive=True)
    check_op(lambda t, x: t.scale(x, 2.5), [(3, 4)])


def test_broadcast_add():
    check_op(lambda t, a, b: t.add(a, b), [(2, 3, 4), (1, 3, 1)])


@pytest.mark.parametrize("axis", [0, 1, 2])
def test_log_normalize(axis):
    check_op(lambda t, x: t.log_normalize(x, axis), [(2, 3, 4)])


def test_matmul_left_and_take():
    rng = np.random.default_rng(0)
    Z = rng.random((2, 3, 3))
    check_op(lambda t, x: t.matmul_left(Z, x), [(2, 3, 4)])
    index = (np.array([0, 1, 1]), np.array([2, 0, 2]), np.array([1, 1, 3]))
    check_op(lambda t, x: t.take(x, index), [(2, 3, 4)])


def test_unused_leaf_gets_zero_gradient():
    tape = GradTape()
    a, b = tape.leaf(np.ones(3)), tape.leaf(np.ones(2))
    out = tape.weighted_sum(tape.exp(a), np.ones(3))
    ga, gb = tape.gradient(out, [a, b])
    np.testing.assert_allclose(ga, np.e)
    np.testing.assert_array_equal(gb, 0.0)


def test_gradient_needs_scalar():
    tape = GradTape()
    x = tape.leaf(np.ones(3))
    with pytest.raises(ValueError):
        tape.gradient(tape.exp(x), [x])


def test_replay_reproduces_values():
    rng = np.random.default_rng(5)
    tape = GradTape()
    x = tape.leaf(rng.normal(size=(4, 3)))
    W = tape.leaf(rng.normal(size=(2, 3)))
    y = tape.log_normalize(tape.sigmoid(tape.affine(x, W, np.zeros(2))), axis=1)
    vals = tape.replay()
    np.testing.assert_allclose(vals[y.index], y.value, atol=1e-12, rtol=0)
    new = rng.normal(size=(2, 3))
    vals2 = tape.replay({W.index: new})
    t2 = GradTape()
    y2 = t2.log_normalize(t2.sigmoid(t2.affine(t2.leaf(x.value), t2.leaf(new), np.zeros(2))), axis=1)
    np.testing.assert_allclose(vals2[y.index], y2.value, atol=1e-12, rtol=0)
