import math

import numpy as np
import pytest

from semifb.errors import DimensionMismatchError, EmptyLatticeError
from semifb.fsm import WeightedGraph, load_graph, random_graph
from semifb.lfmmi import lfmmi, lfmmi_batch


def subset_pair(seed, K=4, A=12, drop=3):
    """Denominator n-gram graph and a numerator that keeps a subset of its arcs."""
    den = random_graph(K, A, seed, "ngram")
    rng = np.random.default_rng(seed)
    trip = den.T.triplets()
    keep = sorted(rng.choice(len(trip), size=len(trip) - drop, replace=False))
    num = WeightedGraph.build(K, [trip[i] for i in keep], den.pi.items(), den.omega.items())
    return num, den


def finite_difference(num, den, Phi, h=1e-4):
    fd = np.zeros_like(Phi)
    for i in range(Phi.shape[0]):
        for n in range(Phi.shape[1]):
            up, dn = Phi.copy(), Phi.copy()
            up[i, n] += h
            dn[i, n] -= h
            fd[i, n] = (lfmmi(num, den, up).loss - lfmmi(num, den, dn).loss) / (2 * h)
    return fd


def test_identical_graphs():
    g = random_graph(4, 10, 1, "ngram")
    Phi = np.random.default_rng(0).uniform(-3, 0, (4, 5))
    res = lfmmi(g, g, Phi)
    assert res.loss == 0.0
    assert np.all(res.grad == 0.0)


def test_single_state_loops():
    t_num, t_den = -0.2, -1.1
    Phi = np.array([[-1.0, -0.5, -2.0, -0.1]])
    mk = lambda t: WeightedGraph.build(1, [(0, 0, t)], [(0, 0.0)], [(0, 0.0)])  # noqa: E731
    res = lfmmi(mk(t_num), mk(t_den), Phi)
    assert res.loss == pytest.approx(3 * (t_num - t_den), abs=1e-14)
    np.testing.assert_allclose(res.grad, 0.0, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    num, den = subset_pair(seed)
    Phi = np.random.default_rng(seed).uniform(-3, 0, (4, 5))
    res = lfmmi(num, den, Phi)
    fd = finite_difference(num, den, Phi)
    assert np.abs(res.grad - fd).max() / np.abs(fd).max() <= 1e-5


@pytest.mark.parametrize("seed", range(5))
def test_gradient_columns_sum_to_zero(seed):
    num, den = subset_pair(seed)
    res = lfmmi(num, den, np.random.default_rng(seed).uniform(-3, 0, (4, 6)))
    assert np.abs(res.grad.sum(axis=0)).max() <= 1e-8
    assert np.all(np.abs(res.grad) <= 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_subset_numerator_has_nonpositive_loss(seed):
    num, den = subset_pair(seed)
    assert lfmmi(num, den, np.random.default_rng(seed).uniform(-3, 0, (4, 5))).loss <= 0.0


@pytest.mark.parametrize("seed", range(3))
def test_column_shift_leaves_everything_unchanged(seed):
    num, den = subset_pair(seed)
    Phi = np.random.default_rng(seed).uniform(-3, 0, (4, 5))
    base = lfmmi(num, den, Phi)
    shifted = Phi.copy()
    shifted[:, 2] += 7.5
    moved = lfmmi(num, den, shifted)
    assert moved.loss == pytest.approx(base.loss, abs=1e-10)
    np.testing.assert_allclose(moved.grad, base.grad, atol=1e-10)


def test_errors():
    g = random_graph(4, 8, 0, "ngram")
    with pytest.raises(DimensionMismatchError):
        lfmmi(g, random_graph(5, 8, 0, "ngram"), np.zeros((4, 3)))
    with pytest.raises(DimensionMismatchError):
        lfmmi(g, g, np.zeros((3, 3)))
    chain = load_graph("K 4\nI 0 0\nF 3 0\nA 0 1 0\nA 1 2 0\nA 2 3 0\n")
    with pytest.raises(EmptyLatticeError, match="numerator"):
        lfmmi(chain, g, np.zeros((4, 2)))
    with pytest.raises(EmptyLatticeError, match="denominator"):
        lfmmi(g, chain, np.zeros((4, 2)))


class TestBatch:
    def test_batch_of_one(self):
        num, den = subset_pair(0)
        Phi = np.random.default_rng(0).uniform(-3, 0, (4, 5))
        out = lfmmi_batch([num], den, [Phi])
        solo = lfmmi(num, den, Phi)
        assert out.results[0].loss == solo.loss
        assert np.array_equal(out.results[0].grad, solo.grad)
        assert out.total_loss == solo.loss and out.frames == 5

    def test_identical_members(self):
        num, den = subset_pair(1)
        Phi = np.random.default_rng(1).uniform(-3, 0, (4, 5))
        out = lfmmi_batch([num] * 4, den, [Phi] * 4)
        assert len({r.loss for r in out.results}) == 1
        assert all(np.array_equal(r.grad, out.results[0].grad) for r in out.results)

    def test_mixed_lengths_match_solo(self):
        rng = np.random.default_rng(2)
        nums, Phis = [], []
        for s, N in zip(range(3), (3, 6, 4)):
            num, den = subset_pair(s)
            nums.append(num)
            Phis.append(rng.uniform(-3, 0, (4, N)))
        den = random_graph(4, 12, 0, "ngram")
        out = lfmmi_batch(nums, den, Phis)
        assert out.frames == 13
        for r, num, Phi in zip(out.results, nums, Phis):
            solo = lfmmi(num, den, Phi)
            assert r.loss == solo.loss
            assert np.array_equal(r.grad, solo.grad)
        assert out.total_loss == pytest.approx(sum(lfmmi(n, den, P).loss for n, P in zip(nums, Phis)))

    def test_empty_member_does_not_sink_batch(self):
        den = random_graph(4, 12, 0, "ngram")
        chain = load_graph("K 4\nI 0 0\nF 3 0\nA 0 1 0\nA 1 2 0\nA 2 3 0\n")
        Phis = [np.zeros((4, 4)), np.zeros((4, 2))]
        out = lfmmi_batch([chain, chain], den, Phis)
        assert out.results[0] is not None and math.isfinite(out.results[0].loss)
        assert out.results[1] is None
        assert isinstance(out.errors[1], EmptyLatticeError) and "numerator" in str(out.errors[1])
