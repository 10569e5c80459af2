import numpy as np
import pytest
from hypothesis import given, strategies as st

from tripleshadow.bell import bell_distribution, estimate_products, magnitudes_from_products
from tripleshadow.pauli import to_pauli_vector
from tripleshadow.states import TestStateSpec, generate_state, make_stabilizer_state
from tripleshadow.support import (
    MU_GRID,
    BlockSchedule,
    MagnitudeTable,
    SupportSet,
    jaccard,
    jaccard_masks,
    run_stage1,
    threshold_support,
)

from conftest import random_density


def test_block_schedules():
    fixed = BlockSchedule.fixed(7).blocks()
    assert [next(fixed) for _ in range(3)] == [7, 7, 7]
    doubling = BlockSchedule(1, 2.0).blocks()
    assert [next(doubling) for _ in range(5)] == [1, 1, 2, 4, 8]
    with pytest.raises(ValueError):
        BlockSchedule(0, 2.0)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_ghz_support_excludes_identity(n):
    table = MagnitudeTable.exact(make_stabilizer_state("GHZ", n))
    for mu in MU_GRID:
        s = threshold_support(table, mu, use_truth=True)
        assert len(s) == 2**n - 1 and 0 not in s


def test_threshold_edges():
    assert len(threshold_support(MagnitudeTable(np.zeros(16), 2), 0.1)) == 0
    u = np.array([1.0, 1.0, 0.999, 0.3])
    assert threshold_support(MagnitudeTable(u, 1), 1.0).labels == (1,)
    with pytest.raises(ValueError):
        threshold_support(MagnitudeTable(u, 1), 1.2)
    with pytest.raises(ValueError):
        threshold_support(MagnitudeTable(u, 1), 0.5, use_truth=True)


def test_magnitude_table_clips():
    t = MagnitudeTable(np.array([1.2, -0.1, 0.4, 0.0]), 1)
    np.testing.assert_array_equal(t.u_hat, [1.0, 0.0, 0.4, 0.0])
    assert MagnitudeTable.exact(make_stabilizer_state("Zero", 2)).u_hat[0] == 1


def test_jaccard_examples():
    a = SupportSet((1, 2), 0.1, 2)
    assert jaccard(a, a) == 1
    assert jaccard(a, SupportSet((3, 4), 0.1, 2)) == 0
    assert jaccard(a, SupportSet((2, 3), 0.1, 2)) == pytest.approx(1 / 3)
    assert jaccard(SupportSet((), 0.1, 2), SupportSet((), 0.1, 2)) == 1
    with pytest.raises(ValueError):
        jaccard(a, SupportSet((1,), 0.1, 1))


@given(st.lists(st.booleans(), min_size=16, max_size=16), st.lists(st.booleans(), min_size=16, max_size=16))
def test_jaccard_mask_matches_sets(a, b):
    a, b = np.array(a), np.array(b)
    sa = SupportSet(tuple(np.flatnonzero(a)), 0.1, 2)
    sb = SupportSet(tuple(np.flatnonzero(b)), 0.1, 2)
    j = jaccard_masks(a, b)
    assert j == pytest.approx(jaccard(sa, sb))
    assert 0 <= j <= 1 and j == jaccard_masks(b, a)


@pytest.mark.parametrize("seed", range(10))
def test_zero_state_converges(seed):
    rho = make_stabilizer_state("Zero", 3)
    r = run_stage1(rho, 0.5, seed=seed)
    assert r.met and r.jaccard >= 0.9 and 0 < r.samples <= 3 * 10**7
    assert r.counts.total == r.samples == r.counts.counts.sum()


def test_zero_cap_returns_immediately():
    r = run_stage1(make_stabilizer_state("GHZ", 2), 0.5, cap=0, seed=1)
    assert (r.samples, r.met, r.trace) == (0, False, [])


def test_cap_reached_is_not_an_error():
    rho = random_density(3, np.random.default_rng(3))
    r = run_stage1(rho, 0.05, cap=500, seed=0)
    assert r.samples == 500 and not r.met


def test_trace_nondecreasing_and_deterministic():
    rho = generate_state(TestStateSpec("Gibbs", 3, 8, 5)).rho
    a = run_stage1(rho, 0.11, seed=4)
    b = run_stage1(rho, 0.11, seed=4)
    assert a.trace == b.trace
    samples = [s for s, _ in a.trace]
    assert samples == sorted(samples) and samples[-1] == a.samples


def test_support_members_meet_threshold():
    rho = generate_state(TestStateSpec("Gibbs", 3, 8, 5)).rho
    r = run_stage1(rho, 0.11, seed=2)
    assert all(r.table.u_hat[i] >= 0.11 for i in r.support.labels)
    assert 0 not in r.support


def test_target_subset_restricts_scoring():
    rho = make_stabilizer_state("GHZ", 3)
    r = run_stage1(rho, 0.3, seed=0, target=[5, 9])
    assert set(r.support.labels) <= {5, 9}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_exact_distribution_recovers_support(n):
    rho = random_density(n, np.random.default_rng(n))
    pv = to_pauli_vector(rho)
    u = magnitudes_from_products(estimate_products(bell_distribution(pv, pv).probs))
    np.testing.assert_allclose(u, np.abs(pv.coeffs), atol=1e-7)
    exact = MagnitudeTable.exact(pv)
    for mu in MU_GRID:
        est = threshold_support(MagnitudeTable(u, n), mu)
        assert jaccard(est, threshold_support(exact, mu, use_truth=True)) == 1


def test_samples_grow_as_threshold_shrinks():
    pv = to_pauli_vector(generate_state(TestStateSpec("Gibbs", 4, 30, 3)).rho)
    dist = bell_distribution(pv, pv)
    m = np.array([[run_stage1(pv, mu, seed=s, dist=dist, truth=pv).samples for mu in MU_GRID]
                  for s in range(10)])
    # adjacent grid points, per seed: smaller mu needs at least as many samples
    assert np.mean(m[:, :-1] >= m[:, 1:]) >= 0.8


def test_gibbs_needs_more_samples_than_ghz():
    gibbs = to_pauli_vector(generate_state(TestStateSpec("Gibbs", 5, 16, 11)).rho)
    ghz = to_pauli_vector(make_stabilizer_state("GHZ", 5))
    med = {}
    for name, pv in (("gibbs", gibbs), ("ghz", ghz)):
        dist = bell_distribution(pv, pv)
        med[name] = np.median([run_stage1(pv, 0.0525, seed=s, dist=dist, truth=pv).samples for s in range(7)])
    assert med["gibbs"] > med["ghz"]
