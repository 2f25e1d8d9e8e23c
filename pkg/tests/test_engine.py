import itertools
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import oracle
from pcamf.bounds import clt_interval
from pcamf.dynamics import find_fixed_points
from pcamf.engine import (DensitySeries, PcaState, RuleParams, activation_probabilities,
                          initial_state, majority_prob, run, run_many, step)
from pcamf.graphs import DisconnectedGraphWarning, Graph, build_random, build_torus
from pcamf.meanfield import MeanFieldMap
from pcamf.seeding import derive_seed, stream


@pytest.mark.parametrize("k,r,p,expected", [(4, 3, 0.1, 0.9), (4, 2, 0.1, 0.1), (5, 0, 0.5, 0.5),
                                            (5, 3, 0.2, 0.8), (0, 0, 0.3, 0.3)])
def test_majority_prob(k, r, p, expected):
    assert majority_prob(k, r, p) == expected


def test_majority_prob_domain():
    with pytest.raises(ValueError):
        majority_prob(4, 5, 0.1)


def test_rule_params_validation():
    with pytest.raises(ValueError):
        RuleParams(0.6)
    with pytest.raises(ValueError):
        RuleParams(0.1, rule="voter")


def test_state_validation():
    with pytest.raises(ValueError):
        PcaState([0, 2, 1])


@pytest.mark.parametrize("value", [0, 1])
def test_p_zero_absorbing(value):
    g = build_torus(4, 4)
    s = run(g, RuleParams(0.0), T=30, seed=3, initial=np.full(16, value))
    assert np.all(s.values == value)


def test_step_matches_deterministic_majority():
    g = build_torus(5, 4)
    rng = np.random.default_rng(0)
    state = PcaState(rng.integers(0, 2, 25))
    nxt = step(g, state, RuleParams(0.0), rng)
    for u, nb in enumerate(g.adjacency):
        assert nxt.states[u] == int(2 * state.states[list(nb)].sum() > len(nb))
    assert nxt.t == 1


def test_step_length_mismatch():
    with pytest.raises(ValueError):
        step(build_torus(4, 4), PcaState(np.zeros(9)), RuleParams(0.1), np.random.default_rng())


def test_isolated_node_uses_p():
    g = Graph.from_edges(4, [(1, 2), (2, 3)], "random")
    prob = activation_probabilities(g, [1, 1, 1, 1], 0.2)
    assert prob[0] == 0.2 and prob[2] == 0.8


def test_one_step_mean_from_all_active():
    g = build_torus(4, 4)
    runs = 10_000
    out = run_many([g] * runs, RuleParams(0.1), 1, range(runs), initial=np.ones(16))
    rho1 = np.array([s.values[1] for s in out])
    se = math.sqrt(0.9 * 0.1 / 16 / runs)
    assert abs(rho1.mean() - 0.9) < 4 * se


def test_series_shape_and_lattice():
    s = run(build_torus(4, 4), RuleParams(0.2), T=50, seed=5)
    assert len(s.values) == 51
    np.testing.assert_array_equal(s.values * 16, np.round(s.values * 16))
    assert s.values.min() >= 0 and s.values.max() <= 1


def test_determinism():
    g = build_torus(5, 4)
    a = run(g, RuleParams(0.3), T=200, seed=42)
    b = run(g, RuleParams(0.3), T=200, seed=42)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, run(g, RuleParams(0.3), T=200, seed=43).values)


def test_batched_equals_single():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DisconnectedGraphWarning)
        graphs = [build_random(30, 0.2, s) for s in range(4)]
    seeds = [11, 12, 13, 14]
    batch = run_many(graphs, RuleParams(0.15), 600, seeds)
    for g, sd, b in zip(graphs, seeds, batch):
        np.testing.assert_array_equal(run(g, RuleParams(0.15), T=600, seed=sd).values, b.values)


def test_block_boundary_does_not_shift_stream():
    g = build_torus(4, 4)
    long = run(g, RuleParams(0.2), T=700, seed=9)
    short = run(g, RuleParams(0.2), T=300, seed=9)
    np.testing.assert_array_equal(long.values[:301], short.values)


def test_initial_state_rho0():
    s = initial_state(10_000, 1, rho0=0.3)
    assert abs(s.mean() - 0.3) < 4 * math.sqrt(0.21 / 10_000)
    with pytest.raises(ValueError):
        initial_state(10, 1, rho0=1.5)


def test_default_initial_count_uniform():
    counts = np.bincount([initial_state(8, s).sum() for s in range(9000)], minlength=9)
    assert stats.chisquare(counts).pvalue > 0.01


def test_attractive_half_on_torus():
    n, p = 100, 0.35
    s = run(build_torus(10, 4), RuleParams(p), T=5000, seed=2017)
    avg = s.values[-1000:].mean()
    mf = MeanFieldMap.grid(4, p)
    (fp,) = find_fixed_points(mf)
    assert avg in clt_interval(fp.rho_star, float(mf.sigma2(fp.rho_star, n)), 0.95)
    assert avg in clt_interval(0.5, 0.25 / n, 0.95)


def _ring(n, gamma):
    return build_torus(n, gamma, dim=1)


@pytest.mark.parametrize("n,gamma", [(10, 4), (12, 2), (11, 6)])
def test_one_step_mean_exact_enumeration(n, gamma):
    # E[rho_{t+1}] over an iid Bernoulli(rho) configuration equals p_grid
    g = _ring(n, gamma)
    p, rho = Fraction(1, 5), Fraction(3, 10)
    total = Fraction(0)
    for bits in itertools.product((0, 1), repeat=n):
        k = sum(bits)
        w = rho ** k * (1 - rho) ** (n - k)
        act = sum(oracle.xi(len(nb), sum(bits[v] for v in nb), p) for nb in g.adjacency)
        total += w * Fraction(act, n)
    assert total == oracle.grid(gamma, p, rho)
    engine = np.mean([
        np.mean(activation_probabilities(g, bits, 0.2)) * 0.3 ** sum(bits) * 0.7 ** (n - sum(bits))
        for bits in itertools.product((0, 1), repeat=n)]) * 2 ** n
    assert engine == pytest.approx(float(oracle.grid(gamma, p, rho)), abs=1e-12)


def test_translation_exchangeability():
    side, runs, T = 5, 1000, 15
    g = build_torus(side, 4)
    perm = np.array([((i + 1) % side) * side + (j + 2) % side
                     for i in range(side) for j in range(side)])
    h = g.relabel(perm)
    a = run_many([g] * runs, RuleParams(0.2), T, [derive_seed("a", i) for i in range(runs)])
    b = run_many([h] * runs, RuleParams(0.2), T, [derive_seed("b", i) for i in range(runs)])
    assert stats.ks_2samp([s.values[-1] for s in a], [s.values[-1] for s in b]).pvalue > 0.01


def test_csv_roundtrip():
    s = run(build_torus(4, 4), RuleParams(0.2), T=10, seed=1)
    text = s.to_csv()
    assert "t,rho" in text.splitlines()
    assert "# seed=1" in text
    back = DensitySeries.from_csv(text)
    np.testing.assert_array_equal(back.values, s.values)
    assert back.n == 16


def test_streams_independent_by_tag():
    assert stream(5, 1).random() != stream(5, 2).random()
    assert stream(5, 1).random() == stream(5, 1).random()


@settings(max_examples=25, deadline=None)
@given(p=st.floats(0, 0.5), seed=st.integers(0, 2 ** 63), T=st.integers(1, 40))
def test_series_values_closed(p, seed, T):
    s = run(build_torus(3, 4), RuleParams(p), T=T, seed=seed)
    assert len(s.values) == T + 1
    assert np.all((s.values >= 0) & (s.values <= 1))
    np.testing.assert_array_equal(s.counts, np.round(s.values * 9))
