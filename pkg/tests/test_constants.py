import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fi_lab.chain import validate_chain
from fi_lab.constants import (
    SolverOptions, extremizer_residual, ls_ratio, mls_ratio, solve_tls, solve_tmls,
)
from fi_lab.errors import NonPositive, TrivialChain
from fi_lab.functionals import lipschitz_values
from fi_lab.generators import birth_death, flip, hypercube, rank_one
from fi_lab.semigroup import relaxation_time

FAST = SolverOptions(restarts=16, seed=0)
GRID = np.logspace(-6, 6, 24001)


def _two_point_grid(T, pi):
    """sup over f = (a, 1) of the two ratios, from explicit two-state formulas."""
    a = GRID[np.abs(GRID - 1) > 1e-9]
    m = pi[0] * a + pi[1]
    ent = pi[0] * a * np.log(a / m) + pi[1] * np.log(1 / m)
    w = pi[0] * T[0, 1]  # edge weight pi(0) T(0,1) = pi(1) T(1,0)
    e_sqrt = w * (np.sqrt(a) - 1) ** 2
    e_mod = w * (a - 1) * np.log(a)
    return (ent / e_sqrt).max(), (ent / e_mod).max()


def test_two_point_grid_oracles():
    for ch, tls_exp, tmls_exp in ((rank_one(n=2), 2.0, 0.5), (flip(), 1.0, 0.25)):
        g_ls, g_mls = _two_point_grid(ch.T, ch.pi)
        tls = solve_tls(ch, FAST)
        tmls = solve_tmls(ch, FAST, tls=tls)
        assert g_ls == pytest.approx(tls_exp, abs=0.01)
        assert g_mls == pytest.approx(tmls_exp, abs=0.005)
        assert tls.value == pytest.approx(tls_exp, abs=0.01)
        assert tls.degenerate is True
        assert tmls.value == pytest.approx(tmls_exp, abs=0.005)
        assert abs(tmls.notes["degenerate_cross_check"]) < 1e-12


def test_hypercube_two_tensorization():
    # two independent rate-1/2 flips: each component has t_LS = 2 t_rel = 2
    assert relaxation_time(hypercube(2)) == pytest.approx(1.0)
    assert solve_tls(hypercube(2), FAST).value == pytest.approx(2.0, abs=0.02)


def _two_level_sup(n):
    """Rank-one uniform: sup over f = (a, 1, ..., 1) by a log grid."""
    p = 1.0 / n
    a = GRID[np.abs(GRID - 1) > 1e-9]
    m = p * a + (1 - p)
    ent = p * a * np.log(a / m) + (1 - p) * np.log(1 / m)
    # E(sqrt f) = 1/2 sum pi(x) pi(y) (sqrt f(x) - sqrt f(y))^2
    e = p * (1 - p) * (np.sqrt(a) - 1) ** 2
    return (ent / e).max()


@pytest.mark.parametrize("n", [4, 8, 16])
def test_rank_one_log_sobolev(n):
    closed = math.log(n - 1) / (1 - 2 / n)
    oracle = _two_level_sup(n)
    rep = solve_tls(rank_one(n=n), FAST)
    assert rep.degenerate is False
    assert oracle <= rep.value + 1e-9
    assert rep.value == pytest.approx(closed, rel=1e-9)
    assert oracle == pytest.approx(closed, rel=1e-6)


def test_hypercube_values():
    for n in (3, 4):
        ch = hypercube(n)
        tls = solve_tls(ch, FAST)
        assert tls.value == pytest.approx(n, rel=1e-12)
        assert solve_tmls(ch, FAST, tls=tls).value == pytest.approx(n / 4, rel=1e-9)


@pytest.fixture(scope="module")
def asym():
    ch = birth_death([0.6] * 5, [0.1] * 5)
    tls = solve_tls(ch, FAST)
    return ch, tls, solve_tmls(ch, FAST, tls=tls)


def test_non_degenerate_certificate(asym):
    ch, tls, tmls = asym
    for rep, ratio in ((tls, ls_ratio), (tmls, mls_ratio)):
        assert rep.degenerate is False
        assert rep.residual <= 1e-8
        assert ratio(rep.witness, ch) == pytest.approx(rep.value, abs=1e-9)
    assert extremizer_residual(tls.witness, tls.value, ch) <= 1e-8
    assert ch.pi @ tls.witness**2 == pytest.approx(1.0, abs=1e-12)
    assert ch.pi @ tmls.witness == pytest.approx(1.0, abs=1e-12)
    # regularity of the extremizer f* = g^2
    assert 2 * lipschitz_values(np.log(tls.witness), ch) <= 14 * math.log(ch.d)


def test_floors(asym):
    ch, tls, tmls = asym
    trel = relaxation_time(ch)
    assert tls.value >= 2 * trel
    assert tls.value >= math.log(1 / ch.pi_star)
    assert tmls.value >= trel / 2
    assert 4 * tmls.value <= tls.value * (1 + 1e-6)


def test_ratio_history(asym):
    _, tls, _ = asym
    assert len(tls.ratio_history) == tls.restarts_used == 16
    running = np.maximum.accumulate(np.nan_to_num(tls.ratio_history, nan=-np.inf))
    assert np.all(np.diff(running) >= 0)
    assert running[-1] == pytest.approx(tls.witness_ratio)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_value_dominates_random_ratios(asym, seed):
    ch, tls, tmls = asym
    F = np.exp(np.random.default_rng(seed).uniform(-3, 3, (50, ch.n)))
    for f in F:
        assert ls_ratio(np.sqrt(f), ch) <= tls.value * (1 + 1e-9)
        assert mls_ratio(f, ch) <= tmls.value * (1 + 1e-9)


def test_extremizer_residual_examples():
    ch = birth_death([0.3, 0.2, 0.5], [0.1, 0.4, 0.2])
    assert extremizer_residual(np.ones(ch.n), 3.7, ch) == 0.0
    g = np.exp(np.random.default_rng(5).uniform(-1, 1, ch.n))
    # independent re-implementation with explicit loops
    h = g / math.sqrt(sum(p * v * v for p, v in zip(ch.pi, g)))
    res = max(
        abs(sum(ch.T[x, y] * (h[y] - h[x]) for y in range(ch.n)) + 2 * h[x] * math.log(h[x]))
        for x in range(ch.n)
    )
    assert extremizer_residual(g, 1.0, ch) == pytest.approx(res, abs=1e-14)
    with pytest.raises(NonPositive):
        extremizer_residual(np.zeros(ch.n), 1.0, ch)


def test_deterministic_serial():
    ch = birth_death([0.5, 0.2, 0.4], [0.1, 0.3, 0.2])
    a = solve_tls(ch, SolverOptions(restarts=8, seed=3))
    b = solve_tls(ch, SolverOptions(restarts=8, seed=3))
    assert a.to_dict() == b.to_dict()


def test_parallel_matches_serial(monkeypatch):
    ch = birth_death([0.5, 0.2, 0.4], [0.1, 0.3, 0.2])
    serial = solve_tls(ch, SolverOptions(restarts=8, seed=3))
    monkeypatch.setenv("FI_LAB_THREADS", "4")
    par = solve_tls(ch, SolverOptions(restarts=8, seed=3))
    assert abs(par.value - serial.value) <= 1e-12
    monkeypatch.setenv("FI_LAB_THREADS", "0")
    auto = solve_tls(ch, SolverOptions(restarts=8, seed=3))
    assert abs(auto.value - serial.value) <= 1e-12


def test_trivial_chain():
    one = validate_chain([[1.0]])
    with pytest.raises(TrivialChain):
        solve_tls(one)
    with pytest.raises(TrivialChain):
        solve_tmls(one)
