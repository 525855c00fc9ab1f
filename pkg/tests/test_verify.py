import math

import numpy as np
import pytest

from fi_lab.constants import SolverOptions, solve_tls, solve_tmls
from fi_lab.curvature import curvature
from fi_lab.errors import InputMismatch, NotApplicable
from fi_lab.functionals import dirichlet, gamma
from fi_lab.generators import flip, hypercube, rank_one
from fi_lab.semigroup import spectral_cache
from fi_lab.verify import (
    TIMES, check_chain_rule, check_dirichlet_bound, check_heat_regularity, check_lemmas,
    check_pointwise_chain_rule, check_subcommutation, check_theorems, conjecture_probe,
    contraction_tightness, subcommutation_tightness, verify,
)

OPTS = SolverOptions(restarts=16, seed=0)
THEOREM_IDS = {"extremizer_regularity", "lsi_mlsi_lower", "lsi_mlsi_upper", "curvature_lsi", "relaxation_curvature"}
LEMMA_IDS = {
    "diameter_bound", "heat_log_regularity", "dirichlet_upper", "approximate_chain_rule", "pointwise_chain_rule",
    "subcommutation", "lipschitz_contraction", "herbst_concentration", "dirac_bound",
    "subcommutation_tight", "contraction_tight",
}


def _pipeline(ch):
    tls = solve_tls(ch, OPTS)
    return ch, tls, solve_tmls(ch, OPTS, tls=tls), curvature(ch)


@pytest.fixture(scope="module")
def r16():
    return _pipeline(rank_one(n=16))


@pytest.fixture(scope="module")
def two():
    return _pipeline(flip())


def _by_id(records):
    return {r.check_id: r for r in records}


def test_rank_one_sixteen_theorems(r16):
    ch, tls, tmls, curv = r16
    recs = _by_id(check_theorems(ch, tls, tmls, curv))
    assert set(recs) == THEOREM_IDS
    assert all(r.status == "pass" for r in recs.values())
    # margin is computed from the curvature actually measured
    rhs = 33 * math.log(16) / curv.kappa_be
    assert recs["curvature_lsi"].margin == pytest.approx(rhs - tls.value)


def test_flip_skips_and_equality(two):
    ch, tls, tmls, curv = two
    recs = _by_id(check_theorems(ch, tls, tmls, curv))
    for cid in ("extremizer_regularity", "lsi_mlsi_upper", "curvature_lsi"):
        assert recs[cid].status == "skipped"
        assert recs[cid].reason == "d < 2"
    low = recs["lsi_mlsi_lower"]
    assert low.status == "pass"
    assert abs(low.margin) < 1e-12
    assert tls.value == pytest.approx(1.0) and tmls.value == pytest.approx(0.25)


def test_hypercube_four_all_pass():
    rep = verify(*_pipeline(hypercube(4)), samples=100)
    assert rep.ok
    assert not rep.failures


def test_lemmas_rank_one_eight():
    ch, tls, tmls, curv = _pipeline(rank_one(n=8))
    assert curv.kappa_ollivier == pytest.approx(1.0, abs=1e-9)
    recs = check_lemmas(ch, seed=1, samples=200, tls=tls, tmls=tmls, curv=curv)
    assert {r.check_id for r in recs} == LEMMA_IDS
    assert all(r.status == "pass" for r in recs), [r for r in recs if r.status != "pass"]


def test_constant_observables():
    ch = hypercube(3)
    F = np.full((3, ch.n), 2.0)
    mats = [spectral_cache(ch).heat_matrix(t) for t in TIMES]
    assert check_heat_regularity(ch, F, mats).status == "pass"
    for rec in (
        check_dirichlet_bound(ch, F, F),
        check_chain_rule(ch, F),
        check_pointwise_chain_rule(ch, F),
    ):
        assert rec.status == "pass"
        assert rec.margin == 0.0


def test_dirichlet_bound_with_square():
    ch = hypercube(3)
    F = np.exp(np.random.default_rng(4).uniform(-3, 3, (100, ch.n)))
    rec = check_dirichlet_bound(ch, F, F**2)
    assert rec.status == "pass"
    lhs = dirichlet(F**2, F**2, ch)
    rhs = 2 * np.sqrt(dirichlet(F, F, ch) * ((F**2 * gamma(F**2, F**2, ch)) @ ch.pi))
    assert np.all(lhs <= rhs + 1e-9)


def test_conjecture_probe(r16, two):
    ch, tls, _, curv = r16
    assert conjecture_probe(ch, tls, curv) == pytest.approx(tls.value / math.log(16), rel=1e-9)
    with pytest.raises(NotApplicable):
        conjecture_probe(two[0], two[1], two[3])
    ch3, tls3, _, curv3 = _pipeline(hypercube(3))
    val = conjecture_probe(ch3, tls3, curv3)
    assert math.isfinite(val) and val > 0


def test_reproducible_and_complete(r16):
    a = verify(*r16, seed=3, samples=50)
    b = verify(*r16, seed=3, samples=50)
    assert a.to_dict() == b.to_dict()
    ids = [r.check_id for r in a.records]
    assert sorted(ids) == ids
    assert len(ids) == len(set(ids)) == len(THEOREM_IDS | LEMMA_IDS)
    for r in a.records:
        assert (r.status == "skipped" and r.reason) or r.samples >= 1


def test_input_mismatch(r16):
    ch, tls, tmls, curv = r16
    with pytest.raises(InputMismatch):
        check_theorems(hypercube(2), tls, tmls, curv)


def test_fail_record_is_replayable():
    ch = hypercube(2)
    curv = curvature(ch)
    F = np.exp(np.random.default_rng(9).uniform(-3, 3, (20, ch.n)))
    mats = [spectral_cache(ch).heat_matrix(t) for t in TIMES]
    rec = check_subcommutation(ch, F, mats, curv.kappa_be + 1.0, seed=9)
    assert rec.status == "fail"
    w = rec.witness
    assert w["seed"] == 9 and w["t"] in TIMES
    f = np.array(w["observable"])
    assert np.array_equal(f, F[w["sample"]])
    P = mats[TIMES.index(w["t"])]
    lhs = gamma(P @ f, P @ f, ch)
    rhs = math.exp(-2 * (curv.kappa_be + 1.0) * w["t"]) * (P @ gamma(f, f, ch))
    assert np.min(rhs - lhs) == pytest.approx(rec.margin)


def test_tightness_on_flip(two):
    ch, _, _, curv = two
    assert subcommutation_tightness(ch, curv) > 0
    assert contraction_tightness(ch, curv) > 0
    # the computed values themselves are feasible
    assert subcommutation_tightness(ch, curv, delta=0.0) <= 1e-9
    assert contraction_tightness(ch, curv, delta=0.0) <= 1e-9
