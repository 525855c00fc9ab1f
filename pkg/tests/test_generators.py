import numpy as np
import pytest

from fi_lab.chain import validate_chain
from fi_lab.errors import InvalidParams
from fi_lab.generators import (
    FamilyParams, battery, birth_death, cycle, flip, hypercube, make_chain, path, random_graph, rank_one,
)


def test_rank_one_two_states():
    np.testing.assert_array_equal(rank_one(n=2).T, [[0.5, 0.5], [0.5, 0.5]])


def test_rank_one_pi():
    pi = (0.1, 0.2, 0.3, 0.4)
    ch = rank_one(pi=pi)
    np.testing.assert_allclose(ch.T, np.tile(pi, (4, 1)))
    np.testing.assert_allclose(ch.pi, pi)


def test_hypercube_two():
    ch = hypercube(2)
    assert ch.n == 4
    assert ch.d == 2
    assert ch.diam == 2
    assert ch.labels == ("00", "01", "10", "11")


def test_product_of_flips_is_square():
    two = FamilyParams("hypercube", n=1)
    ch = make_chain(FamilyParams("product", children=(two, two), weights=(0.5, 0.5)))
    np.testing.assert_array_equal(ch.T, hypercube(2).T)


def test_product_pi_is_tensor_product():
    a = FamilyParams("birth_death", up=(0.3, 0.5), down=(0.1, 0.2))
    b = FamilyParams("rank_one", pi=(0.25, 0.75))
    ch = make_chain(FamilyParams("product", children=(a, b), weights=(0.3, 0.7)))
    pa, pb = make_chain(a).pi, make_chain(b).pi
    np.testing.assert_allclose(ch.pi, np.kron(pa, pb), atol=1e-12)


def test_random_graph_deterministic():
    a = random_graph(12, 0.4, seed=3)
    b = random_graph(12, 0.4, seed=3)
    np.testing.assert_array_equal(a.T, b.T)
    c = random_graph(12, 0.4, seed=4)
    assert not np.array_equal(a.T, c.T)


def test_random_graph_walk():
    ch = random_graph(10, 0.5, seed=1)
    A = ch.T > 0
    deg = A.sum(axis=1)
    np.testing.assert_allclose(ch.T[A], np.repeat(1 / deg, deg))
    np.testing.assert_allclose(ch.pi, deg / deg.sum())


def test_birth_death_pi_product_formula():
    up = [0.4, 0.1, 0.3]
    down = [0.2, 0.25, 0.05]
    ch = birth_death(up, down)
    w = np.cumprod([1.0] + [u / d for u, d in zip(up, down)])
    np.testing.assert_allclose(ch.pi, w / w.sum(), rtol=1e-12)
    assert np.all(np.diag(ch.T) >= 0)


def test_cycle_and_path():
    c = cycle(5)
    assert c.diam == 2
    assert c.d == 2
    p = path(4)
    assert p.diam == 3
    np.testing.assert_allclose(p.T[0], [0.5, 0.5, 0, 0])
    np.testing.assert_allclose(p.pi, 0.25)


def test_flip():
    np.testing.assert_array_equal(flip().T, [[0, 1], [1, 0]])


def test_every_generated_chain_validates():
    for ch in battery().values():
        again = validate_chain(ch.T, ch.pi, labels=ch.labels)
        np.testing.assert_array_equal(again.T, ch.T)


def test_invalid_params():
    with pytest.raises(InvalidParams):
        make_chain(FamilyParams("nope", n=3))
    with pytest.raises(InvalidParams):
        make_chain(FamilyParams("cycle"))
    with pytest.raises(InvalidParams):
        make_chain(FamilyParams("random_graph", n=5, p=0.0))
    with pytest.raises(InvalidParams):
        make_chain(FamilyParams("birth_death", up=(0.5,)))
    two = FamilyParams("hypercube", n=1)
    with pytest.raises(InvalidParams):
        make_chain(FamilyParams("product", children=(two, two), weights=(0.6, 0.6)))
