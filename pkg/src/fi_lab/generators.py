"""Benchmark families of reversible chains."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainSpec, validate_chain
from .errors import DisconnectedSample, InvalidParams

FAMILIES = ("rank_one", "hypercube", "cycle", "path", "birth_death", "random_graph", "product")
MAX_RETRIES = 100


@dataclass(frozen=True)
class FamilyParams:
    family: str
    n: int | None = None
    pi: tuple[float, ...] | None = None
    p: float | None = None
    seed: int = 0
    up: tuple[float, ...] | None = None
    down: tuple[float, ...] | None = None
    children: tuple["FamilyParams", "FamilyParams"] | None = None
    weights: tuple[float, float] = (0.5, 0.5)


def _rank_one(pi) -> tuple[np.ndarray, np.ndarray, list[str]]:
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1 or pi.size < 1 or np.any(pi <= 0) or abs(pi.sum() - 1) > 1e-12:
        raise InvalidParams("rank_one needs a fully supported probability vector")
    T = np.tile(pi, (pi.size, 1))
    return T, pi, [str(i) for i in range(pi.size)]


def _hypercube(n: int):
    if n < 1:
        raise InvalidParams("hypercube dimension must be >= 1")
    N = 1 << n
    T = np.zeros((N, N))
    for x in range(N):
        for k in range(n):
            T[x, x ^ (1 << k)] = 1.0 / n
    labels = [format(x, f"0{n}b") for x in range(N)]
    return T, np.full(N, 1.0 / N), labels


def _cycle(n: int):
    if n < 3:
        raise InvalidParams("cycle needs n >= 3")
    T = np.zeros((n, n))
    for x in range(n):
        T[x, (x + 1) % n] += 0.5
        T[x, (x - 1) % n] += 0.5
    return T, np.full(n, 1.0 / n), [str(i) for i in range(n)]


def _path(n: int):
    if n < 2:
        raise InvalidParams("path needs n >= 2")
    T = np.zeros((n, n))
    for x in range(n):
        if x > 0:
            T[x, x - 1] = 0.5
        if x < n - 1:
            T[x, x + 1] = 0.5
        # endpoints hold the missing half step
        T[x, x] = 1.0 - T[x].sum()
    return T, np.full(n, 1.0 / n), [str(i) for i in range(n)]


def _birth_death(up, down):
    up = np.asarray(up, dtype=float)
    down = np.asarray(down, dtype=float)
    if up.shape != down.shape or up.ndim != 1 or up.size < 1:
        raise InvalidParams("birth_death needs up/down rate vectors of length n-1")
    if np.any(up <= 0) or np.any(down <= 0):
        raise InvalidParams("birth_death rates must be positive")
    n = up.size + 1
    T = np.zeros((n, n))
    for x in range(n - 1):
        T[x, x + 1] = up[x]
        T[x + 1, x] = down[x]
    diag = 1.0 - T.sum(axis=1)
    if np.any(diag < -1e-15):
        raise InvalidParams("birth_death rates leave a row with total mass above 1")
    T[np.arange(n), np.arange(n)] = np.clip(diag, 0.0, None)
    # detailed balance: pi(x+1)/pi(x) = up[x]/down[x]
    w = np.concatenate([[0.0], np.cumsum(np.log(up) - np.log(down))])
    pi = np.exp(w - w.max())
    return T, pi / pi.sum(), [str(i) for i in range(n)]


def _random_graph(n: int, p: float, seed: int):
    if n < 2 or p is None or not 0 < p <= 1:
        raise InvalidParams("random_graph needs n >= 2 and 0 < p <= 1")
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    for _ in range(MAX_RETRIES):
        A = np.zeros((n, n), dtype=bool)
        A[iu] = rng.random(iu[0].size) < p
        A |= A.T
        if _connected(A):
            deg = A.sum(axis=1)
            T = A / deg[:, None]
            return T, deg / deg.sum(), [str(i) for i in range(n)]
    raise DisconnectedSample(f"no connected G({n}, {p}) sample in {MAX_RETRIES} tries (seed {seed})")


def _connected(A: np.ndarray) -> bool:
    seen = np.zeros(A.shape[0], dtype=bool)
    seen[0] = True
    frontier = seen.copy()
    while frontier.any():
        nxt = A[frontier].any(axis=0) & ~seen
        seen |= nxt
        frontier = nxt
    return bool(seen.all())


def _build(params: FamilyParams):
    fam = params.family
    if fam == "rank_one":
        if params.pi is not None:
            return _rank_one(params.pi)
        if not params.n or params.n < 1:
            raise InvalidParams("rank_one needs n or pi")
        return _rank_one(np.full(params.n, 1.0 / params.n))
    if fam == "hypercube":
        return _hypercube(_need_n(params))
    if fam == "cycle":
        return _cycle(_need_n(params))
    if fam == "path":
        return _path(_need_n(params))
    if fam == "birth_death":
        if params.up is None or params.down is None:
            raise InvalidParams("birth_death needs up and down rates")
        return _birth_death(params.up, params.down)
    if fam == "random_graph":
        return _random_graph(_need_n(params), params.p, params.seed)
    if fam == "product":
        if params.children is None or len(params.children) != 2:
            raise InvalidParams("product needs two child families")
        w1, w2 = params.weights
        if w1 < 0 or w2 < 0 or abs(w1 + w2 - 1) > 1e-12:
            raise InvalidParams("product weights must be non-negative and sum to 1")
        T1, pi1, l1 = _build(params.children[0])
        T2, pi2, l2 = _build(params.children[1])
        T = w1 * np.kron(T1, np.eye(len(pi2))) + w2 * np.kron(np.eye(len(pi1)), T2)
        labels = [f"({a},{b})" for a, b in itertools.product(l1, l2)]
        return T, np.kron(pi1, pi2), labels
    raise InvalidParams(f"unknown family {fam!r}; expected one of {', '.join(FAMILIES)}")


def _need_n(params: FamilyParams) -> int:
    if params.n is None:
        raise InvalidParams(f"{params.family} needs n")
    return int(params.n)


def make_chain(params: FamilyParams) -> ChainSpec:
    T, pi, labels = _build(params)
    return validate_chain(T, pi, labels=labels)


# shorthands used throughout the tests and the battery


def rank_one(pi=None, n: int | None = None) -> ChainSpec:
    return make_chain(FamilyParams("rank_one", n=n, pi=None if pi is None else tuple(pi)))


def hypercube(n: int) -> ChainSpec:
    return make_chain(FamilyParams("hypercube", n=n))


def flip() -> ChainSpec:
    """Two-point chain that always moves, T = [[0,1],[1,0]]."""
    return hypercube(1)


def cycle(n: int) -> ChainSpec:
    return make_chain(FamilyParams("cycle", n=n))


def path(n: int) -> ChainSpec:
    return make_chain(FamilyParams("path", n=n))


def birth_death(up, down) -> ChainSpec:
    return make_chain(FamilyParams("birth_death", up=tuple(up), down=tuple(down)))


def random_graph(n: int, p: float, seed: int = 0) -> ChainSpec:
    return make_chain(FamilyParams("random_graph", n=n, p=p, seed=seed))


def battery() -> dict[str, ChainSpec]:
    """The standard benchmark battery, keyed by a short name."""
    chains = {}
    for n in (2, 8, 16):
        chains[f"rank_one_{n}"] = rank_one(n=n)
    for n in (2, 3, 4):
        chains[f"hypercube_{n}"] = hypercube(n)
    for n in (4, 5, 8):
        chains[f"cycle_{n}"] = cycle(n)
    chains["birth_death_10"] = birth_death([0.4] * 9, [0.2] * 9)
    for s in range(5):
        chains[f"random_graph_12_{s}"] = random_graph(12, 0.4, seed=s)
    return chains
