"""Bakry-Emery and Ollivier-Ricci curvature, and Wasserstein-1 transport."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainSpec
from .errors import KernelViolation, NotProbability, TrivialChain
from .simplex import linprog

RANGE_TOL = 1e-12
KERNEL_TOL = 1e-10
ZERO_SNAP = 1e-12


@dataclass
class CurvatureReport:
    kappa_be: float
    kappa_ollivier: float
    per_state: np.ndarray
    per_pair: np.ndarray
    be_witnesses: np.ndarray  # row x minimizes Gamma2/Gamma at x
    ollivier_witnesses: dict[tuple[int, int], np.ndarray] = field(repr=False)
    be_state: int = 0
    ollivier_pair: tuple[int, int] = (0, 1)
    edges_only: bool = False

    @property
    def be_witness(self) -> np.ndarray:
        return self.be_witnesses[self.be_state]

    @property
    def ollivier_witness(self) -> np.ndarray:
        return self.ollivier_witnesses[self.ollivier_pair]

    def to_dict(self) -> dict:
        return {
            "kappa_be": self.kappa_be,
            "kappa_ollivier": self.kappa_ollivier,
            "be_state": self.be_state,
            "ollivier_pair": list(self.ollivier_pair),
            "edges_only": self.edges_only,
            "per_state": self.per_state.tolist(),
            "per_pair": [[None if np.isnan(v) else v for v in row] for row in self.per_pair.tolist()],
            "be_witness": self.be_witness.tolist(),
            "ollivier_witness": self.ollivier_witness.tolist(),
        }


# --- Bakry-Emery ----------------------------------------------------------


def _gamma_form(T_row: np.ndarray, x: int) -> np.ndarray:
    """Matrix G with Gamma(f, g)(x) = f @ G @ g, from row x of T."""
    G = np.diag(T_row)
    G[x, :] -= T_row
    G[:, x] -= T_row
    G[x, x] += T_row.sum()
    return 0.5 * G


def local_forms(chain: ChainSpec, x: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(ball, A, B): Gamma2(.)(x) and Gamma(.)(x) as quadratic forms on B(x, 2).

    Both forms only see values within distance 2 of x, so they are built on
    that ball (``ball`` holds the global indices).
    """
    ball = np.flatnonzero(chain.dist[x] <= 2)
    T = chain.T[np.ix_(ball, ball)]
    m = ball.size
    lx = int(np.flatnonzero(ball == x)[0])
    near = np.flatnonzero(chain.dist[x, ball] <= 1)
    G = {int(z): _gamma_form(T[z], int(z)) for z in near}
    Gx = G[lx]
    K = T - np.eye(m)  # rows of states at distance 2 are truncated but never used
    LG = sum(T[lx, z] * (G[int(z)] - Gx) for z in near)
    A = 0.5 * LG - 0.5 * (Gx @ K + K.T @ Gx)
    return ball, 0.5 * (A + A.T), Gx


def _state_kappa(chain: ChainSpec, x: int) -> tuple[float, np.ndarray]:
    ball, A, B = local_forms(chain, x)
    w, V = np.linalg.eigh(B)
    rng_mask = w > RANGE_TOL * max(w.max(), 1.0)
    Vr, Vk, wr = V[:, rng_mask], V[:, ~rng_mask], w[rng_mask]
    Akk = Vk.T @ A @ Vk
    if Akk.size and np.linalg.eigvalsh(Akk).min() < -KERNEL_TOL:
        raise KernelViolation(f"Gamma2 form at state {x} is not PSD on ker Gamma")
    Arr = Vr.T @ A @ Vr
    Akr = Vk.T @ A @ Vr
    # eliminate the kernel directions: Schur complement of the kernel block.
    # The cutoff is absolute (scaled by |A|) so rounding noise on flat
    # directions such as the constants is never inverted.
    if Akk.size:
        mu, U = np.linalg.eigh(Akk)
        keep = mu > RANGE_TOL * max(np.abs(A).max(), 1.0)
        inv = (U[:, keep] / mu[keep]) @ U[:, keep].T
        elim = inv @ Akr
    else:
        elim = np.zeros((0, wr.size))
    S = Arr - Akr.T @ elim
    scale = 1.0 / np.sqrt(wr)
    W = scale[:, None] * S * scale[None, :]
    W = 0.5 * (W + W.T)
    lam, Y = np.linalg.eigh(W)
    cr = scale * Y[:, 0]
    local = Vr @ cr - Vk @ (elim @ cr)
    f = np.zeros(chain.n)
    f[ball] = local
    k = int(np.argmax(np.abs(f)))
    if f[k] < 0:
        f = -f
    return float(lam[0]), f


def bakry_emery_kappa(chain: ChainSpec) -> tuple[float, np.ndarray, np.ndarray]:
    """Largest kappa with Gamma2 >= kappa Gamma pointwise.

    Returns (kappa, per-state values, witnesses), where row x of the witness
    array attains Gamma2(f)(x) = kappa_x Gamma(f)(x).
    """
    if chain.n < 2:
        raise TrivialChain("curvature needs at least two states")
    per_state = np.empty(chain.n)
    witnesses = np.empty((chain.n, chain.n))
    for x in range(chain.n):
        per_state[x], witnesses[x] = _state_kappa(chain, x)
    # rounding noise around a flat direction must not read as a sign
    per_state[np.abs(per_state) < ZERO_SNAP] = 0.0
    return float(per_state.min()), per_state, witnesses


# --- Ollivier-Ricci -------------------------------------------------------


def _pair_kappa(chain: ChainSpec, x: int, y: int) -> tuple[float, np.ndarray]:
    """min (Lf(y) - Lf(x)) / dist(x,y) over 1-Lipschitz f with f(x)-f(y) = dist(x,y).

    Only the values on B(x,1) u B(y,1) enter the objective, and a 1-Lipschitz
    function on a subset extends to the whole graph, so the LP lives on that
    union with pairwise distance constraints.
    """
    D = chain.dist
    S = np.flatnonzero((D[x] <= 1) | (D[y] <= 1))
    m = S.size
    ix, iy = int(np.flatnonzero(S == x)[0]), int(np.flatnonzero(S == y)[0])
    Tl = chain.T[np.ix_([x, y], S)]
    c = Tl[1] - Tl[0]
    c[iy] -= 1.0
    c[ix] += 1.0
    dxy = float(D[x, y])
    pairs = [(u, v) for u, v in itertools.permutations(range(m), 2)]
    A_ub = np.zeros((len(pairs), m))
    b_ub = np.empty(len(pairs))
    for k, (u, v) in enumerate(pairs):
        A_ub[k, u], A_ub[k, v] = 1.0, -1.0
        b_ub[k] = D[S[u], S[v]]
    A_eq = np.zeros((1, m))
    A_eq[0, ix] = 1.0
    bounds = [(-float(D[y, s]), float(D[y, s])) for s in S]
    res = linprog(c, A_ub, b_ub, A_eq, [dxy], bounds=bounds)
    f = np.zeros(chain.n)
    f[S] = res.x
    # extend off the union by the McShane formula so the witness is global
    rest = np.setdiff1d(np.arange(chain.n), S)
    if rest.size:
        f[rest] = np.min(res.x[None, :] + D[np.ix_(rest, S)], axis=1)
    return res.fun / dxy, f


def ollivier_kappa(chain: ChainSpec, edges_only: bool = False):
    """Lipschitz contraction rate of the semigroup, minimized over pairs.

    Returns (kappa, per-pair matrix with NaN on skipped pairs, witness dict).
    """
    if chain.n < 2:
        raise TrivialChain("curvature needs at least two states")
    per_pair = np.full((chain.n, chain.n), np.nan)
    witnesses = {}
    for x, y in itertools.permutations(range(chain.n), 2):
        if edges_only and chain.dist[x, y] != 1:
            continue
        per_pair[x, y], witnesses[(x, y)] = _pair_kappa(chain, x, y)
    per_pair[np.abs(per_pair) < ZERO_SNAP] = 0.0
    return float(np.nanmin(per_pair)), per_pair, witnesses


def curvature(chain: ChainSpec, edges_only: bool = False) -> CurvatureReport:
    kbe, per_state, be_w = bakry_emery_kappa(chain)
    kol, per_pair, ol_w = ollivier_kappa(chain, edges_only=edges_only)
    flat = np.where(np.isnan(per_pair), np.inf, per_pair)
    pair = np.unravel_index(int(np.argmin(flat)), flat.shape)
    return CurvatureReport(
        kappa_be=kbe,
        kappa_ollivier=kol,
        per_state=per_state,
        per_pair=per_pair,
        be_witnesses=be_w,
        ollivier_witnesses=ol_w,
        be_state=int(np.argmin(per_state)),
        ollivier_pair=(int(pair[0]), int(pair[1])),
        edges_only=edges_only,
    )


# --- Wasserstein-1 --------------------------------------------------------


def _check_prob(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or not np.all(np.isfinite(p)) or abs(p.sum() - 1) > 1e-9:
        raise NotProbability(f"{name} is not a probability vector")
    return p


def transport_plan(mu, nu, dist) -> tuple[float, np.ndarray]:
    """Optimal coupling of mu and nu for the cost matrix dist."""
    mu = _check_prob(mu, "mu")
    nu = _check_prob(nu, "nu")
    dist = np.asarray(dist, dtype=float)
    I = np.flatnonzero(mu > 0)
    J = np.flatnonzero(nu > 0)
    a, b = I.size, J.size
    cost = dist[np.ix_(I, J)].ravel()
    A_eq = np.zeros((a + b, a * b))
    for i in range(a):
        A_eq[i, i * b : (i + 1) * b] = 1.0
    for j in range(b):
        A_eq[a + j, j::b] = 1.0
    res = linprog(cost, A_eq=A_eq, b_eq=np.concatenate([mu[I], nu[J]]))
    plan = np.zeros((mu.size, nu.size))
    plan[np.ix_(I, J)] = res.x.reshape(a, b)
    return res.fun, plan


def wasserstein1(mu, nu, dist) -> float:
    """W1 distance, solved as a transportation LP."""
    return transport_plan(mu, nu, dist)[0]


def kantorovich_dual(mu, nu, dist, edges=None) -> tuple[float, np.ndarray]:
    """max sum f (mu - nu) over 1-Lipschitz f.

    With ``edges`` (pairs (u, v) of a graph whose path metric is ``dist``) only
    edge constraints are imposed, which is equivalent and much smaller.
    """
    mu = _check_prob(mu, "mu")
    nu = _check_prob(nu, "nu")
    dist = np.asarray(dist, dtype=float)
    n = mu.size
    if edges is None:
        edges = list(itertools.permutations(range(n), 2))
    else:
        edges = sorted({(int(u), int(v)) for u, v in edges if u != v} | {(int(v), int(u)) for u, v in edges if u != v})
    A_ub = np.zeros((len(edges), n))
    b_ub = np.empty(len(edges))
    for k, (u, v) in enumerate(edges):
        A_ub[k, u], A_ub[k, v] = 1.0, -1.0
        b_ub[k] = dist[u, v]
    bounds = [(-float(dist[0, z]), float(dist[0, z])) for z in range(n)]
    res = linprog(-(mu - nu), A_ub, b_ub, bounds=bounds)
    return -res.fun, res.x
