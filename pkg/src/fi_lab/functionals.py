"""Functional calculus on a finite chain.

Every function here accepts observables as arrays whose last axis indexes the
states, so a stack of functions of shape ``(m, n)`` is handled in one call.
"""

from __future__ import annotations

import numpy as np

from .chain import ChainSpec
from .errors import DimensionMismatch, NegativeArgument, NegativeValue, NonPositive

PHI_SERIES_CUTOFF = 1e-6


def _vec(f, chain: ChainSpec) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim == 0 or f.shape[-1] != chain.n:
        raise DimensionMismatch(f"expected last axis of length {chain.n}, got shape {f.shape}")
    return f


def expectation(f, chain: ChainSpec):
    return _vec(f, chain) @ chain.pi


def entropy(f, chain: ChainSpec):
    """Ent(f) = E[f log f] - E[f] log E[f], with 0 log 0 = 0.

    Evaluated as E[f log(f/m) - f + m] (m = E[f]); every summand is
    non-negative so the result never dips below zero from rounding.
    """
    f = _vec(f, chain)
    if np.any(f < 0):
        raise NegativeValue("entropy needs a non-negative function")
    m = expectation(f, chain)
    m_b = np.expand_dims(m, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(m_b > 0, f / np.where(m_b > 0, m_b, 1.0), 1.0)
        term = np.where(ratio > 0, ratio * np.log(np.where(ratio > 0, ratio, 1.0)), 0.0) - ratio + 1.0
    return m * (term @ chain.pi)


def _diff(f: np.ndarray) -> np.ndarray:
    # [..., x, y] = f(y) - f(x)
    return f[..., None, :] - f[..., :, None]


def gamma(f, g, chain: ChainSpec) -> np.ndarray:
    """Carre du champ: x -> 1/2 sum_y T(x,y)(f(y)-f(x))(g(y)-g(x))."""
    f = _vec(f, chain)
    g = _vec(g, chain)
    return 0.5 * np.sum(chain.T * _diff(f) * _diff(g), axis=-1)


def generator_apply(f, chain: ChainSpec) -> np.ndarray:
    """Lf(x) = sum_y T(x,y)(f(y) - f(x)); exactly zero on constants."""
    f = _vec(f, chain)
    return np.sum(chain.T * _diff(f), axis=-1)


def gamma2(f, chain: ChainSpec) -> np.ndarray:
    """Iterated carre du champ, 1/2 L(Gamma f) - Gamma(f, Lf)."""
    f = _vec(f, chain)
    return 0.5 * generator_apply(gamma(f, f, chain), chain) - gamma(f, generator_apply(f, chain), chain)


def dirichlet(f, g, chain: ChainSpec):
    """E[Gamma(f, g)]."""
    return expectation(gamma(f, g, chain), chain)


def dirichlet_sum(f, g, chain: ChainSpec):
    """The double-sum form 1/2 sum pi(x)T(x,y)(f(x)-f(y))(g(x)-g(y))."""
    f = _vec(f, chain)
    g = _vec(g, chain)
    flow = chain.pi[:, None] * chain.T
    return 0.5 * np.sum(flow * _diff(f) * _diff(g), axis=(-2, -1))


def lipschitz_values(f, chain: ChainSpec) -> np.ndarray:
    """max |f(x)-f(y)| over positive entries, batched over leading axes."""
    f = _vec(f, chain)
    rows, cols = chain.edges
    return np.max(np.abs(f[..., rows] - f[..., cols]), axis=-1)


def lipschitz(f, chain: ChainSpec, log: bool = False) -> tuple[float, tuple[int, int]]:
    """Lipschitz constant over allowed transitions and a maximizing pair.

    With ``log=True`` the constant of ``log f`` is returned; ``f`` must then be
    strictly positive.  Ties go to the lexicographically smallest pair.
    """
    f = _vec(f, chain)
    if f.ndim != 1:
        raise DimensionMismatch("lipschitz with witness takes a single observable")
    if log:
        if np.any(f <= 0):
            raise NonPositive("log-Lipschitz constant needs a strictly positive function")
        f = np.log(f)
    rows, cols = chain.edges
    gaps = np.abs(f[rows] - f[cols])
    k = int(np.argmax(gaps))
    return float(gaps[k]), (int(rows[k]), int(cols[k]))


def phi_cost(r):
    """Cost r (e^{r/2}+1)/(e^{r/2}-1) = r coth(r/4), with value 4 at r = 0."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise NegativeArgument("phi_cost is defined on [0, inf)")
    small = r_arr < PHI_SERIES_CUTOFF
    safe = np.where(small, 1.0, r_arr)
    out = np.where(small, 4.0 + r_arr**2 / 12.0, safe / np.tanh(safe / 4.0))
    if np.ndim(r) == 0:
        return float(out)
    return out


def log_sobolev_ratio(f, chain: ChainSpec):
    """Ent(f) / E(sqrt f)."""
    return entropy(f, chain) / dirichlet(np.sqrt(f), np.sqrt(f), chain)


def modified_ratio(f, chain: ChainSpec):
    """Ent(f) / E(f, log f)."""
    return entropy(f, chain) / dirichlet(f, np.log(f), chain)


def xlogx_excess(delta):
    """e^delta * delta - (e^delta - 1), accurate for small |delta|.

    This is F log F - F + 1 at F = e^delta, the pointwise entropy density
    relative to a unit mean.
    """
    delta = np.asarray(delta, dtype=float)
    small = np.abs(delta) < 0.1
    out = np.empty_like(delta)
    big = ~small
    out[big] = np.exp(delta[big]) * delta[big] - np.expm1(delta[big])
    ds = delta[small]
    # sum_{k>=2} (k-1) delta^k / k!
    acc = np.zeros_like(ds)
    term = ds.copy()
    for k in range(2, 24):
        term = term * ds / k
        acc += (k - 1) * term
    out[small] = acc
    return out


__all__ = [
    "expectation",
    "entropy",
    "gamma",
    "gamma2",
    "generator_apply",
    "dirichlet",
    "dirichlet_sum",
    "lipschitz",
    "lipschitz_values",
    "phi_cost",
    "log_sobolev_ratio",
    "modified_ratio",
    "xlogx_excess",
]
