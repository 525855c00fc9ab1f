"""Generator and heat semigroup P_t = exp(tL) of a reversible chain."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats

from .chain import ChainSpec
from .errors import DimensionMismatch, NegativeTime, TrivialChain
from .functionals import generator_apply

CLIP = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralCache:
    """Eigen-decomposition of the symmetrized generator D^{1/2} L D^{-1/2}.

    ``basis`` columns are orthonormal in l2(pi): basis.T @ diag(pi) @ basis = I,
    and L = basis @ diag(eigenvalues) @ basis.T @ diag(pi).
    """

    chain: ChainSpec
    eigenvalues: np.ndarray  # ascending, last one is 0
    basis: np.ndarray

    @classmethod
    def build(cls, chain: ChainSpec) -> "SpectralCache":
        s = np.sqrt(chain.pi)
        S = s[:, None] * chain.generator / s[None, :]
        S = 0.5 * (S + S.T)
        w, V = np.linalg.eigh(S)
        w = np.where((w > 0) & (w < CLIP), 0.0, w)
        basis = V / s[:, None]
        # fix the sign of the constant mode for reproducible output
        if basis[:, -1].sum() < 0:
            basis[:, -1] *= -1
        w.setflags(write=False)
        basis.setflags(write=False)
        return cls(chain, w, basis)

    def heat_matrix(self, t: float) -> np.ndarray:
        """Matrix of P_t, so that (P_t f) = heat_matrix(t) @ f."""
        if t < 0:
            raise NegativeTime(f"t = {t} < 0")
        if t == 0:
            return np.eye(self.chain.n)
        return (self.basis * np.exp(t * self.eigenvalues)) @ (self.basis.T * self.chain.pi)

    def reconstruction_error(self) -> float:
        L = (self.basis * self.eigenvalues) @ (self.basis.T * self.chain.pi)
        return float(np.max(np.abs(L - self.chain.generator)))


@lru_cache(maxsize=64)
def _cache_for(chain: ChainSpec) -> SpectralCache:
    return SpectralCache.build(chain)


def spectral_cache(chain: ChainSpec) -> SpectralCache:
    """Shared per-chain cache (chains are immutable and hashed by identity)."""
    return _cache_for(chain)


def heat(f, t: float, chain: ChainSpec, cache: SpectralCache | None = None) -> np.ndarray:
    """P_t f for a single observable or a stack along the last axis."""
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != chain.n:
        raise DimensionMismatch(f"expected last axis of length {chain.n}, got shape {f.shape}")
    if t < 0:
        raise NegativeTime(f"t = {t} < 0")
    if t == 0:
        return f.copy()
    cache = cache or spectral_cache(chain)
    return f @ cache.heat_matrix(t).T


def heat_poisson(f, t: float, chain: ChainSpec, width: float = 20.0) -> np.ndarray:
    """P_t f as the Poisson(t) average of T^k f, truncated at mean + width*sd."""
    f = np.asarray(f, dtype=float)
    if t < 0:
        raise NegativeTime(f"t = {t} < 0")
    kmax = int(np.ceil(t + width * np.sqrt(t))) + 1
    weights = stats.poisson.pmf(np.arange(kmax + 1), t)
    out = np.zeros_like(f)
    term = f.copy()
    for k in range(kmax + 1):
        out += weights[k] * term
        term = term @ chain.T.T
    return out


def relaxation_time(chain: ChainSpec, cache: SpectralCache | None = None) -> float:
    """Inverse spectral gap of L."""
    if chain.n < 2:
        raise TrivialChain("relaxation time needs at least two states")
    cache = cache or spectral_cache(chain)
    return float(-1.0 / cache.eigenvalues[-2])


__all__ = [
    "SpectralCache",
    "spectral_cache",
    "generator_apply",
    "heat",
    "heat_poisson",
    "relaxation_time",
]
