"""Finite reversible Markov chains: validation, stationary measure, graph metric.

A chain is stored densely.  All numerics use 0-based indices; state labels are
carried along for reporting only.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NotIrreducible,
    NotReversible,
    ParseError,
    RowSumError,
    SchemaError,
    StationarityError,
    ChainError,
)

TOL_ROW = 1e-12
TOL_REV = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """A validated irreducible chain, reversible with respect to ``pi``.

    Build these with :func:`validate_chain`; the constructor does not check
    anything on its own.
    """

    labels: tuple[str, ...]
    T: np.ndarray
    pi: np.ndarray
    dist: np.ndarray
    d: float
    d_offdiag: float

    n: int = field(init=False)
    pi_star: float = field(init=False)
    diam: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.T.shape[0]))
        object.__setattr__(self, "pi_star", float(self.pi.min()))
        object.__setattr__(self, "diam", int(self.dist.max()))

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Index arrays (rows, cols) of positive entries, in lexicographic order."""
        return np.nonzero(self.T > 0)

    @property
    def generator(self) -> np.ndarray:
        return self.T - np.eye(self.n)

    def summary(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "diam": self.diam,
            "pi_star": self.pi_star,
            "d_below_2": bool(self.d < 2),
        }


@dataclass(frozen=True, eq=False)
class Observable:
    """A function on the state space, as a length-n vector."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))

    @property
    def positive(self) -> bool:
        return bool(np.all(self.values > 0))

    def check(self, chain: ChainSpec) -> "Observable":
        if self.values.shape != (chain.n,):
            raise DimensionMismatch(f"observable has shape {self.values.shape}, chain has n={chain.n}")
        return self

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return len(self.values)


def stationary_distribution(T: np.ndarray) -> np.ndarray:
    """Solve pi T = pi, sum(pi) = 1 by least squares on the stacked system."""
    n = T.shape[0]
    A = np.vstack([T.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi / pi.sum()


def _bfs_distances(adj: list[np.ndarray], n: int) -> np.ndarray:
    dist = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        row = dist[s]
        row[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if row[v] < 0:
                    row[v] = row[u] + 1
                    queue.append(v)
    return dist


def _distances(T: np.ndarray) -> np.ndarray:
    n = T.shape[0]
    adj = [np.flatnonzero(T[x] > 0) for x in range(n)]
    return _bfs_distances(adj, n)


def sparsity_d(chain_or_T, include_diagonal: bool = True) -> float:
    """max 1/T(x,y) over positive entries.

    The literal definition ranges over every positive entry, holding
    probabilities included.  ``include_diagonal=False`` restricts to moves.
    """
    T = chain_or_T.T if isinstance(chain_or_T, ChainSpec) else np.asarray(chain_or_T, dtype=float)
    mask = T > 0
    if not include_diagonal:
        mask &= ~np.eye(T.shape[0], dtype=bool)
    if not mask.any():
        return math.inf
    return float(1.0 / T[mask].min())


def graph_distance(chain: ChainSpec) -> np.ndarray:
    """Hop distance of the positive-entry graph, min{k : T^k(x,y) > 0}."""
    return _distances(chain.T)


def validate_chain(
    T,
    pi=None,
    labels: Sequence[str] | None = None,
    tol_row: float = TOL_ROW,
    tol_rev: float = TOL_REV,
) -> ChainSpec:
    T = np.array(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] < 1:
        raise ChainError(f"transition matrix must be square and non-empty, got shape {T.shape}")
    if not np.all(np.isfinite(T)):
        raise ChainError("transition matrix contains NaN or Inf")
    n = T.shape[0]
    if (T < 0).any():
        x, y = np.argwhere(T < 0)[0]
        raise NegativeEntry(f"T[{x},{y}] = {float(T[x, y])!r} is negative")
    sums = T.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol_row)
    if bad.size:
        raise RowSumError(int(bad[0]), float(sums[bad[0]]))

    dist = _distances(T)
    if (dist < 0).any():
        x, y = np.argwhere(dist < 0)[0]
        raise NotIrreducible(f"state {y} is not reachable from state {x}")

    if pi is None:
        pi = stationary_distribution(T)
    else:
        pi = np.array(pi, dtype=float)
        if pi.shape != (n,):
            raise DimensionMismatch(f"pi has shape {pi.shape}, expected ({n},)")
        if not np.all(np.isfinite(pi)):
            raise ChainError("pi contains NaN or Inf")
        if abs(pi.sum() - 1.0) > tol_row * n:
            raise ChainError(f"pi sums to {float(pi.sum())!r}")
    if not np.all(pi > 0):
        raise ChainError("stationary vector must be fully supported")

    flow = pi[:, None] * T
    scale = flow.max()
    gap = np.abs(flow - flow.T)
    if gap.max() > tol_rev * scale:
        x, y = np.unravel_index(np.argmax(gap), gap.shape)
        raise NotReversible(
            f"detailed balance fails at ({x},{y}): {float(flow[x, y])!r} vs {float(flow[y, x])!r}"
        )

    if labels is None:
        labels = [str(i) for i in range(n)]
    labels = tuple(str(s) for s in labels)
    if len(labels) != n:
        raise DimensionMismatch(f"{len(labels)} labels for {n} states")

    return ChainSpec(
        labels=labels,
        T=_frozen(T),
        pi=_frozen(pi),
        dist=_frozen(dist),
        d=sparsity_d(T),
        d_offdiag=sparsity_d(T, include_diagonal=False),
    )


def reversibilize(T, pi, tol: float = 1e-10) -> np.ndarray:
    """Additive reversibilization (pi(x)T(x,y) + pi(y)T(y,x)) / (2 pi(x))."""
    T = np.asarray(T, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if np.max(np.abs(pi @ T - pi)) > tol:
        raise StationarityError("pi is not stationary for T")
    flow = pi[:, None] * T
    return (flow + flow.T) / (2.0 * pi[:, None])


# --- JSON ---------------------------------------------------------------


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} is not allowed")


def chain_from_dict(data, where: str = "<input>", tol_row: float = TOL_ROW, tol_rev: float = TOL_REV) -> ChainSpec:
    if not isinstance(data, dict):
        raise SchemaError(f"{where}: top level must be an object")
    for key in ("labels", "T"):
        if key not in data:
            raise SchemaError(f"{where}: missing field {key!r}")
    T = data["T"]
    if not isinstance(T, list) or not T or not all(isinstance(r, list) for r in T):
        raise ParseError(f"{where}: 'T' must be a list of rows")
    widths = {len(r) for r in T}
    if len(widths) != 1:
        raise ParseError(f"{where}: 'T' is ragged (row lengths {sorted(widths)})")
    try:
        T = np.array(T, dtype=float)
        pi = None if data.get("pi") is None else np.array(data["pi"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from None
    if not np.all(np.isfinite(T)) or (pi is not None and not np.all(np.isfinite(pi))):
        raise ParseError(f"{where}: non-finite numbers are not allowed")
    return validate_chain(T, pi, labels=data["labels"], tol_row=tol_row, tol_rev=tol_rev)


def chain_to_dict(chain: ChainSpec) -> dict:
    return {
        "labels": list(chain.labels),
        "T": chain.T.tolist(),
        "pi": chain.pi.tolist(),
    }


def load_chain(path, tol_row: float = TOL_ROW, tol_rev: float = TOL_REV) -> ChainSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except (json.JSONDecodeError, ParseError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    return chain_from_dict(data, where=str(path), tol_row=tol_row, tol_rev=tol_rev)


def save_chain(chain: ChainSpec, path) -> None:
    Path(path).write_text(json.dumps(chain_to_dict(chain)) + "\n")
