"""Machine checks of the functional inequalities on a concrete chain.

Each check produces a :class:`CheckRecord`.  Checks that quantify over
functions are evaluated on seeded random observables; a failing record keeps
the offending observable, time and seed so it can be replayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainSpec
from .constants import SolveReport, solve_tls, solve_tmls
from .curvature import CurvatureReport, curvature
from .errors import InputMismatch, NotApplicable
from .functionals import dirichlet, entropy, gamma, lipschitz_values, log_sobolev_ratio, phi_cost
from .semigroup import relaxation_time, spectral_cache

POINT_TOL = 1e-9
REL_TOL = 1e-6
TIMES = (0.05, 0.2, 1.0, 5.0)
TIGHT_TIMES = (1e-4, 1e-3, 1e-2, 0.05)
TIGHT_DELTA = 0.05
HERBST_FUNCTIONS = 50


@dataclass
class CheckRecord:
    check_id: str
    statement: str
    status: str  # "pass", "fail" or "skipped"
    margin: float | None = None  # worst rhs - lhs; negative means violated
    tolerance: float = 0.0
    samples: int = 0
    reason: str = ""
    witness: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "check_id": self.check_id,
            "statement": self.statement,
            "status": self.status,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "samples": self.samples,
        }
        if self.reason:
            out["reason"] = self.reason
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class VerificationReport:
    chain: dict
    records: list[CheckRecord]
    conjecture: dict = field(default_factory=dict)

    @property
    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if r.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def __getitem__(self, check_id: str) -> CheckRecord:
        for r in self.records:
            if r.check_id == check_id:
                return r
        raise KeyError(check_id)

    def to_dict(self) -> dict:
        return {
            "chain": self.chain,
            "records": [r.to_dict() for r in self.records],
            "conjecture": self.conjecture,
        }


def _skip(check_id, statement, reason) -> CheckRecord:
    return CheckRecord(check_id, statement, "skipped", reason=reason)


def _scalar(check_id, statement, lhs, rhs, tol, **extra) -> CheckRecord:
    margin = float(rhs - lhs)
    status = "pass" if margin >= -tol else "fail"
    return CheckRecord(check_id, statement, status, margin, tol, samples=1, witness=extra or None)


def _batch(check_id, statement, lhs, rhs, tol, inputs, seed, times=None) -> CheckRecord:
    """Compare lhs <= rhs + tol over arrays shaped (..., samples[, n]).

    ``inputs`` is the sample stack (samples, n); when ``times`` is given the
    leading axis of lhs/rhs runs over it.
    """
    gap = np.asarray(rhs - lhs, dtype=float)
    n_samples = inputs.shape[0]
    flat = gap.reshape(gap.shape[0], n_samples, -1) if times is not None else gap.reshape(1, n_samples, -1)
    per = flat.min(axis=2)
    k_t, k_s = np.unravel_index(int(np.argmin(per)), per.shape)
    margin = float(per[k_t, k_s])
    status = "pass" if margin >= -tol else "fail"
    witness = None
    if status == "fail":
        witness = {"observable": inputs[k_s].tolist(), "sample": int(k_s), "seed": seed}
        if times is not None:
            witness["t"] = float(times[k_t])
    return CheckRecord(check_id, statement, status, margin, tol, samples=n_samples, witness=witness)


def fingerprint_check(chain: ChainSpec, *reports) -> None:
    for rep in reports:
        if rep is None:
            continue
        size = rep.witness.shape[0] if isinstance(rep, SolveReport) else rep.per_state.shape[0]
        if size != chain.n:
            raise InputMismatch(f"report built for n={size}, chain has n={chain.n}")


# --- theorem suite ----------------------------------------------------------


def check_theorems(
    chain: ChainSpec,
    tls: SolveReport,
    tmls: SolveReport,
    curv: CurvatureReport,
    rel_tol: float = REL_TOL,
) -> list[CheckRecord]:
    fingerprint_check(chain, tls, tmls, curv)
    d = chain.d
    logd = math.log(d)
    records = []

    st = "Lip(log f) <= 14 log d for a non-constant LSI extremizer f"
    if d < 2:
        records.append(_skip("extremizer_regularity", st, "d < 2"))
    elif tls.degenerate is not False:
        records.append(_skip("extremizer_regularity", st, "no converged non-constant extremizer (degenerate case)"))
    else:
        lip = 2 * float(lipschitz_values(np.log(tls.witness), chain))
        records.append(
            _scalar("extremizer_regularity", st, lip, 14 * logd, POINT_TOL, residual=tls.residual, lip_log_f=lip)
        )

    # both constants are lower bounds; if they clash, the MLS witness itself
    # certifies a larger LSI ratio
    t_ls = tls.value
    st = "4 t_MLS <= t_LS"
    extra = {}
    if 4 * tmls.value > t_ls:
        alt = float(log_sobolev_ratio(tmls.witness, chain))
        if alt > t_ls:
            extra["t_ls_from_mls_witness"] = alt
            t_ls = alt
    records.append(_scalar("lsi_mlsi_lower", st, 4 * tmls.value, t_ls, rel_tol * t_ls, **extra))

    st = "t_LS <= 15 t_MLS log d"
    if d < 2:
        records.append(_skip("lsi_mlsi_upper", st, "d < 2"))
    else:
        rhs = 15 * tmls.value * logd
        records.append(_scalar("lsi_mlsi_upper", st, tls.value, rhs, rel_tol * rhs))

    kappa = curv.kappa_be
    st = "t_LS <= 33 log d / kappa when kappa > 0"
    if kappa <= 0:
        records.append(_skip("curvature_lsi", st, "Bakry-Emery curvature is not positive"))
    elif d < 2:
        records.append(_skip("curvature_lsi", st, "d < 2"))
    else:
        rhs = 33 * logd / kappa
        records.append(_scalar("curvature_lsi", st, tls.value, rhs, rel_tol * rhs))

    st = "t_rel <= 1 / kappa when kappa > 0"
    if kappa <= 0:
        records.append(_skip("relaxation_curvature", st, "Bakry-Emery curvature is not positive"))
    else:
        records.append(_scalar("relaxation_curvature", st, relaxation_time(chain), 1 / kappa, 1e-8))
    return records


def conjecture_probe(chain: ChainSpec, tls: SolveReport, curv: CurvatureReport) -> float:
    """t_LS * kappa_ollivier / log d, the constant a chain would need."""
    if curv.kappa_ollivier <= 0:
        raise NotApplicable("Ollivier curvature is not positive")
    if chain.d < 2:
        raise NotApplicable("d < 2")
    return tls.value * curv.kappa_ollivier / math.log(chain.d)


# --- lemma suite -------------------------------------------------------------


def random_positive(chain: ChainSpec, rng: np.random.Generator, samples: int) -> np.ndarray:
    """Observables with log-values i.i.d. uniform on [-3, 3]."""
    return np.exp(rng.uniform(-3.0, 3.0, size=(samples, chain.n)))


def random_lipschitz(chain: ChainSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """Mean-zero 1-Lipschitz functions: McShane envelopes of random heights."""
    D = chain.dist.astype(float)
    out = np.empty((count, chain.n))
    for k in range(count):
        if k % 5 == 0:
            f = -D[rng.integers(chain.n)]  # distance to a point, the extreme case
        else:
            h = rng.uniform(0.0, max(chain.diam, 1), size=chain.n)
            f = np.min(h[None, :] + D, axis=1)
        out[k] = f - f @ chain.pi
    return out


def check_diameter(chain, tls, rel_tol=REL_TOL) -> CheckRecord:
    rhs = math.sqrt(2) * tls.value
    return _scalar("diameter_bound", "diam <= sqrt(2) t_LS", chain.diam, rhs, rel_tol * rhs)


def check_dirac(chain, tls, rel_tol=REL_TOL) -> CheckRecord:
    return _scalar(
        "dirac_bound", "log(1/pi_*) <= t_LS", math.log(1 / chain.pi_star), tls.value, rel_tol * tls.value
    )


def check_heat_regularity(chain, F, heat_mats, seed=None) -> CheckRecord:
    logd = math.log(chain.d)
    base = lipschitz_values(np.log(F), chain)
    lhs = np.stack([lipschitz_values(np.log(F @ P.T), chain) for P in heat_mats])
    return _batch(
        "heat_log_regularity", "Lip(log P_t f) <= Lip(log f) + log d", lhs, base + logd, POINT_TOL, F, seed, TIMES
    )


def check_dirichlet_bound(chain, F, G, seed=None) -> CheckRecord:
    lhs = dirichlet(F**2, G, chain)
    rhs = 2 * np.sqrt(np.maximum(dirichlet(F, F, chain), 0) * ((F**2 * gamma(G, G, chain)) @ chain.pi))
    return _batch("dirichlet_upper", "E(f^2, g) <= 2 sqrt(E(f) E[f^2 Gamma g])", lhs, rhs, POINT_TOL, F, seed)


def check_chain_rule(chain, F, seed=None) -> CheckRecord:
    logF = np.log(F)
    lhs = (F * gamma(logF, logF, chain)) @ chain.pi
    rhs = (1 + lipschitz_values(logF, chain)) * dirichlet(F, logF, chain)
    return _batch(
        "approximate_chain_rule", "E[f Gamma(log f)] <= (1 + Lip(log f)) E(f, log f)", lhs, rhs, POINT_TOL, F, seed
    )


def check_pointwise_chain_rule(chain, F, seed=None) -> CheckRecord:
    logF = np.log(F)
    root = np.sqrt(F)
    lhs = gamma(F, logF, chain)
    rhs = phi_cost(lipschitz_values(logF, chain))[:, None] * gamma(root, root, chain)
    return _batch(
        "pointwise_chain_rule", "Gamma(f, log f) <= phi(Lip(log f)) Gamma(sqrt f)", lhs, rhs, POINT_TOL, F, seed
    )


def check_subcommutation(chain, F, heat_mats, kappa, seed=None, times=TIMES, check_id="subcommutation"):
    gF = gamma(F, F, chain)
    lhs, rhs = [], []
    for t, P in zip(times, heat_mats):
        PF = F @ P.T
        lhs.append(gamma(PF, PF, chain))
        rhs.append(math.exp(-2 * kappa * t) * (gF @ P.T))
    return _batch(
        check_id, "Gamma(P_t f) <= exp(-2 kappa t) P_t Gamma(f)", np.stack(lhs), np.stack(rhs), POINT_TOL, F, seed, times
    )


def check_contraction(chain, F, heat_mats, kappa, seed=None, times=TIMES, check_id="lipschitz_contraction"):
    base = lipschitz_values(F, chain)
    lhs = np.stack([lipschitz_values(F @ P.T, chain) for P in heat_mats])
    rhs = np.stack([math.exp(-kappa * t) * base for t in times])
    return _batch(check_id, "Lip(P_t f) <= exp(-kappa_O t) Lip(f)", lhs, rhs, POINT_TOL, F, seed, times)


def check_herbst(chain, tmls, rng, seed=None, count=HERBST_FUNCTIONS, rel_tol=REL_TOL) -> CheckRecord:
    """P(f >= s) <= exp(-s^2 / (2 t_MLS)) for mean-zero 1-Lipschitz f.

    Thresholds are the non-negative values f takes, where the tail is largest.
    """
    fs = random_lipschitz(chain, rng, count)
    t_mls = tmls.value * (1 + rel_tol)
    worst = np.inf
    where = None
    for k, f in enumerate(fs):
        for s in np.unique(f[f >= 0]):
            tail = chain.pi[f >= s - 1e-12].sum()
            gap = math.exp(-s * s / (2 * t_mls)) - tail
            if gap < worst:
                worst, where = gap, (k, float(s))
    status = "pass" if worst >= -POINT_TOL else "fail"
    witness = None
    if status == "fail":
        witness = {"observable": fs[where[0]].tolist(), "threshold": where[1], "seed": seed}
    return CheckRecord(
        "herbst_concentration",
        "P(f >= s) <= exp(-s^2 / (2 t_MLS)) for mean-zero 1-Lipschitz f",
        status,
        float(worst),
        POINT_TOL,
        samples=count,
        witness=witness,
    )


def subcommutation_tightness(chain, curv, delta=TIGHT_DELTA, times=TIGHT_TIMES) -> float:
    """Largest violation of sub-commutation at kappa + delta for the stored witness.

    A positive return value means the inequality fails, i.e. kappa cannot be
    raised by delta.
    """
    cache = spectral_cache(chain)
    f = curv.be_witness[None, :]
    rec = check_subcommutation(
        chain, f, [cache.heat_matrix(t) for t in times], curv.kappa_be + delta, times=times
    )
    return -rec.margin


def contraction_tightness(chain, curv, delta=TIGHT_DELTA, times=TIGHT_TIMES) -> float:
    cache = spectral_cache(chain)
    f = curv.ollivier_witness[None, :]
    rec = check_contraction(
        chain, f, [cache.heat_matrix(t) for t in times], curv.kappa_ollivier + delta, times=times
    )
    return -rec.margin


def check_lemmas(
    chain: ChainSpec,
    seed: int = 0,
    samples: int = 200,
    tls: SolveReport | None = None,
    tmls: SolveReport | None = None,
    curv: CurvatureReport | None = None,
) -> list[CheckRecord]:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    tls = tls or solve_tls(chain)
    tmls = tmls or solve_tmls(chain)
    curv = curv or curvature(chain)
    fingerprint_check(chain, tls, tmls, curv)

    rng = np.random.default_rng(seed)
    F = random_positive(chain, rng, samples)
    G = rng.standard_normal((samples, chain.n))
    cache = spectral_cache(chain)
    heat_mats = [cache.heat_matrix(t) for t in TIMES]

    records = [
        check_diameter(chain, tls),
        check_heat_regularity(chain, F, heat_mats, seed),
        check_dirichlet_bound(chain, F, G, seed),
        check_chain_rule(chain, F, seed),
        check_pointwise_chain_rule(chain, F, seed),
        check_subcommutation(chain, F, heat_mats, curv.kappa_be, seed),
        check_contraction(chain, F, heat_mats, curv.kappa_ollivier, seed),
        check_herbst(chain, tmls, rng, seed),
        check_dirac(chain, tls),
    ]
    st = "sub-commutation fails at kappa + 0.05 for the curvature witness"
    gap = subcommutation_tightness(chain, curv)
    records.append(CheckRecord("subcommutation_tight", st, "pass" if gap > 0 else "fail", gap, 0.0, samples=1))
    st = "Lipschitz contraction fails at kappa_O + 0.05 for the LP witness"
    gap = contraction_tightness(chain, curv)
    records.append(CheckRecord("contraction_tight", st, "pass" if gap > 0 else "fail", gap, 0.0, samples=1))
    return records


def verify(
    chain: ChainSpec,
    tls: SolveReport,
    tmls: SolveReport,
    curv: CurvatureReport,
    suite: str = "all",
    seed: int = 0,
    samples: int = 200,
) -> VerificationReport:
    records = []
    if suite in ("theorems", "all"):
        records += check_theorems(chain, tls, tmls, curv)
    if suite in ("lemmas", "all"):
        records += check_lemmas(chain, seed, samples, tls, tmls, curv)
    records.sort(key=lambda r: r.check_id)
    try:
        conj = {"value": conjecture_probe(chain, tls, curv)}
    except NotApplicable as exc:
        conj = {"value": None, "reason": str(exc)}
    return VerificationReport(chain=chain.summary(), records=records, conjecture=conj)
