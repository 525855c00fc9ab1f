"""Command-line interface: ``fi-lab <subcommand> ...``.

Exit codes: 0 when every check passes or is skipped, 1 when any check fails,
2 on input or usage errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .chain import TOL_REV, TOL_ROW, ChainSpec, chain_to_dict, load_chain, save_chain
from .constants import SolverOptions, solve_tls, solve_tmls
from .curvature import curvature
from .errors import FiLabError
from .generators import FAMILIES, FamilyParams, make_chain
from .report import SCHEMA_VERSION, dumps
from .semigroup import relaxation_time
from .verify import verify

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    subcommand: str
    input: Path | None = None
    output: Path | None = None
    restarts: int = 64
    seed: int = 0
    samples: int = 200
    suite: str = "all"
    fast: bool = False
    tol_row: float = TOL_ROW
    tol_rev: float = TOL_REV
    residual_tol: float = 1e-8
    family: FamilyParams | None = None


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _factor(text: str) -> FamilyParams:
    fam, _, n = text.partition(":")
    if fam not in FAMILIES or not n.isdigit():
        raise argparse.ArgumentTypeError(f"expected FAMILY:N, got {text!r}")
    return FamilyParams(fam, n=int(n))


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="fi-lab",
        description="Functional-inequality constants and curvature of finite reversible chains.",
        formatter_class=fmt,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, solver=True, checks=False):
        p.add_argument("input", type=Path, help="chain JSON file")
        p.add_argument("-o", "--out", type=Path, default=None, help="report path (stdout if omitted)")
        p.add_argument("--tol-row", type=float, default=TOL_ROW, help="row-sum tolerance")
        p.add_argument("--tol-rev", type=float, default=TOL_REV, help="detailed-balance tolerance")
        if solver:
            p.add_argument("--restarts", type=int, default=64, help="multi-start restarts per constant")
            p.add_argument("--seed", type=int, default=0, help="seed for restarts and sampled checks")
            p.add_argument("--residual-tol", type=float, default=1e-8, help="extremizer residual tolerance")
        if checks:
            p.add_argument("--samples", type=int, default=200, help="random observables per lemma check")
            p.add_argument("--suite", choices=("theorems", "lemmas", "all"), default="all")
        p.add_argument("--fast", action="store_true", help="Ollivier curvature over edges only")

    common(sub.add_parser("analyze", help="full pipeline into one report", formatter_class=fmt), checks=True)
    common(sub.add_parser("constants", help="t_LS, t_MLS and t_rel", formatter_class=fmt))
    common(sub.add_parser("curvature", help="Bakry-Emery and Ollivier curvature", formatter_class=fmt), solver=False)
    common(sub.add_parser("verify", help="run the check suites", formatter_class=fmt), checks=True)

    g = sub.add_parser("generate", help="write a chain from a named family", formatter_class=fmt)
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("-o", "--out", type=Path, default=None, help="chain path (stdout if omitted)")
    g.add_argument("--n", type=int, default=None, help="size parameter")
    g.add_argument("--p", type=float, default=None, help="edge probability (random_graph)")
    g.add_argument("--seed", type=int, default=0, help="seed (random_graph)")
    g.add_argument("--pi", type=_floats, default=None, help="stationary law (rank_one)")
    g.add_argument("--up", type=_floats, default=None, help="up rates (birth_death)")
    g.add_argument("--down", type=_floats, default=None, help="down rates (birth_death)")
    g.add_argument("--factor", type=_factor, action="append", default=None, help="FAMILY:N, twice (product)")
    g.add_argument("--weights", type=_floats, default=(0.5, 0.5), help="factor weights (product)")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=ns.subcommand, output=ns.out)
    if ns.subcommand == "generate":
        children = tuple(ns.factor) if ns.factor else None
        cfg.family = FamilyParams(
            ns.family, n=ns.n, pi=ns.pi, p=ns.p, seed=ns.seed, up=ns.up, down=ns.down,
            children=children, weights=tuple(ns.weights),
        )
        return cfg
    cfg.input = ns.input
    cfg.tol_row, cfg.tol_rev, cfg.fast = ns.tol_row, ns.tol_rev, ns.fast
    for key in ("restarts", "seed", "residual_tol", "samples", "suite"):
        if hasattr(ns, key):
            setattr(cfg, key, getattr(ns, key))
    return cfg


def _chain_section(chain: ChainSpec) -> dict:
    out = {"labels": list(chain.labels)}
    out.update(chain.summary())
    out["t_rel"] = relaxation_time(chain)
    return out


def build_report(cfg: RunConfig, chain: ChainSpec) -> tuple[dict, bool]:
    """Report dict for the subcommand and whether every check passed or was skipped."""
    report = {"schema_version": SCHEMA_VERSION, "chain": _chain_section(chain)}
    sub = cfg.subcommand
    ok = True
    if sub in ("analyze", "constants", "verify"):
        opts = SolverOptions(restarts=cfg.restarts, seed=cfg.seed, residual_tol=cfg.residual_tol)
        tls = solve_tls(chain, opts)
        tmls = solve_tmls(chain, opts, tls=tls)
        if sub != "verify":
            report["constants"] = {"t_ls": tls.to_dict(), "t_mls": tmls.to_dict(), "t_rel": relaxation_time(chain)}
    if sub in ("analyze", "curvature", "verify"):
        curv = curvature(chain, edges_only=cfg.fast)
        if sub != "verify":
            report["curvature"] = curv.to_dict()
    if sub in ("analyze", "verify"):
        ver = verify(chain, tls, tmls, curv, suite=cfg.suite, seed=cfg.seed, samples=cfg.samples)
        report["verification"] = ver.to_dict()
        ok = ver.ok
    return report, ok


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def run(cfg: RunConfig) -> int:
    if cfg.subcommand == "generate":
        chain = make_chain(cfg.family)
        if cfg.output is None:
            sys.stdout.write(dumps(chain_to_dict(chain)))
        else:
            save_chain(chain, cfg.output)
        return EXIT_OK
    chain = load_chain(cfg.input, tol_row=cfg.tol_row, tol_rev=cfg.tol_rev)
    report, ok = build_report(cfg, chain)
    _write(dumps(report), cfg.output)
    return EXIT_OK if ok else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)  # usage errors exit with code 2
    cfg = config_from_args(ns)
    try:
        return run(cfg)
    except (FiLabError, OSError) as exc:
        msg = str(exc)
        where = cfg.input or cfg.output
        if where is not None and str(where) not in msg:
            msg = f"{where}: {msg}"
        print(f"fi-lab: {type(exc).__name__}: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
