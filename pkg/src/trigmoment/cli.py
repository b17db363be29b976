"""Command-line front end.

Exit codes: 0 success, 2 moment problem not solvable, 1 any other failure
(I/O, malformed input, bad parameter, failed verification).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .errors import TrigMomentError, ValidationError
from .extension import (
    ExtensionParam,
    identity_param,
    resolvent_sampler,
    resolvent_values,
    s0,
    taylor_moments,
)
from .gram import factor_gram
from .isometry import IsometryA, build_isometry
from .moments import DEFAULT_TOL, build_toeplitz, check_solvable, trivial_solution_d0
from .solutions import canonical_solution, poisson_invert, verify_solution

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSOLVABLE = 2

COMMANDS = ("check", "canonical", "resolvent", "extend", "invert", "verify")


class CLIError(Exception):
    pass


class Unsolvable(Exception):
    def __init__(self, report):
        super().__init__("moment problem is not solvable")
        self.report = report


@dataclass(frozen=True)
class RunConfig:
    command: str
    moments: Path
    out: Optional[Path]
    tol_psd: float = DEFAULT_TOL
    rank_tol: float = DEFAULT_TOL
    verify_tol: float = 1e-8
    rho: float = 0.5
    grid: Optional[int] = None
    r: float = 0.999
    nmax: Optional[int] = None
    param: Optional[Path] = None
    param_identity: bool = False
    zetas: tuple = ()
    solution: Optional[Path] = None
    csv: Optional[Path] = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise CLIError(f"unknown command {self.command!r}")
        if not str(self.moments):
            raise CLIError("moments path is empty")
        if not 0 < self.rho < 1:
            raise CLIError(f"--rho must lie in (0, 1), got {self.rho}")
        if not 0 < self.r < 1:
            raise CLIError(f"--r must lie in (0, 1), got {self.r}")
        if self.grid is not None and (self.grid <= 0 or self.grid & (self.grid - 1)):
            raise CLIError(f"--grid must be a power of two, got {self.grid}")
        for name in ("tol_psd", "rank_tol", "verify_tol"):
            if getattr(self, name) <= 0:
                raise CLIError(f"--{name.replace('_', '-')} must be positive")
        if self.nmax is not None and self.nmax < 0:
            raise CLIError("--nmax must be non-negative")
        if self.command == "verify" and self.solution is None:
            raise CLIError("verify needs a solution file")
        if self.command == "resolvent" and not self.zetas:
            raise CLIError("resolvent needs at least one --zeta")


def _parse_zeta(text: str) -> complex:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        parts = []
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")
    return complex(parts[0], parts[1])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("moments", type=Path, help="moment file (JSON)")
    common.add_argument("--out", type=Path, default=None, help="output path (default: stdout)")
    common.add_argument("--tol-psd", type=float, default=DEFAULT_TOL)
    common.add_argument("--rank-tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--verify-tol", type=float, default=1e-8)

    param = argparse.ArgumentParser(add_help=False)
    group = param.add_mutually_exclusive_group()
    group.add_argument("--param", type=Path, default=None, help="parameter file (JSON)")
    group.add_argument("--param-identity", action="store_true", help="use the identity matrix as parameter")

    parser = argparse.ArgumentParser(prog="trigmoment", description="Decide and solve matrix trigonometric moment problems from finitely many moments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="decide solvability")
    sub.add_parser("canonical", parents=[common, param], help="atomic solution from a unitary parameter")
    p = sub.add_parser("resolvent", parents=[common, param], help="evaluate F(zeta)")
    p.add_argument("--zeta", type=_parse_zeta, action="append", default=[], help="RE,IM (repeatable)")
    p = sub.add_parser("extend", parents=[common, param], help="extended moments by contour integration")
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--grid", type=int, default=None)
    p = sub.add_parser("invert", parents=[common, param], help="Poisson inversion of the resolvent")
    p.add_argument("--r", type=float, default=0.999)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--csv", type=Path, default=None, help="CSV path (default: next to --out)")
    p = sub.add_parser("verify", parents=[common], help="check a solution file against the moments")
    p.add_argument("solution", type=Path)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        moments=ns.moments,
        out=ns.out,
        tol_psd=ns.tol_psd,
        rank_tol=ns.rank_tol,
        verify_tol=ns.verify_tol,
        rho=getattr(ns, "rho", 0.5),
        grid=getattr(ns, "grid", None),
        r=getattr(ns, "r", 0.999),
        nmax=getattr(ns, "nmax", None),
        param=getattr(ns, "param", None),
        param_identity=getattr(ns, "param_identity", False),
        zetas=tuple(getattr(ns, "zeta", ())),
        solution=getattr(ns, "solution", None),
        csv=getattr(ns, "csv", None),
    )


def _emit(obj, out: Optional[Path]) -> None:
    text = io.dumps(obj)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _model(cfg: RunConfig, m) -> IsometryA:
    t = build_toeplitz(m)
    report = check_solvable(t, cfg.tol_psd)
    if not report.solvable:
        raise Unsolvable(report)
    if m.d == 0:
        raise CLIError(f"command {cfg.command!r} needs d >= 1 (d=0 has only the trivial solution model)")
    return build_isometry(factor_gram(t, cfg.rank_tol))


def _param(cfg: RunConfig, a: IsometryA) -> ExtensionParam:
    if cfg.param is not None:
        return io.param_from_dict(io.load_json(cfg.param), a)
    if cfg.param_identity or a.delta == 0:
        return identity_param(a)
    raise CLIError(f"a parameter is required (δ={a.delta}); pass --param or --param-identity")


def cmd_check(cfg: RunConfig, m) -> int:
    report = check_solvable(build_toeplitz(m), cfg.tol_psd)
    _emit(report.to_dict(), cfg.out)
    return EXIT_OK if report.solvable else EXIT_UNSOLVABLE


def cmd_canonical(cfg: RunConfig, m) -> int:
    if m.d == 0:
        report = check_solvable(build_toeplitz(m), cfg.tol_psd)
        if not report.solvable:
            raise Unsolvable(report)
        sol = trivial_solution_d0(m.S[0], cfg.tol_psd)
    else:
        a = _model(cfg, m)
        sol = canonical_solution(a, _param(cfg, a))
    ver = verify_solution(sol, m, cfg.verify_tol)
    doc = io.solution_to_dict(sol)
    doc["verification"] = ver.to_dict()
    _emit(doc, cfg.out)
    if not ver.passed:
        print(f"verification failed: max residual {ver.max_residual:.3e} > {cfg.verify_tol:.3e}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_resolvent(cfg: RunConfig, m) -> int:
    a = _model(cfg, m)
    p = _param(cfg, a)
    zetas = np.array(cfg.zetas, dtype=complex)
    F = resolvent_values(a, p, zetas)
    values = [{"zeta": [float(z.real), float(z.imag)], "F": io.matrix_to_json(Fz)} for z, Fz in zip(zetas, F)]
    _emit({"values": values}, cfg.out)
    return EXIT_OK


def cmd_extend(cfg: RunConfig, m) -> int:
    a = _model(cfg, m)
    p = _param(cfg, a)
    nmax = m.d if cfg.nmax is None else cfg.nmax
    grid = cfg.grid or max(1024, 1 << (4 * (nmax + 1) - 1).bit_length())
    C = taylor_moments(a, p, nmax, cfg.rho, grid)
    k = min(nmax, m.d)
    dev = max(float(np.linalg.norm(C[n] - m.S[n], 2)) for n in range(k + 1))
    _emit({"moments": [io.matrix_to_json(c) for c in C], "consistent": dev <= 1e-6, "max_deviation": dev}, cfg.out)
    return EXIT_OK


def cmd_invert(cfg: RunConfig, m) -> int:
    a = _model(cfg, m)
    p = _param(cfg, a)
    grid = cfg.grid or 1 << 14
    sol = poisson_invert(resolvent_sampler(a, p), s0(a), cfg.r, grid)
    _emit(io.solution_to_dict(sol), cfg.out)
    csv_path = cfg.csv or (cfg.out.with_suffix(".csv") if cfg.out is not None else None)
    if csv_path is not None:
        io.write_grid_csv(sol, csv_path)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, m) -> int:
    sol = io.solution_from_dict(io.load_json(cfg.solution), m.N)
    ver = verify_solution(sol, m, cfg.verify_tol)
    _emit(ver.to_dict(), cfg.out)
    return EXIT_OK if ver.passed else EXIT_ERROR


HANDLERS = {
    "check": cmd_check,
    "canonical": cmd_canonical,
    "resolvent": cmd_resolvent,
    "extend": cmd_extend,
    "invert": cmd_invert,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    cfg = config_from_args(ns)
    try:
        cfg.validate()
        m = io.load_moments(cfg.moments)
        return HANDLERS[cfg.command](cfg, m)
    except Unsolvable as exc:
        print(f"not solvable: min eigenvalue {exc.report.min_eigenvalue:.6g}", file=sys.stderr)
        if cfg.command != "check":
            _emit(exc.report.to_dict(), cfg.out)
        return EXIT_UNSOLVABLE
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", file=sys.stderr)
        return EXIT_ERROR
    except ValidationError as exc:
        for issue in exc.issues:
            print(f"error: {issue}", file=sys.stderr)
        return EXIT_ERROR
    except (CLIError, TrigMomentError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
