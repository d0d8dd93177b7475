"""Command-line front end.

Commands: check | realize | verify | convert | gale | gramian-verify |
gramian-realize | spherical-verify | hyperbolic-verify.

Exit codes: 0 success or realized, 1 rejected or verification failure,
2 inconclusive, 3 input error.  Reports are deterministic for identical
inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import (
    DegenerateRelationError,
    NoPositiveScalingError,
    PatternViolationError,
    PolyrealizeError,
    SignatureMismatchError,
)
from .gale import gale_dual_cone, gale_dual_polytope
from .gramian import (
    GramianCandidate,
    gramian_of_cone,
    realize_cone_from_gramian,
    verify_gramian_conditions,
    verify_hyperbolic_conditions,
    verify_spherical_conditions,
)
from .incidence import (
    DEFAULT_FLAG_CAP,
    IncidenceRelation,
    build_maxbiclique_lattice,
    check_diamond,
    check_flag_connected_local,
    lattice_rank,
    load_relation,
)
from .numkernel import (
    BilinearForm,
    numeric_rank,
    read_matrix_csv,
    write_matrix_csv,
)
from .realize import (
    FilledIncidenceMatrix,
    STATUS_INCONCLUSIVE,
    STATUS_REALIZED,
    check_filled_incidence,
    cone_to_polytope_matrix,
    polytope_to_cone_matrix,
    realizability_check,
    realization_space_dimension,
)

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT = 3


@dataclass
class RunConfig:
    """Resolved options shared across commands."""

    d: int = None
    fill: float = 1.0
    margin: float = 0.1
    restarts: int = 32
    iters: int = 2000
    seed: int = 0
    rank_tol: float = 1e-9
    eq_tol: float = 1e-7
    slack_tol: float = 1e-7
    det_zero_tol: float = 1e-8
    flag_cap: int = DEFAULT_FLAG_CAP
    fmt: str = "text"
    out: str = None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        cfg = cls()
        for name in vars(cfg):
            key = "format" if name == "fmt" else name
            if hasattr(args, key) and getattr(args, key) is not None:
                setattr(cfg, name, getattr(args, key))
        for name in ("rank_tol", "eq_tol", "slack_tol", "det_zero_tol", "margin"):
            if getattr(cfg, name) <= 0:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        return cfg


def _require_d(cfg: RunConfig) -> None:
    if cfg.d is None:
        raise ValueError("this command needs --d")


def _emit(report: dict, cfg: RunConfig) -> None:
    if cfg.fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        lines = []

        def walk(prefix, value):
            if isinstance(value, dict):
                for k in sorted(value):
                    walk(f"{prefix}{k}." if prefix else f"{k}.", value[k])
            else:
                lines.append(f"{prefix[:-1]}: {value}")

        walk("", report)
        text = "\n".join(lines) + "\n"
    sys.stdout.write(text)


def _lattice_report(rel: IncidenceRelation) -> tuple:
    """(report dict, all conditions hold) for the combinatorial pipeline."""
    report = {
        "facets": rel.n_facets,
        "vertices": rel.n_vertices,
        "incidences": len(rel.incident),
    }
    reason = rel.degeneracy_reason()
    if reason is not None:
        report["conditions"] = {"nondegenerate": False}
        report["reason"] = reason
        return report, False
    lat = build_maxbiclique_lattice(rel)
    rank = lattice_rank(lat)
    conditions = {"nondegenerate": True, "graded": rank is not None}
    report["lattice_size"] = len(lat)
    if rank is None:
        report["conditions"] = conditions
        report["reason"] = "not-graded"
        return report, False
    report["lattice_rank"] = rank
    report["rank_profile"] = list(lat.rank_profile())
    conditions["diamond"] = check_diamond(lat)
    conditions["flag_connected"] = (
        check_flag_connected_local(lat) if conditions["diamond"] else False
    )
    report["conditions"] = conditions
    ok = all(conditions.values())
    if not ok:
        report["reason"] = (
            "diamond" if not conditions["diamond"] else "flag-connectivity"
        )
    return report, ok


def cmd_check(args) -> int:
    cfg = RunConfig.from_args(args)
    rel = load_relation(args.relation)
    report, ok = _lattice_report(rel)
    _emit(report, cfg)
    return EXIT_OK if ok else EXIT_REJECTED


def cmd_realize(args) -> int:
    cfg = RunConfig.from_args(args)
    rel = load_relation(args.relation)
    try:
        verdict = realizability_check(
            rel,
            cfg.d,
            margin=cfg.margin,
            max_restarts=cfg.restarts,
            max_iters=cfg.iters,
            seed=cfg.seed,
            eq_tol=cfg.eq_tol,
            slack_tol=cfg.slack_tol,
            rank_tol=cfg.rank_tol,
        )
    except DegenerateRelationError as exc:
        _emit({"verdict": "rejected", "reason": f"degenerate: {exc}"}, cfg)
        return EXIT_REJECTED
    report = {
        "verdict": verdict.status,
        "d": verdict.d,
        "tolerances": {"rank_tol": cfg.rank_tol, "eq_tol": cfg.eq_tol,
                       "slack_tol": cfg.slack_tol},
        "seed": cfg.seed,
    }
    if verdict.lattice is not None and verdict.lattice.is_graded:
        report["lattice"] = {
            "size": len(verdict.lattice),
            "rank": verdict.lattice.rank,
            "rank_profile": list(verdict.lattice.rank_profile()),
        }
    if verdict.status == STATUS_REALIZED:
        report["realization_space_dimension"] = realization_space_dimension(
            rel, verdict.d
        )
        report["solver"] = {
            "restart": verdict.completion.restart_index,
            "iterations": verdict.completion.iterations,
            "loss": verdict.best_residual,
        }
        recon = verdict.realization.H.T @ verdict.realization.W
        report["reconstruction_residual"] = float(
            np.abs(recon - verdict.matrix.matrix).max()
        )
        out_dir = cfg.out or "."
        os.makedirs(out_dir, exist_ok=True)
        write_matrix_csv(os.path.join(out_dir, "M.csv"), verdict.matrix.matrix)
        write_matrix_csv(os.path.join(out_dir, "W.csv"), verdict.realization.W)
        write_matrix_csv(os.path.join(out_dir, "H.csv"), verdict.realization.H)
        report["written"] = ["M.csv", "W.csv", "H.csv"]
        _emit(report, cfg)
        return EXIT_OK
    if verdict.status == STATUS_INCONCLUSIVE:
        report["best_residual"] = verdict.best_residual
        _emit(report, cfg)
        return EXIT_INCONCLUSIVE
    report["reason"] = verdict.reason
    _emit(report, cfg)
    return EXIT_REJECTED


def cmd_verify(args) -> int:
    cfg = RunConfig.from_args(args)
    _require_d(cfg)
    rel = load_relation(args.relation)
    M = read_matrix_csv(args.matrix)
    fill = cfg.fill
    expected_rank = cfg.d if fill == 1.0 else cfg.d + 1
    report = {"fill": fill, "d": cfg.d}
    pattern = check_filled_incidence(M, rel, fill, cfg.eq_tol, cfg.slack_tol)
    rank = numeric_rank(M, cfg.rank_tol)
    report["pattern_ok"] = pattern.ok
    report["rank"] = rank
    report["rank_ok"] = rank == expected_rank
    if not pattern.ok:
        report["violations"] = [
            {"facet": v.facet, "vertex": v.vertex, "value": v.value, "kind": v.kind}
            for v in pattern.violations[:20]
        ]
    _emit(report, cfg)
    return EXIT_OK if pattern.ok and rank == expected_rank else EXIT_REJECTED


def _infer_relation(M: np.ndarray, fill: float, eq_tol: float) -> IncidenceRelation:
    pairs = [
        (i + 1, j + 1)
        for i in range(M.shape[0])
        for j in range(M.shape[1])
        if abs(M[i, j] - fill) <= eq_tol
    ]
    return IncidenceRelation.from_pairs(M.shape[0], M.shape[1], pairs)


def cmd_convert(args) -> int:
    cfg = RunConfig.from_args(args)
    M = read_matrix_csv(args.matrix)
    source_fill = 1.0 if args.direction == "polytope-to-cone" else 0.0
    rel = _infer_relation(M, source_fill, cfg.eq_tol)
    try:
        fim = FilledIncidenceMatrix(M, rel, source_fill, cfg.eq_tol, cfg.slack_tol)
        if args.direction == "polytope-to-cone":
            result = polytope_to_cone_matrix(fim, cfg.rank_tol)
        else:
            result = cone_to_polytope_matrix(fim, cfg.rank_tol, seed=cfg.seed)
    except (PatternViolationError, NoPositiveScalingError) as exc:
        _emit({"error": str(exc)}, cfg)
        return EXIT_REJECTED
    out = cfg.out or "converted.csv"
    write_matrix_csv(out, result.matrix)
    _emit(
        {
            "direction": args.direction,
            "rank": numeric_rank(result.matrix, cfg.rank_tol),
            "written": out,
        },
        cfg,
    )
    return EXIT_OK


def cmd_gale(args) -> int:
    cfg = RunConfig.from_args(args)
    M = read_matrix_csv(args.matrix)
    dual = gale_dual_cone(M, cfg.rank_tol) if args.kind == "cone" \
        else gale_dual_polytope(M, cfg.rank_tol)
    out = cfg.out or "gale.csv"
    report = {
        "kind": args.kind,
        "generators": int(dual.r_vectors.shape[0]),
        "rank": dual.rank,
        "dual_dimension": int(dual.null_basis.shape[1]),
        "trivial": dual.trivial,
    }
    if dual.trivial:
        report["written"] = None
    else:
        write_matrix_csv(out, dual.coords)
        report["written"] = out
    _emit(report, cfg)
    return EXIT_OK


def _load_candidate(args, cfg) -> GramianCandidate:
    rel = load_relation(args.relation)
    G = read_matrix_csv(args.gramian)
    phi = read_matrix_csv(args.phi)
    form = BilinearForm.from_matrix(phi)
    return GramianCandidate(G, form, rel, cfg.d)


def cmd_gramian_verify(args) -> int:
    cfg = RunConfig.from_args(args)
    _require_d(cfg)
    try:
        cand = _load_candidate(args, cfg)
    except ValueError as exc:
        _emit({"passed": False, "error": str(exc)}, cfg)
        return EXIT_REJECTED
    report = verify_gramian_conditions(
        cand, rank_tol=cfg.rank_tol, det_zero_tol=cfg.det_zero_tol,
        seed=cfg.seed, flag_cap=cfg.flag_cap,
    )
    _emit(report.as_dict(), cfg)
    return EXIT_OK if report.passed else EXIT_REJECTED


def cmd_gramian_realize(args) -> int:
    cfg = RunConfig.from_args(args)
    _require_d(cfg)
    try:
        cand = _load_candidate(args, cfg)
    except ValueError as exc:
        _emit({"passed": False, "error": str(exc)}, cfg)
        return EXIT_REJECTED
    report = verify_gramian_conditions(
        cand, rank_tol=cfg.rank_tol, det_zero_tol=cfg.det_zero_tol,
        seed=cfg.seed, flag_cap=cfg.flag_cap,
    )
    if not report.passed:
        _emit(report.as_dict(), cfg)
        return EXIT_REJECTED
    try:
        cone = realize_cone_from_gramian(cand, rank_tol=cfg.rank_tol)
    except (PatternViolationError, SignatureMismatchError) as exc:
        _emit({"passed": False, "error": str(exc)}, cfg)
        return EXIT_REJECTED
    out_dir = cfg.out or "."
    os.makedirs(out_dir, exist_ok=True)
    write_matrix_csv(os.path.join(out_dir, "N.csv"), cone.N.matrix)
    write_matrix_csv(os.path.join(out_dir, "H.csv"), cone.H)
    write_matrix_csv(os.path.join(out_dir, "W.csv"), cone.W)
    payload = report.as_dict()
    payload["written"] = ["N.csv", "H.csv", "W.csv"]
    payload["gramian_residual"] = float(
        np.abs(gramian_of_cone(cone.H, cone.form) - cand.G).max()
    )
    _emit(payload, cfg)
    return EXIT_OK


def cmd_spherical_verify(args) -> int:
    cfg = RunConfig.from_args(args)
    _require_d(cfg)
    rel = load_relation(args.relation)
    G = read_matrix_csv(args.gramian)
    report = verify_spherical_conditions(
        rel, G, cfg.d, rank_tol=cfg.rank_tol, det_zero_tol=cfg.det_zero_tol,
        seed=cfg.seed, flag_cap=cfg.flag_cap,
    )
    _emit(report.as_dict(), cfg)
    return EXIT_OK if report.passed else EXIT_REJECTED


def cmd_hyperbolic_verify(args) -> int:
    cfg = RunConfig.from_args(args)
    _require_d(cfg)
    rel = load_relation(args.relation)
    G = read_matrix_csv(args.gramian)
    ideal = [int(v) for v in args.ideal.split(",") if v.strip()] if args.ideal else []
    report = verify_hyperbolic_conditions(
        rel, ideal, G, cfg.d, rank_tol=cfg.rank_tol,
        det_zero_tol=cfg.det_zero_tol, seed=cfg.seed, flag_cap=cfg.flag_cap,
    )
    _emit(report.as_dict(), cfg)
    return EXIT_OK if report.passed else EXIT_REJECTED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyrealize",
        description="Decide and construct polytope and cone realizations "
        "from facet-vertex incidence relations.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, completion=False):
        p.add_argument("--d", type=int, default=None, help="target polytope dimension")
        p.add_argument("--rank-tol", dest="rank_tol", type=float, default=None)
        p.add_argument("--eq-tol", dest="eq_tol", type=float, default=None)
        p.add_argument("--slack-tol", dest="slack_tol", type=float, default=None)
        p.add_argument("--det-zero-tol", dest="det_zero_tol", type=float, default=None)
        p.add_argument("--flag-cap", dest="flag_cap", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("text", "json"), default=None)
        p.add_argument("--out", default=None, help="output file or directory")
        if completion:
            p.add_argument("--margin", type=float, default=None)
            p.add_argument("--restarts", type=int, default=None)
            p.add_argument("--iters", type=int, default=None)

    p = sub.add_parser("check", help="run the combinatorial lattice conditions")
    p.add_argument("relation", help="relation JSON file")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("realize", help="search for a realization of a relation")
    p.add_argument("relation")
    common(p, completion=True)
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("verify", help="verify a matrix against a relation")
    p.add_argument("relation")
    p.add_argument("matrix", help="matrix CSV file")
    p.add_argument("--fill", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("convert", help="convert between polytope and cone matrices")
    p.add_argument("matrix")
    p.add_argument("direction", choices=("polytope-to-cone", "cone-to-polytope"))
    common(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("gale", help="Gale dual of a cone or polytope matrix")
    p.add_argument("matrix")
    p.add_argument("kind", choices=("cone", "polytope"))
    common(p)
    p.set_defaults(func=cmd_gale)

    p = sub.add_parser("gramian-verify", help="verify a Gramian candidate")
    p.add_argument("relation")
    p.add_argument("gramian")
    p.add_argument("phi", help="bilinear form CSV file")
    common(p)
    p.set_defaults(func=cmd_gramian_verify)

    p = sub.add_parser("gramian-realize", help="realize a cone from a Gramian")
    p.add_argument("relation")
    p.add_argument("gramian")
    p.add_argument("phi")
    common(p)
    p.set_defaults(func=cmd_gramian_realize)

    p = sub.add_parser("spherical-verify", help="spherical Gramian conditions")
    p.add_argument("relation")
    p.add_argument("gramian")
    common(p)
    p.set_defaults(func=cmd_spherical_verify)

    p = sub.add_parser("hyperbolic-verify", help="hyperbolic Gramian conditions")
    p.add_argument("relation")
    p.add_argument("gramian")
    p.add_argument("--ideal", default="", help="comma-separated ideal vertex indices")
    common(p)
    p.set_defaults(func=cmd_hyperbolic_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; input errors are 3 here
        return EXIT_INPUT if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except PolyrealizeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
