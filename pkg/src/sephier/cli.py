"""Command line front end.

Subcommands cover the full pipeline: hierarchy bounds with certificate
emission, independent certificate checking, symmetric extension values,
witness search and validation, primal oracles, stationarity ideal dumps and
Groebner analysis.  Every report is a single JSON object on stdout with a
top-level "format": 1.

Exit codes: 0 success, 1 bad input, 2 numerical non-convergence or a
rejected certificate, 64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .errors import CapExceeded, InputError, SephierError, SolverFailure
from .groebner import (
    buchberger,
    degree_bound_report,
    is_zero_dimensional,
    kkt_generators,
    remainder_degree_bound,
    snap_to_rational,
)
from .io import (
    file_digest,
    load_certificate,
    load_problem,
    load_state,
    save_certificate,
    write_json,
)
from .kkt import build_kkt_system
from .oracle import multistart, net_enumerate
from .relaxation import (
    DEFAULT_MAX_MOMENT_SIDE,
    HierarchyConfig,
    build_dps_bipartite,
    build_moment_sdp,
    extract_certificate,
    verify_certificate,
)
from .sdp_solver import solve
from .tensor_poly import poly_to_tensor, realify
from .witness import DETECTION_TOL, dps_witness_search, validate_witness

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _emit(report):
    print(json.dumps(report, indent=2, sort_keys=True))


def _target(kind, obj):
    return realify(obj) if kind == "complex_hermitian" else poly_to_tensor(obj)


def _moment_cap(args):
    if getattr(args, "max_side", None) is not None:
        return args.max_side
    raw = os.environ.get("SEPHIER_MAX_MOMENT_SIDE")
    if raw is None:
        return DEFAULT_MAX_MOMENT_SIDE
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"SEPHIER_MAX_MOMENT_SIDE must be an integer, got {raw!r}") from exc


def _terms_doc(poly):
    keys = sorted(poly.terms, key=lambda e: (sum(e), e), reverse=True)
    return [{"exponents": list(e), "coeff": poly.terms[e]} for e in keys]


def cmd_bound(args):
    t_total = time.perf_counter()
    timings = {}
    t0 = time.perf_counter()
    kind, obj = load_problem(args.problem)
    target = _target(kind, obj)
    timings["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    config = HierarchyConfig(target.num_vars, target.half_rank, args.level, args.kkt)
    problem = build_moment_sdp(target, config, max_side=_moment_cap(args))
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    solution = solve(problem, gap_tol=args.gap_tol, feas_tol=args.feas_tol,
                     max_iter=args.max_iter)
    timings["solve"] = time.perf_counter() - t0

    residuals = {k: v for k, v in solution.residuals.items() if not isinstance(v, list)}
    report = {
        "format": 1,
        "command": "bound",
        "input": {"path": args.problem, "sha256": file_digest(args.problem), "type": kind},
        "config": {
            "num_vars": config.num_vars,
            "half_degree": config.half_degree,
            "level": config.level,
            "kkt": config.kkt_enabled,
            "moment_side": config.moment_side,
            "gap_tol": args.gap_tol,
            "feas_tol": args.feas_tol,
            "max_iter": args.max_iter,
            "restarts": args.restarts,
            "seed": args.seed,
        },
        "status": solution.status,
        "iterations": solution.iterations,
        "solver_residuals": residuals,
    }
    if solution.status != "Optimal":
        report["timings"] = timings
        report["timings"]["total"] = time.perf_counter() - t_total
        _emit(report)
        return EXIT_SOLVER

    upper = float(solution.dual_objective)

    t0 = time.perf_counter()
    cert = extract_certificate(problem, solution)
    cert_residual = verify_certificate(target, cert)
    cert_path = args.certificate_out or args.problem + ".certificate.json"
    save_certificate(cert_path, cert)
    timings["certificate"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    oracle = multistart(target, args.restarts, seed=args.seed)
    timings["oracle"] = time.perf_counter() - t0
    lower = float(oracle.best_value)
    gap = upper - lower

    timings["total"] = time.perf_counter() - t_total
    report.update({
        "upper_bound": upper,
        "lower_bound": lower,
        "gap": gap,
        "certificate": {
            "path": cert_path,
            "residual": float(cert_residual),
            "gram_min_eigenvalue": float(cert.gram_min_eigenvalue()),
        },
        "oracle": {
            "value": lower,
            "kkt_residual": float(oracle.kkt_residual),
            "restarts": oracle.restarts,
            "method": oracle.method,
        },
        "timings": timings,
    })
    _emit(report)
    if gap < -1e-6:
        return EXIT_SOLVER
    return EXIT_OK


def cmd_certify(args):
    kind, obj = load_problem(args.problem)
    target = _target(kind, obj)
    cert = load_certificate(args.certificate, half_degree=target.half_rank)
    residual = float(verify_certificate(target, cert))
    accepted = residual <= args.tol
    _emit({
        "format": 1,
        "command": "certify",
        "input": {"path": args.problem, "sha256": file_digest(args.problem)},
        "certificate": args.certificate,
        "nu": float(cert.nu),
        "residual": residual,
        "tol": args.tol,
        "gram_min_eigenvalue": float(cert.gram_min_eigenvalue()),
        "accepted": accepted,
    })
    return EXIT_OK if accepted else EXIT_SOLVER


def cmd_dps(args):
    t_total = time.perf_counter()
    kind, obj = load_problem(args.problem)
    if kind != "complex_hermitian":
        raise InputError("dps needs a complex_hermitian problem")
    if obj.copies != 2:
        raise InputError(f"dps needs a bipartite operator, got d = {obj.copies}")
    problem = build_dps_bipartite(obj, args.extensions, ppt=args.ppt)
    solution = solve(problem, gap_tol=args.gap_tol, feas_tol=args.feas_tol,
                     max_iter=args.max_iter)
    residuals = {k: v for k, v in solution.residuals.items() if not isinstance(v, list)}
    report = {
        "format": 1,
        "command": "dps",
        "input": {"path": args.problem, "sha256": file_digest(args.problem)},
        "config": {
            "local_dim": obj.local_dim,
            "extensions": args.extensions,
            "ppt": args.ppt,
            "gap_tol": args.gap_tol,
            "feas_tol": args.feas_tol,
        },
        "value": float(solution.dual_objective),
        "primal_objective": float(solution.primal_objective),
        "dual_objective": float(solution.dual_objective),
        "status": solution.status,
        "iterations": solution.iterations,
        "solver_residuals": residuals,
        "timings": {"total": time.perf_counter() - t_total},
    }
    _emit(report)
    return EXIT_OK if solution.status == "Optimal" else EXIT_SOLVER


def cmd_witness(args):
    t_total = time.perf_counter()
    rho = load_state(args.state)
    witness, value = dps_witness_search(rho, args.level, ppt=args.ppt,
                                        gap_tol=args.gap_tol, feas_tol=args.feas_tol)
    margin = validate_witness(witness.operator, args.validate_level, kkt=True)
    witness.margin = margin
    Z = witness.operator.entries
    side = witness.operator.side
    entries = [
        [r, c, float(Z[r, c].real), float(Z[r, c].imag)]
        for r in range(side) for c in range(r, side)
    ]
    _emit({
        "format": 1,
        "command": "witness",
        "input": {"path": args.state, "sha256": file_digest(args.state)},
        "config": {
            "level": args.level,
            "ppt": args.ppt,
            "validate_level": args.validate_level,
            "gap_tol": args.gap_tol,
            "feas_tol": args.feas_tol,
        },
        "detected": bool(value < -DETECTION_TOL),
        "value": float(value),
        "validated_margin": float(margin),
        "witness": {
            "type": "complex_hermitian",
            "n": witness.operator.local_dim,
            "d": witness.operator.copies,
            "entries": entries,
            "provenance": witness.provenance,
        },
        "timings": {"total": time.perf_counter() - t_total},
    })
    return EXIT_OK


def cmd_oracle(args):
    kind, obj = load_problem(args.problem)
    target = _target(kind, obj)
    result = multistart(target, args.restarts, seed=args.seed)
    report = {
        "format": 1,
        "command": "oracle",
        "input": {"path": args.problem, "sha256": file_digest(args.problem)},
        "config": {"restarts": args.restarts, "seed": args.seed},
        "value": float(result.best_value),
        "point": [float(v) for v in result.best_point],
        "kkt_residual": float(result.kkt_residual),
        "method": result.method,
    }
    if args.net is not None:
        lower, upper = net_enumerate(target, args.net)
        report["config"]["net_delta"] = args.net
        report["bracket"] = [float(lower), float(upper)]
    _emit(report)
    return EXIT_OK


def cmd_groebner_analyze(args):
    kind, obj = load_problem(args.problem)
    poly = realify(obj).to_polynomial() if kind == "complex_hermitian" else obj
    snapped, snap_distance = snap_to_rational(poly, denominator_cap=args.denominator_cap)
    gens = kkt_generators(snapped)
    gen_degree = max(g.degree() for g in gens)
    report = {
        "format": 1,
        "command": "groebner-analyze",
        "input": {"path": args.problem, "sha256": file_digest(args.problem)},
        "config": {
            "degree_cap": args.degree_cap,
            "denominator_cap": args.denominator_cap,
        },
        "num_vars": poly.num_vars,
        "num_generators": len(gens),
        "snap_distance": snap_distance,
        "degree_bound": str(degree_bound_report(poly.num_vars, gen_degree, 0)),
    }
    try:
        basis = buchberger(gens, degree_cap=args.degree_cap)
    except CapExceeded:
        report.update({
            "cap_hit": True,
            "basis_degrees": None,
            "zero_dimensional": None,
            "max_degree": None,
        })
        _emit(report)
        return EXIT_OK
    report.update({
        "cap_hit": False,
        "basis_degrees": sorted(g.degree() for g in basis.elements),
        "zero_dimensional": is_zero_dimensional(basis),
        "max_degree": basis.max_degree,
        "remainder_degree_bound": remainder_degree_bound(poly.num_vars, basis.max_degree),
    })
    _emit(report)
    return EXIT_OK


def cmd_kkt_dump(args):
    kind, obj = load_problem(args.problem)
    poly = realify(obj).to_polynomial() if kind == "complex_hermitian" else obj
    system = build_kkt_system(poly)
    doc = {
        "format": 1,
        "num_vars": system.num_vars,
        "half_degree": system.half_degree,
        "objective": _terms_doc(system.objective),
        "sphere": _terms_doc(system.sphere),
        "minors": [
            {"i": i, "j": j, "terms": _terms_doc(system.minors[(i, j)])}
            for (i, j) in sorted(system.minors)
        ],
    }
    if args.out:
        write_json(args.out, doc)
    else:
        _emit(doc)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sephier", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="hierarchy upper bound with certificate")
    p.add_argument("problem")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--kkt", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gap-tol", type=float, default=1e-8)
    p.add_argument("--feas-tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--max-side", type=int, default=None)
    p.add_argument("--certificate-out", default=None)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("certify", help="check a certificate against a problem")
    p.add_argument("problem")
    p.add_argument("certificate")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("dps", help="bipartite symmetric extension value")
    p.add_argument("problem")
    p.add_argument("--extensions", "-k", type=int, default=1)
    p.add_argument("--ppt", action="store_true")
    p.add_argument("--gap-tol", type=float, default=1e-9)
    p.add_argument("--feas-tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=cmd_dps)

    p = sub.add_parser("witness", help="search and validate an entanglement witness")
    p.add_argument("state")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--ppt", action="store_true")
    p.add_argument("--validate-level", type=int, default=1)
    p.add_argument("--gap-tol", type=float, default=1e-9)
    p.add_argument("--feas-tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("oracle", help="multistart lower bound, optional net bracket")
    p.add_argument("problem")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--net", type=float, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("groebner", help="stationarity ideal analysis")
    gsub = p.add_subparsers(dest="groebner_command", required=True)
    g = gsub.add_parser("analyze", help="Groebner basis of the stationarity ideal")
    g.add_argument("problem")
    g.add_argument("--degree-cap", type=int, default=30)
    g.add_argument("--denominator-cap", type=int, default=10**6)
    g.set_defaults(func=cmd_groebner_analyze)

    p = sub.add_parser("kkt", help="stationarity system inspection")
    ksub = p.add_subparsers(dest="kkt_command", required=True)
    k = ksub.add_parser("dump", help="emit the sphere and minor polynomials")
    k.add_argument("problem")
    k.add_argument("--out", default=None)
    k.set_defaults(func=cmd_kkt_dump)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SephierError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
