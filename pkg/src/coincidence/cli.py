"""Command-line entry point.

Exit codes: 0 success, 1 usage or parse error, 2 certificate failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from . import io as cio
from .core import condition_h, index_of_coincidence, indeterminacy_coupling, to_sorted_order
from .errors import CouplingError, InvalidMarginal, NoConvergence, NotEligible
from .measure import estimate_proportion
from .mixture import decompose, draw_many
from .oracle import OracleConfig, oracle_certificate, project_uniform
from .rectangle import corner, deltas, multiplier_field, pi_tilde
from .staircase import certify, solve

EXIT_OK, EXIT_USAGE, EXIT_CERTIFICATE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _is_matrix(value) -> bool:
    return isinstance(value, list) and bool(value) and isinstance(value[0], list)


def _emit(payload: dict, fmt: str, out, indent: str = "") -> None:
    if fmt == "structured":
        out.write(json.dumps(payload, indent=2) + "\n")
        return
    for key, value in payload.items():
        if _is_matrix(value):
            out.write(f"{indent}{key}:\n")
            for row in value:
                out.write(f"{indent}  " + " ".join(f"{x:.12g}" if x is not None else "-" for x in row) + "\n")
        elif isinstance(value, dict):
            out.write(f"{indent}{key}:\n")
            _emit(value, fmt, out, indent + "  ")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            out.write(f"{indent}{key}:\n")
            for item in value:
                out.write(f"{indent}  - " + " ".join(f"{k}={_short(v)}" for k, v in item.items()) + "\n")
        else:
            out.write(f"{indent}{key}: {_short(value)}\n")


def _short(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, list) and len(v) > 0 and not isinstance(v[0], (list, dict)):
        return " ".join(str(_short(x)) if x is not None else "-" for x in v)
    return str(v)


def cmd_solve(args) -> tuple[dict, int]:
    problem = cio.load_problem(args.input)
    reduced = cio.reduce_problem(problem, strip_zeros=args.strip_zeros)
    sol = solve(reduced.mu, reduced.nu, trace=args.trace)
    report = cio.build_report(sol, reduced)
    if not args.trace:
        report.trace = None
    report.metadata = {"p": reduced.p_full, "q": reduced.q_full, "strip_zeros": args.strip_zeros}
    return report.to_dict(), EXIT_OK if report.certificate["valid"] else EXIT_CERTIFICATE


def cmd_check(args) -> tuple[dict, int]:
    problem = cio.load_problem(args.input)
    if problem.pi is None:
        raise cio.ParseError("check needs a 'pi' matrix in the input")
    reduced = cio.reduce_problem(problem)
    mu, nu = reduced.mu, reduced.nu
    pi = to_sorted_order(np.asarray(problem.pi, dtype=float), mu, nu)
    mult = problem.multipliers
    if mult:
        r = to_sorted_order(np.asarray(mult["r"], dtype=float), mu, nu)
        lam = np.asarray(mult["lambda"], dtype=float)[mu.perm]
        omega = np.asarray(mult["omega"], dtype=float)[nu.perm]
        cert = certify(pi, r, lam, omega, float(mult["theta"]), mu, nu)
        source = "provided"
    else:
        tolerance = args.tolerance if args.tolerance is not None else 1e-8
        cert = oracle_certificate(pi, mu, nu, tolerance=tolerance)
        source = "least-squares"
    payload = {
        "ic": index_of_coincidence(pi),
        "multipliers": source,
        "certificate": {k: (float(v) if not isinstance(v, bool) else v) for k, v in cert.as_dict().items()},
    }
    return payload, EXIT_OK if cert.valid else EXIT_CERTIFICATE


def cmd_rectangle(args) -> tuple[dict, int]:
    problem = cio.load_problem(args.input)
    reduced = cio.reduce_problem(problem, strip_zeros=args.strip_zeros)
    pp = indeterminacy_coupling(reduced.mu, reduced.nu)
    c = corner(pp)
    d = deltas(pp, c)
    payload = {
        "corner": [c.p1, c.q1],
        "delta": float(d.delta_total),
        "condition_h": condition_h(reduced.mu, reduced.nu),
    }
    try:
        tilde = pi_tilde(pp, c)
    except NotEligible as exc:
        payload["eligible"] = False
        payload["reason"] = str(exc)
        return payload, EXIT_CERTIFICATE
    payload["eligible"] = True
    payload["coupling"] = reduced.expand_matrix(tilde.entries).tolist()
    payload["ic"] = index_of_coincidence(tilde)
    payload["multipliers"] = {"r": reduced.expand_matrix(multiplier_field(pp, d, c)).tolist()}
    return payload, EXIT_OK


def cmd_oracle(args) -> tuple[dict, int]:
    problem = cio.load_problem(args.input)
    reduced = cio.reduce_problem(problem, strip_zeros=args.strip_zeros)
    cfg = OracleConfig(tolerance=args.tolerance if args.tolerance is not None else 1e-10)
    try:
        pi = project_uniform(reduced.mu, reduced.nu, cfg)
    except NoConvergence as exc:
        return {"converged": False, "reason": str(exc)}, EXIT_CERTIFICATE
    cert = oracle_certificate(pi.entries, reduced.mu, reduced.nu)
    payload = {
        "converged": True,
        "coupling": reduced.expand_matrix(pi.entries).tolist(),
        "ic": index_of_coincidence(pi),
        "certificate": {k: (float(v) if not isinstance(v, bool) else v) for k, v in cert.as_dict().items()},
    }
    return payload, EXIT_OK if cert.valid else EXIT_CERTIFICATE


def cmd_measure(args) -> tuple[dict, int]:
    if args.samples is None or args.samples < 1:
        raise UsageError("--samples must be a positive integer")
    if args.mode == "pair" and args.q is None:
        raise UsageError("pair mode needs --q")
    if args.p < 1 or (args.q is not None and args.q < 1):
        raise UsageError("--p and --q must be >= 1")
    q = None if args.mode == "self" else args.q
    est = estimate_proportion(args.p, q, args.mode, args.samples, np.random.SeedSequence(args.seed), shards=args.shards)
    payload = {"p": args.p, "q": args.p if q is None else q, "mode": args.mode, "seed": args.seed, "shards": args.shards}
    payload.update(est.as_dict())
    return payload, EXIT_OK


def cmd_sample(args) -> tuple[dict, int]:
    if args.samples is None or args.samples < 0:
        raise UsageError("--samples must be a nonnegative integer")
    problem = cio.load_problem(args.input)
    reduced = cio.reduce_problem(problem, strip_zeros=args.strip_zeros)
    mu, nu = reduced.mu, reduced.nu
    rng = np.random.default_rng(args.seed)
    n = args.samples
    if condition_h(mu, nu):
        method = "mixture"
        u, v, _ = draw_many(decompose(mu, nu), n, rng)
    else:
        method = "table"
        table = solve(mu, nu).pi_star.in_original_order().ravel()
        cdf = np.cumsum(table)
        idx = np.minimum(np.searchsorted(cdf, rng.uniform(size=n) * cdf[-1], side="right"), len(cdf) - 1)
        u, v = np.divmod(idx, nu.size)
    u = reduced.mu_keep[u]
    v = reduced.nu_keep[v]
    payload = {
        "metadata": {"method": method, "seed": args.seed, "n": n},
        "draws": [[int(a), int(b)] for a, b in zip(u, v)],
    }
    return payload, EXIT_OK


def _emit_sample(payload: dict, fmt: str, out) -> None:
    if fmt == "structured":
        out.write(json.dumps(payload) + "\n")
        return
    meta = payload["metadata"]
    out.write(f"# method={meta['method']} seed={meta['seed']} n={meta['n']}\n")
    for u, v in payload["draws"]:
        out.write(f"{u} {v}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coincidence", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")

    problem = _Parser(add_help=False)
    problem.add_argument("--input", "-i", required=True, help="problem file (JSON or two columns), '-' for stdin")
    problem.add_argument("--strip-zeros", action="store_true", help="drop exact-zero weights and reinsert them in outputs")

    p = sub.add_parser("solve", parents=[common, problem], help="exact minimizer with KKT certificate")
    p.add_argument("--trace", action="store_true", help="report each transforming step")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", parents=[common], help="verify KKT conditions of a given matrix")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--tolerance", type=float, default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("rectangle", parents=[common, problem], help="single-block closed form")
    p.set_defaults(func=cmd_rectangle)

    p = sub.add_parser("oracle", parents=[common, problem], help="Dykstra projection reference")
    p.add_argument("--tolerance", type=float, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("measure", parents=[common], help="Monte Carlo share of eligible margins")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--mode", choices=("self", "pair"), default="pair")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--shards", type=int, default=1)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sample", parents=[common, problem], help="draw index pairs from the optimal coupling")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, code = args.func(args)
    except (UsageError, cio.ParseError, InvalidMarginal, ValueError) as exc:
        sys.stderr.write(f"coincidence {args.command}: {exc}\n")
        return EXIT_USAGE
    except CouplingError as exc:
        sys.stderr.write(f"coincidence {args.command}: {exc}\n")
        return EXIT_CERTIFICATE
    if args.command == "sample":
        _emit_sample(payload, args.format, out)
    else:
        _emit(payload, args.format, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
