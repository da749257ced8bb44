"""Problem files, solution reports and their (de)serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .core import Marginal, condition_h, index_of_coincidence, new_marginal, to_original_order
from .errors import CouplingError
from .rectangle import detect_rectangle
from .staircase import Certificate, Solution, verify_kkt


class ParseError(CouplingError, ValueError):
    pass


@dataclass
class ProblemFile:
    mu: list[float]
    nu: list[float]
    mu_labels: list[str] | None = None
    nu_labels: list[str] | None = None
    pi: list[list[float]] | None = None
    multipliers: dict | None = None


def _float_list(value, name: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ParseError(f"'{name}' must be a non-empty list of numbers")
    try:
        return [float(x) for x in value]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"'{name}' contains a non-numeric entry") from exc


def parse_structured(text: str) -> ProblemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("top level must be an object with 'mu' and 'nu'")
    for key in ("mu", "nu"):
        if key not in data:
            raise ParseError(f"missing '{key}'")
    labels = data.get("labels") or {}
    problem = ProblemFile(
        mu=_float_list(data["mu"], "mu"),
        nu=_float_list(data["nu"], "nu"),
        mu_labels=data.get("mu_labels", labels.get("mu")),
        nu_labels=data.get("nu_labels", labels.get("nu")),
        pi=data.get("pi"),
        multipliers=data.get("multipliers"),
    )
    for labs, vals, name in ((problem.mu_labels, problem.mu, "mu"), (problem.nu_labels, problem.nu, "nu")):
        if labs is not None and len(labs) != len(vals):
            raise ParseError(f"{name} labels do not match {name} length")
    if problem.pi is not None:
        try:
            pi = np.asarray(problem.pi, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError("'pi' must be a numeric matrix") from exc
        if pi.shape != (len(problem.mu), len(problem.nu)):
            raise ParseError(f"'pi' has shape {pi.shape}, expected {(len(problem.mu), len(problem.nu))}")
    return problem


def parse_columns(text: str) -> ProblemFile:
    """Two delimited columns ``mu, nu``; the shorter column leaves blank cells.

    Lines starting with ``#`` are ignored; an optional ``mu,nu`` header is
    accepted.  Commas, tabs, semicolons or whitespace separate the columns.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty input")
    sample = "\n".join(lines[:5])
    if any(d in sample for d in ",;\t"):
        dialect = csv.Sniffer().sniff(sample, delimiters=",;\t")
        rows = list(csv.reader(io.StringIO("\n".join(lines)), dialect))
    else:
        rows = [ln.split() for ln in lines]
    if rows and [c.strip().lower() for c in rows[0]][:2] == ["mu", "nu"]:
        rows = rows[1:]
    mu: list[float] = []
    nu: list[float] = []
    for lineno, row in enumerate(rows, 1):
        cells = [c.strip() for c in row] + ["", ""]
        if len([c for c in row if c.strip()]) > 2:
            raise ParseError(f"line {lineno}: more than two columns")
        for cell, target, name in ((cells[0], mu, "mu"), (cells[1], nu, "nu")):
            if not cell:
                continue
            try:
                target.append(float(cell))
            except ValueError as exc:
                raise ParseError(f"line {lineno}: bad {name} value {cell!r}") from exc
    if not mu or not nu:
        raise ParseError("both columns need at least one value")
    return ProblemFile(mu=mu, nu=nu)


def parse_problem(text: str) -> ProblemFile:
    return parse_structured(text) if text.lstrip().startswith("{") else parse_columns(text)


def load_problem(path: str | Path) -> ProblemFile:
    try:
        text = Path(path).read_text() if str(path) != "-" else _stdin()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_problem(text)


def _stdin() -> str:
    import sys

    return sys.stdin.read()


@dataclass
class ReducedProblem:
    """Margins after optional zero stripping, with the kept original indices."""

    mu: Marginal
    nu: Marginal
    mu_keep: np.ndarray
    nu_keep: np.ndarray
    p_full: int
    q_full: int

    def expand_matrix(self, sorted_entries: np.ndarray) -> np.ndarray:
        """Sorted reduced matrix to the caller's full index order."""
        reduced = to_original_order(np.asarray(sorted_entries, dtype=float), self.mu, self.nu)
        out = np.zeros((self.p_full, self.q_full))
        out[np.ix_(self.mu_keep, self.nu_keep)] = reduced
        return out

    def expand_vector(self, sorted_values: np.ndarray, rows: bool) -> list[float | None]:
        marg, keep, n = (self.mu, self.mu_keep, self.p_full) if rows else (self.nu, self.nu_keep, self.q_full)
        reduced = np.empty(len(sorted_values))
        reduced[marg.perm] = np.asarray(sorted_values, dtype=float)
        out: list[float | None] = [None] * n
        for i, k in enumerate(keep):
            out[int(k)] = float(reduced[i])
        return out


def reduce_problem(problem: ProblemFile, strip_zeros: bool = False) -> ReducedProblem:
    mu = np.asarray(problem.mu, dtype=float)
    nu = np.asarray(problem.nu, dtype=float)
    mu_keep = np.flatnonzero(mu != 0) if strip_zeros else np.arange(len(mu))
    nu_keep = np.flatnonzero(nu != 0) if strip_zeros else np.arange(len(nu))
    return ReducedProblem(
        mu=new_marginal(mu[mu_keep]),
        nu=new_marginal(nu[nu_keep]),
        mu_keep=mu_keep,
        nu_keep=nu_keep,
        p_full=len(mu),
        q_full=len(nu),
    )


@dataclass
class SolutionReport:
    coupling: list[list[float]]
    row_marginals: list[float]
    col_marginals: list[float]
    ic: float
    condition_h: bool
    corner: list[int] | None
    iterations: int
    certificate: dict[str, Any]
    multipliers: dict[str, Any]
    trace: list[dict] | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SolutionReport":
        return cls(**data)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "SolutionReport":
        return cls.from_dict(json.loads(text))


def build_report(sol: Solution, reduced: ReducedProblem, certificate: Certificate | None = None) -> SolutionReport:
    mu, nu = reduced.mu, reduced.nu
    certificate = certificate or verify_kkt(sol, mu, nu)
    corner = detect_rectangle(sol.pi_star.entries)
    coupling = reduced.expand_matrix(sol.pi_star.entries)
    trace = None
    if sol.trace is not None:
        trace = [
            {"row": int(reduced.mu_keep[mu.perm[t.row]]), "sorted_row": t.row, "zeros": t.zeros, "delta": float(t.delta)}
            for t in sol.trace
        ]
    return SolutionReport(
        coupling=coupling.tolist(),
        row_marginals=coupling.sum(axis=1).tolist(),
        col_marginals=coupling.sum(axis=0).tolist(),
        ic=float(index_of_coincidence(sol.pi_star)),
        condition_h=condition_h(mu, nu),
        corner=None if corner is None else [corner.p1, corner.q1],
        iterations=sol.iterations,
        certificate={k: (float(v) if not isinstance(v, bool) else v) for k, v in certificate.as_dict().items()},
        multipliers={
            "r": reduced.expand_matrix(sol.r).tolist(),
            "lambda": reduced.expand_vector(sol.lam, rows=True),
            "omega": reduced.expand_vector(sol.omega, rows=False),
            "theta": float(sol.theta),
        },
        trace=trace,
    )
