"""Exact minimizer of the index of coincidence over the transportation polytope.

Starting from the indeterminacy coupling, rows are repaired one at a time
from the top: the leading block of a negative row is zeroed and its mass is
pushed right along the row, down the affected columns, and out of the
lower-right block so that all sums are preserved.  Lagrange multipliers are
carried along, so every returned solution comes with its own optimality
certificate.

Rows and columns are 0-based here; ``zeros`` always means a *count* of
leading columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .core import (
    EPS_MARGINAL,
    EPS_NEG,
    Coupling,
    Marginal,
    indeterminacy_entries,
    is_exact,
    tol,
)
from .errors import InvariantViolation, NoAdmissibleIndex, NoConvergence

STATIONARITY_TOL = 1e-9
SLACKNESS_TOL = 1e-10
STATE_SLACKNESS_TOL = 1e-10


@dataclass(frozen=True)
class StepRecord:
    row: int
    zeros: int
    delta: float


@dataclass(frozen=True, eq=False)
class SolverState:
    """Iterate of the row-by-row repair.

    ``row`` is the 0-based index of the next row to repair.  Stationarity
    ``m = lam[u] + omega[v] + theta + r`` holds entrywise at every state.
    """

    m: np.ndarray
    r: np.ndarray
    lam: np.ndarray
    omega: np.ndarray
    theta: float | Fraction
    row: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.m.shape


@dataclass(frozen=True, eq=False)
class Solution:
    pi_star: Coupling
    r: np.ndarray
    lam: np.ndarray
    omega: np.ndarray
    theta: float | Fraction
    iterations: int
    trace: list[StepRecord] | None = None

    @property
    def mu(self) -> Marginal:
        return self.pi_star.mu

    @property
    def nu(self) -> Marginal:
        return self.pi_star.nu

    def zero_profile(self) -> np.ndarray:
        return zero_profile(self.pi_star.entries)


@dataclass(frozen=True)
class Certificate:
    """KKT residuals of a candidate solution; all residuals are magnitudes."""

    max_negative_entry: float
    max_marginal_residual: float
    max_negative_multiplier: float
    max_slackness_violation: float
    max_stationarity_residual: float
    valid: bool
    tolerances: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "max_negative_entry": self.max_negative_entry,
            "max_marginal_residual": self.max_marginal_residual,
            "max_negative_multiplier": self.max_negative_multiplier,
            "max_slackness_violation": self.max_slackness_violation,
            "max_stationarity_residual": self.max_stationarity_residual,
            "valid": self.valid,
        }


def initial_state(mu: Marginal, nu: Marginal) -> SolverState:
    """Indeterminacy coupling with multipliers that reproduce it exactly."""
    p, q = mu.size, nu.size
    m = indeterminacy_entries(mu, nu)
    if mu.exact:
        theta = -Fraction(1, p * q)
        r = np.full((p, q), Fraction(0), dtype=object)
    else:
        theta = -1.0 / (p * q)
        r = np.zeros((p, q))
    return SolverState(m=m, r=r, lam=mu.weights / q, omega=nu.weights / p, theta=theta)


def leading_zero_index(m: np.ndarray, u: int) -> int:
    """Number of leading columns of row ``u`` that the repair sets to zero.

    Smallest ``k`` in ``0..q-1`` with ``(q-k)*m[u,k] + sum(m[u,:k]) >= 0``.
    """
    row = np.asarray(m)[u]
    q = len(row)
    eps = tol(row, EPS_NEG)
    prefix = 0
    for k in range(q):
        if (q - k) * row[k] + prefix >= -eps:
            return k
        prefix = prefix + row[k]
    raise NoAdmissibleIndex(f"row {u} sums to {prefix}; no admissible zero count")


def check_invariants(state: SolverState) -> None:
    """Raise :class:`InvariantViolation` if the repair preconditions fail."""
    m, r, l = state.m, state.r, state.row
    p, q = m.shape
    eps = tol(m, EPS_NEG)
    if l < p and r[l:].size and (r[l:] != 0).any():
        raise InvariantViolation(f"multipliers nonzero at or below row {l}")
    if r.size and r.min() < -eps:
        raise InvariantViolation(f"negative multiplier {float(r.min())!r}")
    if l > 0 and m[:l].min() < -eps:
        raise InvariantViolation(f"rows above {l} are not nonnegative")
    if q > 1 and (np.diff(m, axis=1) < -tol(m, 1e-12)).any():
        raise InvariantViolation("iterate is not nondecreasing along rows")
    if l < p - 1 and (np.diff(m[l:], axis=0) < -tol(m, 1e-12)).any():
        raise InvariantViolation(f"iterate is not nondecreasing down columns from row {l}")
    if np.abs(r * m).max() > tol(m, STATE_SLACKNESS_TOL):
        raise InvariantViolation("complementary slackness broken")
    fitted = state.lam[:, None] + state.omega[None, :] + state.theta
    if np.abs(m - fitted - r).max() > tol(m, STATIONARITY_TOL):
        raise InvariantViolation("stationarity broken")


def one_step(state: SolverState, check: bool = True) -> tuple[SolverState, StepRecord | None]:
    """Repair row ``state.row``; returns the next state and a trace record.

    The record is ``None`` when the row was already nonnegative and the step
    only advanced the row pointer.
    """
    if check:
        check_invariants(state)
    m, l = state.m, state.row
    p, q = m.shape
    if l >= p:
        raise InvariantViolation("no row left to repair")
    eps = tol(m, EPS_NEG)
    if m[l].min() >= -eps:
        return replace(state, row=l + 1), None
    if l == p - 1:
        raise InvariantViolation("last row is negative; nowhere to move the mass")

    k = leading_zero_index(m, l)
    head = m[l, :k].copy()
    delta = head.sum()
    below, right = p - l - 1, q - k
    corner = delta / (below * right)

    m2 = m.copy()
    m2[l, :k] = Fraction(0) if is_exact(m) else 0.0
    m2[l, k:] += delta / right
    m2[l + 1:, :k] += head / below
    m2[l + 1:, k:] -= corner

    r2 = state.r.copy()
    r2[:l, :k] -= head / below + corner
    r2[l, :k] = -head - delta / right - head / below - corner

    lam = state.lam.copy()
    lam[:l] += corner
    lam[l] += delta / right + corner
    omega = state.omega.copy()
    omega[:k] += head / below + corner

    nxt = SolverState(m=m2, r=r2, lam=lam, omega=omega, theta=state.theta - corner, row=l + 1)
    record = StepRecord(row=l, zeros=k, delta=delta if is_exact(m) else float(delta))
    return nxt, record


def solve(mu: Marginal, nu: Marginal, trace: bool = False, check: bool = False) -> Solution:
    """Minimize the index of coincidence over couplings of ``(mu, nu)``.

    Args:
        mu, nu: margins (float or exact).
        trace: keep one :class:`StepRecord` per transforming step.
        check: validate the repair invariants before every step.

    Raises:
        NoConvergence: more than ``p - 1`` transforming steps were needed.
    """
    state = initial_state(mu, nu)
    p, _ = state.shape
    eps = tol(state.m, EPS_NEG)
    records: list[StepRecord] = []
    productive = 0
    while state.row < p and state.m.min() < -eps:
        state, record = one_step(state, check=check)
        if record is not None:
            productive += 1
            records.append(record)
            if productive > p - 1:
                raise NoConvergence(f"{productive} transforming steps exceed p - 1 = {p - 1}")
    if state.m.min() < -eps:
        raise NoConvergence("iterate still has negative entries after the last row")

    pi = state.m
    if not is_exact(pi):
        pi = np.where(pi < 0, 0.0, pi)
    return Solution(
        pi_star=Coupling.from_entries(pi, mu, nu),
        r=state.r,
        lam=state.lam,
        omega=state.omega,
        theta=state.theta,
        iterations=productive,
        trace=records if trace else None,
    )


def zero_profile(pi: np.ndarray, eps: float = EPS_NEG) -> np.ndarray:
    """Per-row count of leading entries that are (numerically) zero."""
    pi = np.asarray(pi)
    eps = tol(pi, eps)
    counts = np.empty(pi.shape[0], dtype=int)
    for u, row in enumerate(pi):
        positive = np.flatnonzero(row > eps)
        counts[u] = positive[0] if positive.size else len(row)
    return counts


def is_staircase(pi: np.ndarray, eps: float = EPS_NEG) -> bool:
    """Zeros form a down-left staircase: row prefixes, shrinking downwards."""
    pi = np.asarray(pi)
    counts = zero_profile(pi, eps)
    cols = np.arange(pi.shape[1])[None, :]
    zero_set = pi <= tol(pi, eps)
    if not np.array_equal(zero_set, cols < counts[:, None]):
        return False
    return bool((np.diff(counts) <= 0).all())


def certify(
    pi: np.ndarray,
    r: np.ndarray,
    lam: np.ndarray,
    omega: np.ndarray,
    theta,
    mu: Marginal,
    nu: Marginal,
    marginal_tol: float = EPS_MARGINAL,
    stationarity_tol: float = STATIONARITY_TOL,
    sign_tol: float = EPS_MARGINAL,
    slackness_tol: float = SLACKNESS_TOL,
) -> Certificate:
    """KKT residuals for ``pi`` with multipliers ``(r, lam, omega, theta)``.

    All arrays are in the sorted order of ``mu`` and ``nu``.
    """
    exact = is_exact(pi)

    def num(x):
        return x if exact else float(x)

    neg = num(max(0, -pi.min()))
    marg = num(max(
        np.abs(pi.sum(axis=1) - mu.weights).max(),
        np.abs(pi.sum(axis=0) - nu.weights).max(),
    ))
    neg_r = num(max(0, -r.min()))
    slack = num(np.abs(r * pi).max())
    fitted = lam[:, None] + omega[None, :] + theta + r
    stat = num(np.abs(pi - fitted).max())
    tolerances = {
        "negative_entry": sign_tol,
        "marginal": marginal_tol,
        "negative_multiplier": sign_tol,
        "slackness": slackness_tol,
        "stationarity": stationarity_tol,
    }
    valid = (
        neg <= tol(pi, sign_tol)
        and marg <= tol(pi, marginal_tol)
        and neg_r <= tol(pi, sign_tol)
        and slack <= tol(pi, slackness_tol)
        and stat <= tol(pi, stationarity_tol)
    )
    return Certificate(
        max_negative_entry=neg,
        max_marginal_residual=marg,
        max_negative_multiplier=neg_r,
        max_slackness_violation=slack,
        max_stationarity_residual=stat,
        valid=bool(valid),
        tolerances=tolerances,
    )


def verify_kkt(sol: Solution, mu: Marginal, nu: Marginal) -> Certificate:
    return certify(sol.pi_star.entries, sol.r, sol.lam, sol.omega, sol.theta, mu, nu)
