"""Closed form of the optimum when its zeros form a single upper-left block.

The block corner is read off the first row and first column of the
indeterminacy coupling; the block's (negative) mass is then redistributed
along the cut rows, the cut columns, and uniformly over the lower-right
block.  This gives an independent check of the row-by-row solver on the
instances where it applies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EPS_NEG, Coupling, SignedMatrix, is_exact, tol
from .errors import DegenerateCorner, NotEligible
from .staircase import leading_zero_index, zero_profile


@dataclass(frozen=True)
class RectangleCorner:
    """Size of the zero block: ``p1`` rows by ``q1`` columns."""

    p1: int
    q1: int

    def __post_init__(self):
        if (self.p1 == 0) != (self.q1 == 0):
            raise ValueError(f"corner ({self.p1}, {self.q1}): p1 and q1 must vanish together")

    @property
    def empty(self) -> bool:
        return self.p1 == 0


@dataclass(frozen=True, eq=False)
class Deltas:
    delta_rows: np.ndarray
    delta_cols: np.ndarray
    delta_total: float


def _entries(m) -> np.ndarray:
    return m.entries if isinstance(m, SignedMatrix) else np.asarray(m)


def corner(pi_plus) -> RectangleCorner:
    """Corner candidate from the first row and first column."""
    e = _entries(pi_plus)
    return RectangleCorner(p1=leading_zero_index(e.T, 0), q1=leading_zero_index(e, 0))


def deltas(pi_plus, c: RectangleCorner) -> Deltas:
    e = _entries(pi_plus)
    block = e[: c.p1, : c.q1]
    total = block.sum() if block.size else 0 * e[0, 0]
    return Deltas(delta_rows=block.sum(axis=1), delta_cols=block.sum(axis=0), delta_total=total)


def _check_corner(c: RectangleCorner, p: int, q: int) -> None:
    if c.p1 >= p or c.q1 >= q:
        raise DegenerateCorner(f"corner ({c.p1}, {c.q1}) leaves no free row or column in {p}x{q}")


def aggregates(d: Deltas, c: RectangleCorner, p: int, q: int):
    """Row, column and total sums of the multiplier matrix.

    Raises:
        DegenerateCorner: ``p1 == p`` or ``q1 == q``.
    """
    _check_corner(c, p, q)
    fp, fq = p - c.p1, q - c.q1
    total = d.delta_total
    rows = np.zeros(p, dtype=d.delta_rows.dtype)
    cols = np.zeros(q, dtype=d.delta_cols.dtype)
    rows[: c.p1] = -(d.delta_rows + total / fp) * q / fq
    cols[: c.q1] = -(d.delta_cols + total / fq) * p / fp
    return rows, cols, -total * p * q / (fp * fq)


def multiplier_field(pi_plus, d: Deltas, c: RectangleCorner) -> np.ndarray:
    e = _entries(pi_plus)
    p, q = e.shape
    _check_corner(c, p, q)
    fp, fq = p - c.p1, q - c.q1
    r = np.zeros_like(e)
    if c.empty:
        return r
    r[: c.p1, : c.q1] = (
        -e[: c.p1, : c.q1]
        - d.delta_rows[:, None] / fq
        - d.delta_cols[None, :] / fp
        - d.delta_total / (fp * fq)
    )
    return r


def pi_tilde(pi_plus: SignedMatrix, c: RectangleCorner | None = None) -> Coupling:
    """Zero the corner block and redistribute its mass.

    The result is only returned when it is provably optimal, i.e. both the
    matrix and the block multipliers are nonnegative.

    Raises:
        NotEligible: negative entry or negative multiplier; the optimum is
            not a single rectangle of zeros.
    """
    e = _entries(pi_plus)
    p, q = e.shape
    c = corner(e) if c is None else c
    _check_corner(c, p, q)
    d = deltas(e, c)
    fp, fq = p - c.p1, q - c.q1
    out = e.copy()
    if not c.empty:
        out[: c.p1, : c.q1] = d.delta_total - d.delta_total
        out[: c.p1, c.q1:] += d.delta_rows[:, None] / fq
        out[c.p1:, : c.q1] += d.delta_cols[None, :] / fp
        out[c.p1:, c.q1:] -= d.delta_total / (fp * fq)
    eps = tol(out, EPS_NEG)
    lowest = out.min()
    if lowest < -eps:
        raise NotEligible(f"rectangle form has a negative entry {float(lowest)!r}")
    r_min = multiplier_field(e, d, c).min()
    if r_min < -eps:
        raise NotEligible(f"rectangle form has a negative multiplier {float(r_min)!r}")
    if not is_exact(out):
        out = np.where(out < 0, 0.0, out)
    return Coupling.from_entries(out, pi_plus.mu, pi_plus.nu)


def rectangle_of(profile) -> RectangleCorner | None:
    """Corner when a zero profile is a single block, else ``None``.

    ``profile`` holds per-row counts of leading zeros (non-increasing).
    """
    profile = np.asarray(profile)
    nonzero = profile[profile > 0]
    if nonzero.size == 0:
        return RectangleCorner(0, 0)
    p1 = int(nonzero.size)
    if (profile[:p1] == nonzero[0]).all() and (profile[p1:] == 0).all():
        return RectangleCorner(p1, int(nonzero[0]))
    return None


def detect_rectangle(pi_star: np.ndarray) -> RectangleCorner | None:
    """Block corner read off a solved coupling, or ``None`` for a true staircase."""
    return rectangle_of(zero_profile(_entries(pi_star)))
