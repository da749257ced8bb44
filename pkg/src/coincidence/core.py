"""Margins, couplings and the closed-form couplings of the uniform projection.

Every formula in this package assumes ascending margins, so
:class:`Marginal` sorts its weights at construction and remembers the
permutation needed to report results in the caller's order.

Two numeric modes share the same code: ``float64`` arrays (default) and
``object`` arrays of :class:`fractions.Fraction` (``exact=True``).  In exact
mode every tolerance collapses to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    EmptyMarginal,
    MarginalMismatch,
    NonPositiveWeight,
    NotNormalized,
)

EPS_SUM = 1e-12
EPS_MARGINAL = 1e-10
EPS_NEG = 1e-12
NORMALIZATION_SLACK = 1e-9


def is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def tol(a: np.ndarray, eps: float):
    """``eps`` for float arrays, exact zero for rational ones."""
    return 0 if is_exact(a) else eps


def _as_fraction(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True, eq=False)
class Marginal:
    """Strictly positive probability vector stored in ascending order.

    Attributes:
        weights: ascending weights (float64 or Fraction objects).
        perm: ``perm[i]`` is the caller's index of ``weights[i]``.
    """

    weights: np.ndarray
    perm: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def exact(self) -> bool:
        return is_exact(self.weights)

    @property
    def inverse_perm(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm))
        return inv

    def original(self) -> np.ndarray:
        """Weights in the caller's original order."""
        out = np.empty_like(self.weights)
        out[self.perm] = self.weights
        return out

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"Marginal(weights={self.weights.tolist()!r}, perm={self.perm.tolist()!r})"


def new_marginal(raw_weights: Sequence, exact: bool = False) -> Marginal:
    """Validate, sort and (slightly) renormalize a weight vector.

    Ties keep their original relative order.

    Raises:
        EmptyMarginal: no weights.
        NonPositiveWeight: some weight is ``<= 0``.
        NotNormalized: the weights sum further than ``1e-9`` from one.
    """
    if exact:
        values = [_as_fraction(w) for w in raw_weights]
    else:
        values = [float(w) for w in raw_weights]
    if not values:
        raise EmptyMarginal("a marginal needs at least one weight")
    for i, w in enumerate(values):
        if not w > 0:
            raise NonPositiveWeight(f"weight {i} is {w}; all weights must be > 0")
    total = sum(values) if exact else float(np.sum(values))
    if abs(total - 1) > NORMALIZATION_SLACK:
        raise NotNormalized(f"weights sum to {float(total)!r}, not 1")
    if total != 1:
        values = [w / total for w in values]
    order = sorted(range(len(values)), key=values.__getitem__)
    dtype = object if exact else np.float64
    weights = np.array([values[i] for i in order], dtype=dtype)
    weights.setflags(write=False)
    perm = np.array(order, dtype=np.intp)
    perm.setflags(write=False)
    return Marginal(weights=weights, perm=perm)


def uniform_law(n: int, exact: bool = False) -> Marginal:
    if n < 1:
        raise EmptyMarginal("the uniform law needs n >= 1")
    w = Fraction(1, n) if exact else 1.0 / n
    return new_marginal([w] * n, exact=exact)


@dataclass(frozen=True, eq=False)
class SignedMatrix:
    """A real ``p x q`` matrix with prescribed row and column sums.

    Entries may be negative.  When ``mu``/``nu`` are attached, the entries
    are indexed in their sorted order.
    """

    entries: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    mu: Marginal | None = field(default=None, repr=False)
    nu: Marginal | None = field(default=None, repr=False)

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2 or e.shape != (len(self.row_sums), len(self.col_sums)):
            raise MarginalMismatch(
                f"entries of shape {e.shape} do not match sums of lengths "
                f"{len(self.row_sums)}, {len(self.col_sums)}"
            )
        eps = tol(e, EPS_MARGINAL)
        row_err = _max_abs(e.sum(axis=1) - self.row_sums)
        col_err = _max_abs(e.sum(axis=0) - self.col_sums)
        total_err = abs(e.sum() - 1)
        if row_err > eps or col_err > eps or total_err > eps:
            raise MarginalMismatch(
                f"sum residuals rows={float(row_err):.3g} cols={float(col_err):.3g} "
                f"total={float(total_err):.3g}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def in_original_order(self) -> np.ndarray:
        """Entries re-indexed to the caller's order of ``mu`` and ``nu``."""
        if self.mu is None or self.nu is None:
            return self.entries.copy()
        return to_original_order(self.entries, self.mu, self.nu)


@dataclass(frozen=True, eq=False)
class Coupling(SignedMatrix):
    """A numerically nonnegative matrix whose sums are ``(mu, nu)``."""

    def __post_init__(self):
        if self.mu is None or self.nu is None:
            raise MarginalMismatch("a Coupling must carry its margins")
        super().__post_init__()
        eps = tol(self.entries, EPS_MARGINAL)
        if (_max_abs(self.row_sums - self.mu.weights) > eps
                or _max_abs(self.col_sums - self.nu.weights) > eps):
            raise MarginalMismatch("declared sums differ from the attached margins")
        lowest = self.entries.min()
        if lowest < -tol(self.entries, EPS_NEG):
            raise MarginalMismatch(f"coupling has a negative entry {float(lowest)!r}")

    @classmethod
    def from_entries(cls, entries: np.ndarray, mu: Marginal, nu: Marginal) -> "Coupling":
        return cls(entries=entries, row_sums=mu.weights, col_sums=nu.weights, mu=mu, nu=nu)


def _max_abs(a: np.ndarray):
    if a.size == 0:
        return 0
    return max(abs(x) for x in a.ravel()) if is_exact(a) else float(np.max(np.abs(a)))


def to_original_order(entries: np.ndarray, mu: Marginal, nu: Marginal) -> np.ndarray:
    out = np.empty_like(entries)
    out[np.ix_(mu.perm, nu.perm)] = entries
    return out


def to_sorted_order(entries: np.ndarray, mu: Marginal, nu: Marginal) -> np.ndarray:
    return np.asarray(entries)[np.ix_(mu.perm, nu.perm)]


def _entries_of(m) -> np.ndarray:
    return m.entries if isinstance(m, SignedMatrix) else np.asarray(m)


def independence_coupling(mu: Marginal, nu: Marginal) -> Coupling:
    entries = np.outer(mu.weights, nu.weights)
    return Coupling.from_entries(entries, mu, nu)


def indeterminacy_entries(mu: Marginal, nu: Marginal) -> np.ndarray:
    p, q = mu.size, nu.size
    if mu.exact:
        shift = Fraction(1, p * q)
        return (mu.weights[:, None] / q + nu.weights[None, :] / p) - shift
    return mu.weights[:, None] / q + nu.weights[None, :] / p - 1.0 / (p * q)


def indeterminacy_coupling(mu: Marginal, nu: Marginal) -> SignedMatrix:
    """The unconstrained projection of the uniform law; may be negative."""
    return SignedMatrix(
        entries=indeterminacy_entries(mu, nu),
        row_sums=mu.weights,
        col_sums=nu.weights,
        mu=mu,
        nu=nu,
    )


def index_of_coincidence(m) -> float:
    e = _entries_of(m)
    if is_exact(e):
        return sum((x * x for x in e.ravel()), Fraction(0))
    return float(np.sum(e * e))


def condition_h_value(mu_min, nu_min, p: int, q: int):
    """Smallest entry of the indeterminacy coupling; works on arrays too."""
    if isinstance(mu_min, Fraction):
        return mu_min / q + nu_min / p - Fraction(1, p * q)
    return mu_min / q + nu_min / p - 1.0 / (p * q)


def condition_h(mu: Marginal, nu: Marginal) -> bool:
    """True when the indeterminacy coupling is nonnegative, hence optimal."""
    value = condition_h_value(mu.weights[0], nu.weights[0], mu.size, nu.size)
    return bool(value >= -tol(mu.weights, EPS_NEG))


def is_monotone(m, eps: float = EPS_NEG) -> bool:
    """Nondecreasing along every row and every column."""
    e = _entries_of(m)
    eps = tol(e, eps)
    if e.shape[1] > 1 and (np.diff(e, axis=1) < -eps).any():
        return False
    if e.shape[0] > 1 and (np.diff(e, axis=0) < -eps).any():
        return False
    return True
