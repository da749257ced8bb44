"""Sampling the indeterminacy coupling as a three-component mixture.

When the indeterminacy coupling is nonnegative it splits into

* ``w1`` x (mode-concentrated residual of ``mu``) x uniform columns,
* ``w2`` x uniform rows x (mode-concentrated residual of ``nu``),
* ``w3`` x uniform on the whole grid,

with ``w1 = 1 - p*min(mu)``, ``w2 = 1 - q*min(nu)`` and ``w3 = 1 - w1 - w2``.
Draws pick a component and then two independent indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EPS_NEG, Marginal, condition_h
from .errors import ConditionHViolated
from .measure import as_generator

WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class MixtureDecomposition:
    """Weights and residual distributions, indexed in sorted margin order.

    A residual is ``None`` exactly when its weight is zero (uniform margin).
    """

    w1: float
    w2: float
    w3: float
    comp1_row: np.ndarray | None
    comp2_col: np.ndarray | None
    mu: Marginal
    nu: Marginal

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3])

    @property
    def shape(self) -> tuple[int, int]:
        return self.mu.size, self.nu.size

    def matrix(self) -> np.ndarray:
        """Mixture density on the sorted grid; equals the indeterminacy coupling."""
        p, q = self.shape
        out = np.full((p, q), self.w3 / (p * q))
        if self.comp1_row is not None:
            out += self.w1 * self.comp1_row[:, None] / q
        if self.comp2_col is not None:
            out += self.w2 * self.comp2_col[None, :] / p
        return out


def _residual(weights: np.ndarray) -> tuple[float, np.ndarray | None]:
    n = len(weights)
    w = max(0.0, 1.0 - n * float(weights[0]))
    if w <= WEIGHT_FLOOR:
        return 0.0, None
    comp = (weights - weights[0]) / w
    return w, comp / comp.sum()


def decompose(mu: Marginal, nu: Marginal) -> MixtureDecomposition:
    """Split the indeterminacy coupling of ``(mu, nu)`` into its three components.

    Raises:
        ConditionHViolated: the indeterminacy coupling has a negative entry.
    """
    if not condition_h(mu, nu):
        raise ConditionHViolated("indeterminacy coupling is negative; no mixture exists")
    mu_w = np.asarray(mu.weights, dtype=float)
    nu_w = np.asarray(nu.weights, dtype=float)
    w1, comp1 = _residual(mu_w)
    w2, comp2 = _residual(nu_w)
    w3 = 1.0 - w1 - w2
    if w3 < -EPS_NEG:
        raise ConditionHViolated(f"uniform weight {w3!r} is negative")
    w3 = max(w3, 0.0)
    if w3 <= WEIGHT_FLOOR:
        w3 = 0.0
    return MixtureDecomposition(w1, w2, w3, comp1, comp2, mu, nu)


def _pick(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def draw_many(d: MixtureDecomposition, n: int, rng, original: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``n`` independent draws ``(u, v)`` plus the selected component (1, 2 or 3).

    Every categorical choice consumes one uniform variate and inverts the
    cumulative weights.  Indices refer to the caller's order unless
    ``original`` is false.
    """
    rng = as_generator(rng)
    p, q = d.shape
    weights = d.weights
    comp = _pick(np.cumsum(weights / weights.sum()), rng.uniform(size=n))
    u = rng.integers(0, p, size=n)
    v = rng.integers(0, q, size=n)
    first = comp == 0
    if d.comp1_row is not None and first.any():
        u[first] = _pick(np.cumsum(d.comp1_row), rng.uniform(size=int(first.sum())))
    second = comp == 1
    if d.comp2_col is not None and second.any():
        v[second] = _pick(np.cumsum(d.comp2_col), rng.uniform(size=int(second.sum())))
    if original:
        u, v = d.mu.perm[u], d.nu.perm[v]
    return u, v, comp + 1


def draw(d: MixtureDecomposition, rng) -> tuple[int, int]:
    u, v, _ = draw_many(d, 1, rng)
    return int(u[0]), int(v[0])
