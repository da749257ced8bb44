"""How much of the simplex admits the indeterminacy coupling.

Closed-form proportions of margins satisfying the nonnegativity condition,
constructive generators of such margins, and Monte Carlo estimates drawn
under the flat Dirichlet law.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .core import EPS_NEG, Marginal, condition_h_value, new_marginal, tol
from .errors import ZeroWeight

Mode = Literal["self", "pair"]
CHUNK = 1 << 17


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class ProportionEstimate:
    estimate: float
    std_error: float
    n_samples: int
    analytic: float | None = None

    @classmethod
    def from_counts(cls, hits: int, n_samples: int, analytic: float | None = None) -> "ProportionEstimate":
        est = hits / n_samples
        return cls(est, math.sqrt(est * (1 - est) / n_samples), n_samples, analytic)

    def within(self, n_sigma: float = 3.0) -> bool:
        """Analytic value lies within ``n_sigma`` standard errors."""
        if self.analytic is None:
            raise ValueError("no analytic value attached")
        return abs(self.estimate - self.analytic) <= n_sigma * self.std_error

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "analytic": self.analytic,
        }


@dataclass(frozen=True, eq=False)
class EligiblePairRecipe:
    """Mixing weight ``alpha`` and two shape vectors ``r`` (p points), ``s`` (q points)."""

    alpha: float
    r: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")
        for name in ("r", "s"):
            v = np.asarray(getattr(self, name), dtype=float)
            if (v < 0).any() or abs(v.sum() - 1) > 1e-9:
                raise ValueError(f"{name} is not a probability vector")


def self_coupling_proportion(p: int) -> float:
    """Share of the simplex whose margin can be coupled with itself by the closed form."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return 0.5 ** (p - 1)


def pair_proportion(p: int, q: int) -> float:
    """Share of independent margin pairs admitting the closed form.

    Equals ``(p-1)! (q-1)! / (p+q-2)!``, i.e. ``1 / C(p+q-2, p-1)``.  The
    binomial is an exact integer, so the quotient is correctly rounded and
    never overflows (it underflows to 0.0 for huge supports).
    """
    if p < 1 or q < 1:
        raise ValueError("p and q must be >= 1")
    return 1 / math.comb(p + q - 2, p - 1)


def _dirichlet_rows(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    e = rng.standard_exponential((n, k))
    return e / e.sum(axis=1, keepdims=True)


def sample_simplex(n: int, rng) -> Marginal:
    """Uniform draw from the probability simplex on ``n`` points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(rng)
    while True:
        w = _dirichlet_rows(rng, 1, n)[0]
        if (w > 0).all():
            return new_marginal(w)


def _count_hits(p: int, q: int, mode: Mode, n: int, rng: np.random.Generator) -> int:
    hits = 0
    done = 0
    while done < n:
        size = min(CHUNK, n - done)
        mu_min = _dirichlet_rows(rng, size, p).min(axis=1)
        nu_min = mu_min if mode == "self" else _dirichlet_rows(rng, size, q).min(axis=1)
        hits += int(np.count_nonzero(condition_h_value(mu_min, nu_min, p, q) >= -EPS_NEG))
        done += size
    return hits


def estimate_proportion(
    p: int,
    q: int | None,
    mode: Mode,
    n_samples: int,
    rng,
    shards: int = 1,
    workers: int = 1,
) -> ProportionEstimate:
    """Monte Carlo share of uniformly drawn margins passing the closed-form test.

    Args:
        p, q: support sizes; in ``"self"`` mode ``q`` must be ``None`` or ``p``.
        mode: ``"self"`` tests ``(mu, mu)``; ``"pair"`` tests independent ``(mu, nu)``.
        n_samples: number of draws, split as evenly as possible across shards.
        rng: seed or ``numpy.random.Generator``.
        shards: independent substreams spawned from ``rng``; results depend
            on ``(seed, shards)`` only, never on ``workers``.
        workers: threads used to run the shards.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if mode == "self":
        if q not in (None, p):
            raise ValueError("self mode couples a margin with itself; q must equal p")
        q = p
        analytic = self_coupling_proportion(p)
    elif mode == "pair":
        if q is None:
            raise ValueError("pair mode needs q")
        analytic = pair_proportion(p, q)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    gen = as_generator(rng)
    if shards <= 1:
        hits = _count_hits(p, q, mode, n_samples, gen)
    else:
        streams = gen.spawn(shards)
        sizes = [n_samples // shards + (i < n_samples % shards) for i in range(shards)]
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            hits = sum(pool.map(lambda a: _count_hits(p, q, mode, a[0], a[1]), zip(sizes, streams)))
    return ProportionEstimate.from_counts(hits, n_samples, analytic)


def _positive_margin(values: np.ndarray, name: str) -> Marginal:
    if (values <= 0).any():
        raise ZeroWeight(f"{name} has a zero coordinate")
    return new_marginal(values)


def eligible_pair(recipe: EligiblePairRecipe, p: int, q: int) -> tuple[Marginal, Marginal]:
    """Margins built to satisfy the closed-form condition by construction."""
    r = np.asarray(recipe.r, dtype=float)
    s = np.asarray(recipe.s, dtype=float)
    if len(r) != p or len(s) != q:
        raise ValueError(f"recipe shapes ({len(r)}, {len(s)}) do not match ({p}, {q})")
    a = recipe.alpha
    mu = a / p + (1 - a) * r
    nu = (1 - a) / q + a * s
    return _positive_margin(mu, "mu"), _positive_margin(nu, "nu")


def eligible_self(r: Sequence[float], p: int) -> Marginal:
    r = np.asarray(r, dtype=float)
    if len(r) != p:
        raise ValueError(f"r has {len(r)} points, expected {p}")
    return _positive_margin(1 / (2 * p) + r / 2, "mu")


def alpha_of(mu: Marginal, nu: Marginal) -> float | None:
    """Mixing weight ``p * min(mu)`` if it certifies eligibility, else ``None``."""
    p, q = mu.size, nu.size
    alpha = p * mu.weights[0]
    if nu.weights[0] - (1 - alpha) / q >= -p * tol(mu.weights, EPS_NEG):
        return alpha if mu.exact else float(alpha)
    return None


def random_recipe(p: int, q: int, rng) -> EligiblePairRecipe:
    rng = as_generator(rng)
    return EligiblePairRecipe(
        alpha=float(rng.uniform()),
        r=_dirichlet_rows(rng, 1, p)[0],
        s=_dirichlet_rows(rng, 1, q)[0],
    )
