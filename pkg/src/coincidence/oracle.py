"""Brute-force reference: Dykstra projection of the uniform law onto the polytope.

Used to cross-check :func:`coincidence.staircase.solve`; it shares no code
with the exact solver beyond the :class:`Marginal` type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Coupling, Marginal
from .errors import NoConvergence
from .staircase import Certificate, certify


@dataclass(frozen=True)
class OracleConfig:
    max_iterations: int = 200_000
    tolerance: float = 1e-10

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def project_uniform(mu: Marginal, nu: Marginal, cfg: OracleConfig | None = None) -> Coupling:
    """Euclidean projection of the uniform ``p x q`` law onto couplings of ``(mu, nu)``.

    Cycles row-sum set, column-sum set, nonnegative orthant, each with its
    Dykstra correction term, until an entry moves by less than
    ``tolerance / 100`` per sweep and the sums are within ``tolerance``.
    """
    cfg = cfg or OracleConfig()
    a = np.asarray(mu.weights, dtype=float)
    b = np.asarray(nu.weights, dtype=float)
    p, q = len(a), len(b)
    x = np.full((p, q), 1.0 / (p * q))
    c_rows = np.zeros_like(x)
    c_cols = np.zeros_like(x)
    c_pos = np.zeros_like(x)
    for _ in range(cfg.max_iterations):
        prev = x
        y = x + c_rows
        x = y + (a - y.sum(axis=1))[:, None] / q
        c_rows = y - x
        y = x + c_cols
        x = y + (b - y.sum(axis=0))[None, :] / p
        c_cols = y - x
        y = x + c_pos
        x = np.maximum(y, 0.0)
        c_pos = y - x
        if np.abs(x - prev).max() < cfg.tolerance * 1e-2:
            residual = max(np.abs(x.sum(axis=1) - a).max(), np.abs(x.sum(axis=0) - b).max())
            if residual <= cfg.tolerance:
                return Coupling.from_entries(x, mu, nu)
    raise NoConvergence(f"Dykstra projection did not converge in {cfg.max_iterations} sweeps")


def recover_multipliers(pi: np.ndarray, support_tol: float = 1e-8):
    """Least-squares multipliers for a numerical optimum ``pi``.

    Fits ``pi[u, v] = lam[u] + omega[v]`` on the positive support (``theta``
    is absorbed and returned as 0) and sets ``r`` to the stationarity gap on
    the zero set.
    """
    pi = np.asarray(pi, dtype=float)
    p, q = pi.shape
    us, vs = np.nonzero(pi > support_tol)
    design = np.zeros((len(us), p + q))
    design[np.arange(len(us)), us] = 1.0
    design[np.arange(len(us)), p + vs] = 1.0
    coef, *_ = np.linalg.lstsq(design, pi[us, vs], rcond=None)
    lam, omega = coef[:p], coef[p:]
    fitted = lam[:, None] + omega[None, :]
    r = np.where(pi > support_tol, 0.0, pi - fitted)
    return r, lam, omega, 0.0


def oracle_certificate(pi: np.ndarray, mu: Marginal, nu: Marginal, tolerance: float = 1e-6) -> Certificate:
    """KKT check of a numerical optimum with uniformly relaxed tolerances."""
    r, lam, omega, theta = recover_multipliers(pi)
    return certify(
        np.asarray(pi, dtype=float), r, lam, omega, theta, mu, nu,
        marginal_tol=tolerance, stationarity_tol=tolerance,
        sign_tol=tolerance, slackness_tol=tolerance,
    )
