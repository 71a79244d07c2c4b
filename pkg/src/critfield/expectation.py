"""Gauss-Hermite evaluation of ``E[F'(t, sigma Z)]`` for ``Z ~ N(0, v)``.

This scalar expectation is the entire coupling between the amplitude ODEs
and the reaction: the smoothed Gaussian field at a point has a known
variance, so no field-level sampling is ever needed inside the ODEs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import TorusGrid, grid_point_variance
from .reaction import Reaction

__all__ = ["QuadratureRule", "gauss_hermite", "expect_F_prime", "variance_for_sigma_ode"]

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for expectations against the standard normal.

    ``E[g(Z)] ~ sum_i weights[i] * g(nodes[i])``; weights are positive and
    sum to one, and the rule is exact for polynomials of degree
    ``2 * n_nodes - 1``.
    """

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.nodes.size


@lru_cache(maxsize=32)
def gauss_hermite(n_nodes: int = 64) -> QuadratureRule:
    """Standard-normal Gauss-Hermite rule with ``n_nodes`` points."""
    if n_nodes < 1:
        raise ValueError(f"need at least one node, got {n_nodes}")
    x, w = np.polynomial.hermite.hermgauss(n_nodes)
    nodes = math.sqrt(2.0) * x
    weights = w / math.sqrt(math.pi)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(nodes=nodes, weights=weights)


def expect_F_prime(
    r: Reaction,
    t: float,
    sigma: float,
    v: float,
    rule: QuadratureRule | None = None,
) -> float:
    """Quadrature value of ``E[F'(t, sigma Z)]`` with ``Z ~ N(0, v)``.

    ``F'`` is even, so the integrand is even in the node variable.  Raises
    if a node evaluates to a non-finite value (identifying the node) or on
    invalid ``v``, ``t``, ``sigma``.
    """
    if not v > 0:
        raise ValueError(f"variance must be positive, got v={v}")
    if not t > 0:
        raise ValueError(f"time argument must be positive, got t={t}")
    if sigma < 0:
        raise ValueError(f"scale must be nonnegative, got sigma={sigma}")
    if rule is None:
        rule = gauss_hermite()
    args = (sigma * math.sqrt(v)) * rule.nodes
    vals = np.asarray(r.F_prime(t, args), dtype=np.float64)
    if not np.isfinite(vals).all():
        i = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise FloatingPointError(
            f"F' non-finite at quadrature node {i} (argument {args[i]:g})"
        )
    return float(rule.weights @ vals)


def variance_for_sigma_ode(
    mode: str, t_eff: float, grid: TorusGrid | None = None
) -> float:
    """Point variance of heat-flowed white noise at diffusion time ``t_eff``.

    ``continuum`` returns ``1/(4 pi t_eff)``; ``grid`` returns the exact
    mode sum for the given grid, removing discretization bias when the ODE
    is compared against fields computed on that grid.
    """
    if not t_eff > 0:
        raise ValueError(f"diffusion time must be positive, got {t_eff}")
    if mode == "continuum":
        return 1.0 / (FOUR_PI * t_eff)
    if mode == "grid":
        if grid is None:
            raise ValueError("grid mode requires a grid")
        return grid_point_variance(grid, t_eff)
    raise ValueError(f"unknown variance mode: {mode!r}")
