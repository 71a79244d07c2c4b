"""Amplitude ODEs of the Gaussian mean-field approximation.

Projecting the nonlinearity onto the first Wiener chaos turns the PDE into
a scalar problem: the mean-field solution is ``sigma(t)`` times the
heat-flowed initial data, where ``sigma`` solves an ODE driven by
``E[F'(sigma Z)]``.  In the original time the ODE is stiff near ``t = 0``
(rate ``~ L1 / (t + eps^2)``), so all integration happens in the
exponential variable

    q = 2 + log(t + eps^2) / log(1/eps),      t = eps^(2-q) - eps^2,

where the right-hand side is uniformly Lipschitz.  For the pure cubic
reaction the attenuation-free limit has the closed form
``sigma(q) = (1 + 3 q lam^2 / (2 pi))^(-1/2)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .expectation import FOUR_PI, QuadratureRule, expect_F_prime, gauss_hermite
from .grid import RealField, TorusGrid, apply_semigroup, grid_point_variance
from .reaction import Reaction

__all__ = [
    "SigmaBoundError",
    "TimeMap",
    "SigmaPath",
    "solve_sigma_eps",
    "solve_sigma_limit",
    "sigma_at_time",
    "mkv_field",
    "allen_cahn_sigma_closed",
]

SIGMA_BOUND_SLACK = 1e-9


class SigmaBoundError(RuntimeError):
    """Amplitude left ``(0, e^(3 L1)]``: integration or metadata fault."""


@dataclass(frozen=True)
class TimeMap:
    """Conversion between PDE time and the exponential variable."""

    eps: float

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")

    @property
    def log_eps_inv(self) -> float:
        return math.log(1.0 / self.eps)

    def t_of_q(self, q):
        return np.exp((2.0 - np.asarray(q, dtype=np.float64)) * math.log(self.eps)) - self.eps**2

    def q_of_t(self, t):
        return 2.0 + np.log(np.asarray(t, dtype=np.float64) + self.eps**2) / self.log_eps_inv


@dataclass(frozen=True)
class SigmaPath:
    """Solved amplitude on a q-mesh.

    ``eps`` is None for the attenuation-free limit path, in which case no
    time conversion is available.
    """

    eps: float | None
    m: float
    reaction: Reaction
    q: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    variance_mode: str = "continuum"
    grid: TorusGrid | None = None

    def __post_init__(self):
        self.q.flags.writeable = False
        self.sigma.flags.writeable = False

    @property
    def q_max(self) -> float:
        return float(self.q[-1])

    @property
    def time_map(self) -> TimeMap:
        if self.eps is None:
            raise ValueError("limit path has no time parametrization")
        return TimeMap(self.eps)

    def sigma_at_q(self, q):
        """Monotone cubic interpolation on the mesh (preserves positivity)."""
        q = np.asarray(q, dtype=np.float64)
        if np.any(q < self.q[0] - 1e-12) or np.any(q > self.q[-1] + 1e-12):
            raise ValueError(f"q={q} outside solved range [0, {self.q_max:g}]")
        if self.q.size == 1:
            return np.broadcast_to(self.sigma[0], q.shape).copy() if q.shape else float(self.sigma[0])
        out = self._interpolant(np.clip(q, self.q[0], self.q[-1]))
        return float(out) if out.ndim == 0 else out

    @property
    def _interpolant(self) -> PchipInterpolator:
        cached = self.__dict__.get("_interp")
        if cached is None:
            cached = PchipInterpolator(self.q, self.sigma, extrapolate=False)
            self.__dict__["_interp"] = cached
        return cached

    def sigma_at_time(self, t: float) -> float:
        tm = self.time_map
        t_end = float(tm.t_of_q(self.q[-1]))
        if t < -1e-15 or t > t_end * (1.0 + 1e-9) + 1e-15:
            raise ValueError(f"t={t} outside covered range [0, {t_end:g}]")
        if t <= 0.0:
            return float(self.sigma[0])
        return float(self.sigma_at_q(float(tm.q_of_t(t))))

    def to_csv(self, path) -> None:
        """Write columns q, t, sigma (t empty on the limit path)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["q", "t", "sigma"])
            ts = self.time_map.t_of_q(self.q) if self.eps is not None else None
            for i, qi in enumerate(self.q):
                t_str = repr(float(ts[i])) if ts is not None else ""
                w.writerow([repr(float(qi)), t_str, repr(float(self.sigma[i]))])


def _q_mesh(q_max: float, dq: float) -> np.ndarray:
    if q_max < 0 or not dq > 0:
        raise ValueError(f"need q_max >= 0 and dq > 0, got {q_max}, {dq}")
    if q_max == 0.0:
        return np.array([0.0])
    n_full = int(math.floor(q_max / dq + 1e-12))
    mesh = dq * np.arange(n_full + 1)
    if mesh[-1] < q_max - 1e-12 * max(q_max, 1.0):
        mesh = np.append(mesh, q_max)
    else:
        mesh[-1] = q_max
    return mesh


def _integrate(rhs: Callable[[float, float], float], mesh: np.ndarray, bound: float) -> np.ndarray:
    """Classical 4th-order one-step method on a fixed mesh, sigma(0) = 1."""
    sigma = np.empty_like(mesh)
    s = 1.0
    sigma[0] = s
    for i in range(mesh.size - 1):
        q, h = mesh[i], mesh[i + 1] - mesh[i]
        k1 = rhs(q, s)
        k2 = rhs(q + 0.5 * h, s + 0.5 * h * k1)
        k3 = rhs(q + 0.5 * h, s + 0.5 * h * k2)
        k4 = rhs(q + h, s + h * k3)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not (0.0 < s <= bound * (1.0 + SIGMA_BOUND_SLACK)):
            raise SigmaBoundError(
                f"sigma={s:g} at q={mesh[i + 1]:g} left (0, {bound:g}]; "
                "integration fault or wrong class metadata"
            )
        sigma[i + 1] = s
    return sigma


def solve_sigma_eps(
    r: Reaction,
    eps: float,
    m: float,
    T: float,
    dq: float = 1e-3,
    variance_mode: str = "continuum",
    grid: TorusGrid | None = None,
    rule: QuadratureRule | None = None,
) -> SigmaPath:
    """Integrate the attenuated amplitude ODE up to PDE time ``T``.

    In the exponential variable the equation reads

        d sigma / dq = -E[F'(t_eff, sigma e^(m t) Z)] sigma,
        Z ~ N(0, w(t_eff)),   t_eff = eps^(2-q),   t = t_eff - eps^2,

    with ``w = 1/(4 pi)`` in continuum mode and
    ``w = t_eff * grid_point_variance(t_eff)`` in grid mode (the exact
    discrete analog).  The mesh reaches ``q_max = 2 + log(T + eps^2) /
    log(1/eps)``.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not T > 0:
        raise ValueError(f"horizon must be positive, got T={T}")
    if variance_mode == "grid" and grid is None:
        raise ValueError("grid variance mode requires a grid")
    if variance_mode not in ("continuum", "grid"):
        raise ValueError(f"unknown variance mode: {variance_mode!r}")
    if rule is None:
        rule = gauss_hermite()
    tm = TimeMap(eps)
    eps_sq = eps * eps
    ln_eps = math.log(eps)
    q_max = 2.0 + math.log(T + eps_sq) / tm.log_eps_inv

    def rhs(q: float, sigma: float) -> float:
        t_eff = math.exp((2.0 - q) * ln_eps)
        if variance_mode == "continuum":
            w = 1.0 / FOUR_PI
        else:
            w = t_eff * grid_point_variance(grid, t_eff)
        scale = sigma * math.exp(m * (t_eff - eps_sq))
        return -expect_F_prime(r, t_eff, scale, w, rule) * sigma

    mesh = _q_mesh(q_max, dq)
    sigma = _integrate(rhs, mesh, math.exp(3.0 * r.L1))
    return SigmaPath(
        eps=eps, m=m, reaction=r, q=mesh, sigma=sigma,
        variance_mode=variance_mode, grid=grid,
    )


def solve_sigma_limit(
    r: Reaction,
    q_max: float = 2.0,
    dq: float = 1e-3,
    rule: QuadratureRule | None = None,
) -> SigmaPath:
    """Integrate the attenuation-free limit ODE on ``[0, q_max]``.

        d sigma / dq = -E[F'(sigma Z)] sigma,   Z ~ N(0, 1/(4 pi)).

    Meaningful for self-similar reactions (``F`` independent of ``t``); the
    time argument passed to ``F'`` is fixed at 1.
    """
    if rule is None:
        rule = gauss_hermite()
    w = 1.0 / FOUR_PI

    def rhs(q: float, sigma: float) -> float:
        return -expect_F_prime(r, 1.0, sigma, w, rule) * sigma

    mesh = _q_mesh(q_max, dq)
    sigma = _integrate(rhs, mesh, math.exp(3.0 * r.L1))
    return SigmaPath(eps=None, m=0.0, reaction=r, q=mesh, sigma=sigma)


def sigma_at_time(path: SigmaPath, t: float) -> float:
    """Amplitude at PDE time ``t`` via the exponential change of variables."""
    return path.sigma_at_time(t)


def mkv_field(path: SigmaPath, t: float, eta_eps: RealField, m: float) -> RealField:
    """Mean-field solution ``sigma(t) * (e^{m t} G_t * eta_eps)``.

    Linear in ``eta_eps``; the sensitivity to the noise is deterministic.
    """
    if path.grid is not None and path.grid != eta_eps.grid:
        raise ValueError("field grid does not match the grid the path was solved on")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got t={t}")
    s = path.sigma_at_time(t)
    flowed = apply_semigroup(eta_eps, t, m)
    if s == 1.0:
        return flowed
    return RealField(eta_eps.grid, s * flowed.values)


def allen_cahn_sigma_closed(lam: float, q) -> float | np.ndarray:
    """Closed-form limit amplitude for the cubic reaction.

    ``sigma(q) = (1 + 3 q lam^2 / (2 pi))^(-1/2)``.
    """
    q = np.asarray(q, dtype=np.float64)
    if np.any(q < 0):
        raise ValueError("q must be nonnegative")
    out = (1.0 + 3.0 * q * lam * lam / (2.0 * math.pi)) ** -0.5
    return float(out) if out.ndim == 0 else out
