"""Reaction nonlinearities, their smoothness/growth classes, and cutoffs.

A reaction is described by the pair ``(F, F')`` in the rescaled variables,
split into a globally Lipschitz part (constants ``L1``, ``L2``) and an odd
increasing part with power growth (constants ``gamma1``, ``gamma2``,
``ell1``, ``ell2``).  The time-dependent nonlinearity driving the PDE is
recovered as ``f(t, u) = t^{-3/2} F(t, sqrt(t) u)``; when ``F`` ignores its
time argument the reaction is self-similar and ``f`` inherits the critical
scaling.

Built-ins cover the cases used by the experiments: the cubic
``F(w) = lam^2 w^3`` (Allen-Cahn coupling ``lam``), a linear reaction, and
odd polynomials with nonnegative super-linear coefficients.  Evaluators
must be pure and accept numpy arrays in ``w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

__all__ = [
    "Reaction",
    "ClassReport",
    "allen_cahn",
    "linear",
    "odd_poly",
    "zero_reaction",
    "cutoff",
    "verify_class",
    "reaction_from_config",
]

Evaluator = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Reaction:
    """Nonlinearity ``F = F1 + F2`` with class metadata.

    ``F1`` is the globally Lipschitz part, ``F2`` the odd increasing part;
    either may be absent.  ``poly`` holds odd-polynomial coefficients
    ``(c0, c1, ...)`` for ``F(w) = sum c_k w^(2k+1)`` when the reaction is a
    time-independent polynomial, which unlocks the compiled solver kernels.
    """

    name: str
    F1: Evaluator | None = None
    F1_prime: Evaluator | None = None
    F2: Evaluator | None = None
    F2_prime: Evaluator | None = None
    L1: float = 0.0
    L2: float = 0.0
    gamma1: float = 2.0
    gamma2: float = 1.0
    ell1: float = 0.0
    ell2: float = 0.0
    self_similar: bool = True
    lam: float | None = None
    poly: tuple[float, ...] | None = None

    @property
    def is_zero(self) -> bool:
        return self.F1 is None and self.F2 is None

    @property
    def in_s_prime(self) -> bool:
        """Growth regime required by the PDE-vs-mean-field comparison."""
        return self.F2 is None or (self.gamma1 < 3.0 and self.gamma2 < 2.0)

    @property
    def is_pure_cubic(self) -> bool:
        return self.poly is not None and len(self.poly) == 2 and self.poly[0] == 0.0

    def F(self, t: float, w):
        w = np.asarray(w, dtype=np.float64)
        out = np.zeros_like(w)
        if self.F1 is not None:
            out = out + self.F1(t, w)
        if self.F2 is not None:
            out = out + self.F2(t, w)
        return out

    def F_prime(self, t: float, w):
        w = np.asarray(w, dtype=np.float64)
        out = np.zeros_like(w)
        if self.F1_prime is not None:
            out = out + self.F1_prime(t, w)
        if self.F2_prime is not None:
            out = out + self.F2_prime(t, w)
        return out

    def eval_f(self, t: float, u):
        """Rescaled nonlinearity ``t^(-3/2) F(t, sqrt(t) u)``; needs t > 0."""
        if not t > 0:
            raise ValueError(f"time argument must be positive, got t={t}")
        rt = math.sqrt(t)
        return self.F(t, rt * np.asarray(u, dtype=np.float64)) / (t * rt)

    def eval_f_prime(self, t: float, u):
        """Derivative of ``eval_f`` in ``u``: ``t^(-1) F'(t, sqrt(t) u)``."""
        if not t > 0:
            raise ValueError(f"time argument must be positive, got t={t}")
        rt = math.sqrt(t)
        return self.F_prime(t, rt * np.asarray(u, dtype=np.float64)) / t

    def f_poly_coeffs(self, t: float) -> np.ndarray | None:
        """Coefficients ``b_k = c_k t^(k-1)`` of ``f(t, .)`` for polynomial F.

        ``f(t, u) = sum_k c_k t^(k-1) u^(2k+1)``; returns None for
        non-polynomial reactions.
        """
        if self.poly is None:
            return None
        return np.array(
            [c * t ** (k - 1) for k, c in enumerate(self.poly)], dtype=np.float64
        )


def allen_cahn(lam: float) -> Reaction:
    """Cubic reaction ``F(w) = lam^2 w^3`` (pure odd increasing part)."""
    if not lam > 0:
        raise ValueError(f"coupling must be positive, got {lam}")
    lam2 = lam * lam

    def F2(t, w):
        return lam2 * w**3

    def F2p(t, w):
        return 3.0 * lam2 * w**2

    return Reaction(
        name=f"allen-cahn(lam={lam:g})",
        F2=F2,
        F2_prime=F2p,
        gamma1=2.0,
        gamma2=1.0,
        ell1=3.0 * lam2,
        ell2=6.0 * lam2,
        lam=lam,
        poly=(0.0, lam2),
    )


def linear(slope: float) -> Reaction:
    """Linear reaction ``F(w) = slope * w`` in the Lipschitz class."""

    def F1(t, w):
        return slope * w

    def F1p(t, w):
        return np.full_like(np.asarray(w, dtype=np.float64), slope)

    return Reaction(
        name=f"linear(L1={slope:g})",
        F1=F1,
        F1_prime=F1p,
        L1=abs(slope),
        L2=0.0,
        poly=(float(slope),),
    )


def zero_reaction() -> Reaction:
    """The trivial reaction F = 0."""
    return Reaction(name="zero", poly=(0.0,))


def odd_poly(coeffs) -> Reaction:
    """Odd polynomial ``F(w) = sum_k c_k w^(2k+1)``.

    The linear coefficient may have either sign and lands in the Lipschitz
    part; all higher coefficients must be nonnegative so the remainder is
    increasing.  Growth constants are derived from the coefficients.
    """
    coeffs = tuple(float(c) for c in coeffs)
    if not coeffs:
        return zero_reaction()
    if any(c < 0 for c in coeffs[1:]):
        raise ValueError("super-linear coefficients must be nonnegative")
    c0, rest = coeffs[0], coeffs[1:]
    kw: dict = {}
    if c0 != 0.0:
        def F1(t, w, c0=c0):
            return c0 * w

        def F1p(t, w, c0=c0):
            return np.full_like(np.asarray(w, dtype=np.float64), c0)

        kw.update(F1=F1, F1_prime=F1p, L1=abs(c0))
    if any(c != 0.0 for c in rest):
        def F2(t, w, rest=rest):
            w = np.asarray(w, dtype=np.float64)
            w2 = w * w
            acc = np.zeros_like(w)
            for c in reversed(rest):
                acc = acc * w2 + c
            return acc * w2 * w

        def F2p(t, w, rest=rest):
            w = np.asarray(w, dtype=np.float64)
            w2 = w * w
            acc = np.zeros_like(w)
            for k in range(len(rest), 0, -1):
                acc = acc * w2 + (2 * k + 1) * rest[k - 1]
            return acc * w2

        k_max = max(k for k, c in enumerate(rest, start=1) if c != 0.0)
        kw.update(
            F2=F2,
            F2_prime=F2p,
            gamma1=float(2 * k_max),
            gamma2=float(2 * k_max - 1),
            ell1=sum((2 * k + 1) * c for k, c in enumerate(rest, start=1)),
            ell2=sum(2 * k * (2 * k + 1) * c for k, c in enumerate(rest, start=1)),
        )
    return Reaction(name=f"odd-poly{coeffs}", poly=coeffs, **kw)


def cutoff(r: Reaction, g: float) -> Reaction:
    """Freeze the increasing part's derivative outside ``|w| <= g``.

    The result agrees with ``r`` wherever ``|sqrt(t) u| <= g`` and is
    globally Lipschitz with constants
    ``L1 + ell1 (1 + g^gamma1)`` and ``L2 + ell2 (1 + g^gamma2)``.
    """
    if not g > 0:
        raise ValueError(f"cutoff level must be positive, got {g}")
    if r.F2 is None:
        return replace(r, name=f"{r.name}|cut(g={g:g})")
    F2, F2p = r.F2, r.F2_prime

    def F2_cut(t, w):
        w = np.asarray(w, dtype=np.float64)
        clipped = np.clip(w, -g, g)
        # integral of F2'(|p| ^ g-clamp): interior part plus linear tails
        return F2(t, clipped) + F2p(t, np.float64(g)) * (w - clipped)

    def F2p_cut(t, w):
        w = np.asarray(w, dtype=np.float64)
        return F2p(t, np.minimum(np.abs(w), g))

    return replace(
        r,
        name=f"{r.name}|cut(g={g:g})",
        F2=F2_cut,
        F2_prime=F2p_cut,
        L1=r.L1 + r.ell1 * (1.0 + g**r.gamma1),
        L2=r.L2 + r.ell2 * (1.0 + g**r.gamma2),
        lam=None,
        poly=None,
    )


@dataclass(frozen=True)
class ClassReport:
    """Worst sampled violations of the declared reaction class."""

    passed: bool
    oddness: float
    monotonicity: float
    lipschitz_F: float
    lipschitz_F_prime: float
    worst_point: tuple[float, float] | None = None
    slack: float = 1e-9


def verify_class(r: Reaction, t_samples, w_samples, slack: float = 1e-9) -> ClassReport:
    """Sample-based check of oddness, monotonicity, and growth bounds.

    Difference quotients of ``F`` and ``F'`` over consecutive sample points
    are compared against the combined bounds
    ``L1 + ell1 (1 + u^gamma1)`` and ``L2 + ell2 (1 + u^gamma2)`` with
    ``u`` the larger endpoint.  Report only; never raises.
    """
    t_samples = np.atleast_1d(np.asarray(t_samples, dtype=np.float64))
    w_samples = np.atleast_1d(np.asarray(w_samples, dtype=np.float64))
    if t_samples.size == 0 or w_samples.size == 0:
        raise ValueError("sample sets must be nonempty")
    w = np.unique(np.concatenate([w_samples, -w_samples]))

    worst_odd = 0.0
    worst_mono = 0.0
    worst_lip_F = 0.0
    worst_lip_Fp = 0.0
    worst_point = None
    for t in t_samples:
        Fv = np.asarray(r.F(t, w), dtype=np.float64)
        Fpv = np.asarray(r.F_prime(t, w), dtype=np.float64)
        worst_odd = max(worst_odd, float(np.abs(Fv + Fv[::-1]).max()))
        if r.F2_prime is not None:
            mono = float(np.asarray(r.F2_prime(t, w)).min())
            worst_mono = max(worst_mono, -min(mono, 0.0))
        du = np.diff(w)
        u_max = np.maximum(np.abs(w[:-1]), np.abs(w[1:]))
        # quotients over near-coincident points are cancellation noise
        keep = du >= 1e-7 * (1.0 + u_max)
        du, u_max = du[keep], u_max[keep]
        bound_F = r.L1 + r.ell1 * (1.0 + u_max**r.gamma1)
        bound_Fp = r.L2 + r.ell2 * (1.0 + u_max**r.gamma2)
        exc_F = np.abs(np.diff(Fv)[keep]) / du - bound_F
        exc_Fp = np.abs(np.diff(Fpv)[keep]) / du - bound_Fp
        if exc_F.size == 0:
            continue
        wl = w[:-1][keep]
        i = int(np.argmax(exc_F))
        if exc_F[i] > worst_lip_F:
            worst_lip_F = float(exc_F[i])
            worst_point = (float(t), float(wl[i]))
        j = int(np.argmax(exc_Fp))
        if exc_Fp[j] > worst_lip_Fp:
            worst_lip_Fp = float(exc_Fp[j])
            worst_point = (float(t), float(wl[j]))
    passed = (
        worst_odd <= slack
        and worst_mono <= slack
        and worst_lip_F <= slack
        and worst_lip_Fp <= slack
    )
    return ClassReport(
        passed=passed,
        oddness=worst_odd,
        monotonicity=worst_mono,
        lipschitz_F=max(worst_lip_F, 0.0),
        lipschitz_F_prime=max(worst_lip_Fp, 0.0),
        worst_point=worst_point,
        slack=slack,
    )


def reaction_from_config(spec: dict) -> Reaction:
    """Build a reaction from its config description.

    Recognized names: ``allen-cahn`` (key ``lambda``), ``linear`` (key
    ``constants.L1``), ``odd-poly`` (key ``coefficients``), ``zero``.
    """
    name = spec.get("name")
    if name == "allen-cahn":
        return allen_cahn(float(spec.get("lambda", 1.0)))
    if name == "linear":
        constants = spec.get("constants", {})
        return linear(float(constants.get("L1", 1.0)))
    if name == "odd-poly":
        return odd_poly(spec.get("coefficients", []))
    if name == "zero":
        return zero_reaction()
    raise ValueError(f"unknown reaction name: {name!r}")
