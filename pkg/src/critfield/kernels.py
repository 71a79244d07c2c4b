"""Pointwise reaction-substep kernels with optional compiled core.

The reaction acts cell by cell, so one PDE substep reduces to the same
scalar update at every grid point: a classical 4th-order step of
``du/dtau = -p(u)`` for an odd polynomial ``p``, or the exact flow of the
pure cubic.  These inner loops dominate the solver runtime next to the
FFTs, so a Cython implementation (``critfield._speedups``) is used when it
built successfully; a numpy fallback with identical semantics is selected
otherwise, or when ``CRITFIELD_PURE=1`` is set.

Each kernel optionally fills ``jac_out`` with the exact per-cell derivative
of the update map, which is how noise-sensitivity fields are propagated
through the nonlinear steps.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["backend", "cubic_exact", "rk4_odd_poly", "rk4_callable"]


def _poly(u2: np.ndarray, c) -> np.ndarray:
    """Horner evaluation of ``sum c_k (u2)^k``."""
    acc = np.zeros_like(u2)
    for ck in c[::-1]:
        acc *= u2
        acc += ck
    return acc


def _np_cubic_exact(u: np.ndarray, c: float, jac_out: np.ndarray | None = None) -> None:
    """In place ``u <- u / sqrt(1 + c u^2)``; jacobian ``(1 + c u^2)^(-3/2)``.

    Overflowing inputs propagate as non-finite values (the solver's blow-up
    detection reports them), matching the compiled kernel's silence.
    """
    with np.errstate(invalid="ignore", over="ignore"):
        den = 1.0 + c * (u * u)
        rt = np.sqrt(den)
        if jac_out is not None:
            np.divide(1.0, den * rt, out=jac_out)
        u /= rt


def _np_rk4_odd_poly(
    u: np.ndarray, b: np.ndarray, h: float, jac_out: np.ndarray | None = None
) -> None:
    """In place RK4 step of ``du/dtau = -p(u)``, ``p(u) = sum b_k u^(2k+1)``.

    ``jac_out`` receives the exact derivative of the update map, obtained by
    differentiating the stages.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.size == 0 or not b.any():
        if jac_out is not None:
            jac_out.fill(1.0)
        return
    d = b * (2.0 * np.arange(b.size) + 1.0)

    def p(x):
        return _poly(x * x, b) * x

    def s(x):
        return _poly(x * x, d)

    want = jac_out is not None
    with np.errstate(invalid="ignore", over="ignore"):
        k1 = p(u)
        a1 = s(u) if want else None
        v = u - (0.5 * h) * k1
        k2 = p(v)
        a2 = s(v) * (1.0 - (0.5 * h) * a1) if want else None
        v = u - (0.5 * h) * k2
        k3 = p(v)
        a3 = s(v) * (1.0 - (0.5 * h) * a2) if want else None
        v = u - h * k3
        k4 = p(v)
        if want:
            a4 = s(v) * (1.0 - h * a3)
            jac_out[:] = 1.0 - (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        u -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_callable(u: np.ndarray, p, s, h: float, want_jac: bool = False):
    """RK4 step of ``du/dtau = -p(u)`` for arbitrary vectorized callables.

    Returns ``(u_new, jac)`` with ``jac = None`` unless requested; used for
    reactions without a polynomial form.  ``s`` must be ``p'``.
    """
    k1 = p(u)
    a1 = s(u) if want_jac else None
    v = u - (0.5 * h) * k1
    k2 = p(v)
    a2 = s(v) * (1.0 - (0.5 * h) * a1) if want_jac else None
    v = u - (0.5 * h) * k2
    k3 = p(v)
    a3 = s(v) * (1.0 - (0.5 * h) * a2) if want_jac else None
    v = u - h * k3
    k4 = p(v)
    jac = None
    if want_jac:
        a4 = s(v) * (1.0 - h * a3)
        jac = 1.0 - (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return u - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), jac


_IMPL = None
if not os.environ.get("CRITFIELD_PURE"):
    try:
        from . import _speedups as _IMPL  # type: ignore[no-redef]
    except ImportError:
        _IMPL = None


def backend() -> str:
    """Name of the active kernel implementation."""
    return "compiled" if _IMPL is not None else "numpy"


def cubic_exact(u, c, jac_out=None):
    if _IMPL is not None:
        _IMPL.cubic_exact(u, c, jac_out)
    else:
        _np_cubic_exact(u, c, jac_out)


def rk4_odd_poly(u, b, h, jac_out=None):
    if _IMPL is not None:
        _IMPL.rk4_odd_poly(u, np.ascontiguousarray(b, dtype=np.float64), h, jac_out)
    else:
        _np_rk4_odd_poly(u, b, h, jac_out)
