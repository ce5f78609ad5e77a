"""Proximity force approximation from the plane-plane Lifshitz formula.

Both operations reduce to dimensionless double integrals in (t, tau) with
reflection products

    r_TE(i) = w_i/(w_i + t),   r_TM(i) = -w_i/(w_i + t (1 - tau^2)),

where w_i = Omega_i d.  The t integrand has a weak t^2 ln t endpoint
singularity wherever the reflection product reaches 1 at t = 0, so the
semi-axis is split: t = y^2 Gauss-Legendre on [0, T] (which tames the
logarithm) plus a shifted Gauss-Laguerre tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scattering import PERFECT_CONDUCTOR
from .specfun import dilog
from ._quadrature import gauss_laguerre, gauss_legendre_01, tau_rule

_T_SPLIT = 4.0
_N_HEAD = 64
_N_TAIL = 48
_N_TAU = 64


@dataclass(frozen=True)
class PfaParams:
    """Dimensionless plasma parameters (Omega_i d) and the geometry."""

    varpi_1: float
    varpi_2: float
    radius_R: float
    gap_d: float

    def __post_init__(self):
        for name in ("varpi_1", "varpi_2"):
            v = getattr(self, name)
            if v != PERFECT_CONDUCTOR and (not (v >= 0.0) or not math.isfinite(v)):
                raise ValueError(f"{name} must be >= 0 or the PC marker, got {v}")
        if not (self.radius_R > 0.0 and self.gap_d > 0.0):
            raise ValueError("radius_R and gap_d must be positive")


def _r_product(t, tau, w1, w2, tm: bool):
    """Product of the two reflection coefficients; TM signs cancel."""
    arg = t * (1.0 - tau ** 2) if tm else t
    f1 = 1.0 if w1 == PERFECT_CONDUCTOR else w1 / (w1 + arg)
    f2 = 1.0 if w2 == PERFECT_CONDUCTOR else w2 / (w2 + arg)
    return f1 * f2


def _split_t_quadrature(f_head, g_tail, n_head=_N_HEAD, n_tail=_N_TAIL):
    """int_0^inf f(t) dt for f with an integrable log kink at 0 and e^{-2t} decay.

    f_head(t) evaluates f directly on (0, T]; g_tail(t, x) must equal
    e^{x} f(t) evaluated stably at t = T + x/2 (the caller expands the
    exponentially small argument instead of forming e^{x}).
    """
    y, wy = gauss_legendre_01(n_head)
    y = y * math.sqrt(_T_SPLIT)
    wy = wy * math.sqrt(_T_SPLIT)
    head = np.sum(wy * 2.0 * y * f_head(y * y))
    x, wx = gauss_laguerre(n_tail)
    t = _T_SPLIT + 0.5 * x
    tail = 0.5 * np.sum(wx * g_tail(t, x))
    return head + tail


def lifshitz_plane_plane(d: float, omega_1: float, omega_2: float) -> float:
    """Casimir energy per unit area between two planar plasma sheets.

    Units hbar c = 1, so the return value has dimension 1/length^3 and is
    negative; multiply by hbar c for SI.  PC-PC gives -pi^2/(720 d^3).
    """
    if not (d > 0.0):
        raise ValueError(f"separation must be positive, got {d}")
    for name, om in (("omega_1", omega_1), ("omega_2", omega_2)):
        if om != PERFECT_CONDUCTOR and (not (om >= 0.0) or not math.isfinite(om)):
            raise ValueError(f"{name} must be >= 0 or the PC marker, got {om}")
    if omega_1 == 0.0 or omega_2 == 0.0:
        return 0.0
    w1 = omega_1 if omega_1 == PERFECT_CONDUCTOR else omega_1 * d
    w2 = omega_2 if omega_2 == PERFECT_CONDUCTOR else omega_2 * d
    tau, wtau = tau_rule(_N_TAU)

    def f_head(t):
        tt = t[:, None]
        acc = np.zeros_like(tt * tau[None, :])
        for tm in (False, True):
            p = _r_product(tt, tau[None, :], w1, w2, tm)
            acc += np.log1p(-p * np.exp(-2.0 * tt))
        return tt[:, 0] ** 2 * (acc @ wtau)

    def g_tail(t, x):
        tt = t[:, None]
        acc = np.zeros_like(tt * tau[None, :])
        for tm in (False, True):
            p = _r_product(tt, tau[None, :], w1, w2, tm)
            b = p * math.exp(-2.0 * _T_SPLIT)  # argument = b e^{-x}
            warg = b * np.exp(-x)[:, None]
            acc += -b * (1.0 + warg / 2.0 + warg ** 2 / 3.0 + warg ** 3 / 4.0)
        return tt[:, 0] ** 2 * (acc @ wtau)

    return _split_t_quadrature(f_head, g_tail) / (4.0 * math.pi ** 2 * d ** 3)


def pfa_energy(params: PfaParams) -> float:
    """PFA sphere-plane energy, units hbar c = 1 (dimension 1/length).

    -(R / 4 pi d^2) int dt t int dtau tau/sqrt(1-tau^2)
        [Li2(r_TE r_TE e^{-2t}) + Li2(r_TM r_TM e^{-2t})]

    PC-PC gives -pi^3 R/(720 d^2).
    """
    w1, w2 = params.varpi_1, params.varpi_2
    if w1 == 0.0 or w2 == 0.0:
        return 0.0
    tau, wtau = tau_rule(_N_TAU)

    def f_head(t):
        tt = t[:, None]
        acc = np.zeros_like(tt * tau[None, :])
        for tm in (False, True):
            p = _r_product(tt, tau[None, :], w1, w2, tm)
            z = p * np.exp(-2.0 * tt)
            if np.any(z > 1.0) or np.any(z < -1.0):
                raise AssertionError("dilog argument left [-1, 1]; |r r| <= 1 violated")
            acc += dilog(z)
        return tt[:, 0] * (acc @ wtau)

    def g_tail(t, x):
        tt = t[:, None]
        acc = np.zeros_like(tt * tau[None, :])
        for tm in (False, True):
            p = _r_product(tt, tau[None, :], w1, w2, tm)
            b = p * math.exp(-2.0 * _T_SPLIT)
            warg = b * np.exp(-x)[:, None]
            acc += b * (1.0 + warg / 4.0 + warg ** 2 / 9.0 + warg ** 3 / 16.0)
        return tt[:, 0] * (acc @ wtau)

    q = _split_t_quadrature(f_head, g_tail)
    return -params.radius_R / (4.0 * math.pi * params.gap_d ** 2) * q
