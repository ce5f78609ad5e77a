"""Exact Casimir interaction energy from the round-trip determinant.

E = (hbar c / 2 pi) int_0^infty dkappa sum_m ln det(I - M_m(kappa))

with automatic truncation control in l, m and the kappa quadrature.  The
core works in units R = 1, hbar c = 1 (everything depends only on kappa R,
Omega R and L/R); results are reported per unit of the caller's length unit
together with the dimensionless combination E d^2 / (hbar c R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericsError, SpectralAnomalyError
from .roundtrip import RoundTripBlock, assemble_block
from .scattering import PlaneSheet, SphereSheet
from ._quadrature import gauss_laguerre

_L_MAX_CEILING = 2000
_KAPPA_NODE_CEILING = 128
_THETA_NODE_CEILING = 192
_LOGDET_POSITIVE_TOL = 1e-12


@dataclass(frozen=True)
class NumericsSpec:
    """Every knob the truncations leave open.

    l_max/m_max may be "auto"; tolerances apply to the dimensionless core
    value E R / (hbar c).
    """

    l_max: int | str = "auto"
    m_max: int | str = "auto"
    kappa_nodes: int = 16
    theta_nodes: int = 40
    rel_tol: float = 1e-3
    abs_tol: float = 1e-12

    def __post_init__(self):
        for name in ("l_max", "m_max"):
            v = getattr(self, name)
            if v != "auto" and (not isinstance(v, int) or v < 1):
                raise ValueError(f"{name} must be a positive integer or 'auto', got {v!r}")
        if self.kappa_nodes < 8 or self.theta_nodes < 8:
            raise ValueError("node counts must be >= 8")
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class EnergyResult:
    """Energy in units hbar*c per caller length unit, with convergence metadata."""

    energy: float
    energy_dimensionless: float
    error_estimate: float
    l_max_used: int
    m_max_used: int
    kappa_nodes_used: int


def logdet_one_minus(block: RoundTripBlock) -> float:
    """ln det(I - M_m) <= 0 from a round-trip block.

    Dense LU factorisation with pivoting (LAPACK via slogdet); the block's
    symbolic log-scale is re-applied exactly before factorising.  The m = 0
    block decouples into TE and TM halves, which are factorised separately.
    """
    scale = math.exp(block.log_scale) if block.log_scale < 700.0 else math.inf
    if not math.isfinite(scale):
        raise NumericsError(f"block scale overflow, log_scale={block.log_scale}")
    mat = block.matrix

    def _one(a):
        sign, ld = np.linalg.slogdet(np.eye(a.shape[0]) - scale * a)
        if not np.isfinite(ld) or sign <= 0.0:
            raise NumericsError(
                f"non-finite or sign-flipped factorisation in block m={block.m}, "
                f"kappa={block.kappa}")
        return float(ld)

    if block.m == 0:
        val = _one(mat[0::2, 0::2]) + _one(mat[1::2, 1::2])
    else:
        val = _one(mat)
    if val > _LOGDET_POSITIVE_TOL:
        raise SpectralAnomalyError(
            f"ln det(I - M) = {val} > 0 for block m={block.m}, kappa={block.kappa}; "
            "l_max too small or scattering bug", error_estimate=val)
    return val


def _sub_block(block: RoundTripBlock, nl_keep: int) -> RoundTripBlock:
    k = 2 * nl_keep
    return RoundTripBlock(m=block.m, kappa=block.kappa, l_max=block.l_max,
                          matrix=block.matrix[:k, :k], log_scale=block.log_scale,
                          log_t_half=block.log_t_half[:k])


def _mode_sum(kappa, sphere, plane, numerics, m_max, l_drop):
    """F(kappa) = sum_m ln det(I - M_m) with the m <-> -m doubling.

    Also returns the same sum on the principal submatrix with l_drop fewer
    degrees (the l-truncation probe) and a geometric m-tail estimate.
    """
    total = 0.0
    total_sub = 0.0
    tail = 0.0
    contribs = []
    m_used = 0
    for m in range(0, min(m_max, numerics.l_max) + 1):
        block = assemble_block(m, kappa, sphere, plane, numerics)
        weight = 1.0 if m == 0 else 2.0
        c = weight * logdet_one_minus(block)
        nl = block.dim // 2
        nl_keep = max(1, nl - l_drop)
        c_sub = weight * logdet_one_minus(_sub_block(block, nl_keep))
        total += c
        total_sub += c_sub
        contribs.append(abs(c))
        m_used = m
        if m >= 4 and abs(c) < 0.25 * numerics.rel_tol * abs(total):
            ratio = min(contribs[-1] / contribs[-2], 0.9) if contribs[-2] > 0.0 else 0.0
            tail = abs(c) * ratio / (1.0 - ratio)
            break
    return total, total_sub, tail, m_used


def _quadrature_pass(n_kappa, d, sphere, plane, numerics, m_max, l_drop):
    x, w = gauss_laguerre(n_kappa)
    log_w = np.log(w) + x
    pref = 1.0 / (2.0 * math.pi) / (2.0 * d)
    e = 0.0
    e_sub = 0.0
    err_m = 0.0
    f_vals = np.empty(n_kappa)
    m_used = 0
    for i in range(n_kappa):
        kappa = x[i] / (2.0 * d)
        f, f_sub, m_tail, mu = _mode_sum(kappa, sphere, plane, numerics, m_max, l_drop)
        wt = math.exp(log_w[i])
        f_vals[i] = f
        e += wt * f
        e_sub += wt * f_sub
        err_m += wt * m_tail
        m_used = max(m_used, mu)
    return pref * e, pref * abs(e - e_sub), pref * err_m, m_used, x, f_vals


def casimir_energy(sphere: SphereSheet, plane: PlaneSheet,
                   numerics: NumericsSpec = NumericsSpec()) -> EnergyResult:
    """Exact sphere-plane Casimir interaction energy.

    The kappa integral uses kappa = x / (2(L-R)) with Gauss-Laguerre nodes in
    x (the integrand decays on the gap scale, not L); node count doubles
    until stable.  l_max grows until the last increment is below rel_tol/4,
    and the m sum stops once a block contributes less than rel_tol/4 of the
    running total.  The three truncation estimates aggregate into
    error_estimate.

    Returns energy in units hbar c per unit length of the inputs, alongside
    the dimensionless E d^2/(hbar c R).
    """
    R, L = sphere.radius_R, plane.distance_L
    if not (L > R):
        raise ValueError(f"need L > R, got L={L}, R={R}")
    if sphere.omega_s == 0.0 or plane.omega_p == 0.0:
        return EnergyResult(0.0, 0.0, 0.0, 0, 0, 0)

    # dimensionless core: R = 1
    om_s = sphere.omega_s if sphere.is_pc else sphere.omega_s * R
    om_p = plane.omega_p if plane.is_pc else plane.omega_p * R
    s1 = SphereSheet(radius_R=1.0, omega_s=om_s)
    p1 = PlaneSheet(omega_p=om_p, distance_L=L / R)
    d = L / R - 1.0

    auto_l = numerics.l_max == "auto"
    if auto_l:
        l_max = min(int(math.ceil(6.0 / d)) + 10, _L_MAX_CEILING)
    else:
        l_max = numerics.l_max

    for _growth in range(4):
        if l_max > _L_MAX_CEILING:
            raise NumericsError(f"l_max cap {_L_MAX_CEILING} exceeded (needed {l_max})")
        m_max = l_max if numerics.m_max == "auto" else numerics.m_max
        # the rapidity integrand of the highest angular orders peaks near
        # u = 2 l_max, so the node count floor scales with l_max (user value
        # only sets a lower bound); the Laguerre rule is stable to ~192
        theta_nodes = min(max(numerics.theta_nodes, l_max // 2 + 24), _THETA_NODE_CEILING)
        spec = replace(numerics, l_max=l_max, m_max=m_max, theta_nodes=theta_nodes)
        l_drop = max(4, l_max // 8)

        n = numerics.kappa_nodes
        e_prev, err_l, err_m, m_used, x_nodes, f_vals = _quadrature_pass(
            n, d, s1, p1, spec, m_max, l_drop)
        err_k = math.inf
        while True:
            if 2 * n > _KAPPA_NODE_CEILING:
                break
            n *= 2
            e_cur, err_l, err_m, m_used, x_nodes, f_vals = _quadrature_pass(
                n, d, s1, p1, spec, m_max, l_drop)
            err_k = abs(e_cur - e_prev)
            e_prev = e_cur
            if err_k <= 0.25 * numerics.rel_tol * abs(e_cur):
                break
        e_hat = e_prev

        if not auto_l or err_l <= 0.25 * numerics.rel_tol * abs(e_hat):
            break
        l_max = min(l_max + max(10, l_max // 3), _L_MAX_CEILING + 1)
    else:
        raise NumericsError(
            f"l_max growth did not converge; last increment estimate {err_l} "
            f"vs target {0.25 * numerics.rel_tol * abs(e_hat)}", error_estimate=err_l)

    # theta-node check at the dominant kappa node
    x, w = gauss_laguerre(n)
    log_w = np.log(w) + x
    weighted = np.array([math.exp(lw) * abs(f) for lw, f in zip(log_w, f_vals)])
    i_peak = int(np.argmax(weighted))
    probe_nodes = min(2 * spec.theta_nodes, _THETA_NODE_CEILING)
    if probe_nodes == spec.theta_nodes:
        probe_nodes -= 16
    spec2 = replace(spec, theta_nodes=probe_nodes)
    f2, _, _, _ = _mode_sum(x[i_peak] / (2.0 * d), s1, p1, spec2, m_max, l_drop)
    rel_theta = abs(f2 - f_vals[i_peak]) / max(abs(f_vals[i_peak]), 1e-300)
    err_theta = rel_theta * abs(e_hat)

    if not math.isfinite(err_k):
        raise NumericsError(
            f"kappa_nodes={numerics.kappa_nodes} leaves no room below the node "
            f"ceiling {_KAPPA_NODE_CEILING} for a convergence estimate")
    error = err_k + err_l + err_m + err_theta
    if e_hat >= 0.0:
        raise SpectralAnomalyError(f"non-negative energy {e_hat} from valid inputs")
    if error > numerics.rel_tol * abs(e_hat) + numerics.abs_tol:
        raise NumericsError(
            f"energy not converged: error estimate {error:.3e} vs allowed "
            f"{numerics.rel_tol * abs(e_hat) + numerics.abs_tol:.3e} "
            f"(kappa {err_k:.1e}, l {err_l:.1e}, m {err_m:.1e}, theta {err_theta:.1e})",
            error_estimate=error)

    return EnergyResult(
        energy=e_hat / R,
        energy_dimensionless=e_hat * d * d,
        error_estimate=error / R,
        l_max_used=l_max,
        m_max_used=m_used,
        kappa_nodes_used=n,
    )
