"""Round-trip matrix of the sphere-plane cavity, block by azimuthal index.

The element coupling (l, pol) to (l', pol') at one azimuthal index m and one
imaginary wavenumber kappa is a prefactor times the sphere T element times a
rapidity integral over three 2x2 matrices (sphere angular functions, plane
reflection, angular functions again) with weight sinh(theta) e^{-2 kappa L
cosh(theta)}.

Numerical organisation, fixed once here and relied on everywhere:

* cosh(theta) = 1 + u/(2 kappa L) maps the integral onto Gauss-Laguerre
  nodes in u with the overall e^{-2 kappa L} pulled out;
* all angular functions carry the factorial normalisation
  sqrt((l-m)!/(l+m)!) of the prefactor and are handled in log space;
* blocks are stored in the determinant-preserving balanced form with
  sqrt|T_l| split across rows and columns, entries O(1) by Cauchy-Schwarz;
* the common factor e^{-2 kappa (L-R)}/(2 kappa L) stays symbolic in
  ``log_scale`` until the determinant stage;
* the alternating azimuthal phase in the element prefactor cancels against
  the phase produced by continuing the angular functions to hyperbolic angles,
  so with the positive (Hobson) Legendre convention used by specfun the net
  kernel is positive; each m block then contributes attractively, and the
  m <-> -m degeneracy is an exact signature conjugation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import NumericsError
from .scattering import PlaneSheet, Polarization, SphereSheet, plane_r, sphere_t_logs
from .specfun import legendre_pbar_log
from ._quadrature import gauss_laguerre

if TYPE_CHECKING:
    from .energy_exact import NumericsSpec

# fold the symbolic scale into the entries once it is this far below 1
_FOLD_LOG = -600.0


def _angular_logs(l_max: int, m_abs: int, c_nodes: np.ndarray):
    """Log arrays of the normalised angular functions on cosh(theta) nodes.

    tau_l = sinh(theta) dPbar_l^m/dx and pi_l = (m/sinh(theta)) Pbar_l^m,
    both positive for x > 1.  Rows run over l = max(1, m) .. l_max.
    """
    l0 = max(1, m_abs)
    lvec = np.arange(l0, l_max + 1)
    pbar_m = legendre_pbar_log(l_max, m_abs, c_nodes)[l0 - m_abs:, :]
    sh = np.sqrt((c_nodes - 1.0) * (c_nodes + 1.0))
    n = c_nodes.size
    # sinh * dPbar/dx = (m x / sinh) Pbar_l^m + sqrt((l-m)(l+m+1)) Pbar_l^{m+1}
    if m_abs > 0:
        t1 = np.log(m_abs * c_nodes / sh)[None, :] + pbar_m
        lpi = np.log(m_abs / sh)[None, :] + pbar_m
    else:
        t1 = np.full((lvec.size, n), -np.inf)
        lpi = np.full((lvec.size, n), -np.inf)
    t2 = np.full((lvec.size, n), -np.inf)
    if l_max >= m_abs + 1:
        pbar_m1 = legendre_pbar_log(l_max, m_abs + 1, c_nodes)
        rows = lvec >= m_abs + 1
        coef = (lvec[rows] - m_abs) * (lvec[rows] + m_abs + 1.0)
        t2[rows] = 0.5 * np.log(coef)[:, None] + pbar_m1[lvec[rows] - (m_abs + 1), :]
    ltau = np.logaddexp(t1, t2)
    return lvec, ltau, lpi


@dataclass(frozen=True)
class AngularKernel:
    """Rapidity-integrand data of one (l, l', m) element.

    ``entries[i]`` is the 2x2 product angular(l) * reflection * angular(l')
    at theta_nodes[i], with the factorial normalisation of the element
    prefactor absorbed into the angular functions.  For m = 0 the TE-TM
    coupling entries vanish identically.
    """

    l: int
    l_prime: int
    m: int
    theta_nodes: np.ndarray
    entries: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, l, l_prime, m, kappa, plane: PlaneSheet, u_nodes: np.ndarray):
        mm = abs(m)
        if l < max(1, mm) or l_prime < max(1, mm):
            raise ValueError("l and l_prime must be >= max(1, |m|)")
        kl = kappa * plane.distance_L
        c = 1.0 + u_nodes / (2.0 * kl)
        theta = np.arccosh(c)
        _, ltau_l, lpi_l = _angular_logs(l, mm, c)
        _, ltau_r, lpi_r = _angular_logs(l_prime, mm, c)
        A, B = np.exp(ltau_l[-1]), np.exp(lpi_l[-1])
        C, D = np.exp(ltau_r[-1]), np.exp(lpi_r[-1])
        if m < 0:
            B, D = -B, -D
        sh = np.sqrt((c - 1.0) * (c + 1.0))
        rte = plane_r(Polarization.TE, kappa, kappa * sh, plane)
        rtm = plane_r(Polarization.TM, kappa, kappa * sh, plane)
        # rows of the left angular matrix are (A, -B) and (-B, A); rtm < 0
        entries = np.empty((u_nodes.size, 2, 2))
        entries[:, 0, 0] = A * rte * C - B * rtm * D
        entries[:, 0, 1] = A * rte * D - B * rtm * C
        entries[:, 1, 0] = -B * rte * C + A * rtm * D
        entries[:, 1, 1] = -B * rte * D + A * rtm * C
        return cls(l=l, l_prime=l_prime, m=m, theta_nodes=theta, entries=entries)


def _element_once(l, l_prime, m, kappa, sphere, plane, n_theta):
    """One quadrature pass of the true 2x2 element."""
    mm = abs(m)
    kl = kappa * plane.distance_L
    u, v = gauss_laguerre(n_theta)
    c = 1.0 + u / (2.0 * kl)
    _, ltau_l, lpi_l = _angular_logs(l, mm, c)
    _, ltau_r, lpi_r = _angular_logs(l_prime, mm, c)
    hw = 0.5 * np.log(v)
    ga_t, ga_p = ltau_l[-1] + hw, lpi_l[-1] + hw
    gb_t, gb_p = ltau_r[-1] + hw, lpi_r[-1] + hw
    sig_a = max(ga_t.max(), ga_p.max() if mm > 0 else -np.inf)
    sig_b = max(gb_t.max(), gb_p.max() if mm > 0 else -np.inf)
    at, ap = np.exp(ga_t - sig_a), np.exp(ga_p - sig_a)
    bt, bp = np.exp(gb_t - sig_b), np.exp(gb_p - sig_b)
    sh = np.sqrt((c - 1.0) * (c + 1.0))
    rte = plane_r(Polarization.TE, kappa, kappa * sh, plane)
    qtm = -plane_r(Polarization.TM, kappa, kappa * sh, plane)
    kern = {
        (0, 0): at @ (rte * bt) + ap @ (qtm * bp),
        (0, 1): at @ (rte * bp) + ap @ (qtm * bt),
        (1, 0): ap @ (rte * bt) + at @ (qtm * bp),
        (1, 1): ap @ (rte * bp) + at @ (qtm * bt),
    }
    log_te, log_tm = sphere_t_logs(l, kappa, sphere)
    logt = {0: log_te[l - 1], 1: log_tm[l - 1]}
    lpref = math.log(math.pi / 2.0) + 0.5 * (
        math.log(2 * l + 1.0) + math.log(2 * l_prime + 1.0)
        - math.log(l * (l + 1.0)) - math.log(l_prime * (l_prime + 1.0)))
    z = kappa * sphere.radius_R
    common = 2.0 * z - 2.0 * kl - math.log(2.0 * kl) + lpref + sig_a + sig_b
    out = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            sgn = -1.0 if (m < 0 and i != j) else 1.0
            out[i, j] = sgn * math.exp(common + logt[i]) * kern[(i, j)]
    return out


def m_element(l: int, l_prime: int, m: int, kappa: float, sphere: SphereSheet,
              plane: PlaneSheet, theta_nodes: int = 40, rel_tol: float = 1e-10) -> np.ndarray:
    """True 2x2 polarization block of the round-trip element.

    Rows and columns are ordered (TE, TM).  The rapidity quadrature doubles
    its node count until the two finest passes agree to rel_tol; failure to
    converge raises :class:`NumericsError` carrying the last error estimate.
    Values carry the full physical scale, so extreme kappa(L-R) under- or
    overflows a double; the block assembly path is immune to that.
    """
    mm = abs(m)
    if l < max(1, mm) or l_prime < max(1, mm):
        raise ValueError(f"l, l_prime must be >= max(1, |m|), got {l}, {l_prime}, m={m}")
    if not (kappa > 0.0):
        raise ValueError(f"kappa must be positive, got {kappa}")
    if sphere.omega_s == 0.0:
        return np.zeros((2, 2))
    prev = _element_once(l, l_prime, m, kappa, sphere, plane, theta_nodes)
    n = theta_nodes
    for _ in range(4):
        n *= 2
        cur = _element_once(l, l_prime, m, kappa, sphere, plane, n)
        scale = np.max(np.abs(cur))
        err = np.max(np.abs(cur - prev))
        if scale == 0.0 or err <= rel_tol * scale:
            return cur
        prev = cur
    raise NumericsError(
        f"theta quadrature for element (l={l}, l'={l_prime}, m={m}) did not "
        f"converge below rel_tol={rel_tol}", error_estimate=err / scale)


@dataclass(frozen=True)
class RoundTripBlock:
    """Dense round-trip block at fixed (m, kappa).

    ``matrix`` holds the balanced entries: sqrt|T_l| is split across rows and
    columns (a similarity transform, so every determinant built from the
    block is unchanged) and the common factor exp(log_scale) with
    log_scale = -2 kappa (L-R) - ln(2 kappa L) is kept symbolic.  Row/column
    index is 2*(l - max(1,|m|)) + pol with pol TE=0, TM=1.
    """

    m: int
    kappa: float
    l_max: int
    matrix: np.ndarray = field(repr=False)
    log_scale: float
    log_t_half: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense_matrix(self) -> np.ndarray:
        """Un-balanced physical matrix; may overflow for extreme parameters."""
        r = self.log_t_half[:, None] - self.log_t_half[None, :]
        with np.errstate(over="ignore"):
            return np.exp(self.log_scale + r) * self.matrix


def assemble_block(m: int, kappa: float, sphere: SphereSheet, plane: PlaneSheet,
                   numerics: "NumericsSpec") -> RoundTripBlock:
    """Assemble the dense round-trip block for one azimuthal index.

    Requires a :class:`NumericsSpec` with concrete integer l_max (the energy
    driver resolves "auto" before calling).  Pure; distinct (m, kappa) blocks
    may be assembled concurrently.
    """
    l_max = numerics.l_max
    if not isinstance(l_max, int):
        raise ValueError("assemble_block needs a concrete integer l_max")
    mm = abs(m)
    l0 = max(1, mm)
    if l_max < l0:
        raise ValueError(f"l_max={l_max} below max(1, |m|)={l0}")
    if not (kappa > 0.0):
        raise ValueError(f"kappa must be positive, got {kappa}")
    L = plane.distance_L
    R = sphere.radius_R

    kl = kappa * L
    u, v = gauss_laguerre(numerics.theta_nodes)
    c = 1.0 + u / (2.0 * kl)
    lvec, ltau, lpi = _angular_logs(l_max, mm, c)
    nl = lvec.size

    hw = 0.5 * np.log(v)[None, :]
    ltau = ltau + hw
    lpi = lpi + hw
    sig = ltau.max(axis=1)
    if mm > 0:
        sig = np.maximum(sig, lpi.max(axis=1))
    atau = np.exp(ltau - sig[:, None])
    api = np.exp(lpi - sig[:, None]) if mm > 0 else np.zeros_like(atau)

    sh = np.sqrt((c - 1.0) * (c + 1.0))
    rte = np.broadcast_to(np.asarray(plane_r(Polarization.TE, kappa, kappa * sh, plane)),
                          c.shape)
    qtm = -np.broadcast_to(np.asarray(plane_r(Polarization.TM, kappa, kappa * sh, plane)),
                           c.shape)

    k_tt1 = (atau * rte) @ atau.T
    k_tt2 = (atau * qtm) @ atau.T
    k_pp1 = (api * rte) @ api.T
    k_pp2 = (api * qtm) @ api.T
    k_tp1 = (atau * rte) @ api.T
    k_tp2 = (atau * qtm) @ api.T
    k_pt1 = (api * rte) @ atau.T
    k_pt2 = (api * qtm) @ atau.T
    kern = {
        (0, 0): k_tt1 + k_pp2,
        (0, 1): k_tp1 + k_pt2,
        (1, 0): k_pt1 + k_tp2,
        (1, 1): k_pp1 + k_tt2,
    }

    log_te, log_tm = sphere_t_logs(l_max, kappa, sphere)
    logt = {0: log_te[l0 - 1:], 1: log_tm[l0 - 1:]}
    lpref = math.log(math.pi / 2.0) + 0.5 * (
        np.log(2 * lvec + 1.0)[:, None] + np.log(2 * lvec + 1.0)[None, :]
        - np.log(lvec * (lvec + 1.0))[:, None] - np.log(lvec * (lvec + 1.0))[None, :])

    log_scale = 2.0 * kappa * R - 2.0 * kl - math.log(2.0 * kl)
    fold = 0.0
    if log_scale < _FOLD_LOG:
        fold, log_scale = log_scale, 0.0

    matrix = np.zeros((2 * nl, 2 * nl))
    log_t_half = np.empty(2 * nl)
    with np.errstate(invalid="ignore"):
        for i in range(2):
            log_t_half[i::2] = 0.5 * logt[i]
            for j in range(2):
                sgn = -1.0 if (m < 0 and i != j) else 1.0
                expo = (sig[:, None] + sig[None, :] + 0.5 * (logt[i][:, None] + logt[j][None, :])
                        + lpref + fold)
                matrix[i::2, j::2] = sgn * np.exp(expo) * kern[(i, j)]
    if not np.all(np.isfinite(matrix)):
        raise NumericsError(
            f"non-finite entries in block m={m}, kappa={kappa} "
            f"(l_max={l_max}, theta_nodes={numerics.theta_nodes})")
    return RoundTripBlock(m=m, kappa=kappa, l_max=l_max, matrix=matrix,
                          log_scale=log_scale, log_t_half=log_t_half)
