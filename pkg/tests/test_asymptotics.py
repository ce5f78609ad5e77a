import math

import numpy as np
import pytest
from scipy.special import roots_genlaguerre

import plasmacas.asymptotics as asy
from plasmacas.asymptotics import (e0, e1, ntl_coefficients, ntl_integrand,
                                   script_b_divided_difference, theta)
from plasmacas.pfa import PfaParams, pfa_energy
from plasmacas.scattering import PERFECT_CONDUCTOR as PC
from plasmacas._quadrature import tau_rule

THETA_PC = 1.0 / 3.0 - 20.0 / math.pi ** 2


def per_s_integral(s, varpi_s, varpi_p, n=64):
    """int dt t int dtau tau/sqrt(1-tau^2) e^{-2t(s+1)} braces, one s."""
    x, wx = roots_genlaguerre(n, 0.0)
    tau, wtau = tau_rule(n)
    sig = s + 1.0
    t = x[:, None] / (2.0 * sig)
    g = asy._braces_times_t(s, t, tau[None, :], varpi_s, varpi_p)
    return float(wx @ g @ wtau) / (2.0 * sig)


def test_per_s_pc_reduction():
    for s in range(6):
        want = 1.0 / (6.0 * (s + 1.0) ** 2) - 2.0 / 3.0
        assert per_s_integral(s, PC, PC) == pytest.approx(want, abs=1e-12)


def test_sympy_transcription_oracle():
    # independent re-derivation of the braces in exact rational arithmetic
    sp = pytest.importorskip("sympy")
    R = sp.Rational
    s = 0
    sig = R(s + 1)
    t, tau, ws, wp = R(1), R(1, 2), R(1), R(1)
    t2 = tau ** 2
    T = {("s", "TE"): ws / (ws + t), ("s", "TM"): ws / (ws + t * (1 - t2)),
         ("p", "TE"): wp / (wp + t), ("p", "TM"): wp / (wp + t * (1 - t2))}
    A = (t * t2 / 3 * (sig ** 3 + 2 * sig)
         + R(1, 3) * ((t2 - 2) * sig ** 2 - 3 * tau * sig + 2 * t2 - 1)
         + (t2 ** 2 + t2 - 12) / (12 * t * t2) * sig
         + (1 + tau) * (1 - t2) / (2 * t * t2)
         - (1 - t2) / (3 * t) / sig)
    CV = (-tau / 3 * (sig ** 3 + 2 * sig) + (1 - t2) / (6 * t * tau) * sig ** 2
          + sig / (2 * t) + (1 - 4 * t2) / (12 * t * tau))
    CJ = -t * tau / 3 * (sig ** 3 - sig) + (sig ** 2 - 1) / (6 * tau)
    DVV = (sig ** 3 - 2 * sig ** 2 + 2 * sig - 1) / (12 * t)
    DJJ = t / 12 * (sig ** 3 - 2 * sig ** 2 - sig + 2)
    DVJ = (sig ** 3 - sig) / 6
    DV = (2 * sig ** 2 + 1) / (6 * t)
    DJ = t / 3 * (sig ** 2 - 1)
    K1 = {"TE": -t * tau / (wp + t), "TM": t * (1 - t2) / (wp + t * (1 - t2))}
    K2 = {"TE": -t * (wp + t * (1 - 2 * t2)) / (2 * (wp + t) ** 2),
          "TM": t * (1 - t2) * (wp * (1 - 2 * t2) + t * (1 - t2)) / (2 * (wp + t * (1 - t2)) ** 2)}
    W1 = {"TE": -tau / (ws + t), "TM": tau * (1 - t2) / (ws + t * (1 - t2))}
    W2 = {"TE": -(t * (1 - 3 * t2) + ws * (1 - t2)) / (2 * t * (ws + t) ** 2),
          "TM": (1 - t2) * (t * (1 - t2) ** 2 + ws * (1 - 3 * t2)) / (2 * t * (ws + t * (1 - t2)) ** 2)}
    Y2 = {"TE": -tau / (2 * (ws + t)) + (R(1, 4) - 5 * t2 / 12) / t,
          "TM": tau * (1 - t2) / (2 * (ws + t * (1 - t2))) + (R(1, 4) + 7 * t2 / 12) / t}
    pte = T[("s", "TE")] * T[("p", "TE")]
    ptm = T[("s", "TM")] * T[("p", "TM")]
    mix = T[("s", "TE")] * T[("p", "TM")] + T[("s", "TM")] * T[("p", "TE")]
    dd1 = sum(pte ** k * ptm ** (s - k) for k in range(s + 1))
    dd2 = sum(pte ** k * ptm ** (s - 1 - k) for k in range(s))
    B = (1 - t2) / (2 * t * t2) * (mix * dd1 + 2 * pte * ptm * dd2)
    braces = sum(
        (pte if pol == "TE" else ptm) ** (s + 1)
        * (A + CV * K1[pol] + CJ * W1[pol]
           + DVV * K1[pol] ** 2 + DVJ * K1[pol] * W1[pol] + DJJ * W1[pol] ** 2
           + DV * K2[pol] + DJ * W2[pol] + sig * Y2[pol])
        for pol in ("TE", "TM")) + B
    want = float(braces) * math.exp(-2.0)
    got = ntl_integrand(0, 1.0, 0.5, 1.0, 1.0)
    assert got == pytest.approx(want, rel=1e-13)


def test_ntl_coefficients_pc_limit():
    c = ntl_coefficients(3, 0.8, 0.4, PC, PC)
    assert c.k1_te == c.k2_te == c.k1_tm == c.k2_tm == 0.0
    assert c.w1_te == c.w2_te == c.w1_tm == c.w2_tm == 0.0
    assert c.t0_te == c.t0_tm == c.t0t_te == c.t0t_tm == 1.0
    t, tau, s = 0.8, 0.4, 3
    assert c.y2_te == pytest.approx((0.25 - 5 * tau ** 2 / 12) / t, rel=1e-14)
    assert c.y2_tm == pytest.approx((0.25 + 7 * tau ** 2 / 12) / t, rel=1e-14)
    want_b = (1 - tau ** 2) * (4 * s + 2) / (2 * t * tau ** 2)
    assert c.script_b == pytest.approx(want_b, rel=1e-13)
    # PC braces reduce to 2A + B + (s+1)(Y2TE + Y2TM)
    braces = 2 * c.script_a + c.script_b + (s + 1) * (c.y2_te + c.y2_tm)
    got = ntl_integrand(s, t, tau, PC, PC)
    assert got == pytest.approx(math.exp(-2 * t * (s + 1)) * braces, rel=1e-13)


def test_script_b_power_sum_vs_divided_difference():
    rng = np.random.default_rng(61)
    for _ in range(100):
        s = int(rng.integers(0, 12))
        t = float(10.0 ** rng.uniform(-1, 1))
        tau = float(rng.uniform(0.05, 0.95))
        ws = float(10.0 ** rng.uniform(-1, 1))
        wp = float(10.0 ** rng.uniform(-1, 1))
        ps = ntl_coefficients(s, t, tau, ws, wp).script_b
        dd = script_b_divided_difference(s, t, tau, ws, wp)
        assert ps == pytest.approx(dd, rel=1e-12)


def test_script_b_degenerate_region_finite():
    # tau -> 0 makes the TE and TM products collide; the power-sum form is a
    # finite removable limit there
    s, t, ws, wp = 4, 0.9, 1.3, 0.7
    tau = 1e-8
    c = ntl_coefficients(s, t, tau, ws, wp)
    a = (ws / (ws + t)) * (wp / (wp + t))
    want = (1 - tau ** 2) / (2 * t * tau ** 2) * (2 * (2 * s + 1) * a ** (s + 1))
    assert math.isfinite(c.script_b)
    assert c.script_b == pytest.approx(want, rel=1e-6)


def test_e0_pc_value():
    got = e0(2.0, 0.1, PC, PC)
    assert got == pytest.approx(-math.pi ** 3 * 2.0 / (720.0 * 0.01), rel=1e-10)


def test_e0_transparent():
    assert e0(1.0, 0.1, 0.0, 1.0) == 0.0


def test_e0_matches_pfa():
    a = e0(1.0, 0.2, 2.0, 2.0)
    b = pfa_energy(PfaParams(2.0, 2.0, 1.0, 0.2))
    assert a == pytest.approx(b, rel=1e-8)


def test_e1_pc_value():
    # E1_PC = E0_PC * theta_PC * d/R
    R, d = 2.0, 0.1
    want = -math.pi ** 3 * R / (720.0 * d * d) * THETA_PC * d / R
    assert e1(R, d, PC, PC) == pytest.approx(want, rel=1e-9)


def test_e1_stable_under_node_doubling(monkeypatch):
    base = e1(1.0, 0.1, 1.0, 1.0)
    monkeypatch.setattr(asy, "_N_T", 96)
    monkeypatch.setattr(asy, "_N_TAU", 96)
    fine = e1(1.0, 0.1, 1.0, 1.0)
    assert fine == pytest.approx(base, rel=1e-6)


def test_theta_pc():
    got = theta(1.0, 17.0, PC, PC)
    assert got == pytest.approx(THETA_PC, abs=1e-10)


def test_theta_scale_invariance():
    # (R, d, Omega) -> (lam R, lam d, Omega/lam) leaves theta unchanged
    om = 2.5
    a = theta(0.4, 3.0, om, 0.8 * om)
    lam = 7.3
    b = theta(0.4 * lam, 3.0 * lam, om / lam, 0.8 * om / lam)
    assert b == pytest.approx(a, rel=1e-9)


def test_theta_negative_for_pc_and_graphene():
    assert theta(1.0, 5.0, PC, PC) < 0.0
    om = 6.75e5
    for d in np.geomspace(1e-8, 1e-3, 7):
        assert theta(float(d), 1e-3, om, om) < 0.0


def test_theta_transparent_raises():
    with pytest.raises(ValueError):
        theta(1.0, 1.0, 0.0, 1.0)


def test_ntl_integrand_array_and_scalar():
    t = np.array([0.5, 1.0, 2.0])
    tau = np.array([0.3, 0.3, 0.3])
    arr = ntl_integrand(1, t, tau, 1.0, 2.0)
    assert arr.shape == (3,)
    assert arr[1] == pytest.approx(ntl_integrand(1, 1.0, 0.3, 1.0, 2.0), rel=1e-14)


def test_ntl_coefficients_domain():
    with pytest.raises(ValueError):
        ntl_coefficients(-1, 1.0, 0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        ntl_coefficients(0, 0.0, 0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        ntl_coefficients(0, 1.0, 1.0, 1.0, 1.0)
