"""Hot inner kernels for the weight dynamics.

Everything here is plain float64 array math so it can be compiled with
numba.njit.  By default the jitted versions are used when numba imports;
set QSCHOTTKY_NO_NUMBA=1 to force the pure-numpy path.  Both paths are
exposed (``rk4_weight_step`` / ``rk4_weight_step_numpy`` etc.) so the
benchmark can compare them.

Status codes returned by the rate kernels:
  0  ok
  1  invalid/undefined temperature (fit nonpositive or fixed value <= 0)
  2  requested heat flow unreachable (direction orthogonal to f^II)
"""

import os

import numpy as np

from . import config

_TINY = 1e-30

STATUS_OK = 0
STATUS_BAD_THETA = 1
STATUS_UNREACHABLE = 2


def _f1_kernel(p, z, kb):
    return kb * np.log(z * np.maximum(p, 1e-300))


def _zero_mean(v):
    return v - np.sum(v) / v.shape[0]


def _iso_rate_kernel(g1, g2, alpha):
    # antisymmetric bivector alpha*(g2⊗g1 - g1⊗g2) applied to f^II
    a = np.dot(g1, g2)
    b = np.dot(g2, g2)
    return alpha * (g2 * a - g1 * b)


def _ex_rate_kernel(g2, gf, qdot, theta):
    # direction: f^II projected to zero mean, minus its component along f;
    # degeneracy thresholds are relative so cancellation noise (e.g. all
    # zero-mean vectors parallel in dim 2) is caught
    g2g2 = np.dot(g2, g2)
    gg = np.dot(gf, gf)
    if gg > 1e-24 * (g2g2 + _TINY):
        d = g2 - (np.dot(g2, gf) / gg) * gf
    else:
        d = g2.copy()
    dd = np.dot(d, d)
    if dd <= 1e-24 * (g2g2 + _TINY):
        if np.abs(qdot) < _TINY:
            return np.zeros_like(g2), STATUS_OK
        return np.zeros_like(g2), STATUS_UNREACHABLE
    return (qdot / (theta * np.dot(d, g2))) * d, STATUS_OK


def _weight_rates(p, e, z, kb, alpha, kappa, t_box, theta_fixed, fit_theta,
                  include_ex, track_tbox):
    """Constitutive rates at one weight vector.

    Returns (dp_iso, dp_ex, theta, status).
    """
    g1 = _zero_mean(kb * np.log(z * np.maximum(p, 1e-300)))
    ge = _zero_mean(e)
    if fit_theta:
        gg = np.dot(ge, ge)
        if gg < _TINY:
            # degenerate spectrum: no thermal direction, fall back to fixed
            theta = theta_fixed
        else:
            inv_theta = -np.dot(g1, ge) / gg
            if inv_theta <= 0.0:
                return np.zeros_like(p), np.zeros_like(p), 0.0, STATUS_BAD_THETA
            theta = 1.0 / inv_theta
    else:
        theta = theta_fixed
    if theta <= 0.0:
        return np.zeros_like(p), np.zeros_like(p), 0.0, STATUS_BAD_THETA
    g2 = ge / theta
    dp_iso = _iso_rate_kernel(g1, g2, alpha)
    if include_ex:
        tb = theta if track_tbox else t_box
        qdot = kappa * (1.0 / theta - 1.0 / tb)
        dp_ex, status = _ex_rate_kernel(g2, g1 + g2, qdot, theta)
        if status != STATUS_OK:
            return dp_iso, dp_ex, theta, status
    else:
        dp_ex = np.zeros_like(p)
    return dp_iso, dp_ex, theta, STATUS_OK


def _rk4_weight_step(p, e, dt, z, kb, alpha, kappa, t_box, theta_fixed,
                     fit_theta, include_ex, track_tbox):
    """One RK4 step of the weight ODE with positivity damping.

    Returns (p_new, dp_iso0, dp_ex0, theta0, damp, status); dp_*0 and
    theta0 are the stage-1 values used for recording.
    """
    i1, x1, theta0, s = _weight_rates(p, e, z, kb, alpha, kappa, t_box,
                                      theta_fixed, fit_theta, include_ex,
                                      track_tbox)
    if s != STATUS_OK:
        return p, i1, x1, theta0, 1.0, s
    k1 = i1 + x1
    i2, x2, _, s = _weight_rates(p + 0.5 * dt * k1, e, z, kb, alpha, kappa,
                                 t_box, theta_fixed, fit_theta, include_ex,
                                 track_tbox)
    if s != STATUS_OK:
        return p, i1, x1, theta0, 1.0, s
    k2 = i2 + x2
    i3, x3, _, s = _weight_rates(p + 0.5 * dt * k2, e, z, kb, alpha, kappa,
                                 t_box, theta_fixed, fit_theta, include_ex,
                                 track_tbox)
    if s != STATUS_OK:
        return p, i1, x1, theta0, 1.0, s
    k3 = i3 + x3
    i4, x4, _, s = _weight_rates(p + dt * k3, e, z, kb, alpha, kappa,
                                 t_box, theta_fixed, fit_theta, include_ex,
                                 track_tbox)
    if s != STATUS_OK:
        return p, i1, x1, theta0, 1.0, s
    k4 = i4 + x4
    dp = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0

    damp = 1.0
    for j in range(p.shape[0]):
        if dp[j] < 0.0 and p[j] + dt * dp[j] < 0.0:
            f = p[j] / (np.abs(dp[j]) * dt * 2.0)
            if f < damp:
                damp = f
    p_new = p + dt * damp * dp
    for j in range(p_new.shape[0]):
        if p_new[j] < 0.0:
            p_new[j] = 0.0
    return p_new, i1, x1, theta0, damp, STATUS_OK


# --- pure-numpy aliases (always available) ---
f1_kernel_numpy = _f1_kernel
zero_mean_numpy = _zero_mean
iso_rate_kernel_numpy = _iso_rate_kernel
ex_rate_kernel_numpy = _ex_rate_kernel
weight_rates_numpy = _weight_rates
rk4_weight_step_numpy = _rk4_weight_step


def _numba_enabled() -> bool:
    if os.environ.get(config.NO_NUMBA_ENV, "0").lower() in ("1", "true", "yes"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USING_NUMBA = _numba_enabled()

if USING_NUMBA:
    from numba import njit

    f1_kernel = njit(cache=True)(_f1_kernel)
    zero_mean = njit(cache=True)(_zero_mean)
    iso_rate_kernel = njit(cache=True)(_iso_rate_kernel)
    _ex_rate_jit = njit(cache=True)(_ex_rate_kernel)
    ex_rate_kernel = _ex_rate_jit

    @njit(cache=True)
    def weight_rates(p, e, z, kb, alpha, kappa, t_box, theta_fixed, fit_theta,
                     include_ex, track_tbox):
        g1 = zero_mean(kb * np.log(z * np.maximum(p, 1e-300)))
        ge = zero_mean(e)
        if fit_theta:
            gg = np.dot(ge, ge)
            if gg < _TINY:
                theta = theta_fixed
            else:
                inv_theta = -np.dot(g1, ge) / gg
                if inv_theta <= 0.0:
                    return np.zeros_like(p), np.zeros_like(p), 0.0, STATUS_BAD_THETA
                theta = 1.0 / inv_theta
        else:
            theta = theta_fixed
        if theta <= 0.0:
            return np.zeros_like(p), np.zeros_like(p), 0.0, STATUS_BAD_THETA
        g2 = ge / theta
        dp_iso = iso_rate_kernel(g1, g2, alpha)
        if include_ex:
            tb = theta if track_tbox else t_box
            qdot = kappa * (1.0 / theta - 1.0 / tb)
            dp_ex, status = _ex_rate_jit(g2, g1 + g2, qdot, theta)
            if status != STATUS_OK:
                return dp_iso, dp_ex, theta, status
        else:
            dp_ex = np.zeros_like(p)
        return dp_iso, dp_ex, theta, STATUS_OK

    @njit(cache=True)
    def rk4_weight_step(p, e, dt, z, kb, alpha, kappa, t_box, theta_fixed,
                        fit_theta, include_ex, track_tbox):
        i1, x1, theta0, s = weight_rates(p, e, z, kb, alpha, kappa, t_box,
                                         theta_fixed, fit_theta, include_ex,
                                         track_tbox)
        if s != STATUS_OK:
            return p, i1, x1, theta0, 1.0, s
        k1 = i1 + x1
        i2, x2, _, s = weight_rates(p + 0.5 * dt * k1, e, z, kb, alpha, kappa,
                                    t_box, theta_fixed, fit_theta, include_ex,
                                    track_tbox)
        if s != STATUS_OK:
            return p, i1, x1, theta0, 1.0, s
        k2 = i2 + x2
        i3, x3, _, s = weight_rates(p + 0.5 * dt * k2, e, z, kb, alpha, kappa,
                                    t_box, theta_fixed, fit_theta, include_ex,
                                    track_tbox)
        if s != STATUS_OK:
            return p, i1, x1, theta0, 1.0, s
        k3 = i3 + x3
        i4, x4, _, s = weight_rates(p + dt * k3, e, z, kb, alpha, kappa,
                                    t_box, theta_fixed, fit_theta, include_ex,
                                    track_tbox)
        if s != STATUS_OK:
            return p, i1, x1, theta0, 1.0, s
        k4 = i4 + x4
        dp = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0

        damp = 1.0
        for j in range(p.shape[0]):
            if dp[j] < 0.0 and p[j] + dt * dp[j] < 0.0:
                f = p[j] / (np.abs(dp[j]) * dt * 2.0)
                if f < damp:
                    damp = f
        p_new = p + dt * damp * dp
        for j in range(p_new.shape[0]):
            if p_new[j] < 0.0:
                p_new[j] = 0.0
        return p_new, i1, x1, theta0, damp, STATUS_OK
else:
    f1_kernel = _f1_kernel
    zero_mean = _zero_mean
    iso_rate_kernel = _iso_rate_kernel
    ex_rate_kernel = _ex_rate_kernel
    weight_rates = _weight_rates
    rk4_weight_step = _rk4_weight_step
