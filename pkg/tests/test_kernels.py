import numpy as np
import pytest

from qschottky import _kernels as k


def rand_case(rng, n):
    p = rng.dirichlet(np.ones(n) * 3.0)
    p = np.clip(p, 1e-6, None)
    p = p / p.sum()
    # order weights against the energies so the fit stays positive
    e = np.sort(rng.uniform(0.0, 2.0, n))
    return np.sort(p)[::-1], e


ARGS = dict(z=1.0, kb=1.0, alpha=0.4, kappa=0.8, t_box=1.5, theta_fixed=1.0,
            fit_theta=True, include_ex=True, track_tbox=False)


def call(fn, p, e, dt=1e-3, **over):
    a = {**ARGS, **over}
    return fn(p, e, dt, a["z"], a["kb"], a["alpha"], a["kappa"], a["t_box"],
              a["theta_fixed"], a["fit_theta"], a["include_ex"], a["track_tbox"])


def test_zero_mean():
    v = np.array([1.0, 2.0, 6.0])
    out = k.zero_mean(v)
    assert abs(out.sum()) < 1e-14
    np.testing.assert_allclose(out, v - 3.0)


def test_f1_kernel():
    p = np.array([0.5, 0.5])
    np.testing.assert_allclose(k.f1_kernel(p, 2.0, 1.5), 0.0, atol=1e-14)


def test_iso_rate_kernel_nonnegative_production(rng):
    for _ in range(100):
        n = rng.integers(2, 7)
        g1 = k.zero_mean(rng.standard_normal(n))
        g2 = k.zero_mean(rng.standard_normal(n))
        dp = k.iso_rate_kernel(g1, g2, 0.7)
        assert abs(dp.sum()) < 1e-12
        assert abs(dp @ g2) < 1e-12  # no exchange through the iso channel
        assert float(-dp @ g1) >= -1e-12


def test_ex_rate_kernel_realizes_heat(rng):
    n = 4
    g2 = k.zero_mean(rng.standard_normal(n))
    gf = k.zero_mean(rng.standard_normal(n))
    qdot, theta = 0.3, 1.2
    dp, status = k.ex_rate_kernel(g2, gf, qdot, theta)
    assert status == k.STATUS_OK
    assert abs(dp @ gf) < 1e-12
    assert abs(dp @ g2 - qdot / theta) < 1e-12


def test_ex_rate_kernel_unreachable():
    # dim 2: the zero-mean space is one dimensional, deflation along a
    # nonparallel f leaves nothing to carry heat
    g2 = np.array([-0.5, 0.5])
    gf = np.array([-0.9, 0.9])
    dp, status = k.ex_rate_kernel(g2, gf, 0.3, 1.0)
    assert status == k.STATUS_UNREACHABLE
    assert np.all(dp == 0)
    # zero requested heat is always fine
    _, status0 = k.ex_rate_kernel(g2, gf, 0.0, 1.0)
    assert status0 == k.STATUS_OK


def test_weight_rates_status_codes(rng):
    # inverted populations: the temperature fit fails
    p = np.array([0.1, 0.9])
    e = np.array([0.0, 1.0])
    _, _, _, status = k.weight_rates(p, e, 1.0, 1.0, 0.5, 1.0, 1.5, 1.0,
                                     True, True, False)
    assert status == k.STATUS_BAD_THETA
    # nonpositive fixed temperature
    _, _, _, status = k.weight_rates(p, e, 1.0, 1.0, 0.5, 1.0, 1.5, -1.0,
                                     False, True, False)
    assert status == k.STATUS_BAD_THETA


def test_weight_rates_track_tbox_kills_exchange(rng):
    p, e = rand_case(rng, 4)
    dp_iso, dp_ex, theta, status = k.weight_rates(
        p, e, 1.0, 1.0, 0.5, 1.0, 9.9, 1.0, True, True, True)
    assert status == k.STATUS_OK
    assert np.abs(dp_ex).max() < 1e-14
    assert theta > 0


def test_rk4_step_conserves_sum(rng):
    p, e = rand_case(rng, 5)
    p_new, dp_iso, dp_ex, theta, damp, status = call(k.rk4_weight_step, p, e)
    assert status == k.STATUS_OK
    assert damp == 1.0
    assert abs(p_new.sum() - 1.0) < 1e-12
    assert np.all(p_new >= 0)
    assert abs(dp_iso.sum()) < 1e-12
    assert abs(dp_ex.sum()) < 1e-12


def test_numpy_and_active_paths_agree(rng):
    for n in (2, 3, 5, 8):
        p, e = rand_case(rng, n)
        a = call(k.rk4_weight_step, p, e)
        b = call(k.rk4_weight_step_numpy, p, e)
        for x, y in zip(a, b):
            np.testing.assert_allclose(x, y, atol=1e-15)


@pytest.mark.skipif(not k.USING_NUMBA, reason="numba unavailable or disabled")
def test_numba_is_active():
    assert hasattr(k.rk4_weight_step, "signatures") or callable(k.rk4_weight_step)
    assert k.rk4_weight_step is not k.rk4_weight_step_numpy
