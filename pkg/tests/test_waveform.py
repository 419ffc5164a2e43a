import numpy as np
import pytest

from adiabatz.spectral import psd
from adiabatz.waveform import (
    BasisMode,
    FourierWaveform,
    constraint_residual,
    derivative_waveform,
    eval_fourier,
    hanning_window,
    rectangular_window,
    sample_trajectory,
    slepian_window,
    small_angle_trajectory,
    theta_waveform,
)


def unit_times(n=1024):
    return np.linspace(0.0, 1.0, n)


# ---------------------------------------------------------------- waveforms


def test_derivative_constraint_enforced():
    # sum of derivative coefficients times t_p must equal the angle change
    with pytest.raises(ValueError):
        FourierWaveform(
            BasisMode.DERIVATIVE,
            np.array([1.0, 0.3]),
            t_p=1.0,
            theta_i=0.1,
            theta_f=0.9,
        )


def test_theta_constraint_enforced():
    # odd-index sum must equal half the excursion
    with pytest.raises(ValueError):
        FourierWaveform(
            BasisMode.THETA,
            np.array([0.1, -0.05, 0.2]),
            t_p=1.0,
            theta_i=0.1,
            theta_f=0.9,
        )


def test_constraint_residual_zero_for_builders():
    w = derivative_waveform(np.array([1.0866, -0.0866]), 2.0, 0.1, 1.2)
    assert abs(constraint_residual(w)) < 1e-12
    v = theta_waveform(np.array([0.3, -0.19, 0.08]), 2.0, 0.1, 0.1 + 2 * (0.3 + 0.08))
    assert abs(constraint_residual(v)) < 1e-12


def test_derivative_waveform_sweeps_angles():
    w = derivative_waveform(np.array([2.0, -0.2, 0.04]), 3.7, 0.25, 1.31)
    t = np.linspace(0.0, 3.7, 4001)
    theta, dtheta = eval_fourier(w, t)
    assert theta[0] == pytest.approx(0.25, abs=1e-12)
    assert theta[-1] == pytest.approx(1.31, abs=1e-12)
    # derivative vanishes at both ends: every basis term is 1 - cos
    assert dtheta[0] == pytest.approx(0.0, abs=1e-12)
    assert dtheta[-1] == pytest.approx(0.0, abs=1e-12)


def test_eval_fourier_closed_form_matches_quadrature():
    w = derivative_waveform(np.array([1.2, -0.1, 0.02, 0.01]), 2.3, 0.2, 1.4)
    t = np.linspace(0.0, 2.3, 20001)
    theta, dtheta = eval_fourier(w, t)
    numeric = 0.2 + np.concatenate(
        [[0.0], np.cumsum((dtheta[1:] + dtheta[:-1]) / 2.0 * np.diff(t))]
    )
    assert theta == pytest.approx(numeric, abs=5e-9)


def test_eval_fourier_scalar_point():
    w = theta_waveform(np.array([0.3, -0.1, 0.05]), 2.0, 0.1, 0.8)
    p = eval_fourier(w, 1.0)  # midpoint of the excursion
    assert p.theta == pytest.approx(0.1 + 2 * (0.3 + 0.05))
    assert p.dtheta_dt == pytest.approx(0.0, abs=1e-12)


def test_theta_mode_midpoint_excursion():
    # theta basis is out-and-back: theta(t_p) = theta_i, theta(t_p/2) = theta_f
    w = theta_waveform(np.array([0.25, -0.19, 0.1]), 1.0, 0.1, 0.8)
    t = np.array([0.0, 0.5, 1.0])
    theta, _ = eval_fourier(w, t)
    assert theta[0] == pytest.approx(0.1, abs=1e-12)
    assert theta[1] == pytest.approx(0.8, abs=1e-12)
    assert theta[2] == pytest.approx(0.1, abs=1e-12)


def test_with_t_p_rescales_derivative_amplitude():
    w = derivative_waveform(np.array([1.0, -0.1]), 1.0, 0.1, 1.2)
    v = w.with_t_p(4.0)
    assert v.coefficients == pytest.approx(w.coefficients / 4.0)
    # shape is preserved: same angles swept
    theta_v, _ = eval_fourier(v, np.linspace(0, 4.0, 101))
    theta_w, _ = eval_fourier(w, np.linspace(0, 1.0, 101))
    assert theta_v == pytest.approx(theta_w, abs=1e-12)


def test_with_t_p_keeps_theta_coefficients():
    w = theta_waveform(np.array([0.3, -0.1, 0.05]), 1.0, 0.1, 0.8)
    v = w.with_t_p(3.0)
    assert v.coefficients == pytest.approx(w.coefficients)


# ------------------------------------------------------------- trajectories


def test_sample_trajectory_consistency():
    w = derivative_waveform(np.array([1.0866, -0.0866]), 4.0, 0.15, np.pi / 2)
    traj = sample_trajectory(w, n_samples=513, h_x=0.7)
    assert len(traj.times) == 513
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[-1] == pytest.approx(4.0)
    assert traj.omega == pytest.approx(2 * 0.7 / np.sin(traj.theta), rel=1e-13)
    assert traj.h_z == pytest.approx(0.7 / np.tan(traj.theta), rel=1e-12)
    assert not traj.constant_omega


def test_small_angle_trajectory_pins_omega():
    w = derivative_waveform(np.array([1.0]), 2.0, 0.1, 0.2)
    traj = small_angle_trajectory(w, omega0=5.0, n_samples=129)
    assert np.all(traj.omega == 5.0)
    assert traj.constant_omega


def test_trajectory_rejects_nonuniform_grid():
    from adiabatz.waveform import SampledTrajectory

    t = np.array([0.0, 0.1, 0.3])
    with pytest.raises(ValueError):
        SampledTrajectory(
            times=t,
            theta=np.full(3, 0.5),
            dtheta_dt=np.zeros(3),
            h_z=np.full(3, 1.0),
            omega=np.full(3, 2.0),
            h_x=1.0,
        )


def test_out_of_range_theta_is_clamped_with_warning():
    w = theta_waveform(np.array([0.26, -0.3, 0.05]), 1.0, 0.1, 0.72)
    with pytest.warns(UserWarning):
        traj = sample_trajectory(w, n_samples=257)
    assert np.all(traj.theta > 0)
    assert np.all(traj.theta < np.pi)


# ------------------------------------------------------------------ windows


def spectral_concentration(samples, time_bandwidth):
    """Energy fraction below the band edge.

    The in-band part is a direct quadrature; the total is Parseval's
    identity, which avoids integrating across the sampling replicas.
    """
    t = unit_times(len(samples))
    u_band = np.linspace(0.0, time_bandwidth, 400)
    band = np.trapezoid(
        psd(t, samples, 2 * np.pi * u_band).values, 2 * np.pi * u_band
    )
    total = np.pi * np.trapezoid(np.asarray(samples) ** 2, t)
    return band / total


def test_slepian_symmetry():
    w = slepian_window(64, 2.3)
    assert w == pytest.approx(w[::-1], abs=1e-10)


def test_slepian_unit_area():
    w = slepian_window(64, 2.3)
    assert np.trapezoid(w, unit_times(64)) == pytest.approx(1.0, abs=1e-12)


def test_slepian_concentration_band():
    c = spectral_concentration(slepian_window(64, 2.3), 2.3)
    assert 0.999 < c < 1.0


def test_slepian_beats_random_windows():
    # the concentration problem is what the window solves; no random
    # competitor should do better
    n, tb = 16, 2.3
    best = spectral_concentration(slepian_window(n, tb), tb)
    rng = np.random.default_rng(11)
    worst_gap = np.inf
    for _ in range(10_000):
        cand = rng.normal(size=n)
        area = np.trapezoid(cand, unit_times(n))
        if abs(area) < 1e-3:
            continue
        gap = best - spectral_concentration(cand / area, tb)
        worst_gap = min(worst_gap, gap)
    assert worst_gap > -1e-9


def test_slepian_guards():
    with pytest.raises(ValueError):
        slepian_window(4, 2.3)
    with pytest.raises(ValueError):
        slepian_window(64, 0.0)
    with pytest.raises(ValueError):
        slepian_window(64, 40.0)


def test_flat_and_hanning_windows():
    assert rectangular_window(9) == pytest.approx(np.ones(9))
    h = hanning_window(33)
    assert h[0] == pytest.approx(0.0, abs=1e-15)
    assert h[-1] == pytest.approx(0.0, abs=1e-15)
    assert h[16] == pytest.approx(2.0)  # peak of 1 - cos is 2
    assert np.trapezoid(h, unit_times(33)) == pytest.approx(1.0, rel=1e-3)
