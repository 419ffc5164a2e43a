"""Nonlinear time remapping between the constant-frequency frame and lab time.

An optimal waveform derived for constant precession frequency omega_frame
(tau frame) maps onto an arbitrary excursion through the crossing by the
change of variables omega_frame * dtau = omega(t) * dt, which for
omega_frame = 2 h_x reduces to dt = sin(theta) dtau.  The forward map is a
cumulative quadrature; the inverse is monotone cubic interpolation.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.interpolate import PchipInterpolator

from .geometry import h_z_from_theta, omega_from_theta
from .waveform import FourierWaveform, SampledTrajectory, eval_fourier

__all__ = ["RemapTable", "build_remap", "invert_remap", "remapped_trajectory"]


@dataclasses.dataclass(frozen=True)
class RemapTable:
    """Forward map tau -> (t, theta) on a uniform tau grid."""

    tau: np.ndarray
    t_of_tau: np.ndarray
    theta_of_tau: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.t_of_tau) <= 0):
            raise ValueError("t(tau) must be strictly increasing")
        if abs(self.t_of_tau[0]) > 0:
            raise ValueError("t(0) must be 0")

    @property
    def t_p(self) -> float:
        return float(self.t_of_tau[-1])


def build_remap(theta_of_tau, tau_p: float, h_x: float = 1.0, omega_frame: float | None = None) -> RemapTable:
    """Integrate dt/dtau = omega_frame/omega(theta) on a uniform tau grid.

    Parameters
    ----------
    theta_of_tau : array
        Angle samples on the uniform grid over [0, tau_p]; must stay
        strictly inside (0, pi) (the poles put infinite frequency in the
        lab frame).
    tau_p : float
        Duration in the constant-frequency frame.
    omega_frame : float, optional
        Frame frequency; defaults to omega_x = 2*h_x, the gap at the crossing.
    """
    theta = np.asarray(theta_of_tau, dtype=float)
    if tau_p <= 0:
        raise ValueError("tau_p must be positive")
    if np.any(theta <= 0) or np.any(theta >= np.pi):
        raise ValueError("theta(tau) must stay strictly inside (0, pi)")
    if omega_frame is None:
        omega_frame = 2.0 * h_x
    tau = np.linspace(0.0, tau_p, len(theta))
    rate = omega_frame / omega_from_theta(theta, h_x)  # sin(theta) for the default frame
    dt_mid = (rate[1:] + rate[:-1]) / 2.0 * np.diff(tau)
    t = np.concatenate([[0.0], np.cumsum(dt_mid)])
    return RemapTable(tau=tau, t_of_tau=t, theta_of_tau=theta)


def invert_remap(table: RemapTable, t_grid, h_x: float = 1.0) -> SampledTrajectory:
    """Resample theta onto a uniform lab-time grid.

    Uses shape-preserving (monotone) cubic interpolation of (t(tau), theta)
    so dtheta/dt stays continuous for the dynamics backends.
    """
    t = np.asarray(t_grid, dtype=float)
    if t[0] < -1e-12 or t[-1] > table.t_p * (1 + 1e-12):
        raise ValueError("t_grid outside [0, t(tau_p)]")
    interp = PchipInterpolator(table.t_of_tau, table.theta_of_tau)
    theta = interp(t)
    dtheta = interp.derivative()(t)
    return SampledTrajectory(
        times=t,
        theta=theta,
        dtheta_dt=dtheta,
        h_z=h_z_from_theta(theta, h_x),
        omega=omega_from_theta(theta, h_x),
        h_x=h_x,
        constant_omega=False,
    )


def remapped_trajectory(
    w: FourierWaveform,
    t_p_lab: float,
    n_samples: int = 4096,
    h_x: float = 1.0,
    n_tau: int | None = None,
) -> SampledTrajectory:
    """Map a tau-frame waveform onto a lab trajectory of target duration.

    The lab duration scales exactly linearly with the frame duration,
    t_p = tau_p * mean(sin theta), so the frame waveform is stretched to
    hit t_p_lab before building the map.
    """
    if n_tau is None:
        n_tau = n_samples
    u = np.linspace(0.0, 1.0, n_tau)
    theta_shape, _ = eval_fourier(w.with_t_p(1.0), u)
    mean_rate = float(np.trapezoid(np.sin(theta_shape), u))
    tau_p = t_p_lab / mean_rate
    table = build_remap(theta_shape, tau_p, h_x=h_x)
    t_grid = np.linspace(0.0, table.t_p, n_samples)
    return invert_remap(table, t_grid, h_x=h_x)
