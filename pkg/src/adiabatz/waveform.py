"""Fourier-basis control waveforms, sampled trajectories, and window functions.

Two parameterizations of the control angle are supported.  In the derivative
basis the rate of change is a cosine series that vanishes at both ends,

    dtheta/dt = sum_n lam_n * (1 - cos(2 pi n t / t_p)),

with the endpoint constraint theta_f - theta_i = t_p * sum_n lam_n.  In the
theta basis the angle itself is the series (out-and-back trajectories),

    theta(t) = theta_i + sum_n lam'_n * (1 - cos(2 pi n t / t_p)),

whose midpoint excursion fixes theta_f - theta_i = 2 * sum_{n odd} lam'_n.
"""

from __future__ import annotations

import dataclasses
import enum
import warnings

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .geometry import (
    THETA_MAX,
    THETA_MIN,
    h_z_from_theta,
    omega_from_theta,
)

__all__ = [
    "BasisMode",
    "FourierWaveform",
    "WaveformPoint",
    "eval_fourier",
    "constraint_residual",
    "SampledTrajectory",
    "sample_trajectory",
    "small_angle_trajectory",
    "slepian_window",
    "rectangular_window",
    "hanning_window",
]

CONSTRAINT_TOL = 1e-12


class BasisMode(enum.Enum):
    DERIVATIVE = "derivative"
    THETA = "theta"


@dataclasses.dataclass(frozen=True)
class FourierWaveform:
    """Coefficient vector plus endpoints for one control pulse.

    Attributes
    ----------
    mode : BasisMode
        DERIVATIVE for the dtheta/dt cosine series, THETA for the
        out-and-back angle series.
    coefficients : np.ndarray
        lam_1..lam_{n_m}; units 1/time for DERIVATIVE, radians for THETA.
    t_p : float
        Pulse duration.
    theta_i, theta_f : float
        Initial angle and target angle (midpoint excursion target for THETA).
    """

    mode: BasisMode
    coefficients: np.ndarray
    t_p: float
    theta_i: float
    theta_f: float

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        )
        if self.t_p <= 0:
            raise ValueError(f"t_p must be positive, got {self.t_p}")
        res = constraint_residual(self)
        tol = CONSTRAINT_TOL * max(1.0, abs(self.theta_f - self.theta_i))
        if abs(res) > tol:
            raise ValueError(
                f"endpoint constraint violated: residual {res:.3e} exceeds {tol:.1e} "
                f"for mode {self.mode.value}"
            )

    @property
    def n_m(self) -> int:
        return len(self.coefficients)

    def with_t_p(self, t_p: float) -> "FourierWaveform":
        """Same shape stretched to a new duration.

        DERIVATIVE coefficients carry 1/time units, so they rescale with
        1/t_p to keep the endpoint constraint; THETA coefficients are
        durationless radians.
        """
        if self.mode is BasisMode.DERIVATIVE:
            coeff = self.coefficients * (self.t_p / t_p)
        else:
            coeff = self.coefficients
        return FourierWaveform(self.mode, coeff, t_p, self.theta_i, self.theta_f)


def constraint_residual(w: FourierWaveform) -> float:
    """Signed violation of the endpoint constraint for the waveform's basis."""
    delta = w.theta_f - w.theta_i
    if w.mode is BasisMode.DERIVATIVE:
        return float(w.t_p * np.sum(w.coefficients) - delta)
    odd = w.coefficients[0::2]
    return float(2.0 * np.sum(odd) - delta)


def derivative_waveform(
    coefficients, t_p: float, theta_i: float, theta_f: float, normalized: bool = True
) -> FourierWaveform:
    """Convenience builder for the derivative basis.

    With normalized=True the input coefficients are taken as the
    dimensionless published convention (sum = 1) and scaled by
    (theta_f - theta_i)/t_p so the endpoint constraint holds exactly.
    """
    c = np.atleast_1d(np.asarray(coefficients, dtype=float))
    if normalized:
        s = c.sum()
        if s == 0:
            raise ValueError("normalized coefficients must have nonzero sum")
        c = c / s * (theta_f - theta_i) / t_p
    return FourierWaveform(BasisMode.DERIVATIVE, c, t_p, theta_i, theta_f)


def theta_waveform(coefficients, t_p: float, theta_i: float, theta_f: float) -> FourierWaveform:
    """Convenience builder for the theta (out-and-back) basis."""
    return FourierWaveform(
        BasisMode.THETA, np.asarray(coefficients, dtype=float), t_p, theta_i, theta_f
    )


@dataclasses.dataclass(frozen=True)
class WaveformPoint:
    theta: float
    dtheta_dt: float


def eval_fourier(w: FourierWaveform, t):
    """Evaluate theta(t) and dtheta/dt at time(s) t in [0, t_p].

    Returns a WaveformPoint for scalar t, or a (theta, dtheta_dt) array
    pair for array t.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -1e-12) or np.any(t_arr > w.t_p * (1 + 1e-12)):
        raise ValueError("t outside [0, t_p]")
    n = np.arange(1, w.n_m + 1)
    phases = 2.0 * np.pi * np.multiply.outer(t_arr / w.t_p, n)  # (..., n_m)
    if w.mode is BasisMode.DERIVATIVE:
        dtheta = (1.0 - np.cos(phases)) @ w.coefficients
        # closed-form integral of the series, exact at the sample points
        theta = w.theta_i + (
            np.multiply.outer(t_arr, np.ones(w.n_m))
            - (w.t_p / (2.0 * np.pi * n)) * np.sin(phases)
        ) @ w.coefficients
    else:
        theta = w.theta_i + (1.0 - np.cos(phases)) @ w.coefficients
        dtheta = np.sin(phases) @ (w.coefficients * 2.0 * np.pi * n / w.t_p)
    if t_arr.ndim == 0:
        return WaveformPoint(float(theta), float(dtheta))
    return theta, dtheta


@dataclasses.dataclass(frozen=True, eq=False)
class SampledTrajectory:
    """Uniformly sampled control trajectory.

    Attributes
    ----------
    times : np.ndarray
        Uniform grid from 0 to t_p.
    theta : np.ndarray
        Control angle per sample, inside (0, pi).
    dtheta_dt : np.ndarray
        Angle rate per sample (analytic where available).
    h_z : np.ndarray
        Longitudinal field, h_x / tan(theta).
    omega : np.ndarray
        Precession frequency used by the linearized error integral.  Equals
        2*h_x/sin(theta) for physical trajectories; a constant-omega
        idealization may override it (constant_omega flag set).
    h_x : float
        Fixed transverse field.
    constant_omega : bool
        True when omega was pinned rather than derived from theta.
    """

    times: np.ndarray
    theta: np.ndarray
    dtheta_dt: np.ndarray
    h_z: np.ndarray
    omega: np.ndarray
    h_x: float
    constant_omega: bool = False

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) < 2:
            raise ValueError("need at least two samples")
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise ValueError("times must be strictly increasing")
        if np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
            raise ValueError("time grid must be uniform to 1e-9 relative")
        th = np.asarray(self.theta, dtype=float)
        if np.any(th <= 0) or np.any(th >= np.pi):
            raise ValueError("theta must stay inside (0, pi)")

    @property
    def t_p(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def _clamp_theta(theta: np.ndarray) -> np.ndarray:
    if np.any(theta < THETA_MIN) or np.any(theta > THETA_MAX):
        warnings.warn(
            "theta clamped away from {0, pi}; omega diverges only as |h_z| -> inf",
            stacklevel=3,
        )
        return np.clip(theta, THETA_MIN, THETA_MAX)
    return theta


def sample_trajectory(
    w: FourierWaveform, n_samples: int = 1024, h_x: float = 1.0
) -> SampledTrajectory:
    """Sample a waveform into a physical trajectory (omega tied to theta)."""
    times = np.linspace(0.0, w.t_p, n_samples)
    theta, dtheta = eval_fourier(w, times)
    theta = _clamp_theta(theta)
    return SampledTrajectory(
        times=times,
        theta=theta,
        dtheta_dt=dtheta,
        h_z=h_z_from_theta(theta, h_x),
        omega=omega_from_theta(theta, h_x),
        h_x=h_x,
        constant_omega=False,
    )


def small_angle_trajectory(
    w: FourierWaveform, omega0: float, n_samples: int = 1024, h_x: float = 1.0
) -> SampledTrajectory:
    """Constant-frequency idealization: theta follows the waveform, omega is
    pinned at omega0.  This is the regime in which the error equals the
    waveform's spectral density at omega0 (up to the 1/4 factor)."""
    times = np.linspace(0.0, w.t_p, n_samples)
    theta, dtheta = eval_fourier(w, times)
    theta = _clamp_theta(theta)
    return SampledTrajectory(
        times=times,
        theta=theta,
        dtheta_dt=dtheta,
        h_z=h_z_from_theta(theta, h_x),
        omega=np.full_like(theta, float(omega0)),
        h_x=h_x,
        constant_omega=True,
    )


def slepian_window(n_samples: int, time_bandwidth: float) -> np.ndarray:
    """Zeroth discrete prolate spheroidal sequence, unit area.

    Dominant eigenvector of the standard symmetric tridiagonal DPSS
    operator; time_bandwidth = (band edge omega_c)*t_p/(2 pi).
    """
    if n_samples < 8:
        raise ValueError(f"n_samples must be >= 8, got {n_samples}")
    if not 0 < time_bandwidth < n_samples / 2:
        raise ValueError(
            f"time_bandwidth must lie in (0, n_samples/2), got {time_bandwidth}"
        )
    n = n_samples
    k = np.arange(n)
    half_bw = time_bandwidth / n
    diag_main = ((n - 1) / 2.0 - k) ** 2 * np.cos(2.0 * np.pi * half_bw)
    diag_off = np.arange(1, n) * (n - np.arange(1, n)) / 2.0
    try:
        _, vec = eigh_tridiagonal(
            diag_main, diag_off, select="i", select_range=(n - 1, n - 1)
        )
    except np.linalg.LinAlgError as exc:  # pragma: no cover - solver failure
        raise RuntimeError(f"DPSS eigen-solver failed: {exc}") from exc
    v = vec[:, 0]
    if v.sum() < 0:
        v = -v
    # unit trapezoid area with samples spread over [0, 1]
    return v / np.trapezoid(v, x=np.linspace(0.0, 1.0, n))


def rectangular_window(n_samples: int) -> np.ndarray:
    """Unit-area rectangular window on [0, 1]."""
    return np.ones(n_samples)


def hanning_window(n_samples: int) -> np.ndarray:
    """Unit-area Hanning window 1 - cos(2 pi t) on [0, 1]."""
    t = np.linspace(0.0, 1.0, n_samples)
    return 1.0 - np.cos(2.0 * np.pi * t)
