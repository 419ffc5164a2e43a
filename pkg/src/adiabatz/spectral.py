"""Power spectral density of control waveforms by direct Fourier quadrature.

S(omega) = |integral_0^{t_p} f(t) exp(-i omega t) dt|^2, evaluated with the
composite trapezoid rule on the signal's own sample grid.  The integral is
computed at caller-chosen frequencies rather than FFT bins because the
optimizer needs the spectrum above an arbitrary cutoff.
"""

from __future__ import annotations

import dataclasses

import numpy as np

__all__ = ["SpectralDensity", "fourier_integral", "psd"]

# cap the omega-block x time-sample workspace at ~32 MB of complex128
_BLOCK_ELEMENTS = 2_000_000


@dataclasses.dataclass(frozen=True)
class SpectralDensity:
    """Frequency grid with S(omega) >= 0.

    Dimensionless when the waveform is normalized to unit area; then
    S(0) = 1 exactly (squared area).
    """

    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.values) < 0):
            raise ValueError("spectral density must be nonnegative")


def fourier_integral(times, values, omegas) -> np.ndarray:
    """Complex F(omega) = trapezoid of f(t) exp(-i omega t) over the grid.

    Accepts real or complex signals; psd() restricts itself to real input.
    """
    t = np.asarray(times, dtype=float)
    f = np.asarray(values)
    f = f.astype(complex) if np.iscomplexobj(f) else f.astype(float)
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    if not np.all(np.isfinite(f)):
        raise ValueError("signal must be finite")
    # trapezoid weights for a (possibly non-uniform) grid
    dt = np.diff(t)
    tw = np.zeros_like(t)
    tw[:-1] += dt / 2.0
    tw[1:] += dt / 2.0
    g = f * tw
    out = np.empty(len(w), dtype=complex)
    block = max(1, _BLOCK_ELEMENTS // max(len(t), 1))
    for i in range(0, len(w), block):
        wb = w[i : i + block]
        out[i : i + block] = np.exp(-1j * np.outer(wb, t)) @ g
    return out


def psd(times, values, omegas) -> SpectralDensity:
    """Spectral density of a sampled real signal at arbitrary frequencies.

    Parameters
    ----------
    times : array
        Sample instants covering [0, t_p].
    values : array
        Real signal samples f(t).
    omegas : array
        Nonnegative angular frequencies at which to evaluate S.
    """
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(w < 0):
        raise ValueError("frequency grid must be nonnegative")
    F = fourier_integral(times, values, w)
    return SpectralDensity(omegas=w, values=np.abs(F) ** 2)
