"""Command-line front end: config ingestion, experiment drivers, tabular export.

Each experiment reads a JSON parameter file, runs one reproducible
computation, and writes a result table (CSV or JSON) plus a small manifest
with the config hash, library versions, and wall time.  The manifest lives
in a separate file so result bytes depend only on config + seed.

Exit codes: 0 success, 2 config validation failure (no files written),
3 numerical failure during the computation.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .adiabatic_error import Evaluator, error_curve, landau_zener_error
from .dynamics import evolve_two_level_direct
from .optimize import (
    Objective,
    ObjectiveKind,
    basis_transform,
    optimize_coefficients,
    optimize_cz_pulse,
)
from .remap import remapped_trajectory
from .three_level import RotationTarget, calibrate_pulse
from .waveform import (
    BasisMode,
    SampledTrajectory,
    derivative_waveform,
    sample_trajectory,
    theta_waveform,
)

__all__ = [
    "ValidationError",
    "RunConfig",
    "EXPERIMENTS",
    "load_config",
    "export_table",
    "load_table",
    "run",
    "main",
]

SCHEMA_VERSION = 1
T_X = np.pi  # crossing period 2 pi / omega_x at h_x = 1; the CLI fixes h_x = 1


class ValidationError(ValueError):
    """Config rejected before any computation."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    experiment: str
    parameters: dict
    output_dir: Path
    format: str
    seed: int
    config_sha256: str


# ---------------------------------------------------------------- validation

_REQUIRED = object()


def _get(params: dict, name: str, default):
    if name in params:
        return params[name]
    if default is _REQUIRED:
        raise ValidationError(f"{name}: required parameter missing")
    return default


def _num(params, name, default=_REQUIRED, lo=None, hi=None, open_lo=False, open_hi=False):
    v = _get(params, name, default)
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not np.isfinite(v):
        raise ValidationError(f"{name}: must be a finite number, got {v!r}")
    v = float(v)
    if lo is not None and (v < lo or (open_lo and v == lo)):
        raise ValidationError(f"{name}: must be {'>' if open_lo else '>='} {lo}, got {v}")
    if hi is not None and (v > hi or (open_hi and v == hi)):
        raise ValidationError(f"{name}: must be {'<' if open_hi else '<='} {hi}, got {v}")
    return v


def _int(params, name, default=_REQUIRED, lo=None):
    v = _get(params, name, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"{name}: must be an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ValidationError(f"{name}: must be >= {lo}, got {v}")
    return v


def _bool(params, name, default):
    v = _get(params, name, default)
    if not isinstance(v, bool):
        raise ValidationError(f"{name}: must be true or false, got {v!r}")
    return v


def _choice(params, name, options, default=_REQUIRED):
    v = _get(params, name, default)
    if v not in options:
        raise ValidationError(f"{name}: must be one of {sorted(options)}, got {v!r}")
    return v


def _num_list(params, name, default=_REQUIRED, min_len=1):
    v = _get(params, name, default)
    if not isinstance(v, list) or len(v) < min_len:
        raise ValidationError(f"{name}: must be a list with at least {min_len} entries")
    for x in v:
        if not isinstance(x, (int, float)) or isinstance(x, bool) or not np.isfinite(x):
            raise ValidationError(f"{name}: entries must be finite numbers, got {x!r}")
    return [float(x) for x in v]


def _reject_unknown(params: dict, allowed: set, experiment: str):
    unknown = sorted(set(params) - allowed - {"seed"})
    if unknown:
        raise ValidationError(f"{experiment}: unknown parameter(s): {', '.join(unknown)}")


def _label_ok(label) -> bool:
    return (
        isinstance(label, str)
        and 0 < len(label) <= 40
        and all(c.isalnum() or c in "_-" for c in label)
    )


# ---------------------------------------------------------------- experiments


def _run_psd_windows(params: dict, seed: int):
    _reject_unknown(
        params,
        {"coefficients_lambda", "labels", "u_min_cycles", "u_max_cycles",
         "n_points", "include_rect_reference"},
        "psd-windows",
    )
    sets = _get(params, "coefficients_lambda", _REQUIRED)
    if not isinstance(sets, list) or len(sets) == 0:
        raise ValidationError(
            "coefficients_lambda: must be a non-empty list of coefficient lists"
        )
    lams = []
    for i, entry in enumerate(sets):
        lam = np.array(_num_list({"entry": entry}, "entry"))
        if lam.sum() == 0:
            raise ValidationError(f"coefficients_lambda[{i}]: sum must be nonzero")
        lams.append(lam / lam.sum())
    labels = _get(params, "labels", [f"w{i + 1}" for i in range(len(lams))])
    if (
        not isinstance(labels, list)
        or len(labels) != len(lams)
        or not all(_label_ok(s) for s in labels)
    ):
        raise ValidationError(
            "labels: must be one short alphanumeric label per coefficient list"
        )
    u_min = _num(params, "u_min_cycles", 0.02, lo=0, open_lo=True)
    u_max = _num(params, "u_max_cycles", 8.0, lo=u_min, open_lo=True)
    n_points = _int(params, "n_points", 400, lo=2)
    rect = _bool(params, "include_rect_reference", True)

    u = np.linspace(u_min, u_max, n_points)
    columns = ["u_cycles"]
    series = [u]
    if rect:
        columns.append("psd_rect_rad2")
        series.append(np.sinc(u) ** 2)
    for label, lam in zip(labels, lams):
        profile = np.zeros_like(u)
        for n, c in enumerate(lam, start=1):
            profile += c * basis_transform(u, n, BasisMode.DERIVATIVE)
        columns.append(f"psd_{label}_rad2")
        series.append(profile**2)
    return columns, np.column_stack(series).tolist()


def _run_error_curve(params: dict, seed: int):
    window = _choice(params, "window", {"rect", "hanning", "fourier"}, "fourier")
    if window in ("rect", "hanning"):
        _reject_unknown(
            params,
            {"window", "delta_theta_rad", "u_min_cycles", "u_max_cycles", "n_points"},
            "error-curve",
        )
        dth = _num(params, "delta_theta_rad", 1.0, lo=0, open_lo=True)
        u_min = _num(params, "u_min_cycles", 0.1, lo=0, open_lo=True)
        u_max = _num(params, "u_max_cycles", 10.0, lo=u_min, open_lo=True)
        n_points = _int(params, "n_points", 500, lo=2)
        u = np.linspace(u_min, u_max, n_points)
        # constant-omega closed forms: P_e of the abrupt window is the
        # squared sinc; one cosine term divides it by (1 - u^2)^2
        if window == "rect":
            p_e = (dth**2 / 4.0) * np.sinc(u) ** 2
        else:
            p_e = (dth**2 / 4.0) * basis_transform(u, 1, BasisMode.DERIVATIVE) ** 2
        return ["u_cycles", "p_e_linearized"], np.column_stack([u, p_e]).tolist()

    _reject_unknown(
        params,
        {"window", "basis", "coefficients_lambda", "theta_i_rad", "theta_f_rad",
         "remap", "evaluator", "t_p_min_over_Tx", "t_p_max_over_Tx", "n_points",
         "n_samples"},
        "error-curve",
    )
    basis = _choice(params, "basis", {"derivative", "theta"}, "derivative")
    lam = np.array(_num_list(params, "coefficients_lambda"))
    theta_i = _num(params, "theta_i_rad", _REQUIRED, lo=0, hi=np.pi, open_lo=True, open_hi=True)
    theta_f = _num(params, "theta_f_rad", _REQUIRED, lo=0, hi=np.pi, open_lo=True, open_hi=True)
    remap = _bool(params, "remap", False)
    evaluator = Evaluator(_choice(params, "evaluator", {"linearized", "exact"}, "linearized"))
    t_lo = _num(params, "t_p_min_over_Tx", _REQUIRED, lo=0, open_lo=True)
    t_hi = _num(params, "t_p_max_over_Tx", _REQUIRED, lo=t_lo, open_lo=True)
    n_points = _int(params, "n_points", 60, lo=2)
    n_samples = _int(params, "n_samples", 2048, lo=16)

    try:
        if basis == "derivative":
            w = derivative_waveform(lam, 1.0, theta_i, theta_f)
        else:
            w = theta_waveform(lam, 1.0, theta_i, theta_f)
    except ValueError as exc:
        raise ValidationError(f"coefficients_lambda: {exc}") from exc

    if remap:
        def generator(t_p: float) -> SampledTrajectory:
            return remapped_trajectory(w, t_p, n_samples=n_samples)
    else:
        def generator(t_p: float) -> SampledTrajectory:
            return sample_trajectory(w.with_t_p(t_p), n_samples)

    grid = np.linspace(t_lo, t_hi, n_points) * T_X
    curve = error_curve(generator, grid, evaluator)
    columns = ["t_p_over_Tx", "t_p_time", f"p_e_{evaluator.value}"]
    return columns, np.column_stack([grid / T_X, grid, curve.p_e]).tolist()


def _linear_ramp_trajectory(span: float, rate: float, n_samples: int) -> SampledTrajectory:
    t_p = 2.0 * span / rate
    t = np.linspace(0.0, t_p, n_samples)
    h_z = span - rate * t
    return SampledTrajectory(
        times=t,
        theta=np.arctan2(1.0, h_z),
        dtheta_dt=rate / (1.0 + h_z**2),
        h_z=h_z,
        omega=2.0 * np.sqrt(1.0 + h_z**2),
        h_x=1.0,
    )


def _run_lz_sweep(params: dict, seed: int):
    _reject_unknown(
        params,
        {"span_over_hx", "rate_min_hx2", "rate_max_hx2", "n_points",
         "log_spacing", "n_samples"},
        "lz-sweep",
    )
    span = _num(params, "span_over_hx", 10.0, lo=1.0)
    r_lo = _num(params, "rate_min_hx2", _REQUIRED, lo=0, open_lo=True)
    r_hi = _num(params, "rate_max_hx2", _REQUIRED, lo=r_lo, open_lo=True)
    n_points = _int(params, "n_points", 20, lo=2)
    log_spacing = _bool(params, "log_spacing", True)
    n_samples = _int(params, "n_samples", 4097, lo=64)
    if log_spacing:
        rates = np.geomspace(r_lo, r_hi, n_points)
    else:
        rates = np.linspace(r_lo, r_hi, n_points)
    rows = []
    for rate in rates:
        traj = _linear_ramp_trajectory(span, rate, n_samples)
        rows.append(
            [rate, evolve_two_level_direct(traj).p_e, landau_zener_error(1.0, rate)]
        )
    return ["ramp_rate_hx2", "p_e_exact", "p_e_formula"], rows


def _run_cz_pulse(params: dict, seed: int):
    _reject_unknown(
        params,
        {"theta_i_rad", "theta_f_rad", "n_coeffs", "sigma_over_Tx",
         "t_p_window_over_Tx", "max_iterations"},
        "cz-pulse",
    )
    theta_i = _num(params, "theta_i_rad", _REQUIRED, lo=0, hi=np.pi / 2, open_lo=True, open_hi=True)
    theta_f = _num(params, "theta_f_rad", _REQUIRED, lo=theta_i, hi=np.pi / 2, open_hi=True)
    n_coeffs = _int(params, "n_coeffs", _REQUIRED, lo=1)
    sigma = _num(params, "sigma_over_Tx", 0.0, lo=0.0)
    window = _get(params, "t_p_window_over_Tx", None)
    if window is not None:
        window = _num_list({"t_p_window_over_Tx": window}, "t_p_window_over_Tx", min_len=2)
        if len(window) != 2 or not 0 < window[0] <= window[1]:
            raise ValidationError(
                "t_p_window_over_Tx: must be [lo, hi] with 0 < lo <= hi"
            )
        window = (window[0] * T_X, window[1] * T_X)
    max_iterations = _int(params, "max_iterations", 300, lo=1)

    rep = optimize_cz_pulse(
        theta_i,
        theta_f,
        n_coeffs,
        sigma * T_X,
        t_p_window=window,
        seed=seed,
        max_iterations=max_iterations,
    )
    columns = ["n_coeffs", "sigma_over_Tx", "max_p_e", "iterations", "converged"]
    columns += [f"lambda_prime_{n}_rad" for n in range(1, n_coeffs + 1)]
    row = [float(n_coeffs), sigma, rep.objective_value, float(rep.iterations),
           float(rep.converged)]
    return columns, [row + [float(c) for c in rep.coefficients]]


def _run_table1(params: dict, seed: int):
    _reject_unknown(params, {"n_m_list", "cutoff_cycles"}, "table1")
    n_m_list = _get(params, "n_m_list", [2, 4, 10])
    if (
        not isinstance(n_m_list, list)
        or len(n_m_list) == 0
        or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in n_m_list)
    ):
        raise ValidationError("n_m_list: must be a non-empty list of integers >= 1")
    cutoff = _num(params, "cutoff_cycles", 2.3, lo=0, open_lo=True)

    objective = Objective(kind=ObjectiveKind.INTEGRATED_PSD_ABOVE_CUTOFF, cutoff=cutoff)
    width = max(n_m_list)
    columns = ["n_m", "objective_rad2", "iterations", "converged"]
    columns += [f"lambda_{n}" for n in range(1, width + 1)]
    rows = []
    for n_m in n_m_list:
        rep = optimize_coefficients(
            n_m, BasisMode.DERIVATIVE, objective, 1.0, seed=seed
        )
        pad = [float("nan")] * (width - n_m)
        rows.append(
            [float(n_m), rep.objective_value, float(rep.iterations),
             float(rep.converged)] + [float(c) for c in rep.coefficients] + pad
        )
    return columns, rows


def _run_drag_sweep(params: dict, seed: int):
    _reject_unknown(
        params,
        {"drag_d_list", "delta_rad_per_time", "t_p_time", "n_envelope_samples",
         "target", "levels"},
        "drag-sweep",
    )
    d_list = _num_list(params, "drag_d_list", [0.0, -0.48, -1.20])
    delta = _num(params, "delta_rad_per_time", -2.0 * np.pi)
    if delta == 0:
        raise ValidationError("delta_rad_per_time: must be nonzero")
    t_p = _num(params, "t_p_time", 2.5, lo=0, open_lo=True)
    n_env = _int(params, "n_envelope_samples", 512, lo=8)
    target = {"pi": RotationTarget.PI_PULSE, "pi/2": RotationTarget.HALF_PI_PULSE}[
        _choice(params, "target", {"pi", "pi/2"}, "pi")
    ]
    levels = _int(params, "levels", 3)
    if levels not in (2, 3):
        raise ValidationError(f"levels: must be 2 or 3, got {levels}")

    t = np.linspace(0.0, t_p, n_env)
    shape = 1.0 - np.cos(2.0 * np.pi * t / t_p)
    rows = []
    for d in d_list:
        cal = calibrate_pulse(shape, t_p, d, delta, target, levels=levels)
        rows.append(
            [d, cal.amplitude, cal.detuning, cal.phase,
             cal.qubit_subspace_error, cal.err2_avg, float(cal.converged)]
        )
    columns = ["drag_d", "amplitude_rad_per_time", "detuning_rad_per_time",
               "phase_rad", "qubit_subspace_error", "err2_avg", "converged"]
    return columns, rows


EXPERIMENTS = {
    "psd-windows": _run_psd_windows,
    "error-curve": _run_error_curve,
    "lz-sweep": _run_lz_sweep,
    "cz-pulse": _run_cz_pulse,
    "table1": _run_table1,
    "drag-sweep": _run_drag_sweep,
}


# ---------------------------------------------------------------- i/o


def load_config(path) -> tuple[dict, str]:
    """Read a JSON parameter file; returns (parameters, sha256 of the bytes)."""
    raw = Path(path).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    try:
        params = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(params, dict):
        raise ValidationError("config must be a JSON object")
    return params, digest


def export_table(columns, rows, path, fmt: str):
    """Write a numeric table; floats keep 17 significant digits."""
    path = Path(path)
    if fmt == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join("%.17g" % v for v in row))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "columns": list(columns),
            "rows": [[float(v) for v in row] for row in rows],
        }
        path.write_text(json.dumps(payload, indent=1) + "\n")
    else:
        raise ValidationError(f"format: must be csv or json, got {fmt!r}")


def load_table(path) -> tuple[list, np.ndarray]:
    """Read a table written by export_table; returns (columns, row array)."""
    path = Path(path)
    if path.suffix == ".json":
        payload = json.loads(path.read_text())
        columns = payload["columns"]
        rows = payload["rows"]
    else:
        lines = path.read_text().splitlines()
        columns = lines[0].split(",")
        rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    data = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return columns, data


def run(config: RunConfig) -> list:
    """Execute one experiment; returns the paths written."""
    if config.experiment not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment {config.experiment!r}")
    if config.format not in ("csv", "json"):
        raise ValidationError(f"format: must be csv or json, got {config.format!r}")
    started = time.monotonic()
    columns, rows = EXPERIMENTS[config.experiment](config.parameters, config.seed)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    result_path = config.output_dir / f"{config.experiment}.{config.format}"
    export_table(columns, rows, result_path, config.format)
    manifest = {
        "experiment": config.experiment,
        "schema_version": SCHEMA_VERSION,
        "config_sha256": config.config_sha256,
        "seed": config.seed,
        "format": config.format,
        "output": result_path.name,
        "rows": len(rows),
        "versions": {
            "adiabatz": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    manifest_path = config.output_dir / f"{config.experiment}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return [result_path, manifest_path]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adiabatz",
        description="Reproduce control-waveform experiments from JSON configs.",
    )
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS))
    parser.add_argument("--config", required=True, help="JSON parameter file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides the config's seed (default 0)")
    args = parser.parse_args(argv)

    try:
        params, digest = load_config(args.config)
        seed = params.pop("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ValidationError(f"seed: must be an integer, got {seed!r}")
        if args.seed is not None:
            seed = args.seed
        config = RunConfig(
            experiment=args.experiment,
            parameters=params,
            output_dir=Path(args.out),
            format=args.format,
            seed=seed,
            config_sha256=digest,
        )
        paths = run(config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
