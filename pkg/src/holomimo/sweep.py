"""Configuration parsing, scenario layouts, sweep execution, CSV and plots.

A sweep varies one axis (total power, frequency, distance, transmit or
receive size) over a list of values and runs a subset of schemes at
each point.  Results land in a CSV with one row per (axis value,
scheme); rows are ordered by (axis index, scheme index) regardless of
how the work was scheduled, and identical configurations produce
byte-identical files.
"""

import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import yaml

from .benchmarks import discrete_benchmark_result, optimal_decomposition_result
from .cache import MatrixCache
from .coupling import QuadratureSpec, assemble_coupling
from .errors import EmptyInput, HoloMimoError, ParseError, ValidationError
from .fields import SPEED_OF_LIGHT, AngularQuadSpec
from .geometry import ApertureSpec, Scenario, align_aperture, validate_scenario
from .modes import mode_set
from .noise import emi_covariance, noise_covariance
from .waterfilling import (
    equal_power_allocation,
    iterative_water_filling,
    sum_rate,
)

WORKERS_ENV = "HOLOMIMO_WORKERS"

AXES = ("total_power", "frequency", "distance", "tx_size", "rx_size")
SCHEMES = ("proposed", "equal", "discrete", "optimal")
NOISE_MODES = ("hw_only", "hw_plus_emi")

CSV_HEADER = (
    "scenario_id,scheme,axis,axis_value,sum_se_bps_hz,iterations,"
    "converged,wall_time_s"
)


@dataclass(frozen=True)
class SweepConfig:
    """Validated sweep description with §-independent defaults applied."""

    frequency: float
    rx_size: tuple
    user_count: int
    user_radius: float
    user_size: tuple
    user_power: float
    user_angles: tuple  # radians on the semicircle, or () for equal spacing
    sigma_emi2: float
    n0_half: float
    noise_mode: str
    axis: str
    values: tuple
    schemes: tuple
    nodes_per_wavelength: int
    n_theta: int
    n_phi: int
    prune_evanescent: bool
    grid_density: int
    eps: float
    max_iter: int
    output: str
    seed: int
    record_timing: bool
    cache_dir: str | None


@dataclass
class ResultRow:
    """One CSV row of a sweep."""

    scenario_id: str
    scheme: str
    axis: str
    axis_value: float
    sum_se: float | None
    iterations: int
    converged: bool
    wall_time_s: float | None
    error: str | None = None


_SCHEMA = {
    "frequency_hz": None,
    "rx_size_m": None,
    "users": {"count", "radius_m", "size_m", "power", "angles_deg"},
    "noise": {"sigma_emi2", "n0_half", "mode"},
    "sweep": {"axis", "values"},
    "schemes": None,
    "quadrature": {"nodes_per_wavelength", "n_theta", "n_phi"},
    "prune_evanescent": None,
    "grid_density": None,
    "eps": None,
    "max_iter": None,
    "output": None,
    "seed": None,
    "record_timing": None,
    "cache_dir": None,
}


def _check_keys(data):
    for key, value in data.items():
        if key not in _SCHEMA:
            raise ParseError(f"unknown key '{key}'")
        allowed = _SCHEMA[key]
        if allowed is not None:
            if not isinstance(value, dict):
                raise ParseError(f"key '{key}' must be a mapping")
            for sub in value:
                if sub not in allowed:
                    raise ParseError(f"unknown key '{key}.{sub}'")


def _positive(value, name):
    value = float(value)
    if not value > 0.0:
        raise ValidationError(f"{name} must be positive, got {value}")
    return value


def _pair(value, name):
    if np.isscalar(value):
        v = _positive(value, name)
        return (v, v)
    if len(value) != 2:
        raise ValidationError(f"{name} needs one or two entries")
    return (_positive(value[0], name), _positive(value[1], name))


def parse_config(text):
    """Parse structured configuration text into a :class:`SweepConfig`.

    Unset keys fall back to the default layout: 10 GHz, four users on a
    75 m semicircle with two-wavelength square apertures, a
    four-wavelength square receiver, and equal interference and hardware
    noise densities of 5.6e-6.

    Raises
    ------
    ParseError
        Malformed text or unknown keys (with line info when available).
    ValidationError
        Well-formed but invalid values, named by field.
    """
    try:
        data = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ParseError(f"invalid configuration syntax{where}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ParseError("configuration root must be a mapping")
    _check_keys(data)

    frequency = _positive(data.get("frequency_hz", 1.0e10), "frequency_hz")
    lam = SPEED_OF_LIGHT / frequency
    rx_size = _pair(data.get("rx_size_m", 4.0 * lam), "rx_size_m")

    users = data.get("users") or {}
    count = int(users.get("count", 4))
    if count < 1:
        raise ValidationError(f"users.count must be >= 1, got {count}")
    radius = _positive(users.get("radius_m", 75.0), "users.radius_m")
    user_size = _pair(users.get("size_m", 2.0 * lam), "users.size_m")
    power = float(users.get("power", 1.0))
    if power < 0.0:
        raise ValidationError(f"users.power must be >= 0, got {power}")
    angles_deg = users.get("angles_deg")
    if angles_deg is None:
        user_angles = ()
    else:
        user_angles = tuple(math.radians(float(a)) for a in angles_deg)
        if len(user_angles) != count:
            raise ValidationError("users.angles_deg must list one angle per user")

    noise = data.get("noise") or {}
    sigma_emi2 = float(noise.get("sigma_emi2", 5.6e-6))
    n0_half = float(noise.get("n0_half", 5.6e-6))
    if sigma_emi2 < 0.0:
        raise ValidationError("noise.sigma_emi2 must be >= 0")
    if not n0_half > 0.0:
        raise ValidationError("noise.n0_half must be > 0")
    noise_mode = noise.get("mode", "hw_plus_emi")
    if noise_mode not in NOISE_MODES:
        raise ValidationError(f"noise.mode must be one of {NOISE_MODES}")

    sweep = data.get("sweep") or {}
    axis = sweep.get("axis", "total_power")
    if axis not in AXES:
        raise ValidationError(f"sweep.axis must be one of {AXES}")
    values = tuple(float(v) for v in sweep.get("values", [count * power]))
    if not values:
        raise ValidationError("sweep.values must be non-empty")
    if any(v <= 0.0 for v in values) and axis != "total_power":
        raise ValidationError("sweep.values must be positive")
    if axis == "total_power" and any(v < 0.0 for v in values):
        raise ValidationError("sweep.values must be >= 0 for total_power")

    schemes = tuple(data.get("schemes", ["proposed"]))
    if not schemes:
        raise ValidationError("schemes must be non-empty")
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme '{scheme}'")

    quad = data.get("quadrature") or {}
    npw = int(quad.get("nodes_per_wavelength", 12))
    if npw < 4:
        raise ValidationError("quadrature.nodes_per_wavelength must be >= 4")
    n_theta = int(quad.get("n_theta", 64))
    n_phi = int(quad.get("n_phi", 128))
    if n_theta < 4 or n_phi < 4:
        raise ValidationError("angular node counts must be >= 4")

    grid_density = int(data.get("grid_density", 4))
    eps = float(data.get("eps", 1e-6))
    max_iter = int(data.get("max_iter", 100))
    if eps <= 0.0:
        raise ValidationError("eps must be positive")
    if max_iter < 1:
        raise ValidationError("max_iter must be >= 1")

    return SweepConfig(
        frequency=frequency,
        rx_size=rx_size,
        user_count=count,
        user_radius=radius,
        user_size=user_size,
        user_power=power,
        user_angles=user_angles,
        sigma_emi2=sigma_emi2,
        n0_half=n0_half,
        noise_mode=noise_mode,
        axis=axis,
        values=values,
        schemes=schemes,
        nodes_per_wavelength=npw,
        n_theta=n_theta,
        n_phi=n_phi,
        prune_evanescent=bool(data.get("prune_evanescent", False)),
        grid_density=grid_density,
        eps=eps,
        max_iter=max_iter,
        output=str(data.get("output", "results.csv")),
        seed=int(data.get("seed", 0)),
        record_timing=bool(data.get("record_timing", False)),
        cache_dir=data.get("cache_dir"),
    )


def place_users_semicircle(count, radius, size_h, size_v, angles=()):
    """User apertures on a vertical semicircle, broadside to the origin.

    Users sit at equal angular spacing ``pi (2i - 1) / (2K)`` in the x-z
    plane (z > 0) unless explicit angles are given; each plate normal
    points at the origin, so all users are equidistant from the
    receiver.
    """
    if count < 1:
        raise ValidationError("need at least one user")
    if not angles:
        angles = tuple(
            math.pi * (2 * i + 1) / (2 * count) for i in range(count)
        )
    specs = []
    for alpha in angles:
        center = np.array(
            [radius * math.cos(alpha), 0.0, radius * math.sin(alpha)]
        )
        pitch = 1.5 * math.pi - alpha  # rotates +z onto -(cos a, 0, sin a)
        specs.append(
            ApertureSpec(
                center=center,
                length_v=size_v,
                length_h=size_h,
                yaw=0.0,
                pitch=pitch,
                roll=0.0,
            )
        )
    return specs


def scenario_for(cfg, axis_value):
    """Scenario and per-user budgets for one sweep point."""
    frequency = cfg.frequency
    radius = cfg.user_radius
    tx_size = cfg.user_size
    rx_size = cfg.rx_size
    per_user_power = cfg.user_power
    if cfg.axis == "total_power":
        per_user_power = axis_value / cfg.user_count
    elif cfg.axis == "frequency":
        frequency = axis_value
    elif cfg.axis == "distance":
        radius = axis_value
    elif cfg.axis == "tx_size":
        tx_size = (axis_value, axis_value)
    elif cfg.axis == "rx_size":
        rx_size = (axis_value, axis_value)
    rx = ApertureSpec(
        center=np.zeros(3), length_h=rx_size[0], length_v=rx_size[1]
    )
    users = place_users_semicircle(
        cfg.user_count, radius, tx_size[0], tx_size[1], cfg.user_angles
    )
    sigma_emi2 = cfg.sigma_emi2 if cfg.noise_mode == "hw_plus_emi" else 0.0
    scenario = Scenario(
        frequency=frequency,
        rx=rx,
        users=tuple((u, per_user_power) for u in users),
        sigma_emi2=sigma_emi2,
        n0_half=cfg.n0_half,
    )
    return scenario, [per_user_power] * cfg.user_count


def _mode_infrastructure(cfg, scenario, cache):
    """Couplings and projected noise for the plane-wave mode schemes."""
    k = scenario.constants
    rx_modes = mode_set(
        scenario.rx.length_h,
        scenario.rx.length_v,
        k.wavelength,
        prune=cfg.prune_evanescent,
    )
    quad = QuadratureSpec(nodes_per_wavelength=cfg.nodes_per_wavelength)
    angular = AngularQuadSpec(n_theta=cfg.n_theta, n_phi=cfg.n_phi)
    couplings = []
    for uid, (user, _p) in enumerate(scenario.users):
        aligned = align_aperture(user)
        tx_modes = mode_set(
            aligned.S_x, aligned.S_y, k.wavelength, prune=cfg.prune_evanescent
        )
        couplings.append(
            assemble_coupling(
                aligned, rx_modes, tx_modes, k, quad, user_id=uid, cache=cache
            )
        )
    if scenario.sigma_emi2 > 0.0:
        emi = emi_covariance(rx_modes, k, angular, cache=cache)
    else:
        emi = np.zeros((3 * rx_modes.count, 3 * rx_modes.count))
    noise = noise_covariance(emi, scenario.sigma_emi2, scenario.n0_half)
    return couplings, noise


def run_point(cfg, axis_value, cache=None):
    """All configured schemes at one axis value: scheme -> row fields."""
    scenario, p_max = scenario_for(cfg, axis_value)
    validate_scenario(scenario)
    out = {}
    needs_modes = {"proposed", "equal"} & set(cfg.schemes)
    if needs_modes:
        couplings, noise = _mode_infrastructure(cfg, scenario, cache)
        if "proposed" in cfg.schemes:
            res = iterative_water_filling(
                couplings, noise, p_max, eps=cfg.eps, max_iter=cfg.max_iter
            )
            out["proposed"] = (res.sum_se, res.iterations, res.converged)
        if "equal" in cfg.schemes:
            covs = equal_power_allocation(couplings, p_max)
            se = sum_rate(couplings, covs, noise)
            out["equal"] = (se, 0, True)
    if "discrete" in cfg.schemes:
        res = discrete_benchmark_result(
            scenario, p_max, eps=cfg.eps, max_iter=cfg.max_iter
        )
        out["discrete"] = (res.sum_se, res.iterations, res.converged)
    if "optimal" in cfg.schemes:
        res = optimal_decomposition_result(
            scenario,
            p_max,
            grid_density=cfg.grid_density,
            eps=cfg.eps,
            max_iter=cfg.max_iter,
        )
        out["optimal"] = (res.sum_se, res.iterations, res.converged)
    return out


def _config_digest(cfg):
    import hashlib

    parts = repr(
        (
            cfg.frequency,
            cfg.rx_size,
            cfg.user_count,
            cfg.user_radius,
            cfg.user_size,
            cfg.user_power,
            cfg.user_angles,
            cfg.sigma_emi2,
            cfg.n0_half,
            cfg.noise_mode,
            cfg.axis,
            cfg.values,
            cfg.schemes,
            cfg.nodes_per_wavelength,
            cfg.n_theta,
            cfg.n_phi,
            cfg.prune_evanescent,
            cfg.grid_density,
            cfg.seed,
        )
    ).encode()
    return hashlib.sha256(parts).hexdigest()[:10]


def run_sweep(cfg, csv_path=None):
    """Run every (axis value, scheme) pair and write the CSV.

    Sweep points may execute in parallel (``HOLOMIMO_WORKERS``); rows
    are emitted ordered by (axis index, scheme index).  Per-point
    failures become rows with an error marker and the sweep continues.

    Returns
    -------
    list of ResultRow
    """
    cache = MatrixCache(cfg.cache_dir) if cfg.cache_dir else None
    digest = _config_digest(cfg)
    workers = max(1, int(os.environ.get(WORKERS_ENV, "1")))

    def point(idx_value):
        idx, value = idx_value
        start = time.perf_counter()
        try:
            per_scheme = run_point(cfg, value, cache)
            err = None
        except HoloMimoError as exc:
            per_scheme = {}
            err = f"{type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        return idx, value, per_scheme, err, elapsed

    items = list(enumerate(cfg.values))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(point, items))
    else:
        outcomes = [point(item) for item in items]
    outcomes.sort(key=lambda rec: rec[0])

    rows = []
    for idx, value, per_scheme, err, elapsed in outcomes:
        for scheme in cfg.schemes:
            wall = elapsed / len(cfg.schemes) if cfg.record_timing else None
            if err is not None:
                rows.append(
                    ResultRow(
                        scenario_id=f"{digest}-{idx}",
                        scheme=scheme,
                        axis=cfg.axis,
                        axis_value=value,
                        sum_se=None,
                        iterations=0,
                        converged=False,
                        wall_time_s=wall,
                        error=err,
                    )
                )
                continue
            se, iterations, converged = per_scheme[scheme]
            rows.append(
                ResultRow(
                    scenario_id=f"{digest}-{idx}",
                    scheme=scheme,
                    axis=cfg.axis,
                    axis_value=value,
                    sum_se=se,
                    iterations=iterations,
                    converged=converged,
                    wall_time_s=wall,
                )
            )
    path = csv_path or cfg.output
    if path:
        write_csv(rows, path)
    return rows


def write_csv(rows, path):
    """Write rows in the pinned column order.

    Failed rows keep the eight standard columns (empty SE) and append
    the error description as a trailing field.
    """
    lines = [CSV_HEADER]
    for row in rows:
        se = "" if row.sum_se is None else f"{row.sum_se:.12g}"
        wall = "" if row.wall_time_s is None else f"{row.wall_time_s:.3f}"
        fields = [
            row.scenario_id,
            row.scheme,
            row.axis,
            f"{row.axis_value:.12g}",
            se,
            str(row.iterations),
            "true" if row.converged else "false",
            wall,
        ]
        if row.error is not None:
            fields.append(row.error.replace(",", ";"))
        lines.append(",".join(fields))
    payload = "\n".join(lines) + "\n"
    with open(path, "w", newline="") as fh:
        fh.write(payload)
    return payload


def read_csv_rows(path):
    """Parse a sweep CSV back into :class:`ResultRow` objects."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ParseError(f"unexpected CSV header: {header}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) < 8:
                raise ParseError(f"short CSV row: {line!r}")
            rows.append(
                ResultRow(
                    scenario_id=parts[0],
                    scheme=parts[1],
                    axis=parts[2],
                    axis_value=float(parts[3]),
                    sum_se=float(parts[4]) if parts[4] else None,
                    iterations=int(parts[5]),
                    converged=parts[6] == "true",
                    wall_time_s=float(parts[7]) if parts[7] else None,
                    error=parts[8] if len(parts) > 8 else None,
                )
            )
    return rows


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def emit_plot(rows, path, width=640, height=480):
    """Render sweep rows as a deterministic SVG line plot.

    One polyline per scheme (a circle marker for singleton series),
    axis value on x and sum SE on y.  Output bytes depend only on the
    row contents.

    Raises
    ------
    EmptyInput
        No plottable rows.
    ValidationError
        Rows mix different sweep axes.
    """
    plottable = [r for r in rows if r.sum_se is not None]
    if not plottable:
        raise EmptyInput("no rows with a sum SE to plot")
    axes = {r.axis for r in plottable}
    if len(axes) != 1:
        raise ValidationError(f"rows mix sweep axes: {sorted(axes)}")
    axis_name = plottable[0].axis

    schemes = []
    for row in plottable:
        if row.scheme not in schemes:
            schemes.append(row.scheme)
    xs = [r.axis_value for r in plottable]
    ys = [r.sum_se for r in plottable]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    left, right, top, bottom = 60, 20, 20, 50

    def to_px(x, y):
        px = left + (x - x_lo) / x_span * (width - left - right)
        py = height - bottom - (y - y_lo) / y_span * (height - top - bottom)
        return px, py

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" '
        f'y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" '
        f'stroke="black"/>',
        f'<text x="{(left + width - right) // 2}" y="{height - 12}" '
        f'text-anchor="middle" font-size="13">{axis_name}</text>',
        f'<text x="14" y="{(top + height - bottom) // 2}" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 14 '
        f'{(top + height - bottom) // 2})">sum SE [bits/s/Hz]</text>',
        f'<text x="{left}" y="{height - bottom + 16}" font-size="11" '
        f'text-anchor="middle">{x_lo:.6g}</text>',
        f'<text x="{width - right}" y="{height - bottom + 16}" font-size="11" '
        f'text-anchor="middle">{x_hi:.6g}</text>',
        f'<text x="{left - 6}" y="{height - bottom}" font-size="11" '
        f'text-anchor="end">{y_lo:.6g}</text>',
        f'<text x="{left - 6}" y="{top + 10}" font-size="11" '
        f'text-anchor="end">{y_hi:.6g}</text>',
    ]
    for sidx, scheme in enumerate(schemes):
        color = _PALETTE[sidx % len(_PALETTE)]
        series = sorted(
            (r for r in plottable if r.scheme == scheme),
            key=lambda r: r.axis_value,
        )
        pts = [to_px(r.axis_value, r.sum_se) for r in series]
        if len(pts) == 1:
            px, py = pts[0]
            parts.append(
                f'<circle cx="{px:.2f}" cy="{py:.2f}" r="4" fill="{color}"/>'
            )
        else:
            joined = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                f'points="{joined}"/>'
            )
        parts.append(
            f'<text x="{width - right - 120}" y="{top + 16 + 16 * sidx}" '
            f'font-size="12" fill="{color}">{scheme}</text>'
        )
    parts.append("</svg>")
    payload = "\n".join(parts) + "\n"
    with open(path, "w", newline="") as fh:
        fh.write(payload)
    return payload
