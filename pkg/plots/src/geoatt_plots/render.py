"""Figure rendering from trajectory CSV files.

The input contract is the trajectory CSV written by the simulation harness:
``#``-prefixed metadata comment lines (the second one carrying
``# cone_theta_deg=...``), a header row, and one row per logged step. This
module only reads that file format; it has no other coupling to the
simulation code.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

__all__ = ["KINDS", "PlotError", "PlotSpec", "load_trajectory", "render"]

KINDS = (
    "eR_components",
    "psi",
    "constraint_angles",
    "disturbance_estimate",
    "control_input",
    "sphere_trace",
)

FORMATS = ("png", "pdf")


class PlotError(ValueError):
    """Invalid plot request: bad CSV, missing column, unknown kind."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str
    out_path: str
    format: str = "png"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown kind {self.kind!r}; choose from {KINDS}")
        if self.format not in FORMATS:
            raise PlotError(f"unknown format {self.format!r}; choose from {FORMATS}")


def load_trajectory(csv_path) -> tuple[pd.DataFrame, list[float]]:
    """Read a trajectory CSV; returns (table, cone half-angles in degrees)."""
    path = Path(csv_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PlotError(f"cannot read {csv_path}: {exc}") from exc

    thetas: list[float] = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        if line.startswith("# cone_theta_deg="):
            raw = line.split("=", 1)[1]
            thetas = [float(x) for x in raw.split(",") if x]

    try:
        df = pd.read_csv(path, comment="#")
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise PlotError(f"{csv_path} is not a valid trajectory CSV: {exc}") from exc
    if df.empty or "t" not in df.columns:
        raise PlotError(f"{csv_path} contains no trajectory rows")
    return df, thetas


def _columns(df: pd.DataFrame, names: list[str]) -> list[np.ndarray]:
    for name in names:
        if name not in df.columns:
            raise PlotError(f"required column {name!r} missing from CSV")
    return [df[name].to_numpy() for name in names]


def _numbered(df: pd.DataFrame, prefix: str) -> list[str]:
    names = []
    i = 1
    while f"{prefix}_{i}" in df.columns:
        names.append(f"{prefix}_{i}")
        i += 1
    if not names:
        raise PlotError(f"required column {prefix!r}_1 missing from CSV")
    return names


def _plot_eR_components(ax, df, thetas):
    (t,) = _columns(df, ["t"])
    for name in _numbered(df, "e_R"):
        ax.plot(t, df[name], label=name)
    ax.set_ylabel("attitude error vector components")
    ax.legend()


def _plot_psi(ax, df, thetas):
    t, values = _columns(df, ["t", "Psi"])
    ax.plot(t, values)
    ax.set_ylabel("configuration error $\\Psi$")


def _plot_constraint_angles(ax, df, thetas):
    (t,) = _columns(df, ["t"])
    names = _numbered(df, "angle_to_cone")
    for i, name in enumerate(names):
        ax.plot(t, df[name], label=f"cone {i + 1}")
    for i, theta in enumerate(thetas):
        ax.axhline(theta, linestyle="--", color=f"C{i}", linewidth=1.0)
    ax.set_ylabel("angle to cone axis [deg]")
    ax.legend()


def _plot_disturbance_estimate(ax, df, thetas):
    (t,) = _columns(df, ["t"])
    est = _numbered(df, "delta_bar")
    true = _numbered(df, "delta_true")
    for i, (e, d) in enumerate(zip(est, true)):
        ax.plot(t, df[e], color=f"C{i}", label=f"estimate {i + 1}")
        ax.plot(t, df[d], color=f"C{i}", linestyle="--", label=f"true {i + 1}")
    ax.set_ylabel("disturbance estimate [N m]")
    ax.legend(ncol=2, fontsize="small")


def _plot_control_input(ax, df, thetas):
    (t,) = _columns(df, ["t"])
    for name in _numbered(df, "u"):
        ax.plot(t, df[name], label=name)
    ax.set_ylabel("control input [N m]")
    ax.legend()


def _plot_sphere_trace(ax, df, thetas):
    # inertial sensor direction R r with r = e1: the first column of R
    r1, r2, r3 = _columns(df, ["R_1", "R_4", "R_7"])
    azimuth = np.degrees(np.arctan2(r2, r1))
    elevation = np.degrees(np.arcsin(np.clip(r3, -1.0, 1.0)))
    ax.plot(azimuth, elevation)
    ax.plot(azimuth[0], elevation[0], "o", label="start")
    ax.plot(azimuth[-1], elevation[-1], "s", label="end")
    ax.set_xlabel("azimuth [deg]")
    ax.set_ylabel("elevation [deg]")
    ax.legend()


_RENDERERS = {
    "eR_components": _plot_eR_components,
    "psi": _plot_psi,
    "constraint_angles": _plot_constraint_angles,
    "disturbance_estimate": _plot_disturbance_estimate,
    "control_input": _plot_control_input,
    "sphere_trace": _plot_sphere_trace,
}


def render(spec: PlotSpec) -> str:
    """Render one figure kind from a trajectory CSV; returns the output path.

    The CSV is validated before any file is created, so a failed render
    leaves no partial output behind.
    """
    df, thetas = load_trajectory(spec.csv_path)
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    try:
        _RENDERERS[spec.kind](ax, df, thetas)
        if spec.kind != "sphere_trace":
            ax.set_xlabel("time [s]")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(spec.out_path, format=spec.format, dpi=150)
    finally:
        plt.close(fig)
    return spec.out_path
