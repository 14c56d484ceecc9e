"""Figure rendering over the delimited outputs of the wdcss CLI.

Each renderer reads one or more CSV files written by the simulation tools
and draws a matplotlib figure from the rows as shipped; nothing here
recomputes physics.  Magnitudes are clamped at a -80 dB floor for display
only, annotations always quote the values found in the file.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

DB_FLOOR = -80.0

KINDS = ("kappa", "profile", "surface", "sweep")

_SCHEMAS = {
    "kappa": ("t_us", "kappa"),
    "profile": ("t_us", "re", "im", "mag_db"),
    "surface": ("t_us", "fd_hz", "mag_db"),
}
# sweep accepts either the per-trial rows or the aggregated summary
_SWEEP_TRIAL = ("axis", "value", "trial", "mll_db", "sll_db", "pslr_db")
_SWEEP_SUMMARY = ("axis", "value", "mean_pslr_db", "std_pslr_db", "trials")

_PROFILE_LABELS = {
    "mf_profile": "matched filter",
    "wdamf_profile": "WD-AMF",
    "baseline_profile": "baseline",
}

_AXIS_LABELS = {
    "SNR_DB": "SNR (dB)",
    "JNR_DB": "JNR (dB)",
    "ETA": "jam duty ratio",
}


class PlotError(Exception):
    """Base for rendering failures; the CLI maps these to exit code 1."""


class SchemaMismatch(PlotError):
    """CSV columns do not match the requested figure kind."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input CSVs, kind, cosmetics, output path."""

    kind: str
    csv_paths: Tuple[Path, ...]
    out_path: Path
    title: Optional[str] = None
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None
    xlim: Optional[Tuple[float, float]] = None
    ylim: Optional[Tuple[float, float]] = None
    dpi: int = 150


@dataclass(frozen=True)
class PeakMark:
    """Annotation placed on a rendered figure, quoted from the CSV rows."""

    label: str
    x: float
    y: float
    value_db: Optional[float] = None


@dataclass(frozen=True)
class RenderResult:
    path: Path
    peaks: Tuple[PeakMark, ...]


def clamp_db(values: np.ndarray) -> np.ndarray:
    """Display floor; keeps log-scale plots from chasing -inf outliers."""
    return np.maximum(np.asarray(values, dtype=float), DB_FLOOR)


def _required_columns(kind: str, header) -> Tuple[str, ...]:
    if kind != "sweep":
        return _SCHEMAS[kind]
    if "pslr_db" in header:
        return _SWEEP_TRIAL
    if "mean_pslr_db" in header:
        return _SWEEP_SUMMARY
    # neither variant's distinctive column is present
    raise SchemaMismatch(
        "missing column 'pslr_db' (per-trial) or 'mean_pslr_db' (summary) "
        "for kind 'sweep'"
    )


def _load(path, kind: str):
    path = Path(path)
    if not path.is_file():
        raise PlotError(f"{path}: no such file")
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise SchemaMismatch(f"{path}: empty file, no header row")
    try:
        required = _required_columns(kind, header)
    except SchemaMismatch as exc:
        raise SchemaMismatch(f"{path}: {exc}") from None
    for name in required:
        if name not in header:
            raise SchemaMismatch(
                f"{path}: missing column '{name}' for kind '{kind}'"
            )
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=None,
                         encoding="utf-8")
    data = np.atleast_1d(data)
    if data.size == 0:
        raise SchemaMismatch(f"{path}: header only, no data rows")
    return data


def _finish(fig, ax, spec: FigureSpec, peaks) -> RenderResult:
    if spec.title:
        ax.set_title(spec.title)
    if spec.xlabel:
        ax.set_xlabel(spec.xlabel)
    if spec.ylabel:
        ax.set_ylabel(spec.ylabel)
    if spec.xlim:
        ax.set_xlim(spec.xlim)
    if spec.ylim:
        ax.set_ylim(spec.ylim)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.dpi, bbox_inches="tight")
    plt.close(fig)
    return RenderResult(path=out, peaks=tuple(peaks))


def _render_profile(spec: FigureSpec) -> RenderResult:
    datasets = [(Path(p), _load(p, "profile")) for p in spec.csv_paths]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    peaks = []
    for i, (path, data) in enumerate(datasets):
        label = _PROFILE_LABELS.get(path.stem, path.stem)
        last = i == len(datasets) - 1
        # input curves gray, final (processed) curve black
        color = "k" if last else "0.65"
        ax.plot(data["t_us"], clamp_db(data["mag_db"]), color=color,
                linewidth=1.0, label=label)
        k = int(np.argmax(data["mag_db"]))
        peaks.append(PeakMark(label=label, x=float(data["t_us"][k]),
                              y=float(data["mag_db"][k])))
    mark = peaks[-1]
    ax.plot([mark.x], [mark.y], "kv", markersize=5)
    ax.annotate(f"{mark.y:.2f} dB @ {mark.x:.2f} us",
                xy=(mark.x, mark.y), xytext=(6, 6),
                textcoords="offset points", fontsize=8)
    ax.set_xlabel("delay (us)")
    ax.set_ylabel("magnitude (dB)")
    ax.grid(alpha=0.3)
    if len(datasets) > 1:
        ax.legend(loc="upper right", fontsize=8)
    return _finish(fig, ax, spec, peaks)


def _render_kappa(spec: FigureSpec) -> RenderResult:
    fig, ax = plt.subplots(figsize=(7.0, 3.6))
    for path in spec.csv_paths:
        data = _load(path, "kappa")
        ax.plot(data["t_us"], data["kappa"], color="k", linewidth=1.2,
                label="target lag")
        if "kappa_jam" in (data.dtype.names or ()):
            ax.plot(data["t_us"], data["kappa_jam"], color="0.55",
                    linewidth=1.2, linestyle="--", label="jam lag")
    ax.set_xlabel("delay (us)")
    ax.set_ylabel("coherence accumulation")
    ax.set_ylim(-0.05, 1.1)
    ax.grid(alpha=0.3)
    ax.legend(loc="upper right", fontsize=8)
    return _finish(fig, ax, spec, [])


def _render_surface(spec: FigureSpec) -> RenderResult:
    if len(spec.csv_paths) != 1:
        raise PlotError("surface takes exactly one CSV")
    path = Path(spec.csv_paths[0])
    data = _load(path, "surface")
    delays = np.unique(data["t_us"])
    dopplers = np.unique(data["fd_hz"])
    if delays.size * dopplers.size != data.size:
        raise SchemaMismatch(
            f"{path}: rows do not form a complete delay-Doppler grid"
        )
    # rows are delay-major: delay outer, Doppler inner
    grid = clamp_db(data["mag_db"]).reshape(delays.size, dopplers.size)
    k = int(np.argmax(data["mag_db"]))
    peak = PeakMark(label="peak", x=float(data["t_us"][k]),
                    y=float(data["fd_hz"][k]),
                    value_db=float(data["mag_db"][k]))
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    mesh = ax.pcolormesh(delays, dopplers, grid.T, cmap="viridis",
                         shading="nearest", vmin=DB_FLOOR, vmax=0.0)
    fig.colorbar(mesh, ax=ax, label="magnitude (dB)")
    ax.plot([peak.x], [peak.y], "w+", markersize=10, markeredgewidth=1.5)
    ax.annotate(f"{peak.value_db:.2f} dB @ ({peak.x:.2f} us, {peak.y:.0f} Hz)",
                xy=(peak.x, peak.y), xytext=(8, 8),
                textcoords="offset points", fontsize=8, color="w")
    ax.set_xlabel("delay (us)")
    ax.set_ylabel("Doppler (Hz)")
    return _finish(fig, ax, spec, [peak])


def _render_sweep(spec: FigureSpec) -> RenderResult:
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    axis_names = set()
    for path in spec.csv_paths:
        path = Path(path)
        data = _load(path, "sweep")
        names = data.dtype.names or ()
        axis_names.update(str(a) for a in np.unique(data["axis"]))
        if "mean_pslr_db" in names:
            ax.errorbar(data["value"], data["mean_pslr_db"],
                        yerr=data["std_pslr_db"], marker="o", markersize=4,
                        capsize=3, linewidth=1.2, label=path.stem)
        else:
            # per-trial rows are scattered as-is, no aggregation here
            ax.plot(data["value"], data["pslr_db"], linestyle="none",
                    marker=".", markersize=5, alpha=0.6, label=path.stem)
    if len(axis_names) > 1:
        raise PlotError(
            "sweep CSVs mix axes: " + ", ".join(sorted(axis_names))
        )
    axis = axis_names.pop() if axis_names else ""
    ax.set_xlabel(_AXIS_LABELS.get(axis, axis or "value"))
    ax.set_ylabel("PSLR (dB)")
    ax.grid(alpha=0.3)
    if len(spec.csv_paths) > 1:
        ax.legend(loc="best", fontsize=8)
    return _finish(fig, ax, spec, [])


_RENDERERS = {
    "kappa": _render_kappa,
    "profile": _render_profile,
    "surface": _render_surface,
    "sweep": _render_sweep,
}


def render(spec: FigureSpec) -> RenderResult:
    """Validate the spec, draw the figure, write the image file."""
    if spec.kind not in KINDS:
        raise PlotError(f"unknown figure kind '{spec.kind}'")
    if not spec.csv_paths:
        raise PlotError("no input CSVs")
    return _RENDERERS[spec.kind](spec)
