"""Scatter plots of access time versus address, and the loading graph."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .timeline import Level, SECONDS_PER_DAY  # noqa: E402
from .workload import ALLOWED, level_of_stage  # noqa: E402

BLOCKED_IP = "blocked-IP"
BLOCKED_C = "blocked-C"
BLOCKED_B = "blocked-B"
CLASSES = (ALLOWED, BLOCKED_IP, BLOCKED_C, BLOCKED_B)

COLORS = {
    BLOCKED_IP: "red",
    BLOCKED_C: "purple",
    BLOCKED_B: "blue",
    ALLOWED: "#00e000",
    "baseline": "gray",
}
LAYER_COLORS = {"None": COLORS["baseline"], Level.IP: COLORS[BLOCKED_C], Level.C: COLORS[BLOCKED_B]}

# metadata stripped so identical data gives identical bytes
PNG_METADATA = {"Software": None}


@dataclass(frozen=True)
class PlotSpec:
    width: int = 1600
    height: int = 900
    y_axis: str = "rank"  # or "raw": the 32-bit address value
    dpi: int = 100
    point_size: float = 1.0
    load_bin_minutes: int = 60  # loading graph shows the mean per bin


def classify(assignment) -> list:
    """Collapse per-record stage names into scatter classes."""
    out = []
    for name in assignment:
        level = level_of_stage(name)
        if level is None:
            out.append(ALLOWED)
        elif level is Level.IP:
            out.append(BLOCKED_IP)
        elif level is Level.C:
            out.append(BLOCKED_C)
        else:
            out.append(BLOCKED_B)
    return out


def y_positions(ips, spec: PlotSpec) -> np.ndarray:
    ips = np.asarray(ips, dtype=np.int64)
    if spec.y_axis == "raw":
        return ips.astype(np.float64)
    distinct = np.unique(ips)
    return np.searchsorted(distinct, ips).astype(np.float64)


def scatter_points(timestamps, ips, classification, which, spec: PlotSpec = PlotSpec()) -> dict:
    """Points to draw per class, restricted to the classes in ``which``.

    Y positions are computed over all records so the blocked and filtered
    plots share one axis.
    """
    ts = np.asarray(timestamps, dtype=np.int64)
    labels = np.asarray(classification, dtype=object)
    ys = y_positions(ips, spec)
    t0 = (int(ts.min()) // SECONDS_PER_DAY) * SECONDS_PER_DAY if len(ts) else 0
    xs = (ts - t0) / SECONDS_PER_DAY
    out = {}
    for cls in CLASSES:
        if cls not in which:
            continue
        sel = labels == cls if len(labels) else np.zeros(0, dtype=bool)
        out[cls] = (xs[sel], ys[sel])
    return out


def _figure(spec: PlotSpec):
    return plt.figure(figsize=(spec.width / spec.dpi, spec.height / spec.dpi), dpi=spec.dpi)


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="png", metadata=PNG_METADATA)
    plt.close(fig)
    return path


def render_scatter(timestamps, ips, classification, path, which=CLASSES,
                   spec: PlotSpec = PlotSpec(), title: str = "") -> Path:
    points = scatter_points(timestamps, ips, classification, which, spec)
    fig = _figure(spec)
    ax = fig.add_subplot(1, 1, 1)
    for cls, (xs, ys) in points.items():
        if len(xs):
            ax.scatter(xs, ys, s=spec.point_size, c=COLORS[cls], marker=".", linewidths=0, label=cls)
    ax.set_xlabel("time (days)")
    ax.set_ylabel("IP address (rank)" if spec.y_axis == "rank" else "IP address")
    if title:
        ax.set_title(title)
    if any(len(xs) for xs, _ in points.values()):
        ax.legend(loc="upper right", markerscale=8)
    return _save(fig, path)


def check_layers(layers) -> None:
    """Each layer must sit at or below the previous one at every sample."""
    for (upper_name, upper), (lower_name, lower) in zip(layers, layers[1:]):
        if np.any(np.asarray(lower) > np.asarray(upper)):
            raise ValueError(f"layer {lower_name!r} exceeds {upper_name!r}")


def load_layers(series: dict) -> list:
    """Baseline, load after the IP stages, after the C stage, and final."""
    names = list(series)
    after_ip = [n for n in names[1:] if level_of_stage(n) is Level.IP]
    after_c = [n for n in names[1:] if level_of_stage(n) is Level.C]
    layers = [("None", series["None"])]
    if after_ip:
        layers.append((Level.IP, series[after_ip[-1]]))
    if after_c:
        layers.append((Level.C, series[after_c[-1]]))
    layers.append(("final", series[names[-1]]))
    return layers


def bin_means(values: np.ndarray, width: int) -> np.ndarray:
    n = len(values)
    if n == 0 or width == 1:
        return values
    padded = np.zeros(-(-n // width) * width)
    padded[:n] = values
    counts = np.full(len(padded) // width, width, dtype=np.float64)
    counts[-1] = n - (len(counts) - 1) * width
    return padded.reshape(-1, width).sum(axis=1) / counts


def render_load(start_minute: int, layers, path, spec: PlotSpec = PlotSpec()) -> Path:
    """Stacked-looking load graph: each later layer drawn over the earlier.

    ``layers`` is a list of ``(label, values)`` from the baseline down to the
    final (allowed) load.
    """
    arrays = [(label, np.asarray(values, dtype=np.float64)) for label, values in layers]
    check_layers(arrays)
    width = max(1, spec.load_bin_minutes)
    arrays = [(label, bin_means(ys, width)) for label, ys in arrays]
    fig = _figure(spec)
    ax = fig.add_subplot(1, 1, 1)
    n = len(arrays[0][1]) if arrays else 0
    xs = (start_minute + np.arange(n) * width) * 60
    if n:
        xs = (xs - (xs[0] // SECONDS_PER_DAY) * SECONDS_PER_DAY) / SECONDS_PER_DAY
    for i, (label, ys) in enumerate(arrays):
        color = COLORS[ALLOWED] if i == len(arrays) - 1 else LAYER_COLORS.get(label, "gray")
        ax.fill_between(xs, 0, ys, color=color, linewidth=0, step="post")
    ax.set_xlabel("time (days)")
    ax.set_ylabel("average requests per minute")
    ax.set_ylim(bottom=0)
    return _save(fig, path)
