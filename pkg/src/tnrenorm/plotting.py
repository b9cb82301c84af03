"""Step-count line charts rendered to SVG with matplotlib."""

import matplotlib

matplotlib.use("Agg")

from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .harness import SKIPPED, median_steps  # noqa: E402

AXES = ("N", "p", "b")
GRID_COLUMNS = ("structure", "method", "N", "p", "b")

# byte-stable SVG: fixed id salt, no timestamp, text kept as text
_RC = {
    "svg.hashsalt": "tnrenorm",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "legend.fontsize": 8,
}

DEFAULT_SERIES = {"N": ("p", "structure"), "p": ("structure",),
                  "b": ("structure",)}


def parse_series(series_key):
    """``"p"``, ``"N·structure"``, ``"N,structure"`` or a tuple of columns."""
    if isinstance(series_key, str):
        for sep in ("·", "*", "+"):
            series_key = series_key.replace(sep, ",")
        series_key = [s.strip() for s in series_key.split(",") if s.strip()]
    series = tuple(series_key)
    bad = [s for s in series if s not in GRID_COLUMNS]
    if bad:
        raise ValueError(f"unknown series columns {bad}")
    return series


def _label(series, key):
    return ", ".join(f"{col}={val}" if col in AXES else str(val)
                     for col, val in zip(series, key))


def plot_steps(rows, x_axis, series_key=None, path=None, title=None):
    """Median ``steps_total`` over seeds against ``x_axis``, one line per series.

    Every grid column that is neither the x-axis nor part of the series key
    must take a single value across ``rows``.

    Returns:
        The matplotlib ``Figure`` (also written to ``path`` as SVG if given).
    """
    if x_axis not in AXES:
        raise ValueError(f"x_axis must be one of {AXES}, got {x_axis!r}")
    series = parse_series(series_key or DEFAULT_SERIES[x_axis])
    if x_axis in series:
        raise ValueError("x_axis cannot also be a series column")
    rows = [r for r in rows if r.status != SKIPPED]
    if not rows:
        raise ValueError("no rows to plot")
    fixed = {}
    for col in GRID_COLUMNS:
        if col == x_axis or col in series:
            continue
        values = sorted({getattr(r, col) for r in rows})
        if len(values) > 1:
            raise ValueError(
                f"rows mix {col} values {values}; fix it or add it to the series")
        fixed[col] = values[0]

    med = median_steps(rows, series + (x_axis,))
    lines = {}
    for key, value in med.items():
        lines.setdefault(key[:-1], []).append((key[-1], value))

    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(7.0, 4.5))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(1, 1, 1)
        for i, (key, pts) in enumerate(sorted(lines.items())):
            xs, ys = zip(*sorted(pts))
            ax.plot(xs, ys, marker="o", label=_label(series, key),
                    gid=f"series-{i}")
        ax.set_xlabel(x_axis)
        ax.set_ylabel("median steps")
        if title is None:
            title = ", ".join(f"{k}={v}" for k, v in fixed.items())
        ax.set_title(title, fontsize=10)
        ax.legend(loc="upper left", ncol=2 if len(lines) > 7 else 1)
        fig.tight_layout()
        if path is not None:
            fig.savefig(path, format="svg", metadata={"Date": None})
    return fig
