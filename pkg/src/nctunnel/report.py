"""Delimited output and figures for run and sweep results.

`emit_plot_data` writes the CSV plus a standalone plot script next to it;
`render_*` draws the same figures straight to PNG so a report directory is
complete without running anything else.
"""

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .harness import SampleRow, SweepRow

TIMESERIES_COLUMNS = (
    "time_s", "tcp_goodput_mbps", "nc_goodput_mbps", "utilization",
    "loss_pct", "queue_bytes",
)
SCATTER_COLUMNS = ("loss_pct", "tcp_goodput_mbps", "nc_goodput_mbps")

_PLOT_SCRIPT = """\
#!/usr/bin/env python3
# Renders {png} from {csv}. Columns: {columns}.
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).parent
with open(here / {csv!r}) as f:
    rows = list(csv.DictReader(f))

{body}
plt.savefig(here / {png!r}, dpi=150)
print("wrote", here / {png!r})
"""

_TIMESERIES_BODY = """\
t = [float(r["time_s"]) for r in rows]
fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(9, 6))
top.plot(t, [float(r["tcp_goodput_mbps"]) for r in rows], label="TCP")
top.plot(t, [float(r["nc_goodput_mbps"]) for r in rows], label="TCP/NC")
top.set_ylabel("goodput (Mbps)")
top.legend(loc="best")
top.grid(alpha=0.3)
bottom.plot(t, [float(r["utilization"]) for r in rows], color="tab:green")
bottom.set_ylabel("link utilization")
bottom.set_xlabel("time (s)")
bottom.set_ylim(0, 1.05)
bottom.grid(alpha=0.3)
fig.tight_layout()
"""

_SCATTER_BODY = """\
loss = [float(r["loss_pct"]) for r in rows]
plt.figure(figsize=(7, 5))
plt.plot(loss, [float(r["tcp_goodput_mbps"]) for r in rows], "o-", label="TCP")
plt.plot(loss, [float(r["nc_goodput_mbps"]) for r in rows], "s-", label="TCP/NC")
plt.xlabel("packet loss (%)")
plt.ylabel("goodput (Mbps)")
plt.legend(loc="best")
plt.grid(alpha=0.3)
plt.tight_layout()
"""


def timeseries_fields(row: SampleRow) -> list[str]:
    return [
        f"{row.time_s:.3f}",
        f"{row.tcp_goodput_mbps:.6f}",
        f"{row.nc_goodput_mbps:.6f}",
        f"{row.utilization:.6f}",
        f"{row.loss_fraction * 100:.6f}",
        str(row.queue_bytes),
    ]


def scatter_fields(row: SweepRow) -> list[str]:
    return [
        f"{row.loss * 100:.6f}",
        f"{row.tcp_goodput_mbps:.6f}",
        f"{row.nc_goodput_mbps:.6f}",
    ]


def emit_plot_data(rows, path) -> list[Path]:
    """Write rows as CSV plus a ready-to-render plot script beside it.

    Accepts time-series rows (SampleRow) or sweep rows (SweepRow); the row
    kind picks the schema. Returns the written paths.
    """
    if not rows:
        raise ValueError("no rows to emit")
    path = Path(path)
    if isinstance(rows[0], SampleRow):
        columns, fields, body = (
            TIMESERIES_COLUMNS, timeseries_fields, _TIMESERIES_BODY
        )
    elif isinstance(rows[0], SweepRow):
        columns, fields, body = SCATTER_COLUMNS, scatter_fields, _SCATTER_BODY
    else:
        raise ValueError(f"unknown row type {type(rows[0]).__name__}")
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(columns)
            for row in rows:
                writer.writerow(fields(row))
    except OSError as exc:
        raise ValueError(f"cannot write {path}: {exc}") from exc
    script = path.with_name(f"plot_{path.stem}.py")
    png = path.with_suffix(".png").name
    script.write_text(_PLOT_SCRIPT.format(
        csv=path.name, png=png, columns=", ".join(columns), body=body,
    ))
    return [path, script]


def render_timeseries(rows, png_path) -> Path:
    """Draw the goodput/utilization figure for one run."""
    png_path = Path(png_path)
    t = [r.time_s for r in rows]
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(9, 6))
    top.plot(t, [r.tcp_goodput_mbps for r in rows], label="TCP")
    top.plot(t, [r.nc_goodput_mbps for r in rows], label="TCP/NC")
    top.set_ylabel("goodput (Mbps)")
    top.legend(loc="best")
    top.grid(alpha=0.3)
    bottom.plot(t, [r.utilization for r in rows], color="tab:green")
    bottom.set_ylabel("link utilization")
    bottom.set_xlabel("time (s)")
    bottom.set_ylim(0, 1.05)
    bottom.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return png_path


def render_scatter(rows, png_path) -> Path:
    """Draw the goodput-vs-loss comparison for one sweep."""
    png_path = Path(png_path)
    loss = [r.loss * 100 for r in rows]
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(loss, [r.tcp_goodput_mbps for r in rows], "o-", label="TCP")
    ax.plot(loss, [r.nc_goodput_mbps for r in rows], "s-", label="TCP/NC")
    ax.set_xlabel("packet loss (%)")
    ax.set_ylabel("goodput (Mbps)")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return png_path


def write_summary(summary: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path
