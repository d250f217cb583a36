"""Offline figure rendering for exported energy series.

One figure per workload level, one line per (pattern, namespace), mirroring
the dashboard layout. Figures land next to the delimited exports.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)


def render_energy_figures(series: list[dict], out_dir: str | Path,
                          filename_prefix: str = "energy") -> list[Path]:
    """Write one PNG per workload; returns the created paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    by_workload: dict = {}
    for s in series:
        by_workload.setdefault(s["workload"], []).append(s)

    written: list[Path] = []
    for workload in sorted(by_workload):
        fig, ax = plt.subplots(figsize=(8, 4.5), dpi=120)
        for s in sorted(by_workload[workload],
                        key=lambda s: (s["pattern"], s["namespace"])):
            points = s["points"]
            if not points:
                continue
            t0 = points[0][0]
            xs = [p[0] - t0 for p in points]
            ys = [p[1] for p in points]
            ax.plot(xs, ys, marker="o", markersize=3,
                    label=f"{s['pattern']} / {s['namespace']}")
        window_label = 10
        if by_workload[workload] and len(by_workload[workload][0]["points"]) > 1:
            pts = by_workload[workload][0]["points"]
            window_label = int(pts[1][0] - pts[0][0])
        ax.set_xlabel("seconds since run start")
        ax.set_ylabel(f"joules per {window_label} s")
        ax.set_title(f"Energy consumption, workload: {workload}")
        ax.legend(loc="best", fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = out_dir / f"{filename_prefix}_{workload}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
