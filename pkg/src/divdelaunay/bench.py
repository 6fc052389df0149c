"""Grid-size scaling of the propagation: counters and wall time."""
from __future__ import annotations

import csv
import io
import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .divergence import Divergence  # noqa: E402
from .sites import SiteSet  # noqa: E402
from .voronoi import GridGeometry, build_label_grid  # noqa: E402

HEADER = ("grid", "finalize", "relax", "millis")


def bench(d: Divergence, sites: SiteSet, sizes, rect=(0.0, 0.0, 1.0, 1.0), repeats: int = 3,
          parallel: bool = False) -> list[dict]:
    """Best-of-``repeats`` propagation time per grid size (after one warm-up)."""
    rows = []
    build_label_grid(d, sites, GridGeometry.from_rect(rect, sizes[0]), exhaustive=False)
    for w, h in sizes:
        geom = GridGeometry.from_rect(rect, (w, h))
        best = np.inf
        for _ in range(max(1, repeats)):
            t = time.perf_counter()
            g = build_label_grid(d, sites, geom, exhaustive=False, parallel=parallel)
            best = min(best, time.perf_counter() - t)
        rows.append({"grid": f"{w}x{h}", "vertices": w * h, "finalize": g.counters["finalize"],
                     "relax": g.counters["relax"], "millis": round(1000.0 * best, 3)})
    return rows


def to_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(HEADER)
    for r in rows:
        wr.writerow([r[k] for k in HEADER])
    return buf.getvalue()


def plot(rows, path) -> None:
    v = np.array([r["vertices"] for r in rows], dtype=float)
    ms = np.array([r["millis"] for r in rows])
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.loglog(v, ms, "o-", color="black", label="measured")
    ax.loglog(v, ms[0] * v / v[0], "--", color="0.5", label="linear in vertices")
    ax.set_xlabel("grid vertices")
    ax.set_ylabel("propagation time [ms]")
    ax.legend(frameon=False)
    fig.tight_layout()
    with plt.rc_context({"svg.hashsalt": "divdelaunay"}):
        fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)
