"""SVG figures: label regions, primal edges, red Voronoi vertices, black dual."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from .dual import DualTriangulation  # noqa: E402
from .voronoi import LabelGrid  # noqa: E402

LAYERS = ("regions", "edges", "vertices", "dual")
_PALETTE = plt.get_cmap("tab20").colors


def site_colors(n: int) -> ListedColormap:
    """Fixed palette indexed by site id."""
    return ListedColormap([_PALETTE[k % len(_PALETTE)] for k in range(max(n, 1))])


def parse_layers(text: str | None, no_primal: bool = False) -> tuple[str, ...]:
    layers = LAYERS if not text else tuple(t.strip() for t in text.split(",") if t.strip())
    bad = set(layers) - set(LAYERS)
    if bad:
        raise ValueError(f"unknown layers: {sorted(bad)}")
    if no_primal:
        layers = tuple(l for l in layers if l not in ("regions", "edges"))
    return layers


def render_svg(path, grid: LabelGrid, dual: DualTriangulation, elements: list[dict],
               layers=LAYERS, size: float = 6.0) -> None:
    """Write the figure; bytes depend only on the inputs."""
    x0, y0, x1, y1 = grid.geometry.rect
    n = dual.n_vertices
    with plt.rc_context({"svg.hashsalt": "divdelaunay", "svg.fonttype": "none",
                         "path.simplify": False}):
        fig, ax = plt.subplots(figsize=(size, size * (y1 - y0) / max(x1 - x0, 1e-300)))
        ax.set_xlim(x0, x1)
        ax.set_ylim(y0, y1)
        ax.set_aspect("equal")
        ax.set_axis_off()
        fig.subplots_adjust(0, 0, 1, 1)
        if "regions" in layers:
            ax.imshow(grid.label, origin="lower", extent=(x0, x1, y0, y1), cmap=site_colors(n),
                      vmin=-0.5, vmax=n - 0.5, interpolation="nearest", alpha=0.55, gid="regions")
        if "edges" in layers:
            segs = [np.asarray(e["points"]) for e in elements if e["order"] == 2 and len(e["points"]) > 1]
            ax.add_collection(LineCollection(segs, colors="0.35", linewidths=0.8, gid="primal-edges"))
        if "dual" in layers:
            P = dual.points
            segs = [P[[a, b]] for a, b in dual.edges]
            ax.add_collection(LineCollection(segs, colors="black", linewidths=1.0, gid="dual-edges"))
            ax.plot(P[:, 0], P[:, 1], "o", color="black", ms=3.5, gid="sites")
        if "vertices" in layers:
            V = np.array([e["location"] for e in elements if e["order"] >= 3]).reshape(-1, 2)
            ax.plot(V[:, 0], V[:, 1], "o", color="red", ms=4.0, gid="voronoi-vertices")
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
