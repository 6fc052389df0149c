"""Second-kind Voronoi diagrams of divergences on a grid, their straight-edge duals, and checks."""
from .divergence import Divergence, bregman, csiszar, from_config, lp, quadratic
from .dual import DualTriangulation, build_dual, build_primal_graph
from .sites import SiteSet, generate_epsilon_net, generate_random
from .verify import VerificationReport, verify
from .voronoi import GridGeometry, build_label_grid, extract_elements

__all__ = [
    "Divergence", "bregman", "csiszar", "from_config", "lp", "quadratic",
    "DualTriangulation", "build_dual", "build_primal_graph",
    "SiteSet", "generate_epsilon_net", "generate_random",
    "VerificationReport", "verify",
    "GridGeometry", "build_label_grid", "extract_elements",
]
