"""Static figure rendering for geoatt trajectory CSV logs."""
from .render import KINDS, PlotError, PlotSpec, load_trajectory, render

__all__ = ["KINDS", "PlotError", "PlotSpec", "load_trajectory", "render"]

__version__ = "0.1.0"
