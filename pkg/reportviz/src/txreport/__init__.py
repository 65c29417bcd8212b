"""Figure rendering for transcript differential-expression engine outputs."""

from .figures import FigureJob, compute_fdr_power, compute_roc, render

__version__ = "0.1.0"

__all__ = ["FigureJob", "compute_fdr_power", "compute_roc", "render"]
