"""Batch figure rendering for the stringstab CSV outputs."""

from .errors import EmptyDataError, HeaderError, PlotkitError
from .readers import read_error_traces, read_norm_sweep
from .render import KINDS, PlotJob, render

__version__ = "0.1.0"
