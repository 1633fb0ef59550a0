"""Evaluation workbench for machine translation runs.

The package splits into an embedded engine (storage, metrics, search,
grouping, feedback) and two thin fronts over it: an HTTP gateway and a CLI.
"""

__version__ = "0.1.0"

from .engine import Workbench

__all__ = ["Workbench", "__version__"]
