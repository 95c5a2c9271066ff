"""driftgrid - selective classification metrics and rejection simulation for drifting streams."""

__version__ = "0.1.0"
