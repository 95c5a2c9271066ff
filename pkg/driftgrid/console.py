"""Console and logging setup shared by the CLI and library modules."""

import logging

from rich.console import Console
from rich.logging import RichHandler


console = Console(stderr=True)

_configured = False


def setup_logging(verbose: bool = False) -> logging.Logger:
    """Install a RichHandler on the ``driftgrid`` logger hierarchy.

    Args:
        verbose: Log DEBUG messages (per-month thresholds) when True

    Returns:
        The package root logger
    """
    global _configured
    logger = logging.getLogger("driftgrid")
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not _configured:
        handler = RichHandler(console=console, show_time=False, show_path=False, markup=False)
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        logger.addHandler(handler)
        _configured = True
    return logger
