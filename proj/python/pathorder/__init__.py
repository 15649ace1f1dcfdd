"""Order selection for multi-order Markov models of paths on networks."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401

METHODS = ("aic", "bic", "edc", "lr:0.05", "bf:positive", "bf:very_strong")


def select_all(report, methods=METHODS, lr_mode="all"):
    """Selected order for each method string, keyed by the method string."""
    return {m: select(report, m, lr_mode) for m in methods}  # noqa: F405
