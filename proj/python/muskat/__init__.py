"""Muskat interface evolution with a permeability jump."""

from ._muskat import *  # noqa: F401,F403
from ._muskat import __version__  # noqa: F401
