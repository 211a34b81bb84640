"""Rota-Baxter deformations of delayed discrete-time sliding-mode control."""
from ._accel import NUMBA_ENABLED
from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"
