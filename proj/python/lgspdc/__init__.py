"""Laguerre-Gaussian coincidence amplitudes of SPDC photon pairs."""

from ._lgspdc import *  # noqa: F401,F403
from ._lgspdc import __doc__  # noqa: F401

__version__ = "0.1.0"
