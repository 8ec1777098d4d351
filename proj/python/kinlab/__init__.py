"""Random Schroedinger evolution on the lattice torus and its kinetic (Boltzmann) limit."""

from ._kinlab import *  # noqa: F401,F403
from ._kinlab import __doc__  # noqa: F401

__version__ = "1.0.0"
