"""Simulation, measurement and tomography of post-selected green GHZ photons."""
from . import measure, optics, postselect, qcore, tomography
from .tomography import kernels

__version__ = "0.1.0"

__all__ = ["kernels", "measure", "optics", "postselect", "qcore", "tomography"]
