"""Fourier partial-sum divergence laboratory.

Trigonometric polynomials, Fejér localization checks, saturating
constructions in L^p and C(T), and empirical divergence spectra.
"""

__version__ = "0.1.0"

from .errors import FdlError  # noqa: E402
from .trigcore import SampledFunction, TrigPoly  # noqa: E402

__all__ = ["FdlError", "SampledFunction", "TrigPoly", "__version__"]
