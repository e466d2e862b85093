"""Local approximate Gaussian-process surrogates for hyperelastic FE analysis."""

from ._accel import backend_name

__version__ = "0.1.0"
__all__ = ["backend_name", "__version__"]
