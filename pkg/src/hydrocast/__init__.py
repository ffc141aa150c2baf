"""Monthly hydroelectric generation forecasting with a from-scratch LSTM."""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
