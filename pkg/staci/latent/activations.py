"""
Smooth activations with analytic derivatives.
"""

import numpy as np

_C = np.sqrt(2.0 / np.pi)
_A = 0.044715


def gelu(x: np.ndarray) -> np.ndarray:
    """
    Tanh approximation of the Gaussian error linear unit.

    Max absolute deviation from the erf form is below 1e-3.
    """
    return 0.5 * x * (1.0 + np.tanh(_C * (x + _A * x ** 3)))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    """Derivative of :func:`gelu`."""
    th = np.tanh(_C * (x + _A * x ** 3))
    return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * _C * (1.0 + 3.0 * _A * x * x)
