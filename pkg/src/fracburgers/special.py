"""Gamma function via the Lanczos approximation.

Coefficients are the classical g = 7, n = 9 set; relative error is below
about 2e-15 on the positive real axis, which is ample for the
normalization constant of the fractional Laplacian.
"""

import math

import numpy as np

LANCZOS_G = 7.0
LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _gamma_scalar(x: float) -> float:
    if x == math.floor(x) and x <= 0:
        raise ValueError(f"gamma has a pole at {x}")
    if x < 0.5:
        # reflection formula
        return math.pi / (math.sin(math.pi * x) * _gamma_scalar(1.0 - x))
    x -= 1.0
    acc = LANCZOS_COEFFS[0]
    for i, c in enumerate(LANCZOS_COEFFS[1:], start=1):
        acc += c / (x + i)
    t = x + LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def gamma(x):
    """Gamma function of a real scalar or array."""
    if np.ndim(x) == 0:
        return _gamma_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    return np.vectorize(_gamma_scalar, otypes=[float])(arr)
