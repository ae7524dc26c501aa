"""Gauss-Legendre quadrature helpers on reference intervals."""

import numpy as np


def gauss_01(n: int):
    """Points and weights of the n-point Gauss rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def gauss_interval(n: int, a: float, b: float):
    """Points and weights of the n-point Gauss rule on [a, b]."""
    x, w = gauss_01(n)
    return a + (b - a) * x, (b - a) * w
