import logging

import numpy as np
from numpy.polynomial.chebyshev import chebgauss
from numpy.polynomial.legendre import leggauss
from scipy.integrate import trapezoid
from scipy.special import gammainc, gammaincc

log = logging.getLogger(__name__)


def gauss_legendre(a, b, order=64, panels=2):
    """
    Composite Gauss-Legendre rule on [a, b].

    Parameters
    ----------
    a, b : float
    order : int, default: 64
        Nodes per panel.
    panels : int, default: 2
        Number of equal sub-intervals.

    Returns
    -------
    nodes, weights : np.ndarray
        ``∫_a^b f ≈ Σ weights * f(nodes)``.
    """
    x, w = leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def chebyshev_roots(order):
    """
    Chebyshev roots x_m = cos((2m - 1)π/(2M)), m = 1..M, in that order.
    """
    x, _ = chebgauss(order)
    # chebgauss returns the roots in the same order as the closed formula
    return x


def gamma_window(s, lo, hi):
    """
    P(s, hi) - P(s, lo) of the regularized lower incomplete gamma function.

    Evaluated through the upper function where both arguments lie in the upper
    tail, so that differences of numbers close to one do not cancel.

    Parameters
    ----------
    s : float or array
    lo, hi : float or array
        Broadcastable, ``lo <= hi``.
    """
    s, lo, hi = np.broadcast_arrays(
        np.asarray(s, dtype="float64"),
        np.asarray(lo, dtype="float64"),
        np.asarray(hi, dtype="float64"),
    )
    upper = lo > s
    return np.where(
        upper,
        gammaincc(s, lo) - gammaincc(s, hi),
        gammainc(s, hi) - gammainc(s, lo),
    )


def trapezoid_heading_average(f, points=4096):
    """
    Uniform heading average (1/2π)∫_0^{2π} f(θ)dθ by the composite trapezoid
    rule. Reference for the Gauss-Chebyshev rule.
    """
    theta = np.linspace(0.0, 2 * np.pi, points + 1)
    values = np.broadcast_to(f(theta), theta.shape)
    return float(trapezoid(values, theta) / (2 * np.pi))
