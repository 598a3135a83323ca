"""Gauss-Legendre panel rules and angular quadrature grids.

All rules return flat node/weight arrays so callers can vectorize over
them directly.  Surface rules are tensor products of per-axis panel
rules; angular rules pair Gauss-Legendre in cos(theta) with a uniform
periodic rule in phi.
"""

import math

import numpy as np


def gauss_legendre_panels(lo, hi, panels, order):
    """Composite Gauss-Legendre rule on ``[lo, hi]``.

    Parameters
    ----------
    lo, hi : float
        Interval endpoints, ``hi > lo``.
    panels : int
        Number of equal panels.
    order : int
        Gauss-Legendre order per panel.

    Returns
    -------
    nodes, weights : ndarray
        Flat arrays of length ``panels * order``.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    centers = 0.5 * (edges[:-1] + edges[1:])
    nodes = (centers[:, None] + half * x[None, :]).ravel()
    weights = np.broadcast_to(half * w[None, :], (panels, order)).ravel()
    return nodes, weights.copy()


def rectangle_rule(lo_x, hi_x, lo_y, hi_y, wavelength, nodes_per_wavelength):
    """Tensor-product panel rule over a rectangle.

    One panel per wavelength per axis (at least one), Gauss-Legendre of
    order ``nodes_per_wavelength`` per panel.

    Returns
    -------
    points : ndarray, shape (P, 2)
    weights : ndarray, shape (P,)
    """
    panels_x = max(1, math.ceil((hi_x - lo_x) / wavelength))
    panels_y = max(1, math.ceil((hi_y - lo_y) / wavelength))
    nx, wx = gauss_legendre_panels(lo_x, hi_x, panels_x, nodes_per_wavelength)
    ny, wy = gauss_legendre_panels(lo_y, hi_y, panels_y, nodes_per_wavelength)
    gx, gy = np.meshgrid(nx, ny, indexing="ij")
    points = np.column_stack([gx.ravel(), gy.ravel()])
    weights = (wx[:, None] * wy[None, :]).ravel()
    return points, weights


def angular_sphere_rule(n_theta, n_phi):
    """Quadrature for integrals of ``g(theta, phi) * sin(theta)`` over the sphere.

    Gauss-Legendre in ``u = cos(theta)`` absorbs the ``sin(theta)`` factor;
    phi uses a uniform midpoint rule on ``[-pi, pi)``, which is exact for
    trigonometric polynomials up to degree ``n_phi - 1``.

    Returns
    -------
    theta, phi, weights : ndarray
        Flat arrays of length ``n_theta * n_phi``.  ``weights`` integrate
        ``g`` against ``sin(theta) dtheta dphi``.
    """
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(u)
    dphi = 2.0 * np.pi / n_phi
    phi = -np.pi + dphi * (np.arange(n_phi) + 0.5)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.broadcast_to(wu[:, None] * dphi, (n_theta, n_phi))
    return tt.ravel(), pp.ravel(), ww.ravel().copy()
