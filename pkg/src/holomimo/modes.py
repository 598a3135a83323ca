"""Truncated plane-wave mode sets and their closed-form transforms.

Currents and fields on a rectangular aperture are expanded on the
orthonormal family ``(1/sqrt(S_x S_y)) exp(j (k_x x + k_y y))`` with
sampling wavenumbers ``k = 2 pi n / S``.  Only modes with sampling
wavenumbers inside the propagating band survive truncation; the
rectangular index ranges are ``|n| <= ceil(S / lambda)`` per axis, with
an optional prune of rectangle corners that violate the propagating
disc bound.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, GridTooCoarse
from .quadrature import rectangle_rule


def sinc(u):
    """``sin(u) / u`` with the removable singularity filled: ``sinc(0) = 1``."""
    return np.sinc(np.asarray(u) / np.pi)


@dataclass(frozen=True)
class ModeIndexSet:
    """Enumerated 2D Fourier modes for one aperture.

    The enumeration is row-major over ``n_x`` with ``n_y`` varying
    fastest, from ``(-N_x, -N_y)`` to ``(N_x, N_y)``; pruning removes
    entries whose sampling wavenumber exceeds the free-space wavenumber.
    """

    N_x: int
    N_y: int
    S_x: float
    S_y: float
    indices: np.ndarray  # (N, 2) integer mode indices
    pruned: bool

    @property
    def count(self):
        return self.indices.shape[0]

    @property
    def kx(self):
        """Sampling wavenumbers ``2 pi n_x / S_x`` [rad/m], shape (N,)."""
        return 2.0 * np.pi * self.indices[:, 0] / self.S_x

    @property
    def ky(self):
        return 2.0 * np.pi * self.indices[:, 1] / self.S_y

    def index_of(self, n):
        """Position of mode ``n = (n_x, n_y)`` in the enumeration."""
        hits = np.flatnonzero(
            (self.indices[:, 0] == n[0]) & (self.indices[:, 1] == n[1])
        )
        if hits.size != 1:
            raise DimensionMismatch(f"mode {tuple(n)} is not in the set")
        return int(hits[0])


def mode_set(S_x, S_y, wavelength, prune=False):
    """Build the truncated mode set for an aperture of extents ``S_x, S_y``.

    ``N_x = ceil(S_x / lambda)`` and likewise for y; with ``prune`` set,
    modes whose sampling wavenumber lies outside the propagating disc
    ``kx^2 + ky^2 <= k0^2`` are removed from the rectangular enumeration.
    """
    if not (S_x > 0.0 and S_y > 0.0):
        raise DimensionMismatch("aperture extents must be positive")
    # Tolerant ceiling: extents reconstructed from rotated corners carry
    # last-bit noise that must not bump the mode count.
    N_x = math.ceil(S_x / wavelength * (1.0 - 1e-12))
    N_y = math.ceil(S_y / wavelength * (1.0 - 1e-12))
    nx = np.arange(-N_x, N_x + 1)
    ny = np.arange(-N_y, N_y + 1)
    gx, gy = np.meshgrid(nx, ny, indexing="ij")
    indices = np.column_stack([gx.ravel(), gy.ravel()])
    if prune:
        k0 = 2.0 * np.pi / wavelength
        kx = 2.0 * np.pi * indices[:, 0] / S_x
        ky = 2.0 * np.pi * indices[:, 1] / S_y
        indices = indices[kx**2 + ky**2 <= k0**2 * (1.0 + 1e-12)]
    return ModeIndexSet(
        N_x=N_x, N_y=N_y, S_x=float(S_x), S_y=float(S_y),
        indices=indices, pruned=prune,
    )


def tx_basis_eval(n, s_aligned, S_x, S_y):
    """Evaluate transmit basis function ``n = (n_x, n_y)`` at aligned points.

    ``phi_n(s') = exp(j (k_xn s'_x + k_yn s'_y)) / sqrt(S_x S_y)``;
    coordinates are absolute aligned-plane coordinates [m].
    Broadcasts over points with trailing axis (x, y).
    """
    s = np.asarray(s_aligned, dtype=float)
    kx = 2.0 * np.pi * n[0] / S_x
    ky = 2.0 * np.pi * n[1] / S_y
    return np.exp(1j * (kx * s[..., 0] + ky * s[..., 1])) / math.sqrt(S_x * S_y)


def rx_basis_eval(m, r, R_x, R_y):
    """Receive-side counterpart of :func:`tx_basis_eval` on the x-y plane."""
    return tx_basis_eval(m, r, R_x, R_y)


def basis_matrix(modes, points_xy):
    """All basis functions at all points: shape (P, N) complex."""
    pts = np.asarray(points_xy, dtype=float)
    phase = pts[:, 0:1] * modes.kx[None, :] + pts[:, 1:2] * modes.ky[None, :]
    return np.exp(1j * phase) / math.sqrt(modes.S_x * modes.S_y)


def rx_basis_ft(m, kappa_xy, R_x, R_y):
    """Spatial Fourier transform of a receive basis function.

    ``Psi_m(kappa) = int psi_m(r) exp(-j kappa . r) dr`` over the
    origin-centered box, which factorizes into
    ``sqrt(R_x R_y) sinc((k_x - k_xm) R_x / 2) sinc((k_y - k_ym) R_y / 2)``.
    """
    kap = np.asarray(kappa_xy, dtype=float)
    dx = kap[..., 0] - 2.0 * np.pi * m[0] / R_x
    dy = kap[..., 1] - 2.0 * np.pi * m[1] / R_y
    return math.sqrt(R_x * R_y) * sinc(0.5 * dx * R_x) * sinc(0.5 * dy * R_y)


def rx_basis_ft_matrix(modes, kappa_xy):
    """:func:`rx_basis_ft` for all modes at once: shape (..., N) complex."""
    kap = np.asarray(kappa_xy, dtype=float)
    dx = kap[..., 0:1] - modes.kx[None, :]
    dy = kap[..., 1:2] - modes.ky[None, :]
    scale = math.sqrt(modes.S_x * modes.S_y)
    return scale * sinc(0.5 * dx * modes.S_x) * sinc(0.5 * dy * modes.S_y)


def tx_basis_ft(n, kappa_xy, aligned):
    """Spatial Fourier transform of a transmit basis function on a tilted plate.

    Evaluates ``int phi_n(U s) exp(-j (k_x s_x + k_y s_y)) ds`` over the
    physical aperture by substituting ``s = U^T s'``: the in-plane
    wavenumber maps to ``w = U[:, :2] kappa``, leaving a linear-phase
    integral over the aligned box, i.e. two sinc factors times constant
    phases from the box offsets and the aligned height.
    """
    kap = np.asarray(kappa_xy, dtype=float)
    w = kap @ aligned.U[:, :2].T if kap.ndim > 1 else aligned.U[:, :2] @ kap
    # w rows: (w_x, w_y, w_z) for each kappa
    w = np.asarray(w, dtype=float)
    kxn = 2.0 * np.pi * n[0] / aligned.S_x
    kyn = 2.0 * np.pi * n[1] / aligned.S_y
    dx = kxn - w[..., 0]
    dy = kyn - w[..., 1]
    cx, cy = aligned.box_center
    phase = np.exp(
        1j * (dx * cx + dy * cy - w[..., 2] * aligned.s_z0)
    )
    return (
        math.sqrt(aligned.S_x * aligned.S_y)
        * phase
        * sinc(0.5 * dx * aligned.S_x)
        * sinc(0.5 * dy * aligned.S_y)
    )


@dataclass(frozen=True)
class CurrentGrid:
    """Quadrature grid over an aligned aperture box for current sampling."""

    points: np.ndarray   # (P, 2) aligned coordinates [m]
    weights: np.ndarray  # (P,) quadrature weights [m^2]
    nodes_x: int
    nodes_y: int


def current_grid(modes, nodes_per_wavelength=12):
    """Tensor Gauss-Legendre grid resolving all retained modes."""
    lam_proxy_x = modes.S_x / max(1, modes.N_x)
    lam_proxy_y = modes.S_y / max(1, modes.N_y)
    lam = min(lam_proxy_x, lam_proxy_y)
    pts, w = rectangle_rule(0.0, modes.S_x, 0.0, modes.S_y, lam, nodes_per_wavelength)
    panels_x = max(1, math.ceil(modes.S_x / lam))
    panels_y = max(1, math.ceil(modes.S_y / lam))
    return CurrentGrid(
        points=pts,
        weights=w,
        nodes_x=panels_x * nodes_per_wavelength,
        nodes_y=panels_y * nodes_per_wavelength,
    )


def expand_current(j_samples, grid, modes):
    """Project a sampled current density onto the retained modes.

    Parameters
    ----------
    j_samples : ndarray, shape (P, 3), complex
        Current density values at ``grid.points`` (aligned coordinates).
    grid : CurrentGrid
        Must resolve the highest retained mode with at least 4 samples
        per shortest period.
    modes : ModeIndexSet

    Returns
    -------
    ndarray, shape (N, 3), complex
        Coefficients ``xi_n = int j phi_n^* ds``; for band-limited
        currents the reconstruction ``sum_n xi_n phi_n`` reproduces the
        samples and Parseval's identity ties ``sum ||xi_n||^2`` to the
        power integral.

    Raises
    ------
    GridTooCoarse, DimensionMismatch
    """
    j = np.asarray(j_samples)
    if j.shape != (grid.points.shape[0], 3):
        raise DimensionMismatch(
            f"expected samples of shape ({grid.points.shape[0]}, 3), got {j.shape}"
        )
    if grid.nodes_x < 4 * max(1, modes.N_x) or grid.nodes_y < 4 * max(1, modes.N_y):
        raise GridTooCoarse(
            "grid does not provide 4 samples per shortest retained period"
        )
    phi = basis_matrix(modes, grid.points)  # (P, N)
    return (phi.conj() * grid.weights[:, None]).T @ j


def reconstruct_current(xi, grid, modes):
    """Synthesize ``sum_n xi_n phi_n`` at the grid points: shape (P, 3)."""
    phi = basis_matrix(modes, grid.points)
    return phi @ np.asarray(xi)
