"""Colored-noise covariance of mode-projected interference.

The receive modes see the sum of isotropic electromagnetic interference
and white hardware noise.  Projecting the interference field onto the
mode family and exchanging the angular and spatial integrals collapses
the 4D spatial covariance integral to a single shared angular
quadrature against closed-form sinc spectra:

    R_emi[j, i] = int f(t,p) (I - khat khat^T) Psi_j^*(k_xy) Psi_i(k_xy) dt dp

Hardware noise contributes ``N0/2`` per mode exactly (orthonormal
projection of a white process).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPSD, SingularNoise
from .fields import AngularQuadSpec, wave_vector
from .modes import rx_basis_ft_matrix
from .quadrature import angular_sphere_rule


@dataclass(frozen=True)
class NoiseCovariance:
    """Hermitian positive-definite covariance of the projected noise.

    ``matrix = sigma_emi2 * R_emi + n0_half * I``.
    """

    matrix: np.ndarray
    emi_part: np.ndarray
    sigma_emi2: float
    n0_half: float

    @property
    def dim(self):
        return self.matrix.shape[0]


def _angular_nodes_for_extent(angular_quad, extent_wavelengths):
    """Angular rule sized for sinc spectra of an aperture this large."""
    if angular_quad is None:
        angular_quad = AngularQuadSpec()
    # The sinc spectra oscillate at half the aperture extent, so the
    # single-point separation rule sized at diag/2 resolves them.
    n_theta, n_phi = angular_quad.node_counts(0.5 * extent_wavelengths)
    return angular_sphere_rule(n_theta, n_phi)


def emi_covariance(rx_modes, k, angular_quad=None, angular_density=None, cache=None):
    """Interference covariance of the receive modes (unit power density).

    Parameters
    ----------
    rx_modes : ModeIndexSet
        Receive mode enumeration; carries the receiver extents.
    k : PhysicalConstants
    angular_quad : AngularQuadSpec, optional
    angular_density : callable, optional
        Custom angular power density ``f(theta, phi)`` against the
        ``dtheta dphi`` measure; defaults to the isotropic
        ``sin(theta) / (4 pi)``.
    cache : MatrixCache, optional

    Returns
    -------
    ndarray, shape (3M, 3M), complex
        Hermitian positive semidefinite; scaled by ``sigma_emi2`` in
        :func:`noise_covariance`.
    """
    key = None
    if cache is not None:
        key = cache.key(
            "emi",
            k.frequency,
            rx_modes.S_x,
            rx_modes.S_y,
            rx_modes.indices,
            angular_quad.n_theta if angular_quad else 0,
            angular_quad.n_phi if angular_quad else 0,
        )
        hit = cache.load(key)
        if hit is not None:
            return hit
    diag_wl = math.hypot(rx_modes.S_x, rx_modes.S_y) / k.wavelength
    theta, phi, w = _angular_nodes_for_extent(angular_quad, diag_wl)
    if angular_density is None:
        w = w / (4.0 * np.pi)
    else:
        w = w * angular_density(theta, phi) / np.sin(theta)
    kap = wave_vector(theta, phi, k)
    khat = kap / k.wavenumber
    proj = np.eye(3) - khat[:, :, None] * khat[:, None, :]
    spectra = rx_basis_ft_matrix(rx_modes, kap[:, :2])  # (nodes, M), real
    M = rx_modes.count
    out = np.empty((M, M, 3, 3), dtype=complex)
    for ax in range(3):
        for bx in range(3):
            weighted = spectra * (w * proj[:, ax, bx])[:, None]
            out[:, :, ax, bx] = spectra.T @ weighted
    full = out.transpose(0, 2, 1, 3).reshape(3 * M, 3 * M)
    full = 0.5 * (full + full.conj().T)
    if cache is not None:
        cache.store(key, full)
    return full


def noise_covariance(emi_part, sigma_emi2, n0_half, psd_tol=1e-10):
    """Combine interference and hardware noise into the full covariance.

    Parameters
    ----------
    emi_part : ndarray, shape (3M, 3M)
        Hermitian PSD interference covariance (unit density).
    sigma_emi2, n0_half : float
        Interference and hardware power densities [V^2/m^2].

    Returns
    -------
    NoiseCovariance

    Raises
    ------
    NotPSD
        If ``emi_part`` fails the PSD tolerance.
    SingularNoise
        If the combined matrix is not positive definite.
    """
    emi_part = np.asarray(emi_part)
    herm_defect = np.linalg.norm(emi_part - emi_part.conj().T)
    scale = max(np.linalg.norm(emi_part), 1e-300)
    if herm_defect > 1e-10 * scale:
        raise NotPSD("interference covariance is not Hermitian")
    eigmin = float(np.linalg.eigvalsh(emi_part).min())
    if eigmin < -psd_tol * max(1.0, float(np.trace(emi_part).real)):
        raise NotPSD(f"interference covariance has eigenvalue {eigmin:.3e}")
    matrix = sigma_emi2 * emi_part + n0_half * np.eye(emi_part.shape[0])
    if not n0_half > 0.0:
        raise SingularNoise("hardware noise density must be positive")
    return NoiseCovariance(
        matrix=matrix,
        emi_part=emi_part,
        sigma_emi2=float(sigma_emi2),
        n0_half=float(n0_half),
    )
