"""Free-space electromagnetic kernels.

Covers the radiating-field dyadic impulse response between a point
current and the electric field it excites, propagation wave vectors,
and the spatial autocorrelation of isotropic electromagnetic
interference.  Units are plain SI carried by convention (documented per
function), not by a runtime unit system.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureUnderresolved, TooClose
from .quadrature import angular_sphere_rule

#: Speed of light in free space [m/s].
SPEED_OF_LIGHT = 3.0e8
#: Free-space permeability [H/m].
MU0 = 4.0e-7 * np.pi
#: Free-space wave impedance [Ohm].
ETA0 = 120.0 * np.pi

#: Radiating-field validity floor in wavelengths for the dyadic kernel.
MIN_DISTANCE_WAVELENGTHS = 10.0


@dataclass(frozen=True)
class PhysicalConstants:
    """Frequency-derived constants for one scenario.

    Attributes
    ----------
    frequency : float
        Carrier frequency [Hz].
    """

    frequency: float

    @property
    def wavelength(self):
        """Free-space wavelength [m]."""
        return SPEED_OF_LIGHT / self.frequency

    @property
    def wavenumber(self):
        """Free-space wavenumber ``2 pi / wavelength`` [rad/m]."""
        return 2.0 * np.pi / self.wavelength

    @property
    def omega(self):
        """Angular frequency [rad/s]."""
        return 2.0 * np.pi * self.frequency


def green(r, s, k):
    """Radiating-field dyadic kernel between one source and one field point.

    ``G = -j eta exp(-j k0 d) / (2 lambda d) (I - p_hat p_hat^T)`` with
    ``p = r - s`` and ``d = ||p||``.  The result maps a current density
    [A/m^2] integrated over a surface to an electric field [V/m].

    Parameters
    ----------
    r, s : array_like, shape (3,)
        Field and source points [m].
    k : PhysicalConstants

    Returns
    -------
    ndarray, shape (3, 3), complex
        Symmetric matrix annihilating the propagation direction.

    Raises
    ------
    TooClose
        If ``||r - s||`` is below ``10 lambda`` (reactive near field).
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    p = r - s
    d = np.linalg.norm(p)
    if d < MIN_DISTANCE_WAVELENGTHS * k.wavelength:
        raise TooClose(
            f"separation {d:.4g} m is below the radiating-field floor "
            f"{MIN_DISTANCE_WAVELENGTHS * k.wavelength:.4g} m"
        )
    phat = p / d
    amp = -1j * ETA0 * np.exp(-1j * k.wavenumber * d) / (2.0 * k.wavelength * d)
    return amp * (np.eye(3) - np.outer(phat, phat))


def green_pairs(r_points, s_points, k, check_distance=True):
    """Dyadic kernel for all pairs of field and source points.

    Parameters
    ----------
    r_points : ndarray, shape (P, 3)
    s_points : ndarray, shape (Q, 3)
    k : PhysicalConstants
    check_distance : bool
        Verify the radiating-field floor over all pairs.

    Returns
    -------
    ndarray, shape (P, Q, 3, 3), complex
    """
    r_points = np.asarray(r_points, dtype=float)
    s_points = np.asarray(s_points, dtype=float)
    p = r_points[:, None, :] - s_points[None, :, :]
    d = np.linalg.norm(p, axis=-1)
    if check_distance and d.min() < MIN_DISTANCE_WAVELENGTHS * k.wavelength:
        raise TooClose(
            f"minimum pair separation {d.min():.4g} m is below "
            f"{MIN_DISTANCE_WAVELENGTHS * k.wavelength:.4g} m"
        )
    phat = p / d[..., None]
    proj = np.eye(3) - phat[..., :, None] * phat[..., None, :]
    amp = -1j * ETA0 * np.exp(-1j * k.wavenumber * d) / (2.0 * k.wavelength * d)
    return amp[..., None, None] * proj


def wave_vector(theta, phi, k):
    """Propagation wave vector for arrival direction ``(theta, phi)``.

    ``kappa = (2 pi / lambda) [sin t cos p, sin t sin p, cos t]``.
    Broadcasts over array-valued angles; the trailing axis holds xyz.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    out = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
    return k.wavenumber * out


@dataclass(frozen=True)
class AngularQuadSpec:
    """Angular quadrature sizing for interference integrals.

    ``n_theta`` by ``n_phi`` nodes; when ``scale_with_separation`` is
    set, node counts grow linearly with the separation in wavelengths so
    the oscillation ``exp(j kappa . dr)`` stays resolved.  A rule that
    ends up below ``min_nodes_per_wavelength`` nodes per wavelength of
    separation is rejected.
    """

    n_theta: int = 64
    n_phi: int = 128
    scale_with_separation: bool = True
    min_nodes_per_wavelength: int = 8

    def node_counts(self, separation_wavelengths=0.0):
        """Resolved node counts for a given separation ``||dr|| / lambda``."""
        factor = max(1.0, float(separation_wavelengths))
        if self.scale_with_separation:
            n_theta = max(self.n_theta, math.ceil(self.n_theta * factor / 4) * 4)
            n_phi = max(self.n_phi, math.ceil(self.n_phi * factor / 4) * 4)
        else:
            n_theta, n_phi = self.n_theta, self.n_phi
        required = math.ceil(self.min_nodes_per_wavelength * factor)
        if n_theta < required or n_phi < required:
            raise QuadratureUnderresolved(
                f"angular rule {n_theta}x{n_phi} has fewer than the required "
                f"{required} nodes for a separation of "
                f"{separation_wavelengths:.3g} wavelengths"
            )
        return n_theta, n_phi


def _isotropic_sphere_rule(quad, separation_wavelengths):
    """Nodes and weights integrating against ``f = sin(theta)/(4 pi)``."""
    n_theta, n_phi = quad.node_counts(separation_wavelengths)
    theta, phi, w = angular_sphere_rule(n_theta, n_phi)
    return theta, phi, w / (4.0 * np.pi)


def emi_autocorrelation(dr, sigma_emi2, k, angular_quad=None, angular_density=None):
    """Spatial autocorrelation of the isotropic interference field.

    ``rho(dr) = sigma_emi2 * int f(t,p) (I - khat khat^T) exp(j kappa.dr) dt dp``
    with the isotropic density ``f = sin(theta) / (4 pi)`` unless a
    custom ``angular_density(theta, phi)`` is supplied (evaluated against
    the ``dtheta dphi`` measure).

    Parameters
    ----------
    dr : array_like, shape (3,)
        Spatial lag [m].
    sigma_emi2 : float
        Interference power angular density [V^2/m^2].
    k : PhysicalConstants
    angular_quad : AngularQuadSpec, optional

    Returns
    -------
    ndarray, shape (3, 3), complex
        Satisfies ``rho(-dr) = rho(dr)^H``; ``rho(0)`` is
        ``(2/3) sigma_emi2 I``.
    """
    dr = np.asarray(dr, dtype=float)
    return emi_autocorrelation_batch(
        dr[None, :], sigma_emi2, k, angular_quad, angular_density
    )[0]


def emi_autocorrelation_batch(
    drs, sigma_emi2, k, angular_quad=None, angular_density=None
):
    """Vectorized :func:`emi_autocorrelation` over a batch of lags.

    Parameters
    ----------
    drs : ndarray, shape (B, 3)

    Returns
    -------
    ndarray, shape (B, 3, 3), complex
    """
    drs = np.asarray(drs, dtype=float)
    if angular_quad is None:
        angular_quad = AngularQuadSpec()
    max_sep = float(np.linalg.norm(drs, axis=-1).max(initial=0.0)) / k.wavelength
    theta, phi, w = _isotropic_sphere_rule(angular_quad, max_sep)
    if angular_density is not None:
        # Custom densities are integrated against dtheta dphi directly; the
        # cos(theta) substitution contributes a 1/sin(theta) factor.
        w = w * (4.0 * np.pi) * angular_density(theta, phi) / np.sin(theta)
    kap = wave_vector(theta, phi, k)
    khat = kap / k.wavenumber
    proj = np.eye(3) - khat[:, :, None] * khat[:, None, :]
    out = np.empty((drs.shape[0], 3, 3), dtype=complex)
    # Chunk the (nodes x batch) phase matrix to bound memory.
    chunk = max(1, int(4e6) // max(1, kap.shape[0]))
    wproj = w[:, None, None] * proj
    for lo in range(0, drs.shape[0], chunk):
        hi = min(lo + chunk, drs.shape[0])
        phase = np.exp(1j * (drs[lo:hi] @ kap.T))  # (b, nodes)
        out[lo:hi] = np.tensordot(phase, wproj, axes=(1, 0))
    return sigma_emi2 * out
