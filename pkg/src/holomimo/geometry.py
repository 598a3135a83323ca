"""Aperture geometry, rigid alignment of tilted planes, scenario checks.

A planar rectangular aperture is described by its center, side lengths
and an intrinsic yaw-pitch-roll orientation of its local frame.  Tilted
user apertures are mapped by a rigid rotation ``U`` onto a plane
parallel to the receiver's x-y plane so that currents can be expanded
on an axis-aligned rectangle; physical points are recovered as
``s = U^T s'``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadNoiseDensity,
    DegenerateProjection,
    NonPositiveAperture,
    TooClose,
    ValidationError,
)
from .fields import MIN_DISTANCE_WAVELENGTHS, PhysicalConstants

_PERPENDICULAR_TOL = 1e-9


def build_rotation(yaw, pitch, roll):
    """Rotation matrix for intrinsic z-y-x yaw, pitch, roll angles [rad].

    Returns a proper rotation (``det = +1``) mapping local-frame
    coordinates to world coordinates: ``R = Rz(yaw) Ry(pitch) Rx(roll)``.
    """
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    return rz @ ry @ rx


@dataclass(frozen=True)
class ApertureSpec:
    """Rectangular planar aperture in 3D.

    Attributes
    ----------
    center : ndarray, shape (3,)
        Center position [m].
    length_v, length_h : float
        Side lengths [m] along the local y (vertical) and local x
        (horizontal) axes of the plate frame.
    yaw, pitch, roll : float
        Intrinsic z-y-x orientation of the plate frame [rad].  The plate
        normal is the rotated local z axis.
    """

    center: np.ndarray
    length_v: float
    length_h: float
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not (self.length_v > 0.0 and self.length_h > 0.0):
            raise NonPositiveAperture(
                f"aperture sides must be positive, got "
                f"{self.length_v} x {self.length_h}"
            )
        for name in ("yaw", "pitch", "roll"):
            if not math.isfinite(getattr(self, name)):
                raise NonPositiveAperture(f"orientation angle {name} is not finite")

    @property
    def rotation(self):
        """Plate-frame to world rotation matrix."""
        return build_rotation(self.yaw, self.pitch, self.roll)

    @property
    def normal(self):
        """Unit plate normal in world coordinates."""
        return self.rotation[:, 2]

    def corners(self):
        """World coordinates of the four corners, shape (4, 3)."""
        rot = self.rotation
        h = 0.5 * self.length_h * rot[:, 0]
        v = 0.5 * self.length_v * rot[:, 1]
        signs = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
        return self.center[None, :] + signs[:, :1] * h[None, :] + signs[:, 1:] * v[None, :]

    def point(self, u, v):
        """World point at in-plane offsets ``u`` (horizontal), ``v`` (vertical) [m]."""
        rot = self.rotation
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return (
            self.center
            + u[..., None] * rot[:, 0]
            + v[..., None] * rot[:, 1]
        )

    @property
    def diagonal(self):
        return math.hypot(self.length_v, self.length_h)


@dataclass(frozen=True)
class AlignedAperture:
    """Axis-aligned description of a (possibly tilted) aperture.

    ``U`` is a proper rotation taking the plate plane to a plane
    parallel to x-y; the mapped aperture is the box
    ``[s_x0, s_x0 + S_x] x [s_y0, s_y0 + S_y]`` at constant height
    ``s_z0``.  ``det_ju`` is the Jacobian determinant of the change of
    variables (always of unit modulus for a rigid map).
    """

    U: np.ndarray
    S_x: float
    S_y: float
    s_x0: float
    s_y0: float
    s_z0: float
    det_ju: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "U", np.asarray(self.U, dtype=float))

    def to_world(self, s_aligned_xy):
        """Map aligned in-plane points (..., 2) back to world points (..., 3)."""
        pts = np.asarray(s_aligned_xy, dtype=float)
        full = np.concatenate(
            [pts, np.full(pts.shape[:-1] + (1,), self.s_z0)], axis=-1
        )
        return full @ self.U  # (U^T s')^T = s'^T U

    @property
    def box_center(self):
        """Center of the aligned box, shape (2,)."""
        return np.array(
            [self.s_x0 + 0.5 * self.S_x, self.s_y0 + 0.5 * self.S_y]
        )


def _tilt_rotation(normal):
    """Minimal rotation taking ``normal`` to ``+z`` (Rodrigues form)."""
    n = normal / np.linalg.norm(normal)
    z = np.array([0.0, 0.0, 1.0])
    c = float(n @ z)
    if c > 1.0 - 1e-15:
        return np.eye(3)
    if c < -1.0 + 1e-15:
        # Half turn about x maps -z to +z.
        return np.diag([1.0, -1.0, -1.0])
    axis = np.cross(n, z)
    s = np.linalg.norm(axis)
    axis = axis / s
    kmat = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + s * kmat + (1.0 - c) * (kmat @ kmat)


def align_aperture(spec, perpendicular_tol=_PERPENDICULAR_TOL):
    """Rigidly align an aperture with a plane parallel to x-y.

    The rotation ``U`` is composed of the minimal rotation taking the
    plate normal to ``+z`` followed by an in-plane rotation snapping the
    rotated horizontal axis onto the nearest coordinate axis, flipped if
    needed so it has a non-negative x component.  The aligned aperture
    is then an exact axis-aligned box whose extents ``S_x, S_y`` equal
    the plate sides (possibly swapped), and corners round-trip through
    ``U^T`` exactly up to floating point.

    Raises
    ------
    DegenerateProjection
        If the plate is numerically perpendicular to the x-y plane, or a
        box extent collapses.
    """
    normal = spec.normal
    if abs(normal[2]) < perpendicular_tol:
        raise DegenerateProjection(
            "user plane is perpendicular to the receiver plane; its x-y "
            "projection collapses"
        )
    tilt = _tilt_rotation(normal)
    h_rot = tilt @ spec.rotation[:, 0]
    gamma = math.atan2(h_rot[1], h_rot[0])
    snap = gamma - round(gamma / (0.5 * math.pi)) * 0.5 * math.pi
    cz, sz = math.cos(-snap), math.sin(-snap)
    inplane = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])
    U = inplane @ tilt
    h_axis = U @ spec.rotation[:, 0]
    if h_axis[0] < -0.5:
        # Half turn in plane so the horizontal axis points along +x.
        U = np.diag([-1.0, -1.0, 1.0]) @ U
    corners = spec.corners() @ U.T
    s_z = corners[:, 2]
    if np.ptp(s_z) > 1e-9 * max(1.0, abs(s_z).max()):
        raise DegenerateProjection("aligned corners are not coplanar in z")
    lo = corners[:, :2].min(axis=0)
    hi = corners[:, :2].max(axis=0)
    S_x, S_y = hi - lo
    if min(S_x, S_y) <= 0.0:
        raise DegenerateProjection("aligned aperture extent collapsed")
    return AlignedAperture(
        U=U,
        S_x=float(S_x),
        S_y=float(S_y),
        s_x0=float(lo[0]),
        s_y0=float(lo[1]),
        s_z0=float(s_z.mean()),
        det_ju=float(np.linalg.det(U)),
    )


@dataclass(frozen=True)
class Scenario:
    """One uplink layout: receiver, users with power budgets, noise densities.

    Attributes
    ----------
    frequency : float
        Carrier [Hz].
    rx : ApertureSpec
        Receiving aperture, expected centered at the origin in the x-y
        plane.
    users : tuple of (ApertureSpec, float)
        User apertures with per-user power budgets ``P_max`` in the
        squared-current units of the expansion coefficients.
    sigma_emi2 : float
        Interference power angular density [V^2/m^2].
    n0_half : float
        Hardware noise density [V^2/m^2].
    """

    frequency: float
    rx: ApertureSpec
    users: tuple
    sigma_emi2: float
    n0_half: float

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))

    @property
    def constants(self):
        return PhysicalConstants(self.frequency)


def min_distance_bound(a, b):
    """Conservative lower bound on the distance between two apertures [m]."""
    gap = np.linalg.norm(a.center - b.center)
    return gap - 0.5 * (a.diagonal + b.diagonal)


def validate_scenario(scn):
    """Check all scenario invariants, raising a named error per violation.

    Raises
    ------
    NonPositiveAperture, BadNoiseDensity, TooClose, DegenerateProjection
    """
    if len(scn.users) < 1:
        raise NonPositiveAperture("scenario needs at least one user")
    if scn.sigma_emi2 < 0.0:
        raise BadNoiseDensity(f"sigma_emi2 must be >= 0, got {scn.sigma_emi2}")
    if not scn.n0_half > 0.0:
        raise BadNoiseDensity(f"n0_half must be > 0, got {scn.n0_half}")
    k = scn.constants
    floor = MIN_DISTANCE_WAVELENGTHS * k.wavelength
    for idx, (user, p_max) in enumerate(scn.users):
        if p_max < 0.0:
            raise ValidationError(f"user {idx} power budget is negative")
        z = user.corners()[:, 2]
        if not (np.all(z > 0.0) or np.all(z < 0.0)):
            raise TooClose(
                f"user {idx} aperture crosses the receiver plane z = 0"
            )
        if min_distance_bound(user, scn.rx) < floor:
            raise TooClose(
                f"user {idx} is within {floor:.4g} m of the receiver "
                "(radiating-field floor)"
            )
        align_aperture(user)  # raises DegenerateProjection when degenerate
