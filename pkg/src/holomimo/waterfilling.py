"""Sum spectral efficiency and multi-user covariance optimization.

The finite-dimensional sum rate is the log-det ratio

    R_sum = log2 det(R_z + sum_k H_k Q_k H_k^H) - log2 det(R_z)

maximized over per-user transmit covariances ``Q_k`` under trace
budgets.  The solver cycles users Gauss-Seidel style: each step treats
the other users' signals as extra noise, whitens, and water-fills the
resulting singular channels.  Each step can only raise the objective,
so the iteration trace is non-decreasing and converges.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPD, NotPSD, SingularNoise, ValidationError

#: Singular values below this fraction of the largest are dead channels.
RANK_FLOOR = 1e-12


@dataclass(frozen=True)
class UserCovariance:
    """Aggregate transmit covariance of one user with its power budget."""

    q: np.ndarray
    p_max: float

    def __post_init__(self):
        q = np.asarray(self.q)
        object.__setattr__(self, "q", q)
        scale = max(float(np.linalg.norm(q)), 1e-300)
        if np.linalg.norm(q - q.conj().T) > 1e-10 * scale:
            raise NotPSD("transmit covariance is not Hermitian")
        tr = float(np.trace(q).real)
        eigmin = float(np.linalg.eigvalsh(q).min()) if q.shape[0] else 0.0
        if eigmin < -1e-10 * max(tr, 1.0):
            raise NotPSD(f"transmit covariance has eigenvalue {eigmin:.3e}")
        if tr > self.p_max * (1.0 + 1e-9) + 1e-15:
            raise ValidationError(
                f"covariance trace {tr:.6g} exceeds budget {self.p_max:.6g}"
            )


@dataclass
class AllocationResult:
    """Outcome of the iterative water-filling run."""

    covariances: list
    sum_se: float
    water_levels: list
    iterations: int
    trace_per_iteration: list = field(default_factory=list)
    converged: bool = False


def _as_matrix(obj):
    return obj.matrix if hasattr(obj, "matrix") else np.asarray(obj)


def sum_rate(couplings, covariances, noise):
    """Sum spectral efficiency [bits/s/Hz] for given transmit covariances.

    Parameters
    ----------
    couplings : list
        Per-user coupling matrices (``CouplingMatrix`` or ndarray).
    covariances : list
        Per-user Hermitian PSD matrices (``UserCovariance`` or ndarray).
    noise : NoiseCovariance or ndarray
        Positive-definite noise covariance.

    Returns
    -------
    float
        Non-negative; computed through a Cholesky factor of the noise so
        the log-det difference stays stable.

    Raises
    ------
    SingularNoise, DimensionMismatch
    """
    rz = _as_matrix(noise)
    try:
        chol = np.linalg.cholesky(rz)
    except np.linalg.LinAlgError as exc:
        raise SingularNoise("noise covariance is not positive definite") from exc
    acc = np.zeros_like(rz)
    for h, q in zip(couplings, covariances):
        h = _as_matrix(h)
        qm = q.q if isinstance(q, UserCovariance) else np.asarray(q)
        if h.shape[0] != rz.shape[0] or h.shape[1] != qm.shape[0]:
            raise DimensionMismatch(
                f"coupling {h.shape} incompatible with noise {rz.shape} "
                f"and covariance {qm.shape}"
            )
        acc = acc + h @ qm @ h.conj().T
    white = scipy.linalg.solve_triangular(chol, acc, lower=True)
    white = scipy.linalg.solve_triangular(
        chol, white.conj().T, lower=True
    ).conj().T
    eig = np.linalg.eigvalsh(0.5 * (white + white.conj().T))
    return float(np.log2(np.maximum(eig, 0.0) + 1.0).sum())


def whiten_and_decompose(b, h):
    """Whiten a channel by the equivalent noise and decompose it.

    ``B = U L U^H``; the whitened channel ``L^{-1/2} U^H H`` is factored
    by SVD into ``F S T^H``.

    Returns
    -------
    sigmas : ndarray
        Singular values, descending.
    t : ndarray
        Right singular vectors (columns orthonormal).

    Raises
    ------
    NotPD
        If ``B`` is not positive definite.
    """
    b = _as_matrix(b)
    h = _as_matrix(h)
    lam, u = np.linalg.eigh(0.5 * (b + b.conj().T))
    if lam.min() <= 0.0:
        raise NotPD(f"equivalent noise has eigenvalue {lam.min():.3e}")
    white = (u / np.sqrt(lam)).conj().T @ h
    _, sigmas, vh = np.linalg.svd(white, full_matrices=False)
    return sigmas, vh.conj().T


def water_fill(sigmas, p_total):
    """Water-filling power allocation over singular channels.

    Solves ``max sum log2(1 + s_i^2 q_i)`` subject to ``sum q_i <= P``
    with the exact breakpoint scan: the water level on the active set
    ``{1..r}`` is ``mu = (P + sum_i 1/s_i^2) / r`` and the optimal ``r``
    is the largest for which ``mu`` clears ``1/s_r^2``.

    Parameters
    ----------
    sigmas : array_like
        Non-negative singular values, descending.
    p_total : float
        Power budget, ``>= 0``.

    Returns
    -------
    q : ndarray
        Allocations ``(mu - 1/s_i^2)^+``, summing to ``P`` when any
        channel is alive.
    mu : float
        Water level (0 when no channel is alive).
    """
    sigmas = np.asarray(sigmas, dtype=float)
    if p_total < 0.0:
        raise ValidationError(f"power budget must be >= 0, got {p_total}")
    q = np.zeros_like(sigmas)
    alive = sigmas > RANK_FLOOR * (sigmas.max() if sigmas.size else 0.0)
    n_alive = int(alive.sum())
    if n_alive == 0:
        return q, 0.0
    inv = 1.0 / sigmas[alive] ** 2
    csum = np.cumsum(inv)
    r_values = np.arange(1, n_alive + 1)
    mu_candidates = (p_total + csum) / r_values
    feasible = mu_candidates > inv
    if not feasible.any():
        # Zero budget: every channel sits exactly at its threshold.
        return q, float(inv[0])
    r = int(np.max(r_values[feasible]))
    mu = float((p_total + csum[r - 1]) / r)
    q_alive = np.maximum(mu - inv, 0.0)
    q[alive] = q_alive
    return q, mu


def _equivalent_noise(rz, couplings, q_list, skip):
    b = np.array(rz, dtype=complex)
    for idx, (h, q) in enumerate(zip(couplings, q_list)):
        if idx == skip or q is None:
            continue
        b += h @ q @ h.conj().T
    return b


def iterative_water_filling(couplings, noise, p_max, eps=1e-6, max_iter=100):
    """Gauss-Seidel water-filling over users until the sum rate settles.

    Every user in turn forms its equivalent noise (receiver noise plus
    every other user's transmit covariance pushed through its coupling),
    whitens, water-fills, and rebuilds its covariance.  Stops when the
    sum rate changes by at most ``eps`` between outer iterations, or at
    ``max_iter`` with ``converged = False`` and the best result so far.

    Parameters
    ----------
    couplings : list
        Per-user coupling matrices.
    noise : NoiseCovariance or ndarray
    p_max : list of float
        Per-user power budgets.
    eps : float
        Absolute sum-rate tolerance [bits/s/Hz].
    max_iter : int
        Outer iteration ceiling.

    Returns
    -------
    AllocationResult
    """
    if eps <= 0.0:
        raise ValidationError("eps must be positive")
    rz = _as_matrix(noise)
    hs = [_as_matrix(h) for h in couplings]
    if len(hs) != len(p_max):
        raise DimensionMismatch("one power budget per coupling matrix required")
    q_list = [np.zeros((h.shape[1], h.shape[1]), dtype=complex) for h in hs]
    mu_list = [0.0] * len(hs)
    trace = []
    prev = 0.0
    converged = False
    iterations = 0
    for _ in range(max_iter):
        for idx, h in enumerate(hs):
            b = _equivalent_noise(rz, hs, q_list, skip=idx)
            sigmas, t = whiten_and_decompose(b, h)
            q_diag, mu = water_fill(sigmas, p_max[idx])
            q_list[idx] = (t * q_diag[None, :]) @ t.conj().T
            mu_list[idx] = mu
        current = sum_rate(hs, q_list, rz)
        iterations += 1
        trace.append(current)
        if iterations > 1 and abs(current - prev) <= eps:
            converged = True
            prev = current
            break
        prev = current
    covs = [
        UserCovariance(0.5 * (q + q.conj().T), p)
        for q, p in zip(q_list, p_max)
    ]
    return AllocationResult(
        covariances=covs,
        sum_se=prev,
        water_levels=mu_list,
        iterations=iterations,
        trace_per_iteration=trace,
        converged=converged,
    )


def equal_power_allocation(couplings, p_max):
    """Spread each user's budget uniformly over its transmit dimensions."""
    covs = []
    for h, p in zip(couplings, p_max):
        n = _as_matrix(h).shape[1]
        covs.append(UserCovariance((p / n) * np.eye(n, dtype=complex), p))
    return covs
