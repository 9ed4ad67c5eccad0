"""Real, fully normalised spherical harmonics and their surface gradients.

Convention: no Condon-Shortley phase, and

    Y_n^0  = Q_n^0(theta)
    Y_n^k  = sqrt(2) Q_n^k(theta) cos(k phi)     (k > 0)
    Y_n^-k = sqrt(2) Q_n^k(theta) sin(k phi)     (k > 0)

where ``Q_n^k`` is the associated Legendre function scaled so that the
integral of ``Y_n^k * Y_n'^k'`` over the unit sphere is a Kronecker delta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError

N_MAX_SUPPORTED = 64
_POLE_TOL = 1e-12


@dataclass(frozen=True)
class AngularIndex:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 0 or abs(self.k) > self.n:
            raise DomainError(f"invalid harmonic index (n={self.n}, k={self.k})")
        if self.n > N_MAX_SUPPORTED:
            raise DomainError(f"degree {self.n} exceeds supported {N_MAX_SUPPORTED}")


class TangentVector(NamedTuple):
    """Components in the orthonormal (e_theta, e_phi) frame."""

    e_theta: float
    e_phi: float


def flat_index(n: int, k: int) -> int:
    """Position of (n, k) in arrays ordered n = 0, 1, ...; k = -n .. n."""
    return n * n + n + k


def _legendre(n_max: int, ct: np.ndarray, st: np.ndarray):
    """Normalised Q_n^m, Q_n^m / sin(theta) (m >= 1) and dQ_n^m/dtheta.

    Arrays are indexed ``[n, m, point]``.  Dividing by sin(theta) is done
    inside the recurrence so values stay finite at the poles.
    """
    npts = ct.size
    Q = np.zeros((n_max + 1, n_max + 1, npts))
    U = np.zeros((n_max + 1, n_max + 1, npts))
    dQ = np.zeros((n_max + 1, n_max + 1, npts))
    Q[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(0, n_max + 1):
        if m >= 1:
            fac = np.sqrt((2 * m + 1) / (2.0 * m))
            U[m, m] = fac * Q[m - 1, m - 1]
            Q[m, m] = st * U[m, m]
        if m + 1 <= n_max:
            a = np.sqrt(2 * m + 3.0)
            Q[m + 1, m] = a * ct * Q[m, m]
            U[m + 1, m] = a * ct * U[m, m]
        for n in range(m + 2, n_max + 1):
            a = np.sqrt((4.0 * n * n - 1) / (n * n - m * m))
            b = np.sqrt(((n - 1.0) ** 2 - m * m) / (4.0 * (n - 1) ** 2 - 1))
            Q[n, m] = a * (ct * Q[n - 1, m] - b * Q[n - 2, m])
            U[n, m] = a * (ct * U[n - 1, m] - b * U[n - 2, m])
    for n in range(1, n_max + 1):
        dQ[n, 0] = -np.sqrt(n * (n + 1.0)) * Q[n, 1]
        for m in range(1, n + 1):
            up = np.sqrt((n - m) * (n + m + 1.0)) * Q[n, m + 1] if m < n else 0.0
            dQ[n, m] = 0.5 * (np.sqrt((n + m) * (n - m + 1.0)) * Q[n, m - 1] - up)
    return Q, U, dQ


class HarmonicTable(NamedTuple):
    """Real harmonics and surface-gradient components at a set of directions.

    Every array has shape ``((n_max + 1)**2, n_points)`` with rows ordered by
    :func:`flat_index`.
    """

    Y: np.ndarray
    grad_theta: np.ndarray
    grad_phi: np.ndarray


def harmonic_table(n_max: int, cos_theta, sin_theta, cos_phi, sin_phi) -> HarmonicTable:
    """Evaluate all harmonics with degree <= n_max, including at the poles.

    ``grad_phi`` is ``(1/sin theta) dY/dphi``; at a pole it takes the limit
    along the meridian given by ``phi``.
    """
    ct = np.asarray(cos_theta, dtype=float).ravel()
    st = np.asarray(sin_theta, dtype=float).ravel()
    cp = np.asarray(cos_phi, dtype=float).ravel()
    sp = np.asarray(sin_phi, dtype=float).ravel()
    Q, U, dQ = _legendre(n_max, ct, st)
    size = (n_max + 1) ** 2
    Y = np.empty((size, ct.size))
    gt = np.empty_like(Y)
    gp = np.empty_like(Y)
    # cos(k phi), sin(k phi) by complex powers
    e1 = cp + 1j * sp
    ek = np.ones_like(e1)
    trig = [ek]
    for _ in range(n_max):
        ek = ek * e1
        trig.append(ek)
    r2 = np.sqrt(2.0)
    for n in range(n_max + 1):
        i0 = flat_index(n, 0)
        Y[i0] = Q[n, 0]
        gt[i0] = dQ[n, 0]
        gp[i0] = 0.0
        for k in range(1, n + 1):
            c, s = trig[k].real, trig[k].imag
            ip, im = flat_index(n, k), flat_index(n, -k)
            Y[ip] = r2 * Q[n, k] * c
            Y[im] = r2 * Q[n, k] * s
            gt[ip] = r2 * dQ[n, k] * c
            gt[im] = r2 * dQ[n, k] * s
            gp[ip] = -r2 * k * U[n, k] * s
            gp[im] = r2 * k * U[n, k] * c
    return HarmonicTable(Y, gt, gp)


def _angles(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any((theta < 0) | (theta > np.pi)):
        raise DomainError("theta must lie in [0, pi]")
    return theta, phi


def real_sph_harm(idx: AngularIndex, theta, phi):
    """Real orthonormal harmonic ``Y_n^k(theta, phi)``; scalar or array input."""
    theta, phi = _angles(theta, phi)
    shape = np.broadcast(theta, phi).shape
    th, ph = np.broadcast_arrays(theta, phi)
    tab = harmonic_table(idx.n, np.cos(th), np.sin(th), np.cos(ph), np.sin(ph))
    out = tab.Y[flat_index(idx.n, idx.k)].reshape(shape)
    return float(out) if out.ndim == 0 else out


def sph_harm_surface_grad(idx: AngularIndex, theta, phi):
    """``(dY/dtheta, (1/sin theta) dY/dphi)``; rejects points at the poles."""
    theta, phi = _angles(theta, phi)
    st = np.sin(theta)
    if np.any(np.abs(st) < _POLE_TOL):
        raise DomainError("surface gradient requested at a pole")
    shape = np.broadcast(theta, phi).shape
    th, ph = np.broadcast_arrays(theta, phi)
    tab = harmonic_table(idx.n, np.cos(th), np.sin(th), np.cos(ph), np.sin(ph))
    i = flat_index(idx.n, idx.k)
    gt = tab.grad_theta[i].reshape(shape)
    gp = tab.grad_phi[i].reshape(shape)
    if gt.ndim == 0:
        return TangentVector(float(gt), float(gp))
    return TangentVector(gt, gp)
