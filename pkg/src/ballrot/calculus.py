"""Central finite-difference differential operators on point evaluators.

An evaluator is any callable mapping an array of Cartesian points ``(P, 3)``
to field values ``(P, 3)``, or to a batch of fields ``(B, P, 3)``; leading
batch axes are carried through every operator.  All operators are second-order accurate and take
a step ``h``; every stencil point must stay inside the domain of the field.
The independent check on the analytic eigenfields and solver output.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .exceptions import DomainError

PointEvaluator = Callable[[np.ndarray], np.ndarray]

DEFAULT_STEP = 1e-4  # times the radius

_E = np.eye(3)


def _prepare(x, h: float, radius: float | None):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x.reshape(-1, 3)
    if not h > 0:
        raise DomainError("step h must be positive")
    if radius is not None and np.any(np.linalg.norm(pts, axis=1) + 2.0 * h > radius):
        raise DomainError("finite-difference stencil leaves the ball")
    return pts, single


def _finish(v: np.ndarray, single: bool):
    return v[..., 0, :] if single else v


def _eval(f: PointEvaluator, stencil: np.ndarray, count: int, P: int) -> np.ndarray:
    vals = np.asarray(f(stencil), dtype=float)
    return vals.reshape(vals.shape[:-2] + (count, P, 3))


def jacobian(f: PointEvaluator, x, h: float, radius: float | None = None) -> np.ndarray:
    """``J[p, i, j] = d f_i / d x_j`` by central differences."""
    pts, single = _prepare(x, h, radius)
    P = pts.shape[0]
    stencil = np.concatenate([pts + h * _E[j] for j in range(3)]
                             + [pts - h * _E[j] for j in range(3)])
    vals = _eval(f, stencil, 6, P)
    J = (vals[..., :3, :, :] - vals[..., 3:, :, :]) / (2.0 * h)  # [..., j, p, i]
    J = np.moveaxis(J, -3, -1)
    return J[..., 0, :, :] if single else J


def fd_curl(f: PointEvaluator, x, h: float, radius: float | None = None) -> np.ndarray:
    """Central-difference curl at one point ``(3,)`` or many ``(P, 3)``."""
    J = jacobian(f, np.atleast_2d(x), h, radius)
    c = np.stack([J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0],
                  J[..., 1, 0] - J[..., 0, 1]], axis=-1)
    return _finish(c, np.ndim(x) == 1)


def fd_div(f: PointEvaluator, x, h: float, radius: float | None = None):
    J = jacobian(f, np.atleast_2d(x), h, radius)
    d = J[..., 0, 0] + J[..., 1, 1] + J[..., 2, 2]
    if np.ndim(x) == 1:
        return float(d[0]) if d.ndim == 1 else d[..., 0]
    return d


def _second(f: PointEvaluator, pts: np.ndarray, h: float):
    """Hessian of each component, ``H[..., p, i, a, b] = d2 f_i / dx_a dx_b``."""
    P = pts.shape[0]
    offsets = [np.zeros(3)]
    for a in range(3):
        offsets += [h * _E[a], -h * _E[a]]
    for a in range(3):
        for b in range(a + 1, 3):
            for sa in (1, -1):
                for sb in (1, -1):
                    offsets.append(h * (sa * _E[a] + sb * _E[b]))
    stencil = np.concatenate([pts + o for o in offsets])
    vals = np.moveaxis(_eval(f, stencil, len(offsets), P), -3, 0)
    H = np.empty(vals.shape[1:] + (3, 3))
    c = vals[0]
    for a in range(3):
        H[..., a, a] = (vals[1 + 2 * a] - 2.0 * c + vals[2 + 2 * a]) / h**2
    pos = 7
    for a in range(3):
        for b in range(a + 1, 3):
            pp, pm, mp, mm = vals[pos], vals[pos + 1], vals[pos + 2], vals[pos + 3]
            pos += 4
            mixed = (pp - pm - mp + mm) / (4.0 * h**2)
            H[..., a, b] = mixed
            H[..., b, a] = mixed
    return H


def fd_graddiv(f: PointEvaluator, x, h: float, radius: float | None = None) -> np.ndarray:
    """``grad(div f)``: ``sum_j d2 f_j / dx_i dx_j`` by nested central differences."""
    pts, single = _prepare(np.atleast_2d(x), h, radius)
    H = _second(f, pts, h)
    g = np.einsum("...jij->...i", H)
    return _finish(g, np.ndim(x) == 1)


def fd_laplacian(f: PointEvaluator, x, h: float, radius: float | None = None) -> np.ndarray:
    """Componentwise Laplacian with the 7-point stencil."""
    pts, single = _prepare(np.atleast_2d(x), h, radius)
    P = pts.shape[0]
    offsets = [np.zeros(3)] + [s * h * _E[a] for a in range(3) for s in (1, -1)]
    vals = _eval(f, np.concatenate([pts + o for o in offsets]), 7, P)
    lap = (vals[..., 1:, :, :].sum(axis=-3) - 6.0 * vals[..., 0, :, :]) / h**2
    return _finish(lap, np.ndim(x) == 1)


def fd_curl_curl(f: PointEvaluator, x, h: float, radius: float | None = None) -> np.ndarray:
    """``rot rot f`` from second differences (grad div f - laplacian f on the same stencil)."""
    pts, single = _prepare(np.atleast_2d(x), h, radius)
    H = _second(f, pts, h)
    graddiv = np.einsum("...jij->...i", H)
    lap = np.einsum("...iaa->...i", H)
    return _finish(graddiv - lap, np.ndim(x) == 1)


def random_interior_points(count: int, radius: float, margin: float, seed: int = 0) -> np.ndarray:
    """Uniform points in the ball ``|x| <= radius - margin`` from a fixed seed."""
    rng = np.random.default_rng(seed)
    direc = rng.normal(size=(count, 3))
    direc /= np.linalg.norm(direc, axis=1)[:, None]
    rad = (radius - margin) * rng.uniform(size=count) ** (1.0 / 3.0)
    return direc * rad[:, None]
