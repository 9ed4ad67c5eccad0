"""Tensor-product quadrature over a ball and the discrete L2 inner product."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, GridMismatchError

_MIN_N, _MAX_N = 4, 512


@dataclass(frozen=True, eq=False)
class BallGrid:
    """Radial Gauss-Legendre x Gauss-Legendre in cos(theta) x uniform azimuth.

    The radial weights already include the ``r**2`` Jacobian, so
    ``weights.sum()`` is the ball volume.  Points are stored flattened in
    C order over ``(r, theta, phi)``.
    """

    radius: float
    r_nodes: np.ndarray
    r_weights: np.ndarray
    cos_theta: np.ndarray
    theta_weights: np.ndarray
    phi_nodes: np.ndarray
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.r_nodes.size, self.cos_theta.size, self.phi_nodes.size)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def exact_degree(self) -> int:
        """Largest harmonic degree integrated exactly by the angular rule."""
        n_t, n_p = self.cos_theta.size, self.phi_nodes.size
        return min(2 * n_t - 1, n_p - 1)

    def samples(self, values) -> "FieldSamples":
        return FieldSamples(self, np.asarray(values, dtype=float))

    def sample(self, func) -> "FieldSamples":
        """Tabulate a vectorised callable ``points (P, 3) -> values (P, 3)``."""
        return FieldSamples(self, np.asarray(func(self.points), dtype=float))

    def integrate(self, values) -> float:
        """Quadrature of a scalar integrand given at the grid points."""
        return float(np.sum(self.weights * np.asarray(values, dtype=float)))


def build_grid(radius: float, n_r: int, n_theta: int, n_phi: int) -> BallGrid:
    for name, v in (("N_r", n_r), ("N_theta", n_theta), ("N_phi", n_phi)):
        if not isinstance(v, (int, np.integer)) or not _MIN_N <= v <= _MAX_N:
            raise DomainError(f"{name}={v!r} outside [{_MIN_N}, {_MAX_N}]")
    if n_phi % 2:
        raise DomainError(f"N_phi must be even, got {n_phi}")
    if not radius > 0:
        raise DomainError("radius must be > 0")
    R = float(radius)

    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * R * (x + 1.0)
    wr = 0.5 * R * w * r**2
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    wp = np.full(n_phi, 2.0 * np.pi / n_phi)

    rr, cc, pp = np.meshgrid(r, ct, phi, indexing="ij")
    ss = np.sqrt(1.0 - cc**2)
    pts = np.stack([rr * ss * np.cos(pp), rr * ss * np.sin(pp), rr * cc], axis=-1).reshape(-1, 3)
    ww = (wr[:, None, None] * wt[None, :, None] * wp[None, None, :]).ravel()
    return BallGrid(R, r, wr, ct, wt, phi, pts, ww)


@dataclass(frozen=True, eq=False)
class FieldSamples:
    """A vector field tabulated at every node of a grid, shape ``(P, 3)``."""

    grid: BallGrid
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.shape != (self.grid.n_points, 3):
            raise GridMismatchError(
                f"samples have shape {v.shape}, grid needs ({self.grid.n_points}, 3)")
        if not np.all(np.isfinite(v)):
            raise DomainError("field samples contain non-finite values")

    def __add__(self, other: "FieldSamples") -> "FieldSamples":
        _same_grid(self, other)
        return FieldSamples(self.grid, self.values + other.values)

    def __sub__(self, other: "FieldSamples") -> "FieldSamples":
        _same_grid(self, other)
        return FieldSamples(self.grid, self.values - other.values)

    def __mul__(self, a: float) -> "FieldSamples":
        return FieldSamples(self.grid, a * self.values)

    __rmul__ = __mul__


def _same_grid(f: FieldSamples, g: FieldSamples) -> None:
    if f.grid is not g.grid:
        raise GridMismatchError("field samples belong to different grids")


def inner_product(f: FieldSamples, g: FieldSamples) -> float:
    """Discrete ``(f, g) = sum_i w_i f(x_i) . g(x_i)``."""
    _same_grid(f, g)
    return float(np.sum(f.grid.weights * np.sum(f.values * g.values, axis=1)))


def l2_norm(f: FieldSamples) -> float:
    return float(np.sqrt(max(inner_product(f, f), 0.0)))
