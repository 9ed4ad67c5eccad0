"""Orthonormal eigenfields of curl and of the gradient of divergence in a ball.

Curl family, for ``h = psi_n(kappa r) Y_n^k`` with ``kappa = rho_{n,m}/R``:

    T = grad(h) x x,    P = rot(T) / lam,    q = (T + P) / N,   lam = +-kappa

so that ``rot q = lam q``, ``div q = 0`` and the radial part of ``q`` carries a
factor ``psi_n(kappa R) = 0`` on the sphere.  Gradient family, for
``h = psi_n(nu r) Y_n^k`` with ``nu = alpha_{n,m}/R``:

    q = grad(h) / (nu N),   grad div q = -nu**2 q,

with a normal component proportional to ``psi_n'(nu R) = 0``.  ``N`` is fixed
by radial Gauss-Legendre quadrature of the closed-form profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import specfun
from .exceptions import DomainError, FamilyMismatchError
from .harmonics import flat_index, harmonic_table

FAMILIES = ("curl_plus", "curl_minus", "graddiv")
CURL_FAMILIES = ("curl_plus", "curl_minus")
_FAMILY_ALIASES = {
    "curl_plus": ("curl_plus",),
    "curl_minus": ("curl_minus",),
    "graddiv": ("graddiv",),
    "curl": CURL_FAMILIES,
    "all": FAMILIES,
}
_OUTSIDE_TOL = 1e-12


@dataclass(frozen=True)
class Mode:
    """One eigenfield, identified by ``(family, n, m, k)``.

    ``eigenvalue`` is ``+rho/R`` or ``-rho/R`` for the curl families and
    ``-(alpha/R)**2`` for ``graddiv``.  ``j`` is the 1-based position within the
    family when sorted by ``|eigenvalue|`` with ``(n, m, k)`` tie-breaks.
    """

    family: str
    n: int
    m: int
    k: int
    eigenvalue: float = field(compare=False)
    j: int = field(compare=False, default=0)

    @property
    def key(self) -> tuple[str, int, int, int]:
        return (self.family, self.n, self.m, self.k)

    @property
    def wavenumber(self) -> float:
        """``rho/R`` for curl modes, ``nu = alpha/R`` for gradient modes."""
        if self.family == "graddiv":
            return float(np.sqrt(-self.eigenvalue))
        return abs(self.eigenvalue)

    @property
    def sign(self) -> int:
        return -1 if self.family == "curl_minus" else 1

    @property
    def is_curl(self) -> bool:
        return self.family in CURL_FAMILIES


def resolve_families(family: str | tuple[str, ...]) -> tuple[str, ...]:
    if isinstance(family, str):
        try:
            return _FAMILY_ALIASES[family]
        except KeyError:
            raise DomainError(f"unknown family {family!r}") from None
    fams = tuple(dict.fromkeys(family))
    for f in fams:
        if f not in FAMILIES:
            raise DomainError(f"unknown family {f!r}")
    return tuple(f for f in FAMILIES if f in fams)


@dataclass(frozen=True, eq=False)
class Basis:
    """A finite, ordered set of orthonormal modes sharing one radius."""

    families: tuple[str, ...]
    radius: float
    modes: tuple[Mode, ...]
    norms: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len({m.key for m in self.modes}) != len(self.modes):
            raise DomainError("basis modes are not pairwise distinct")
        if not np.all(np.isfinite(self.norms)) or not np.all(self.norms > 0):
            raise DomainError("normalisation constants must be finite and positive")

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __contains__(self, mode) -> bool:
        key = mode.key if isinstance(mode, Mode) else tuple(mode)
        return key in self._index

    @cached_property
    def _index(self) -> dict:
        return {m.key: i for i, m in enumerate(self.modes)}

    def index(self, mode) -> int:
        key = mode.key if isinstance(mode, Mode) else tuple(mode)
        try:
            return self._index[key]
        except KeyError:
            raise FamilyMismatchError(f"mode {key} is not in this basis") from None

    def mode(self, family: str, n: int, m: int, k: int) -> Mode:
        return self.modes[self.index((family, n, m, k))]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return np.array([m.wavenumber for m in self.modes])

    @cached_property
    def family_mask(self) -> dict[str, np.ndarray]:
        fam = np.array([m.family for m in self.modes])
        return {f: fam == f for f in FAMILIES}

    @property
    def n_max(self) -> int:
        return max(m.n for m in self.modes)

    @property
    def m_max(self) -> int:
        return max(m.m for m in self.modes)

    def subset(self, family: str | tuple[str, ...]) -> "Basis":
        fams = resolve_families(family)
        keep = [i for i, m in enumerate(self.modes) if m.family in fams]
        return Basis(fams, self.radius, tuple(self.modes[i] for i in keep), self.norms[keep])

    def evaluate(self, points, modes=None) -> np.ndarray:
        """Samples of the selected modes (default: all), shape ``(M, P, 3)``."""
        idx = range(len(self.modes)) if modes is None else [self.index(m) for m in modes]
        return _evaluate(self, list(idx), points)


def _radial_norm(family: str, n: int, kappa: float, R: float) -> float:
    nq = 48 + n + int(2 * kappa * R)
    x, w = np.polynomial.legendre.leggauss(nq)
    r = 0.5 * R * (x + 1.0)
    w = 0.5 * R * w * r**2
    z = kappa * r
    j = specfun.psi_array(n, z)
    dj = specfun.dpsi_array(n, z)
    jz = specfun.psi_over_z_array(n, z) if n >= 1 else np.zeros_like(z)
    ll = n * (n + 1.0)
    if family == "graddiv":
        dens = dj**2 + ll * jz**2
    else:
        dens = ll * j**2 + ll**2 * jz**2 + ll * (jz + dj) ** 2
    return float(np.sqrt(np.sum(w * dens)))


def enumerate_modes(family: str, n_max: int, m_max: int, radius: float = 1.0) -> Basis:
    """All modes with ``n <= n_max``, ``m <= m_max`` and ``|k| <= n``."""
    fams = resolve_families(family)
    if m_max < 1:
        raise DomainError("m_max must be >= 1")
    if not radius > 0:
        raise DomainError("radius must be > 0")
    R = float(radius)
    all_modes: list[Mode] = []
    all_norms: list[float] = []
    for fam in fams:
        zfam = "graddiv" if fam == "graddiv" else "curl"
        n_min = specfun.family_min_order(zfam)
        if n_max < n_min:
            raise DomainError(f"family {fam} requires n_max >= {n_min}, got {n_max}")
        table = specfun.build_zero_table(zfam, n_max, m_max, R)
        rows = []
        for e in table.entries:
            kappa = e.zero / R
            ev = -kappa**2 if fam == "graddiv" else (kappa if fam == "curl_plus" else -kappa)
            norm = _radial_norm(fam, e.n, kappa, R)
            for k in range(-e.n, e.n + 1):
                rows.append((abs(ev), e.n, e.m, k, ev, norm))
        rows.sort(key=lambda t: t[:4])
        for j, (_, n, m, k, ev, norm) in enumerate(rows, start=1):
            all_modes.append(Mode(fam, n, m, k, ev, j))
            all_norms.append(norm)
    return Basis(fams, R, tuple(all_modes), np.array(all_norms))


def _frames(points: np.ndarray, R: float):
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    rho = np.hypot(x, y)
    r = np.hypot(rho, z)
    if np.any(r > R * (1.0 + _OUTSIDE_TOL)):
        raise DomainError("evaluation point lies outside the ball")
    origin = r == 0.0
    rs = np.where(origin, 1.0, r)
    # at the origin only n = 1 modes survive and they are direction independent
    ct = np.where(origin, 0.0, z / rs)
    st = np.where(origin, 1.0, rho / rs)
    axis = rho == 0.0
    rhos = np.where(axis, 1.0, rho)
    cp = np.where(axis, 1.0, x / rhos)
    sp = np.where(axis, 0.0, y / rhos)
    e_r = np.stack([st * cp, st * sp, ct], axis=1)
    e_t = np.stack([ct * cp, ct * sp, -st], axis=1)
    e_p = np.stack([-sp, cp, np.zeros_like(cp)], axis=1)
    return r, (ct, st, cp, sp), e_r, e_t, e_p


def _evaluate(basis: Basis, idx: list[int], points) -> np.ndarray:
    r, ang, e_r, e_t, e_p = _frames(points, basis.radius)
    out = np.empty((len(idx), r.size, 3))
    if not idx:
        return out
    n_top = max(basis.modes[i].n for i in idx)
    tab = harmonic_table(n_top, *ang)
    radial: dict[tuple, tuple] = {}
    for row, i in enumerate(idx):
        mode = basis.modes[i]
        n = mode.n
        kappa = mode.wavenumber
        rkey = (mode.family == "graddiv", n, mode.m)
        if rkey not in radial:
            z = kappa * r
            j = specfun.psi_array(n, z)
            dj = specfun.dpsi_array(n, z)
            jz = specfun.psi_over_z_array(n, z) if n >= 1 else np.zeros_like(z)
            radial[rkey] = (j, dj, jz)
        j, dj, jz = radial[rkey]
        a = flat_index(n, mode.k)
        Y = tab.Y[a]
        gt, gp = tab.grad_theta[a], tab.grad_phi[a]
        surf = gt[:, None] * e_t + gp[:, None] * e_p
        if mode.family == "graddiv":
            field_ = dj[:, None] * Y[:, None] * e_r + jz[:, None] * surf
            if n == 0:
                # leading Taylor coefficient of -psi_1 is negative: flip for a positive profile
                field_ = -field_
        else:
            tor = j[:, None] * (gp[:, None] * e_t - gt[:, None] * e_p)
            ll = n * (n + 1.0)
            pol = (ll * jz * Y)[:, None] * e_r + (jz + dj)[:, None] * surf
            field_ = tor + mode.sign * pol
        out[row] = field_ / basis.norms[i]
    return out


def eval_mode(mode: Mode, basis: Basis, points) -> np.ndarray:
    """Samples of one normalised eigenfield at ``points`` (shape ``(P, 3)``)."""
    return _evaluate(basis, [basis.index(mode)], points)[0]


def normal_trace(mode: Mode, basis: Basis, surface_points, tol: float = 1e-12) -> np.ndarray:
    """``n . q`` at points on the bounding sphere."""
    pts = np.asarray(surface_points, dtype=float).reshape(-1, 3)
    r = np.linalg.norm(pts, axis=1)
    if np.any(np.abs(r - basis.radius) > tol * basis.radius):
        raise DomainError("normal trace requested off the sphere |x| = R")
    q = eval_mode(mode, basis, pts)
    return np.sum(q * pts, axis=1) / r
