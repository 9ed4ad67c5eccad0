"""Fourier analysis in the eigenbases and operators acting on coefficients.

Curl (``S``) and gradient-of-divergence (``N_d``) act diagonally: every mode's
coefficient is multiplied by that mode's eigenvalue.  Resolvents divide by
the shifted eigenvalue and fall back to a Fredholm report at resonance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .ballgrid import BallGrid, FieldSamples, inner_product
from .eigenbasis import Basis, Mode
from .exceptions import BallrotError, DomainError, FamilyMismatchError

# relative tolerances for deciding resonance and the solvability condition
SPEC_RTOL = 1e-9
ORTH_RTOL = 1e-8


class ResolutionWarning(UserWarning):
    """The grid's exact-integration envelope does not cover the basis."""


class ResonanceError(BallrotError, ValueError):
    """A shift parameter sits on the spectrum where a finite answer is required."""


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    """Coordinates of a field in a basis, aligned with ``basis.modes``."""

    basis: Basis
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.basis),):
            raise DomainError(f"expected {len(self.basis)} coefficients, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("coefficients must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, basis: Basis) -> "SpectralCoefficients":
        return cls(basis, np.zeros(len(basis)))

    @classmethod
    def unit(cls, basis: Basis, mode) -> "SpectralCoefficients":
        v = np.zeros(len(basis))
        v[basis.index(mode)] = 1.0
        return cls(basis, v)

    @classmethod
    def from_mapping(cls, basis: Basis, mapping: Mapping) -> "SpectralCoefficients":
        v = np.zeros(len(basis))
        for key, value in mapping.items():
            v[basis.index(key)] += float(value)
        return cls(basis, v)

    def __getitem__(self, mode) -> float:
        return float(self.values[self.basis.index(mode)])

    def as_dict(self) -> dict[Mode, float]:
        return {m: float(v) for m, v in zip(self.basis.modes, self.values)}

    def _check(self, other: "SpectralCoefficients") -> None:
        if other.basis is not self.basis:
            raise FamilyMismatchError("coefficients belong to different bases")

    def __add__(self, other):
        self._check(other)
        return SpectralCoefficients(self.basis, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return SpectralCoefficients(self.basis, self.values - other.values)

    def __mul__(self, a: float):
        return SpectralCoefficients(self.basis, a * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralCoefficients(self.basis, -self.values)

    def energy(self) -> float:
        """Sum of squared coefficients (the L2 norm squared of the synthesis)."""
        return float(np.sum(self.values**2))

    def restrict(self, basis: Basis) -> "SpectralCoefficients":
        """Re-key onto another basis; modes missing from ``self`` get zero."""
        v = np.zeros(len(basis))
        for i, m in enumerate(basis.modes):
            if m in self.basis:
                v[i] = self.values[self.basis.index(m)]
        return SpectralCoefficients(basis, v)


# (basis, grid) -> mode samples; one grid per basis is kept
_SAMPLE_CACHE: dict[int, tuple[Basis, BallGrid, np.ndarray]] = {}


def basis_on_grid(basis: Basis, grid: BallGrid) -> np.ndarray:
    """Mode samples at the grid nodes, shape ``(M, P, 3)``, cached per basis."""
    hit = _SAMPLE_CACHE.get(id(basis))
    if hit is not None and hit[0] is basis and hit[1] is grid:
        return hit[2]
    if abs(grid.radius - basis.radius) > 1e-14 * basis.radius:
        raise DomainError("grid radius differs from basis radius")
    Q = basis.evaluate(grid.points)
    Q.setflags(write=False)
    if len(_SAMPLE_CACHE) > 8:
        _SAMPLE_CACHE.clear()
    _SAMPLE_CACHE[id(basis)] = (basis, grid, Q)
    return Q


def _weighted_matrix(Q: np.ndarray, grid: BallGrid) -> np.ndarray:
    return Q.reshape(Q.shape[0], -1) * np.repeat(grid.weights, 3)[None, :]


def project(f: FieldSamples, basis: Basis) -> SpectralCoefficients:
    """``c_j = (f, q_j)`` by grid quadrature."""
    grid = f.grid
    if 2 * basis.n_max + 2 > grid.exact_degree():
        warnings.warn(
            f"grid angular envelope (degree {grid.exact_degree()}) does not cover "
            f"products of modes up to degree {basis.n_max}", ResolutionWarning, stacklevel=2)
    Q = basis_on_grid(basis, grid)
    c = _weighted_matrix(Q, grid) @ f.values.reshape(-1)
    return SpectralCoefficients(basis, c)


def gram_matrix(basis: Basis, grid: BallGrid) -> np.ndarray:
    Q = basis_on_grid(basis, grid)
    A = Q.reshape(Q.shape[0], -1)
    return _weighted_matrix(Q, grid) @ A.T


def synthesize(c: SpectralCoefficients, points) -> np.ndarray:
    """``sum_j c_j q_j(x)`` at arbitrary points in the ball, shape ``(P, 3)``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    nz = np.flatnonzero(c.values)
    if nz.size == 0:
        return np.zeros_like(pts)
    Q = c.basis.evaluate(pts, modes=[c.basis.modes[i] for i in nz])
    return np.tensordot(c.values[nz], Q, axes=1)


def synthesize_on_grid(c: SpectralCoefficients, grid: BallGrid) -> FieldSamples:
    Q = basis_on_grid(c.basis, grid)
    return FieldSamples(grid, np.tensordot(c.values, Q, axes=1))


def _mask(c: SpectralCoefficients, curl: bool) -> np.ndarray:
    fm = c.basis.family_mask
    return (fm["curl_plus"] | fm["curl_minus"]) if curl else fm["graddiv"]


def apply_S(c: SpectralCoefficients) -> SpectralCoefficients:
    """Curl: multiply curl-family coefficients by their eigenvalue ``+-lam_j``."""
    mask = _mask(c, curl=True)
    if not mask.any():
        raise FamilyMismatchError("S acts on curl-family coefficients; basis has none")
    v = c.values.copy()
    v[mask] *= c.basis.eigenvalues[mask]
    return SpectralCoefficients(c.basis, v)


def apply_Nd(c: SpectralCoefficients) -> SpectralCoefficients:
    """Gradient of divergence: multiply gradient-family coefficients by ``-nu_j**2``."""
    mask = _mask(c, curl=False)
    if not mask.any():
        raise FamilyMismatchError("N_d acts on gradient-family coefficients; basis has none")
    v = c.values.copy()
    v[mask] *= c.basis.eigenvalues[mask]
    return SpectralCoefficients(c.basis, v)


def apply_S_inverse(c: SpectralCoefficients) -> SpectralCoefficients:
    mask = _mask(c, curl=True)
    if not mask.any():
        raise FamilyMismatchError("S^-1 acts on curl-family coefficients; basis has none")
    if np.any(c.values[~mask] != 0.0):
        raise FamilyMismatchError("S^-1 is defined on curl-family coefficients only")
    v = c.values.copy()
    v[mask] /= c.basis.eigenvalues[mask]
    return SpectralCoefficients(c.basis, v)


@dataclass(frozen=True, eq=False)
class FredholmReport:
    """Outcome of a resolvent evaluated on the spectrum.

    ``kernel`` lists the resonant modes spanning the null space of the shifted
    operator.  When ``solvable`` the ``particular`` solution has zero
    components along the kernel; otherwise ``offending`` lists the resonant
    modes along which the right-hand side fails the orthogonality condition.
    """

    shift: float
    kernel: tuple[Mode, ...]
    solvable: bool
    offending: tuple[Mode, ...]
    particular: SpectralCoefficients | None
    spec_tol: float
    orth_tol: float

    @property
    def kernel_dimension(self) -> int:
        return len(self.kernel)

    def describe(self) -> dict:
        return {
            "shift": self.shift,
            "solvable": self.solvable,
            "kernel_dimension": self.kernel_dimension,
            "kernel": [list(m.key) for m in self.kernel],
            "offending": [list(m.key) for m in self.offending],
            "spec_tol": self.spec_tol,
            "orth_tol": self.orth_tol,
        }


def _require_only(c: SpectralCoefficients, curl: bool, what: str) -> np.ndarray:
    mask = _mask(c, curl=curl)
    if not mask.any() or np.any(c.values[~mask] != 0.0):
        raise FamilyMismatchError(f"{what} needs coefficients supported on its own family")
    return mask


def _resolve(c: SpectralCoefficients, mask: np.ndarray, denom: np.ndarray, shift: float,
             scale: float) -> SpectralCoefficients | FredholmReport:
    spec_tol = SPEC_RTOL * scale
    resonant = mask & (np.abs(denom) <= spec_tol)
    v = np.zeros_like(c.values)
    if not resonant.any():
        v[mask] = c.values[mask] / denom[mask]
        return SpectralCoefficients(c.basis, v)
    orth_tol = ORTH_RTOL * float(np.linalg.norm(c.values))
    bad = resonant & (np.abs(c.values) > orth_tol)
    kernel = tuple(m for m, r in zip(c.basis.modes, resonant) if r)
    offending = tuple(m for m, b in zip(c.basis.modes, bad) if b)
    if offending:
        return FredholmReport(shift, kernel, False, offending, None, spec_tol, orth_tol)
    ok = mask & ~resonant
    v[ok] = c.values[ok] / denom[ok]
    return FredholmReport(shift, kernel, True, (), SpectralCoefficients(c.basis, v),
                          spec_tol, orth_tol)


def resolvent_curl(c: SpectralCoefficients, lam: float) -> SpectralCoefficients | FredholmReport:
    """``(S + lam I)^{-1} c``: divide by ``lam + lam_j`` (plus) or ``lam - lam_j`` (minus)."""
    mask = _require_only(c, True, "resolvent_curl")
    ev = c.basis.eigenvalues
    scale = float(np.max(np.abs(ev[mask])))
    return _resolve(c, mask, lam + ev, float(lam), scale)


def resolvent_graddiv(c: SpectralCoefficients, nu2: float) -> SpectralCoefficients | FredholmReport:
    """``(N_d + nu2 I)^{-1} c``: divide by ``nu2 - nu_j**2``."""
    mask = _require_only(c, False, "resolvent_graddiv")
    ev = c.basis.eigenvalues
    scale = float(np.max(np.abs(ev[mask])))
    return _resolve(c, mask, nu2 + ev, float(nu2), scale)


def parseval_defect(f: FieldSamples, *coeffs: SpectralCoefficients) -> float:
    """``||f||**2 - sum c_j**2``: the squared distance from f to the span."""
    return inner_product(f, f) - sum(c.energy() for c in coeffs)


def sobolev_weights(eigenvalues: np.ndarray, order: int) -> np.ndarray:
    """``1 + |ev|**(2 order)`` for order >= 1 and 1 for order 0.

    With curl eigenvalues ``+-lam_j`` this gives the W^m weights
    ``1 + lam_j**(2m)``; with gradient eigenvalues ``-nu_j**2`` it gives the
    A^{2k} weights ``1 + nu_j**(4k)``.
    """
    if order < 0:
        raise DomainError("Sobolev order must be >= 0")
    if order == 0:
        return np.ones_like(eigenvalues, dtype=float)
    return 1.0 + np.abs(eigenvalues) ** (2 * order)


@dataclass(frozen=True)
class SobolevDiagnostics:
    order: int
    weighted_sum: float
    plain_sum: float
    tail_fraction: float
    decay_exponent: float | None = field(default=None)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.weighted_sum))


def _decay_exponent(wavenumbers: np.ndarray, values: np.ndarray) -> float | None:
    keep = np.abs(values) > 0
    if np.unique(wavenumbers[keep]).size < 2:
        return None
    # largest coefficient per distinct wavenumber, then a log-log fit
    ks = np.unique(wavenumbers[keep])
    amps = np.array([np.max(np.abs(values[keep][wavenumbers[keep] == k])) for k in ks])
    slope = np.polyfit(np.log(ks), np.log(amps), 1)[0]
    return float(-slope)


def sobolev_norm(c: SpectralCoefficients, order: int) -> SobolevDiagnostics:
    """Squared W^order (curl modes) / A^{2 order} (gradient modes) norm and tail data.

    ``tail_fraction`` is the share of the weighted sum carried by modes whose
    wavenumber lies in the upper half of the enumerated wavenumber range.
    """
    b = c.basis
    w = sobolev_weights(b.eigenvalues, order)
    terms = w * c.values**2
    total = float(np.sum(terms))
    kn = b.wavenumbers
    upper = kn > 0.5 * (kn.min() + kn.max())
    tail = float(np.sum(terms[upper]) / total) if total > 0 else 0.0
    return SobolevDiagnostics(order, total, c.energy(), tail, _decay_exponent(kn, c.values))


def class_norm(c: SpectralCoefficients, k: int, m: int) -> float:
    """Squared norm in the class ``C(2k, m) = A^{2k} (+) W^m``."""
    b = c.basis
    curl = _mask(c, curl=True)
    w = np.where(curl, sobolev_weights(b.eigenvalues, m), sobolev_weights(b.eigenvalues, k))
    return float(np.sum(w * c.values**2))


def bilinear(c_f: SpectralCoefficients, c_g: SpectralCoefficients) -> float:
    """``(f, g)`` through coefficients (Parseval)."""
    c_f._check(c_g)
    return float(np.dot(c_f.values, c_g.values))


@dataclass(frozen=True)
class BoundConstants:
    """Operator bounds for ``S + lam I`` between neighbouring Sobolev levels.

    ``c`` and ``C`` are suprema over the whole spectrum: the enumerated maxima
    combined with the large-eigenvalue limit of the ratios, which is 1.
    ``c_mode`` / ``C_mode`` name the enumerated mode attaining
    ``c_enumerated`` / ``C_enumerated``.
    """

    shift: float
    order: int
    c: float
    C: float
    c_enumerated: float
    C_enumerated: float
    c_mode: Mode
    C_mode: Mode
    tail_limit: float = 1.0


def _bounds(eigenvalues: np.ndarray, modes, shift_plus_ev: np.ndarray, order: int,
            shift: float) -> BoundConstants:
    w_lo = sobolev_weights(eigenvalues, order)
    w_hi = sobolev_weights(eigenvalues, order + 1)
    fwd = w_lo * shift_plus_ev**2 / w_hi
    inv = w_hi / (w_lo * shift_plus_ev**2)
    i_f, i_i = int(np.argmax(fwd)), int(np.argmax(inv))
    c_en, C_en = float(np.sqrt(fwd[i_f])), float(np.sqrt(inv[i_i]))
    return BoundConstants(shift, order, max(c_en, 1.0), max(C_en, 1.0), c_en, C_en,
                          modes[i_f], modes[i_i])


def operator_bound_constants(lam: float, basis: Basis, m: int) -> BoundConstants:
    """``c_m, C_m`` with ``||(S+lam)f||_{W^m} <= c_m ||f||_{W^{m+1}}`` and
    ``||(S+lam)^{-1} f||_{W^{m+1}} <= C_m ||f||_{W^m}``."""
    b = basis.subset("curl")
    if len(b) == 0:
        raise FamilyMismatchError("bound constants need curl-family modes")
    ev = b.eigenvalues
    d = lam + ev
    if np.any(np.abs(d) <= SPEC_RTOL * np.max(np.abs(ev))):
        raise ResonanceError(f"lam={lam!r} lies on the enumerated curl spectrum")
    return _bounds(ev, b.modes, d, m, float(lam))


def graddiv_bound_constants(nu2: float, basis: Basis, k: int) -> BoundConstants:
    """Analogue for ``N_d + nu2 I`` between ``A^{2(k+1)}`` and ``A^{2k}``."""
    b = basis.subset("graddiv")
    if len(b) == 0:
        raise FamilyMismatchError("bound constants need gradient-family modes")
    ev = b.eigenvalues
    d = nu2 + ev
    if np.any(np.abs(d) <= SPEC_RTOL * np.max(np.abs(ev))):
        raise ResonanceError(f"nu2={nu2!r} lies on the enumerated gradient spectrum")
    return _bounds(ev, b.modes, d, k, float(nu2))
