"""Spherical Bessel radial functions and their certified zeros.

``psi(n, z)`` is the function ``(-z)**n (d/(z dz))**n (sin z / z)``, i.e. the
spherical Bessel function of the first kind ``j_n``.  Its positive zeros give
the curl spectrum of the ball and the zeros of its derivative give the
gradient-of-divergence spectrum.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .exceptions import BracketError, DomainError

N_MAX_SUPPORTED = 64
RESIDUAL_BOUND = 1e-12

# below this argument every order is summed from its power series
_SERIES_Z = 1.0
_SERIES_TERMS = 24
_EPS = np.finfo(float).eps

Family = Literal["curl", "graddiv"]


def _check_args(n, z):
    if not isinstance(n, (int, np.integer)) or n < 0 or n > N_MAX_SUPPORTED:
        raise DomainError(f"order n={n!r} outside supported range [0, {N_MAX_SUPPORTED}]")
    z = float(z)
    if not z > 0.0 or not math.isfinite(z):
        raise DomainError(f"argument z={z!r} must be finite and > 0")
    return int(n), z


def _series_coeffs(n: int) -> np.ndarray:
    """Coefficients a_k of j_n(z) = z**n * sum_k a_k z**(2k)."""
    a = np.empty(_SERIES_TERMS)
    lead = 1.0
    for i in range(1, n + 1):
        lead /= 2 * i + 1
    a[0] = lead
    for k in range(1, _SERIES_TERMS):
        a[k] = -a[k - 1] / (2 * k * (2 * n + 2 * k + 1))
    return a


def _series(n: int, z: np.ndarray, shift: int = 0, deriv: bool = False) -> np.ndarray:
    """Power series of j_n(z) / z**shift, or of its derivative when ``deriv``."""
    a = _series_coeffs(n)
    power = n - shift
    if deriv:
        a = a * (n + 2 * np.arange(_SERIES_TERMS))
        power -= 1
        if n == 0:
            # leading term vanishes; factor one z out of the rest
            a = np.append(a[1:], 0.0)
            power = 1
    z2 = z * z
    acc = np.zeros_like(z)
    for k in range(_SERIES_TERMS - 1, -1, -1):
        acc = acc * z2 + a[k]
    if power > 0:
        return acc * z**power
    if power == 0:
        return acc
    # only j_n/z with n = 0 lands here; the caller never asks for it at z = 0
    with np.errstate(divide="ignore"):
        return acc / z ** (-power)


def _upward(n_top: int, z: np.ndarray) -> np.ndarray:
    out = np.empty((n_top + 1, z.size))
    s, c = np.sin(z), np.cos(z)
    out[0] = s / z
    if n_top >= 1:
        out[1] = s / (z * z) - c / z
    for k in range(1, n_top):
        out[k + 1] = (2 * k + 1) / z * out[k] - out[k - 1]
    return out


def _miller(n_top: int, z: np.ndarray) -> np.ndarray:
    """Downward recurrence, normalised by whichever of j_0, j_1 is larger."""
    start = n_top + 30 + int(math.ceil(math.sqrt(40.0 * (n_top + 1))))
    out = np.zeros((n_top + 1, z.size))
    f_next = np.zeros_like(z)
    f_cur = np.full_like(z, 1e-280)
    for k in range(start, 0, -1):
        f_prev = (2 * k + 1) / z * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        # f_cur now holds the order k-1 value
        if k - 1 <= n_top:
            out[k - 1] = f_cur
        big = np.abs(f_cur) > 1e200
        if np.any(big):
            f_cur[big] *= 1e-200
            f_next[big] *= 1e-200
            out[:, big] *= 1e-200
    if n_top == 0:
        # need f_1 for normalisation: recover it from the stored chain
        f1 = f_next
    else:
        f1 = out[1]
    s, c = np.sin(z), np.cos(z)
    j0 = s / z
    j1 = s / (z * z) - c / z
    use0 = np.abs(j0) >= np.abs(j1)
    scale = np.where(use0, j0 / np.where(use0, out[0], 1.0), j1 / np.where(use0, 1.0, f1))
    return out * scale


def _table(n_top: int, z: np.ndarray) -> np.ndarray:
    """Array of shape (n_top + 1, z.size) holding j_0 .. j_{n_top} at z >= 0."""
    z = np.asarray(z, dtype=float).ravel()
    out = np.empty((n_top + 1, z.size))
    small = z < _SERIES_Z
    up = (~small) & (z >= n_top)
    mid = (~small) & (~up)
    if np.any(small):
        for k in range(n_top + 1):
            out[k, small] = _series(k, z[small])
    if np.any(up):
        out[:, up] = _upward(n_top, z[up])
    if np.any(mid):
        out[:, mid] = _miller(n_top, z[mid])
    return out


@functools.lru_cache(maxsize=None)
def _series_coeff_list(n: int) -> tuple[float, ...]:
    return tuple(float(a) for a in _series_coeffs(n))


def _table_scalar(n_top: int, z: float) -> list[float]:
    """Pure-float version of ``_table`` for one argument (root-finding hot path)."""
    if z < _SERIES_Z:
        z2 = z * z
        out = []
        for k in range(n_top + 1):
            acc = 0.0
            for c in reversed(_series_coeff_list(k)):
                acc = acc * z2 + c
            out.append(acc * z**k)
        return out
    s, c = math.sin(z), math.cos(z)
    j0 = s / z
    j1 = s / (z * z) - c / z
    if z >= n_top:
        out = [j0, j1]
        for k in range(1, n_top):
            out.append((2 * k + 1) / z * out[k] - out[k - 1])
        return out[: n_top + 1]
    start = n_top + 30 + int(math.ceil(math.sqrt(40.0 * (n_top + 1))))
    out = [0.0] * (n_top + 1)
    f_next, f_cur = 0.0, 1e-280
    for k in range(start, 0, -1):
        f_next, f_cur = f_cur, (2 * k + 1) / z * f_cur - f_next
        if k - 1 <= n_top:
            out[k - 1] = f_cur
        if abs(f_cur) > 1e200:
            f_cur *= 1e-200
            f_next *= 1e-200
            out = [v * 1e-200 for v in out]
    f1 = f_next if n_top == 0 else out[1]
    scale = j0 / out[0] if abs(j0) >= abs(j1) else j1 / f1
    return [v * scale for v in out]


def _psi_scalar(n: int, z: float) -> float:
    return _table_scalar(n, z)[n]


def _dpsi_scalar(n: int, z: float) -> float:
    if z < _SERIES_Z:
        return float(_series(n, np.array([z]), deriv=True)[0])
    t = _table_scalar(n + 1, z)
    return n / z * t[n] - t[n + 1]


def psi_array(n: int, z) -> np.ndarray:
    """Vectorised ``psi`` for arguments ``z >= 0`` (no domain checks on z)."""
    z = np.asarray(z, dtype=float)
    return _table(n, z)[n].reshape(z.shape)


def dpsi_array(n: int, z) -> np.ndarray:
    """Vectorised derivative of ``psi`` via ``(n/z) j_n - j_{n+1}``."""
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    out = np.empty_like(flat)
    small = flat < _SERIES_Z
    if np.any(small):
        out[small] = _series(n, flat[small], deriv=True)
    if np.any(~small):
        zz = flat[~small]
        t = _table(n + 1, zz)
        out[~small] = n / zz * t[n] - t[n + 1]
    return out.reshape(z.shape)


def psi_over_z_array(n: int, z) -> np.ndarray:
    """``psi(n, z) / z`` with the removable singularity at z = 0 filled in (n >= 1)."""
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    out = np.empty_like(flat)
    small = flat < _SERIES_Z
    if np.any(small):
        out[small] = _series(n, flat[small], shift=1)
    if np.any(~small):
        zz = flat[~small]
        out[~small] = _table(n, zz)[n] / zz
    return out.reshape(z.shape)


def psi(n: int, z: float) -> float:
    """Evaluate ``psi_n(z)`` for ``0 <= n <= 64`` and ``z > 0``."""
    n, z = _check_args(n, z)
    return _psi_scalar(n, z)


def dpsi(n: int, z: float) -> float:
    """Evaluate ``psi_n'(z)``, same domain and accuracy as :func:`psi`."""
    n, z = _check_args(n, z)
    return _dpsi_scalar(n, z)


def _d2psi(n: int, z: float) -> float:
    # spherical Bessel equation solved for the second derivative
    j = _psi_scalar(n, z)
    dj = _dpsi_scalar(n, z)
    return -2.0 / z * dj - (1.0 - n * (n + 1) / (z * z)) * j


def _refine(f: Callable[[float], float], df: Callable[[float], float], a: float, b: float,
            guess: float) -> float:
    """Safeguarded Newton iteration inside a sign-change bracket [a, b]."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise BracketError(f"no sign change on [{a!r}, {b!r}]")
    x = guess if a < guess < b else 0.5 * (a + b)
    for _ in range(300):
        fx = f(x)
        if fx == 0.0:
            return x
        if np.sign(fx) == np.sign(fa):
            a, fa = x, fx
        else:
            b = x
        if b - a <= 4.0 * _EPS * max(abs(a), abs(b)):
            break
        d = df(x)
        step = fx / d if d != 0.0 else math.inf
        x_new = x - step
        if not (a < x_new < b) or abs(step) > 0.5 * (b - a):
            x_new = 0.5 * (a + b)
        elif abs(step) <= 2.0 * _EPS * abs(x):
            # converged; one bisection-free polish step is already taken
            return x_new
        x = x_new
    return x


def _mcmahon(n: int, m: int) -> float:
    beta = (m + 0.5 * n) * math.pi
    return beta - n * (n + 1) / (2.0 * beta)


def _certify(value: float, z: float, what: str) -> float:
    r = abs(value)
    if not r <= RESIDUAL_BOUND:
        raise BracketError(f"{what} at z={z!r} has residual {r:.3e} > {RESIDUAL_BOUND:g}")
    return r


@functools.lru_cache(maxsize=None)
def _curl_zeros_cached(n: int, m_max: int) -> tuple[float, ...]:
    if n == 0:
        return tuple(m * math.pi for m in range(1, m_max + 1))
    prev = _curl_zeros_cached(n - 1, m_max + 1)
    f = lambda x: _psi_scalar(n, x)  # noqa: E731
    df = lambda x: _dpsi_scalar(n, x)  # noqa: E731
    zeros = []
    for m in range(1, m_max + 1):
        a, b = prev[m - 1], prev[m]
        x = _refine(f, df, a, b, _mcmahon(n, m))
        _certify(f(x), x, f"psi_{n}")
        zeros.append(x)
    return tuple(zeros)


def curl_zeros(n: int, m_max: int) -> list[float]:
    """First ``m_max`` positive zeros ``rho_{n,m}`` of ``psi_n``.

    Brackets come from interlacing with the zeros of ``psi_{n-1}``, seeded by
    the zeros ``m*pi`` of ``psi_0``.  ``n = 0`` is accepted so the seed sequence
    itself can be inspected.
    """
    if n < 0 or n > N_MAX_SUPPORTED:
        raise DomainError(f"order n={n} outside [0, {N_MAX_SUPPORTED}]")
    if m_max < 1:
        raise DomainError("m_max must be >= 1")
    return list(_curl_zeros_cached(int(n), int(m_max)))


@functools.lru_cache(maxsize=None)
def _graddiv_zeros_cached(n: int, m_max: int) -> tuple[float, ...]:
    f = lambda x: _dpsi_scalar(n, x)  # noqa: E731
    df = lambda x: _d2psi(n, x)  # noqa: E731
    rho = _curl_zeros_cached(n, m_max + 1)
    if n == 0:
        brackets = [(rho[m - 1], rho[m]) for m in range(1, m_max + 1)]
    else:
        # psi_n rises from 0 to its first maximum before rho_{n,1}
        lo = 0.5 * n
        while not _dpsi_scalar(n, lo) > 0.0:
            lo *= 0.5
        brackets = [(lo, rho[0])] + [(rho[m - 2], rho[m - 1]) for m in range(2, m_max + 1)]
    zeros = []
    for m, (a, b) in enumerate(brackets, start=1):
        x = _refine(f, df, a, b, 0.5 * (a + b))
        _certify(f(x), x, f"psi'_{n}")
        zeros.append(x)
    return tuple(zeros)


def graddiv_zeros(n: int, m_max: int) -> list[float]:
    """First ``m_max`` positive zeros ``alpha_{n,m}`` of ``psi_n'``."""
    if n < 0 or n > N_MAX_SUPPORTED:
        raise DomainError(f"order n={n} outside [0, {N_MAX_SUPPORTED}]")
    if m_max < 1:
        raise DomainError("m_max must be >= 1")
    return list(_graddiv_zeros_cached(int(n), int(m_max)))


@dataclass(frozen=True)
class ZeroEntry:
    n: int
    m: int
    zero: float
    residual: float


@dataclass(frozen=True)
class ZeroTable:
    """Certified zeros for one family, sorted by ``(n, m)``."""

    family: str
    radius: float
    entries: tuple[ZeroEntry, ...]

    def zeros(self, n: int) -> list[float]:
        return [e.zero for e in self.entries if e.n == n]

    def lookup(self, n: int, m: int) -> float:
        for e in self.entries:
            if e.n == n and e.m == m:
                return e.zero
        raise KeyError((n, m))

    @property
    def n_max(self) -> int:
        return max(e.n for e in self.entries)

    @property
    def m_max(self) -> int:
        return max(e.m for e in self.entries)


def family_min_order(family: str) -> int:
    if family == "curl":
        return 1
    if family == "graddiv":
        return 0
    raise DomainError(f"unknown zero family {family!r}")


def build_zero_table(family: str, n_max: int, m_max: int, radius: float = 1.0) -> ZeroTable:
    """Zero table for ``family`` in {'curl', 'graddiv'} covering n <= n_max, m <= m_max."""
    n_min = family_min_order(family)
    if n_max < n_min:
        raise DomainError(f"{family} family requires n_max >= {n_min}, got {n_max}")
    if not radius > 0:
        raise DomainError("radius must be > 0")
    entries = []
    for n in range(n_min, n_max + 1):
        if family == "curl":
            zs, fn = curl_zeros(n, m_max), psi
        else:
            zs, fn = graddiv_zeros(n, m_max), dpsi
        for m, z in enumerate(zs, start=1):
            entries.append(ZeroEntry(n, m, z, abs(fn(n, z))))
    return ZeroTable(family, float(radius), tuple(entries))
