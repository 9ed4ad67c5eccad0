"""Boundary-value problems in L2 of the ball by the eigenfunction series method.

Problem 1:  rot u + lam u = f,        Problem 2:  grad div w + nu2 w = f.

``f`` is split into its potential part ``f_A`` (gradient family) and its
vortex part ``f_V`` (curl families).  Then

    u_A = f_A / lam,          u_V = (S + lam)^{-1} f_V,
    w_A = (N_d + nu2)^{-1} f_A,   w_V = f_V / nu2.

Whenever ``f`` can be evaluated pointwise the scalar-multiple side is taken
from ``f`` itself (``u_A = (f - f_V) / lam``), so it is not truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import calculus
from .ballgrid import BallGrid, FieldSamples, build_grid, l2_norm
from .eigenbasis import Basis, enumerate_modes, resolve_families
from .exceptions import DomainError, IllPosedError
from .spectral import (
    FredholmReport,
    ResonanceError,
    SpectralCoefficients,
    apply_Nd,
    apply_S,
    graddiv_bound_constants,
    operator_bound_constants,
    project,
    resolvent_curl,
    resolvent_graddiv,
    sobolev_norm,
    synthesize,
    synthesize_on_grid,
)
from .ballgrid import inner_product


@dataclass(frozen=True, eq=False)
class SpectralBases:
    """The gradient-family and curl-family bases used by the solvers."""

    graddiv: Basis
    curl: Basis

    @property
    def radius(self) -> float:
        return self.curl.radius

    @property
    def n_max(self) -> int:
        return max(self.curl.n_max, self.graddiv.n_max)


def build_bases(n_max: int, m_max: int, radius: float = 1.0) -> SpectralBases:
    return SpectralBases(enumerate_modes("graddiv", n_max, m_max, radius),
                         enumerate_modes("curl", n_max, m_max, radius))


def default_grid(bases: SpectralBases) -> BallGrid:
    """A grid whose resolution covers products of any two basis modes."""
    kmax = max(float(np.max(bases.curl.wavenumbers)), float(np.max(bases.graddiv.wavenumbers)))
    n_r = max(32, int(math.ceil(1.2 * kmax * bases.radius)) + 16)
    n_t = max(24, 2 * bases.n_max + 8)
    return build_grid(bases.radius, min(n_r, 512), min(n_t, 256), min(2 * n_t, 512))


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Helmholtz-Weyl split of a field: ``f = f_A + f_V`` (+ unresolved remainder)."""

    f_A: SpectralCoefficients
    f_V: SpectralCoefficients
    span_defect: float
    norm2: float

    def energy_fractions(self) -> dict[str, float]:
        if self.norm2 <= 0:
            return {"A": 0.0, "V": 0.0, "defect": 0.0}
        return {"A": self.f_A.energy() / self.norm2,
                "V": self.f_V.energy() / self.norm2,
                "defect": self.span_defect / self.norm2}


def helmholtz_decompose(f: FieldSamples, bases: SpectralBases) -> Decomposition:
    f_A = project(f, bases.graddiv)
    f_V = project(f, bases.curl)
    n2 = inner_product(f, f)
    return Decomposition(f_A, f_V, n2 - f_A.energy() - f_V.energy(), n2)


# ---------------------------------------------------------------- field inputs

class ModeCombination:
    """A finite combination of eigenfields, ``sum c (family, n, m, k)``."""

    def __init__(self, terms, radius: float = 1.0):
        terms = [(tuple(key), float(c)) for key, c in terms]
        seen = set()
        for key, _ in terms:
            if key in seen:
                raise DomainError(f"duplicate mode {key}")
            seen.add(key)
        self.terms = tuple(terms)
        self.radius = float(radius)
        fams = tuple(sorted({k[0] for k, _ in terms})) or ("graddiv",)
        fams = resolve_families(fams)
        n_top = max([k[1] for k, _ in terms] + [1])
        m_top = max([k[2] for k, _ in terms] + [1])
        self.source_basis = enumerate_modes(fams, n_top, m_top, radius)
        self.coefficients = SpectralCoefficients.from_mapping(self.source_basis, dict(terms))

    def __call__(self, points) -> np.ndarray:
        return synthesize(self.coefficients, points)

    def decompose(self, bases: SpectralBases, grid: BallGrid | None = None) -> Decomposition:
        f_A = self.coefficients.restrict(bases.graddiv)
        f_V = self.coefficients.restrict(bases.curl)
        n2 = self.coefficients.energy()
        return Decomposition(f_A, f_V, n2 - f_A.energy() - f_V.energy(), n2)


class AnalyticField:
    """A vectorised callable ``points -> values`` with a name for reports."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], name: str = "analytic"):
        self.func = func
        self.name = name

    def __call__(self, points) -> np.ndarray:
        return np.asarray(self.func(np.asarray(points, dtype=float).reshape(-1, 3)), dtype=float)

    def decompose(self, bases: SpectralBases, grid: BallGrid | None = None) -> Decomposition:
        grid = grid or default_grid(bases)
        return helmholtz_decompose(grid.sample(self), bases)


def _unit(v, name) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (3,) or not np.all(np.isfinite(v)) or not np.linalg.norm(v) > 0:
        raise DomainError(f"{name} must be a nonzero finite 3-vector")
    return v


def constant_field(direction=(0.0, 0.0, 1.0)) -> AnalyticField:
    """``f = d``, the gradient of ``d . x``."""
    d = np.asarray(direction, dtype=float).reshape(-1)
    if d.shape != (3,) or not np.all(np.isfinite(d)):
        raise DomainError("direction must be a finite 3-vector")
    return AnalyticField(lambda p: np.broadcast_to(d, p.shape).copy(), "constant")


def rotation_field(axis=(0.0, 0.0, 1.0), profile: str = "rigid", radius: float = 1.0) -> AnalyticField:
    """``f = w x x`` (rigid) or ``(1 - |x|^2/R^2) w x x`` (parabolic).

    Both are solenoidal with zero normal trace but are not finite sums of
    curl eigenfields.
    """
    w = _unit(axis, "axis")
    if profile not in ("rigid", "parabolic"):
        raise DomainError(f"unknown rotation profile {profile!r}")
    R2 = float(radius) ** 2

    def f(p):
        v = np.cross(w, p)
        if profile == "parabolic":
            v = v * (1.0 - np.sum(p * p, axis=1) / R2)[:, None]
        return v

    return AnalyticField(f, f"rotation-{profile}")


def gradient_field(axis: int = 0) -> AnalyticField:
    """``f = grad(x_a**2) = 2 x_a e_a``."""
    if axis not in (0, 1, 2):
        raise DomainError("axis must be 0, 1 or 2")

    def f(p):
        v = np.zeros_like(p)
        v[:, axis] = 2.0 * p[:, axis]
        return v

    return AnalyticField(f, "gradient")


PRESETS = {"constant": constant_field, "rotation": rotation_field, "gradient": gradient_field}


def make_preset(name: str, **params) -> AnalyticField:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory(**params)


# ------------------------------------------------------------------ solutions

@dataclass(eq=False)
class Solution:
    """Series solution of Problem 1 or 2 with its diagnostics.

    ``coeffs_A`` / ``coeffs_V`` are the truncated series coefficients;
    ``None`` when the problem is not solvable (see ``fredholm``).
    """

    problem: int
    shift: float
    solvable: bool
    decomposition: Decomposition
    coeffs_A: SpectralCoefficients | None
    coeffs_V: SpectralCoefficients | None
    fredholm: FredholmReport | None = None
    source: Callable | None = field(default=None, repr=False)
    diagnostics: dict = field(default_factory=dict)

    def __call__(self, points) -> np.ndarray:
        """Evaluate the solution field at points in the ball."""
        if not self.solvable:
            raise IllPosedError("problem has no solution; see the Fredholm report")
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        d = self.decomposition
        if self.source is None:
            return synthesize(self.coeffs_A, pts) + synthesize(self.coeffs_V, pts)
        f = self.source(pts)
        if self.problem == 1:
            corr = self.coeffs_V - d.f_V * (1.0 / self.shift)
            return f / self.shift + synthesize(corr, pts)
        corr = self.coeffs_A - d.f_A * (1.0 / self.shift)
        return f / self.shift + synthesize(corr, pts)

    def coefficient_dict(self) -> dict:
        out = {}
        for c in (self.coeffs_A, self.coeffs_V):
            if c is not None:
                out.update(c.as_dict())
        return out


def _as_input(f, bases: SpectralBases, grid: BallGrid | None):
    """Return (decomposition, pointwise source or None, samples or None)."""
    if isinstance(f, FieldSamples):
        return helmholtz_decompose(f, bases), None, f
    if isinstance(f, Decomposition):
        return f, None, None
    if isinstance(f, (ModeCombination, AnalyticField)):
        return f.decompose(bases, grid), f, None
    if callable(f):
        af = AnalyticField(f)
        return af.decompose(bases, grid), af, None
    raise TypeError(f"unsupported field input {type(f).__name__}")


def _check_shift(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise IllPosedError(f"{name} must be finite")
    if value == 0.0:
        raise IllPosedError(
            f"{name} = 0 is a spectrum point of infinite multiplicity; the problem is not Fredholm")
    return value


def solve_problem1(f, lam: float, bases: SpectralBases, grid: BallGrid | None = None,
                   n_residual: int = 200, seed: int = 0, step: float | None = None) -> Solution:
    """Solve ``rot u + lam u = f`` with ``lam != 0``."""
    lam = _check_shift(lam, "lam")
    dec, source, samples = _as_input(f, bases, grid)
    u_A = dec.f_A * (1.0 / lam)
    res = resolvent_curl(dec.f_V, lam)
    report = None
    if isinstance(res, FredholmReport):
        report = res
        if not res.solvable:
            return Solution(1, lam, False, dec, None, None, report, source,
                            {"fredholm": report.describe()})
        u_V = res.particular
    else:
        u_V = res
    sol = Solution(1, lam, True, dec, u_A, u_V, report, source)
    _fill_diagnostics(sol, source, samples, grid, bases, n_residual, seed, step)
    return sol


def solve_problem2(f, nu2: float, bases: SpectralBases, grid: BallGrid | None = None,
                   n_residual: int = 200, seed: int = 0, step: float | None = None) -> Solution:
    """Solve ``grad div w + nu2 w = f`` with ``nu2 != 0``."""
    nu2 = _check_shift(nu2, "nu2")
    dec, source, samples = _as_input(f, bases, grid)
    w_V = dec.f_V * (1.0 / nu2)
    res = resolvent_graddiv(dec.f_A, nu2)
    report = None
    if isinstance(res, FredholmReport):
        report = res
        if not res.solvable:
            return Solution(2, nu2, False, dec, None, None, report, source,
                            {"fredholm": report.describe()})
        w_A = res.particular
    else:
        w_A = res
    sol = Solution(2, nu2, True, dec, w_A, w_V, report, source)
    _fill_diagnostics(sol, source, samples, grid, bases, n_residual, seed, step)
    return sol


def l2_residual(sol: Solution, f_samples: FieldSamples) -> float:
    """``||L u + shift u - f||`` on the grid for the truncated series solution."""
    grid = f_samples.grid
    u = synthesize_on_grid(sol.coeffs_A, grid) + synthesize_on_grid(sol.coeffs_V, grid)
    if sol.problem == 1:
        Lu = synthesize_on_grid(apply_S(sol.coeffs_V), grid)
    else:
        Lu = synthesize_on_grid(apply_Nd(sol.coeffs_A), grid)
    return l2_norm(Lu + sol.shift * u - f_samples)


def residual(sol: Solution, f: Callable, problem: int | None = None, n_samples: int = 200,
             h: float | None = None, seed: int = 0) -> float:
    """Relative pointwise residual from finite differences at random interior points.

    ``max |L u + c u - f| / ((|c| + 1) max |f|)`` where ``L`` is the finite
    difference curl (Problem 1) or grad div (Problem 2).  Points within
    ``3h`` of the boundary are excluded.
    """
    problem = problem or sol.problem
    R = sol.decomposition.f_V.basis.radius
    h = h if h is not None else calculus.DEFAULT_STEP * R
    pts = calculus.random_interior_points(n_samples, R, 3.0 * h, seed)
    fv = np.asarray(f(pts), dtype=float)
    if not sol.solvable:
        raise IllPosedError("no solution to measure")
    u = sol(pts)
    if problem == 1:
        Lu = calculus.fd_curl(sol, pts, h, R)
    else:
        Lu = calculus.fd_graddiv(sol, pts, h, R)
    err = float(np.max(np.abs(Lu + sol.shift * u - fv))) if len(pts) else 0.0
    scale = float(np.max(np.abs(fv))) if fv.size else 0.0
    if scale == 0.0:
        return err
    return err / ((abs(sol.shift) + 1.0) * scale)


def _class_report(sol: Solution, orders=(0, 1, 2)) -> list[dict]:
    """Mapping-property bookkeeping: level m data in, level m+1 (or k+1) out."""
    rows = []
    d = sol.decomposition
    if sol.problem == 1:
        f_c, u_c, basis = d.f_V, sol.coeffs_V, d.f_V.basis
        bound = lambda m: operator_bound_constants(sol.shift, basis, m)  # noqa: E731
    else:
        f_c, u_c, basis = d.f_A, sol.coeffs_A, d.f_A.basis
        bound = lambda m: graddiv_bound_constants(sol.shift, basis, m)  # noqa: E731
    for m in orders:
        fn = sobolev_norm(f_c, m)
        un = sobolev_norm(u_c, m + 1)
        try:
            C = bound(m).C
        except ResonanceError:
            C = None
        rows.append({
            "order_in": m,
            "order_out": m + 1,
            "f_norm": fn.norm,
            "u_norm": un.norm,
            "C": C,
            "holds": None if C is None else bool(un.norm <= C * fn.norm * (1 + 1e-12) + 1e-300),
            "u_decay_exponent": un.decay_exponent,
            "u_tail_fraction": un.tail_fraction,
        })
    return rows


def _fill_diagnostics(sol: Solution, source, samples, grid, bases, n_residual, seed, step):
    d = sol.decomposition
    diag = sol.diagnostics
    diag["span_defect"] = d.span_defect
    diag["norm2_f"] = d.norm2
    diag["truncation"] = {"n_max": bases.n_max, "m_max": bases.curl.m_max,
                          "modes": len(bases.curl) + len(bases.graddiv)}
    if sol.fredholm is not None:
        diag["fredholm"] = sol.fredholm.describe()
    if samples is None and source is not None:
        g = grid or default_grid(bases)
        samples = g.sample(source)
    if samples is not None:
        diag["l2_residual"] = l2_residual(sol, samples)
        diag["l2_norm_f"] = math.sqrt(max(d.norm2, 0.0))
    if source is not None and n_residual > 0:
        diag["fd_residual"] = residual(sol, source, n_samples=n_residual, h=step, seed=seed)
    diag["class"] = _class_report(sol)
