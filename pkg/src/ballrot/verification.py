"""Invariant checks behind ``ballrot verify``.

Each suite returns ``Check`` rows.  Values are rounded in the rendered
report so that identical configurations give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import spherical_jn

from . import calculus, specfun
from .ballgrid import BallGrid, build_grid, inner_product, l2_norm
from .eigenbasis import Basis, enumerate_modes
from .harmonics import harmonic_table
from .solver import (ModeCombination, build_bases, default_grid, helmholtz_decompose,
                     make_preset, solve_problem1, solve_problem2)
from .spectral import (SpectralCoefficients, apply_S, bilinear, gram_matrix,
                       graddiv_bound_constants, operator_bound_constants, sobolev_norm,
                       synthesize_on_grid)

SUITES = ("specfun", "harmonics", "gram", "eigen", "parseval", "solver", "identity",
          "bounds", "selfadjoint")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    tolerance: float
    passed: bool

    def row(self) -> list:
        return [self.suite, self.name, f"{self.value:.3e}", f"{self.tolerance:.1e}",
                "pass" if self.passed else "FAIL"]


def _check(suite, name, value, tol) -> Check:
    value = float(value)
    return Check(suite, name, value, float(tol), bool(math.isfinite(value) and value <= tol))


@dataclass
class VerifyConfig:
    radius: float = 1.0
    n_max: int = 4
    m_max: int = 3
    grid: tuple[int, int, int] = (32, 24, 48)
    seed: int = 0
    n_points: int = 200
    step: float = 1e-4  # times R


class Context:
    """Lazily built shared objects so that a suite only pays for what it uses."""

    def __init__(self, cfg: VerifyConfig):
        self.cfg = cfg

    @cached_property
    def basis(self) -> Basis:
        return enumerate_modes("all", self.cfg.n_max, self.cfg.m_max, self.cfg.radius)

    @cached_property
    def bases(self):
        return build_bases(self.cfg.n_max, self.cfg.m_max, self.cfg.radius)

    @cached_property
    def grid(self) -> BallGrid:
        return build_grid(self.cfg.radius, *self.cfg.grid)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed, salt])


def _bisect_zero(f, a, b, tol=1e-14):
    fa = f(a)
    while b - a > tol * max(1.0, b):
        c = 0.5 * (a + b)
        fc = f(c)
        if (fc < 0) == (fa < 0):
            a, fa = c, fc
        else:
            b = c
    return 0.5 * (a + b)


def oracle_zeros(n: int, count: int, derivative: bool = False) -> list[float]:
    """Sign-change scan plus bisection on scipy's spherical Bessel functions."""
    f = (lambda z: spherical_jn(n, z, derivative=True)) if derivative else (lambda z: spherical_jn(n, z))
    out, z, dz = [], 1e-3 if not derivative or n > 0 else 0.5, 0.01
    prev = f(z)
    while len(out) < count:
        nz = z + dz
        cur = f(nz)
        if prev == 0.0 or (prev < 0) != (cur < 0):
            out.append(_bisect_zero(f, z, nz))
        z, prev = nz, cur
    return out


def suite_specfun(ctx: Context) -> list[Check]:
    rows = []
    err_rho = err_alpha = worst_res = 0.0
    for n in range(0, 9):
        if n >= 1:
            oz = oracle_zeros(n, 8)
            err_rho = max(err_rho, max(abs(a - b) for a, b in zip(specfun.curl_zeros(n, 8), oz)))
        oz = oracle_zeros(n, 8, derivative=True)
        err_alpha = max(err_alpha, max(abs(a - b) for a, b in zip(specfun.graddiv_zeros(n, 8), oz)))
    for fam in ("curl", "graddiv"):
        t = specfun.build_zero_table(fam, 8, 8)
        worst_res = max(worst_res, max(e.residual for e in t.entries))
    rows.append(_check("specfun", "rho_nm vs bisection oracle (n,m<=8)", err_rho, 1e-12))
    rows.append(_check("specfun", "alpha_nm vs bisection oracle (n,m<=8)", err_alpha, 1e-12))
    rows.append(_check("specfun", "certified residual bound", worst_res, specfun.RESIDUAL_BOUND))
    pi_err = max(abs(z - m * math.pi) for m, z in enumerate(specfun.curl_zeros(0, 8), start=1))
    rows.append(_check("specfun", "rho_0m = m pi", pi_err, 1e-13))
    id_err = max(abs(a - b) for a, b in zip(specfun.graddiv_zeros(0, 8), specfun.curl_zeros(1, 8)))
    rows.append(_check("specfun", "alpha_0m = rho_1m", id_err, 1e-13))
    z = np.linspace(0.01, 60.0, 400)
    psi_err = max(float(np.max(np.abs(specfun.psi_array(n, z) - spherical_jn(n, z)))) for n in range(0, 17))
    rows.append(_check("specfun", "psi_n vs scipy spherical_jn (n<=16)", psi_err, 1e-13))
    return rows


def suite_harmonics(ctx: Context) -> list[Check]:
    n_max = 2 * ctx.cfg.n_max
    ct, wt = np.polynomial.legendre.leggauss(n_max + 2)
    n_phi = 2 * n_max + 4
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    C, P = np.meshgrid(ct, phi, indexing="ij")
    W = np.outer(wt, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
    tab = harmonic_table(n_max, C.ravel(), np.sqrt(1 - C.ravel() ** 2), np.cos(P.ravel()), np.sin(P.ravel()))
    G = (tab.Y * W) @ tab.Y.T
    return [_check("harmonics", f"Y_n^k orthonormality on S^2 (n<={n_max})",
                   np.max(np.abs(G - np.eye(G.shape[0]))), 1e-12)]


def suite_gram(ctx: Context) -> list[Check]:
    G = gram_matrix(ctx.basis, ctx.grid)
    dev = np.max(np.abs(G - np.eye(len(ctx.basis))))
    fm = ctx.basis.family_mask
    cross = np.max(np.abs(G[np.ix_(fm["graddiv"], ~fm["graddiv"])]))
    return [_check("gram", f"Gram - I, {len(ctx.basis)} modes, grid {ctx.grid.shape}", dev, 1e-8),
            _check("gram", "gradient/curl cross block", cross, 1e-8)]


def eigen_residuals(basis: Basis, points: np.ndarray, h: float) -> dict[str, float]:
    """Worst relative FD eigen-relation residuals per check over all modes of a basis."""
    R = basis.radius

    def ev(p):
        return basis.evaluate(p)

    q = ev(points)
    qinf = np.max(np.abs(q), axis=(1, 2))
    curl = calculus.fd_curl(ev, points, h, R)
    div = calculus.fd_div(ev, points, h, R)
    gd = calculus.fd_graddiv(ev, points, h, R)
    out = {"curl": 0.0, "div": 0.0, "graddiv": 0.0, "irrotational": 0.0}
    for i, mode in enumerate(basis.modes):
        kap = mode.wavenumber
        if mode.is_curl:
            r = np.max(np.abs(curl[i] - mode.eigenvalue * q[i])) / (kap * qinf[i])
            out["curl"] = max(out["curl"], r)
            out["div"] = max(out["div"], np.max(np.abs(div[i])) / (kap * qinf[i]))
        else:
            r = np.max(np.abs(gd[i] - mode.eigenvalue * q[i])) / (kap**2 * qinf[i])
            out["graddiv"] = max(out["graddiv"], r)
            out["irrotational"] = max(out["irrotational"], np.max(np.abs(curl[i])) / (kap * qinf[i]))
    return {k: float(v) for k, v in out.items()}


def suite_eigen(ctx: Context) -> list[Check]:
    R = ctx.cfg.radius
    h = ctx.cfg.step * R
    pts = calculus.random_interior_points(ctx.cfg.n_points, R, 3 * h, ctx.cfg.seed)
    res = eigen_residuals(ctx.basis, pts, h)
    return [_check("eigen", "rot q -+ lam q (rel. |lam| |q|inf)", res["curl"], 1e-5),
            _check("eigen", "grad div q + nu^2 q (rel. nu^2 |q|inf)", res["graddiv"], 1e-4),
            _check("eigen", "div of curl modes (rel.)", res["div"], 1e-6),
            _check("eigen", "curl of gradient modes (rel.)", res["irrotational"], 1e-6)]


def _random_span(ctx: Context, salt: int, count: int = 6) -> SpectralCoefficients:
    rng = ctx.rng(salt)
    v = np.zeros(len(ctx.basis))
    v[rng.choice(len(ctx.basis), size=count, replace=False)] = rng.normal(size=count)
    return SpectralCoefficients(ctx.basis, v)


def parseval_sequence(radius: float, n_values=(2, 4, 6), m_max: int = 3) -> list[float]:
    """Relative span defect of the parabolic rotation field for growing ``n_max``.

    The m_max levels are scaled with n_max so that the radial resolution grows too.
    """
    f = make_preset("rotation", axis=(0.3, -0.2, 1.0), profile="parabolic", radius=radius)
    out = []
    for n in n_values:
        bases = build_bases(n, m_max + n // 2, radius)
        g = default_grid(bases)
        d = helmholtz_decompose(g.sample(f), bases)
        out.append(d.span_defect / d.norm2)
    return out


def suite_parseval(ctx: Context) -> list[Check]:
    c = _random_span(ctx, 1)
    fs = synthesize_on_grid(c, ctx.grid)
    d = helmholtz_decompose(fs, ctx.bases)
    rows = [_check("parseval", "span defect / |f|^2", abs(d.span_defect) / inner_product(fs, fs), 1e-8)]
    seq = parseval_sequence(ctx.cfg.radius)
    drop = max(b - a for a, b in zip(seq, seq[1:]))  # must be < 0
    rows.append(Check("parseval", "non-span defect decreases over n_max 2,4,6",
                      float(drop), 0.0, bool(drop < 0)))
    return rows


def suite_solver(ctx: Context) -> list[Check]:
    rows = []
    b = ctx.bases
    grid = ctx.grid
    rng = ctx.rng(2)
    keys = [m.key for m in b.curl.modes[:: max(1, len(b.curl) // 3)]][:3]
    keys += [m.key for m in b.graddiv.modes[:: max(1, len(b.graddiv) // 2)]][:2]
    f = ModeCombination([(k, float(rng.normal())) for k in keys], ctx.cfg.radius)
    l2 = fd = 0.0
    for prob, shift in ((1, 1.0), (1, -2.5), (2, 1.0), (2, 30.0)):
        solve = solve_problem1 if prob == 1 else solve_problem2
        s = solve(f, shift, b, grid, n_residual=ctx.cfg.n_points, seed=ctx.cfg.seed)
        l2 = max(l2, s.diagnostics["l2_residual"] / s.diagnostics["l2_norm_f"])
        fd = max(fd, s.diagnostics["fd_residual"])
    rows.append(_check("solver", "span solve L2 residual / |f|", l2, 1e-8))
    rows.append(_check("solver", "span solve FD residual", fd, 1e-6))
    bad = 0
    for mode in (b.curl.mode("curl_minus", 1, 1, 0), b.curl.mode("curl_plus", 2, 1, 1)):
        s = solve_problem1(ModeCombination([(mode.key, 1.0)], ctx.cfg.radius), -mode.eigenvalue,
                           b, grid, n_residual=0)
        bad += abs(s.fredholm.kernel_dimension - (2 * mode.n + 1)) + int(s.solvable)
    g = b.graddiv.mode("graddiv", 2, 1, 0)
    s = solve_problem2(ModeCombination([(g.key, 1.0)], ctx.cfg.radius), -g.eigenvalue,
                       b, grid, n_residual=0)
    bad += abs(s.fredholm.kernel_dimension - (2 * g.n + 1)) + int(s.solvable)
    rows.append(_check("solver", "Fredholm kernel dimension = 2n+1 (mismatches)", bad, 0))
    return rows


def suite_identity(ctx: Context) -> list[Check]:
    rows = []
    curl = ctx.basis.subset("curl")
    rng = ctx.rng(3)
    v = np.zeros(len(curl))
    v[rng.choice(len(curl), size=3, replace=False)] = rng.normal(size=3)
    c = SpectralCoefficients(curl, v)
    for k in (1, 2):
        lhs = float(np.sum(curl.eigenvalues ** (2 * k) * v**2))
        ck = c
        for _ in range(k):
            ck = apply_S(ck)
        rows.append(_check("identity", f"sum lam^{2 * k} c^2 = |rot^{k} f|^2 (rel.)",
                           abs(lhs - ck.energy()) / lhs, 1e-10))
    # field side: the grid norm of the synthesised rot f
    lhs = float(np.sum(curl.eigenvalues**2 * v**2))
    grid_norm = l2_norm(synthesize_on_grid(apply_S(c), ctx.grid)) ** 2
    rows.append(_check("identity", "|rot f|^2 on grid vs coefficients (rel.)",
                       abs(grid_norm - lhs) / lhs, 1e-8))
    return rows


def suite_bounds(ctx: Context, n_vectors: int = 50) -> list[Check]:
    curl = ctx.basis.subset("curl")
    grad = ctx.basis.subset("graddiv")
    rng = ctx.rng(4)
    worst, attain = -np.inf, 0.0
    for lam in (-7.0, -1.0, 0.5, 2.0, 5.0):
        for m in (0, 1, 2):
            bc = operator_bound_constants(lam, curl, m)
            d = lam + curl.eigenvalues
            for _ in range(n_vectors):
                c = SpectralCoefficients(curl, rng.normal(size=len(curl)))
                u = SpectralCoefficients(curl, c.values / d)
                fw = SpectralCoefficients(curl, c.values * d)
                worst = max(worst,
                            sobolev_norm(fw, m).norm - bc.c * sobolev_norm(c, m + 1).norm,
                            sobolev_norm(u, m + 1).norm - bc.C * sobolev_norm(c, m).norm)
            e = SpectralCoefficients.unit(curl, bc.C_mode)
            ratio = (sobolev_norm(SpectralCoefficients(curl, e.values / d), m + 1).norm
                     / sobolev_norm(e, m).norm)
            attain = max(attain, abs(ratio - bc.C_enumerated))
    for nu2 in (1.0, 30.0):
        for k in (0, 1):
            bc = graddiv_bound_constants(nu2, grad, k)
            d = nu2 + grad.eigenvalues
            for _ in range(n_vectors):
                c = SpectralCoefficients(grad, rng.normal(size=len(grad)))
                u = SpectralCoefficients(grad, c.values / d)
                worst = max(worst, sobolev_norm(u, k + 1).norm - bc.C * sobolev_norm(c, k).norm)
    return [Check("bounds", "bound violation (max over sweep, must be <= 0)", float(worst), 0.0,
                  bool(worst <= 0.0)),
            _check("bounds", "C attained at reported mode", attain, 1e-12)]


def suite_selfadjoint(ctx: Context) -> list[Check]:
    curl = ctx.basis.subset("curl")
    rng = ctx.rng(5)
    sym = 0.0
    for _ in range(20):
        a = SpectralCoefficients(curl, rng.normal(size=len(curl)))
        b = SpectralCoefficients(curl, rng.normal(size=len(curl)))
        x, y = bilinear(apply_S(a), b), bilinear(a, apply_S(b))
        sym = max(sym, abs(x - y) / max(abs(x), 1.0))
    a = SpectralCoefficients(curl, rng.normal(size=len(curl)) * (rng.uniform(size=len(curl)) < 0.1))
    b = SpectralCoefficients(curl, rng.normal(size=len(curl)) * (rng.uniform(size=len(curl)) < 0.1))
    Sa, Sb = synthesize_on_grid(apply_S(a), ctx.grid), synthesize_on_grid(apply_S(b), ctx.grid)
    fa, fb = synthesize_on_grid(a, ctx.grid), synthesize_on_grid(b, ctx.grid)
    x, y = inner_product(Sa, fb), inner_product(fa, Sb)
    scale = l2_norm(Sa) * l2_norm(fb) + l2_norm(fa) * l2_norm(Sb)
    return [_check("selfadjoint", "(Sa, b) - (a, Sb) coefficients (rel.)", sym, 1e-12),
            _check("selfadjoint", "(Sa, b) - (a, Sb) on grid (rel.)", abs(x - y) / scale, 1e-8)]


_SUITE_FUNCS = {
    "specfun": suite_specfun,
    "harmonics": suite_harmonics,
    "gram": suite_gram,
    "eigen": suite_eigen,
    "parseval": suite_parseval,
    "solver": suite_solver,
    "identity": suite_identity,
    "bounds": suite_bounds,
    "selfadjoint": suite_selfadjoint,
}


def run_suites(names, cfg: VerifyConfig | None = None) -> list[Check]:
    cfg = cfg or VerifyConfig()
    ctx = Context(cfg)
    rows: list[Check] = []
    for name in names:
        rows += _SUITE_FUNCS[name](ctx)
    return rows


def render(rows: list[Check], fmt: str = "text") -> str:
    header = ["suite", "check", "value", "tolerance", "status"]
    if fmt == "json":
        return json.dumps([dict(zip(header, r.row())) for r in rows], indent=1) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(r.row() for r in rows)
        return buf.getvalue()
    table = [header] + [r.row() for r in rows]
    widths = [max(len(t[i]) for t in table) for i in range(5)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(t, widths)).rstrip() for t in table]
    n_fail = sum(not r.passed for r in rows)
    lines.append(f"{len(rows) - n_fail}/{len(rows)} checks passed")
    return "\n".join(lines) + "\n"
