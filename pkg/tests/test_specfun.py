import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.special import spherical_jn

from ballrot import specfun
from ballrot.exceptions import BracketError, DomainError
from ballrot.verification import oracle_zeros

mpmath.mp.dps = 40


def mp_jn(n, z):
    z = mpmath.mpf(z)
    return mpmath.sqrt(mpmath.pi / (2 * z)) * mpmath.besselj(n + mpmath.mpf(1) / 2, z)


def mp_djn(n, z):
    return mpmath.diff(lambda t: mp_jn(n, t), mpmath.mpf(z))


def mp_zero(n, guess, derivative=False):
    f = (lambda t: mp_djn(n, t)) if derivative else (lambda t: mp_jn(n, t))
    return float(mpmath.findroot(f, guess))


# ------------------------------------------------------------------ psi

def test_psi_examples():
    assert abs(specfun.psi(0, math.pi)) < 1e-15
    assert_allclose(specfun.psi(0, 1.0), 0.8414709848078965, rtol=1e-15)
    assert abs(specfun.psi(1, 4.493409457909064)) < 1e-12


def test_dpsi_examples():
    for z in (1.0, 2.5, 10.0):
        assert_allclose(specfun.dpsi(0, z), -specfun.psi(1, z), rtol=1e-13)
    assert abs(specfun.dpsi(1, 2.0815759778181)) < 1e-12
    assert_allclose(specfun.dpsi(0, math.pi / 2), -4 / math.pi**2, rtol=1e-14)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 20, 40, 64])
def test_psi_matches_mpmath(n):
    z = np.concatenate([np.geomspace(1e-3, 1.0, 7), np.linspace(1.5, 200.0, 23)])
    ref = np.array([float(mp_jn(n, t)) for t in z])
    got = specfun.psi_array(n, z)
    # relative to the local envelope |j_n| + |j_{n+1}|, which is the meaningful scale near zeros
    env = np.abs(ref) + np.array([abs(float(mp_jn(n + 1, t))) for t in z])
    assert np.max(np.abs(got - ref) / env) < 1e-13
    for t, r in zip(z[::5], ref[::5]):
        assert_allclose(specfun.psi(n, float(t)), r, rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("n", [0, 1, 3, 12, 64])
def test_dpsi_matches_mpmath(n):
    z = np.array([1e-3, 0.3, 0.99, 1.0, 2.7, 9.0, 33.3, 77.0, 150.0])
    ref = np.array([float(mp_djn(n, t)) for t in z])
    got = specfun.dpsi_array(n, z)
    env = np.abs(ref) + np.abs(np.array([float(mp_jn(n, t)) for t in z]))
    assert np.max(np.abs(got - ref) / env) < 1e-12
    assert_allclose([specfun.dpsi(n, float(t)) for t in z], got, rtol=1e-13, atol=1e-300)


def test_psi_small_argument_series():
    # leading term z^n / (2n+1)!!
    for n in (0, 1, 4, 9):
        dfact = float(np.prod(np.arange(2 * n + 1, 0, -2))) if n else 1.0
        z = 1e-4
        assert_allclose(specfun.psi(n, z), z**n / dfact, rtol=1e-7)


def test_psi_over_z_regular_at_origin():
    assert_allclose(specfun.psi_over_z_array(1, np.array([0.0, 1e-8])), [1 / 3, 1 / 3], rtol=1e-12)
    assert_allclose(specfun.psi_over_z_array(2, np.array([0.0])), [0.0], atol=0)
    z = np.linspace(0.5, 30, 50)
    assert_allclose(specfun.psi_over_z_array(3, z), spherical_jn(3, z) / z, rtol=1e-12, atol=1e-16)


def test_psi_domain_errors():
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(DomainError):
            specfun.psi(1, bad)
        with pytest.raises(DomainError):
            specfun.dpsi(1, bad)
    with pytest.raises(DomainError):
        specfun.psi(65, 1.0)
    with pytest.raises(DomainError):
        specfun.psi(-1, 1.0)


def test_identity_dpsi0_is_minus_psi1():
    z = np.linspace(0.1, 100.0, 2000)
    a, b = specfun.dpsi_array(0, z), -specfun.psi_array(1, z)
    env = np.abs(b) + np.abs(specfun.psi_array(0, z))
    assert np.max(np.abs(a - b) / env) < 1e-13


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 20), z=st.floats(1.0, 60.0))
def test_three_term_recurrence(n, z):
    lhs = specfun.psi(n - 1, z) + specfun.psi(n + 1, z)
    rhs = (2 * n + 1) / z * specfun.psi(n, z)
    scale = abs(specfun.psi(n - 1, z)) + abs(specfun.psi(n + 1, z)) + abs(rhs)
    assert abs(lhs - rhs) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(n=st.integers(0, 64), z=st.floats(1e-3, 200.0))
def test_psi_vs_scipy_property(n, z):
    ref = spherical_jn(n, z)
    env = abs(ref) + abs(spherical_jn(n + 1, z)) + 1e-300
    assert abs(specfun.psi(n, z) - ref) <= 1e-12 * env


# ------------------------------------------------------------------ zeros

def test_curl_zero_examples():
    assert_allclose(specfun.curl_zeros(1, 1), [4.493409457909064], atol=1e-13)
    assert_allclose(specfun.curl_zeros(0, 3), [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-14)
    assert_allclose(specfun.curl_zeros(2, 1), [5.763459196894550], atol=1e-12)


def test_graddiv_zero_examples():
    # alpha_{0,m} = rho_{1,m}; the second value checked against the mpmath root
    assert_allclose(specfun.graddiv_zeros(0, 2), [4.493409457909064, 7.725251836937707], atol=1e-12)
    assert_allclose(specfun.graddiv_zeros(1, 1), [2.0815759778181], atol=1e-12)
    assert_allclose(specfun.graddiv_zeros(2, 1), [3.342093657365695], atol=1e-12)


@pytest.mark.parametrize("n,m", [(1, 1), (1, 2), (2, 1), (3, 4), (8, 8), (30, 3), (64, 2)])
def test_curl_zeros_match_mpmath(n, m):
    z = specfun.curl_zeros(n, m)[-1]
    assert_allclose(z, mp_zero(n, z), atol=1e-12)


@pytest.mark.parametrize("n,m", [(0, 1), (1, 1), (1, 3), (2, 1), (5, 5), (20, 2), (64, 1)])
def test_graddiv_zeros_match_mpmath(n, m):
    z = specfun.graddiv_zeros(n, m)[-1]
    assert_allclose(z, mp_zero(n, z, derivative=True), atol=1e-12)


def test_zeros_match_bisection_oracle():
    for n in (1, 4, 8):
        assert_allclose(specfun.curl_zeros(n, 8), oracle_zeros(n, 8), atol=1e-12)
    for n in (0, 3, 8):
        assert_allclose(specfun.graddiv_zeros(n, 8), oracle_zeros(n, 8, derivative=True), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 7, 16, 40])
def test_zero_sign_change_and_residual(n):
    for z in specfun.curl_zeros(n, 6):
        assert abs(specfun.psi(n, z)) <= specfun.RESIDUAL_BOUND
        assert specfun.psi(n, z - 1e-10) * specfun.psi(n, z + 1e-10) < 0
    for z in specfun.graddiv_zeros(n, 6):
        assert abs(specfun.dpsi(n, z)) <= specfun.RESIDUAL_BOUND
        assert specfun.dpsi(n, z - 1e-10) * specfun.dpsi(n, z + 1e-10) < 0


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), m=st.integers(1, 6))
def test_interlacing(n, m):
    zn = specfun.curl_zeros(n, m + 1)
    zn1 = specfun.curl_zeros(n + 1, m)
    assert zn[m - 1] < zn1[m - 1] < zn[m]


def test_zeros_strictly_increasing():
    for n in range(0, 12):
        assert np.all(np.diff(specfun.graddiv_zeros(n, 10)) > 0)
        if n:
            assert np.all(np.diff(specfun.curl_zeros(n, 10)) > 0)


def test_zero_errors():
    with pytest.raises(DomainError):
        specfun.curl_zeros(1, 0)
    with pytest.raises(DomainError):
        specfun.graddiv_zeros(65, 1)
    with pytest.raises(DomainError):
        specfun.build_zero_table("curl", 0, 2)
    with pytest.raises(DomainError):
        specfun.build_zero_table("graddiv", 2, 2, radius=0.0)


def test_refine_reports_missing_bracket():
    with pytest.raises(BracketError):
        specfun._refine(lambda x: x * x + 1.0, lambda x: 2 * x, 0.0, 1.0, 0.5)


def test_zero_table_structure_and_determinism():
    t1 = specfun.build_zero_table("curl", 3, 4, radius=2.0)
    t2 = specfun.build_zero_table("curl", 3, 4, radius=2.0)
    assert t1 == t2
    keys = [(e.n, e.m) for e in t1.entries]
    assert keys == sorted(keys) and len(keys) == 12
    assert t1.n_max == 3 and t1.m_max == 4
    assert t1.lookup(2, 1) == specfun.curl_zeros(2, 1)[0]
    assert all(e.residual <= specfun.RESIDUAL_BOUND for e in t1.entries)
    g = specfun.build_zero_table("graddiv", 1, 2)
    assert [e.n for e in g.entries] == [0, 0, 1, 1]
    with pytest.raises(KeyError):
        g.lookup(5, 1)
