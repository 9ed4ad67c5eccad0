import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ballrot import calculus
from ballrot.eigenbasis import enumerate_modes
from ballrot.exceptions import DomainError


def rotation(p):
    return np.stack([-p[:, 1], p[:, 0], np.zeros(len(p))], 1)


def grad_x2_y2(p):
    return np.stack([2 * p[:, 0], 2 * p[:, 1], np.zeros(len(p))], 1)


def identity(p):
    return p.copy()


def poly_field(coef):
    # random cubic vector field from a coefficient array (3, 20)
    def f(p):
        x, y, z = p.T
        mons = np.stack([np.ones_like(x), x, y, z, x * x, y * y, z * z, x * y, y * z, x * z,
                         x**3, y**3, z**3, x * x * y, x * x * z, y * y * x, y * y * z, z * z * x,
                         z * z * y, x * y * z])
        return (coef @ mons).T
    return f


def test_curl_examples():
    x = np.array([0.1, -0.2, 0.3])
    assert_allclose(calculus.fd_curl(rotation, x, 1e-3), [0, 0, 2], atol=1e-12)
    assert np.max(np.abs(calculus.fd_curl(grad_x2_y2, x, 1e-3))) < 1e-10


def test_identity_field():
    x = np.array([[0.1, 0.2, 0.3], [-0.4, 0.0, 0.1]])
    assert_allclose(calculus.fd_div(identity, x, 1e-3), [3, 3], rtol=1e-12)
    assert np.max(np.abs(calculus.fd_graddiv(identity, x, 1e-3))) < 1e-8
    assert np.max(np.abs(calculus.fd_laplacian(identity, x, 1e-3))) < 1e-8


def test_lowest_curl_eigenfield():
    b = enumerate_modes("curl_plus", 1, 1)
    x = np.array([[0.2, 0.1, -0.3]])
    f = lambda p: b.evaluate(p)[0]
    c = calculus.fd_curl(f, x, 1e-4)
    assert_allclose(c, b.eigenvalues[0] * f(x), rtol=1e-5, atol=1e-5 * np.max(np.abs(f(x))))


def test_graddiv_eigenfield():
    b = enumerate_modes("graddiv", 2, 1)
    x = np.array([[0.2, 0.1, -0.3]])
    f = lambda p: b.evaluate(p)[4]
    g = calculus.fd_graddiv(f, x, 1e-4)
    scale = b.wavenumbers[4] ** 2 * np.max(np.abs(f(x)))
    assert np.max(np.abs(g - b.eigenvalues[4] * f(x))) < 1e-4 * scale


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_vector_laplacian_identity(seed):
    rng = np.random.default_rng(seed)
    f = poly_field(rng.normal(size=(3, 20)))
    x = rng.uniform(-0.4, 0.4, size=(4, 3))
    h = 1e-3
    lap = calculus.fd_laplacian(f, x, h)
    gd = calculus.fd_graddiv(f, x, h)
    cc = calculus.fd_curl(lambda p: calculus.fd_curl(f, p, h), x, h)
    assert_allclose(lap, gd - cc, atol=1e-6 * (1 + np.max(np.abs(lap))))
    assert_allclose(calculus.fd_curl_curl(f, x, h), gd - lap, atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_rot_grad_and_div_rot_vanish(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=4)
    grad = lambda p: np.stack([a[0] * np.cos(p[:, 0]) * p[:, 1], a[0] * np.sin(p[:, 0]) + a[1] * p[:, 2],
                               a[1] * p[:, 1] + 3 * a[2] * p[:, 2] ** 2], 1)
    x = rng.uniform(-0.4, 0.4, size=(5, 3))
    assert np.max(np.abs(calculus.fd_curl(grad, x, 1e-4))) < 1e-7
    f = poly_field(rng.normal(size=(3, 20)))
    assert np.max(np.abs(calculus.fd_div(lambda p: calculus.fd_curl(f, p, 1e-3), x, 1e-3))) < 1e-6


def test_second_order_accuracy():
    f = lambda p: np.stack([np.sin(2 * p[:, 1]) * p[:, 2], np.exp(p[:, 0]), np.cos(3 * p[:, 0] * p[:, 1])], 1)
    g = lambda p: np.stack([np.sin(p[:, 0]) * p[:, 1], p[:, 0] ** 2 * p[:, 1] ** 2, np.exp(p[:, 2]) * p[:, 0]], 1)

    def curl_f(p):
        x, y, z = p.T
        return np.stack([-3 * x * np.sin(3 * x * y), np.sin(2 * y) + 3 * y * np.sin(3 * x * y),
                         np.exp(x) - 2 * np.cos(2 * y) * z], 1)

    def graddiv_g(p):
        x, y, z = p.T
        return np.stack([-np.sin(x) * y + 4 * x * y + np.exp(z), np.cos(x) + 2 * x * x, x * np.exp(z)], 1)

    x = np.array([[0.3, -0.2, 0.4]])
    for op, exact, fun in ((calculus.fd_curl, curl_f, f), (calculus.fd_graddiv, graddiv_g, g)):
        errs = [np.max(np.abs(op(fun, x, h) - exact(x))) for h in (4e-2, 2e-2)]
        order = np.log2(errs[0] / errs[1])
        assert 1.7 <= order <= 2.3


def test_stencil_leaving_ball():
    with pytest.raises(DomainError):
        calculus.fd_curl(rotation, np.array([0.99995, 0, 0]), 1e-4, radius=1.0)
    with pytest.raises(DomainError):
        calculus.fd_graddiv(rotation, np.array([[0, 0, 0.9999]]), 1e-4, radius=1.0)
    with pytest.raises(DomainError):
        calculus.fd_div(rotation, np.zeros(3), 0.0)


def test_batched_matches_single():
    b = enumerate_modes("all", 2, 1)
    x = calculus.random_interior_points(7, 1.0, 0.01, seed=2)
    many = calculus.fd_curl(b.evaluate, x, 1e-4, 1.0)
    for i in (0, 5, len(b) - 1):
        one = calculus.fd_curl(lambda p: b.evaluate(p)[i], x, 1e-4, 1.0)
        assert_allclose(many[i], one, rtol=0, atol=1e-15)


def test_random_interior_points():
    p = calculus.random_interior_points(500, 2.0, 0.1, seed=9)
    assert p.shape == (500, 3)
    assert np.max(np.linalg.norm(p, axis=1)) <= 1.9
    assert_allclose(p, calculus.random_interior_points(500, 2.0, 0.1, seed=9))
