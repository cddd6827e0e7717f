import numpy as np
import pytest

from roughbody.poly import Poly, integrate_over_simplex

TRI = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_affine_eval():
    p = Poly.affine(2, np.array([2.0, -1.0]), 3.0)
    assert p(np.array([1.0, 2.0])) == pytest.approx(3.0)


def test_mul_and_diff():
    x = Poly.affine(2, np.array([1.0, 0.0]), 0.0)
    y = Poly.affine(2, np.array([0.0, 1.0]), 0.0)
    xy = x * y
    assert xy(np.array([3.0, 4.0])) == pytest.approx(12.0)
    assert xy.diff(0)(np.array([3.0, 4.0])) == pytest.approx(4.0)


def test_integrate_constant_gives_volume():
    one = Poly.constant(2, 1.0)
    assert integrate_over_simplex(one, TRI, 0.5) == pytest.approx(0.5)


def test_integrate_monomials_on_reference_triangle():
    # int_T x = 1/6, int_T x y = 1/24, int_T x^2 = 1/12 over the unit right triangle
    x = Poly.affine(2, np.array([1.0, 0.0]), 0.0)
    y = Poly.affine(2, np.array([0.0, 1.0]), 0.0)
    assert integrate_over_simplex(x, TRI, 0.5) == pytest.approx(1.0 / 6.0)
    assert integrate_over_simplex(x * y, TRI, 0.5) == pytest.approx(1.0 / 24.0)
    assert integrate_over_simplex(x * x, TRI, 0.5) == pytest.approx(1.0 / 12.0)
    # degree three, against the closed form int x^2 y = 1/60
    assert integrate_over_simplex(x * x * y, TRI, 0.5) == pytest.approx(1.0 / 60.0)


def test_integration_against_quadrature_oracle(rng):
    """Random quadratics over a random triangle against dense Monte Carlo."""
    V = rng.normal(size=(3, 2))
    E = (V[1:] - V[0]).T
    vol = abs(np.linalg.det(E)) / 2.0
    p = Poly(
        2,
        {
            (0, 0): rng.normal(),
            (1, 0): rng.normal(),
            (0, 1): rng.normal(),
            (2, 0): rng.normal(),
            (1, 1): rng.normal(),
            (0, 2): rng.normal(),
        },
    )
    exact = integrate_over_simplex(p, V, vol)
    # midpoint-subdivision oracle on a fine barycentric grid
    N = 300
    total = 0.0
    count = 0
    for i in range(N):
        for j in range(N - i):
            l1 = (i + 1.0 / 3.0) / N
            l2 = (j + 1.0 / 3.0) / N
            pt = V[0] + l1 * (V[1] - V[0]) + l2 * (V[2] - V[0])
            total += p(pt)
            count += 1
    approx = total / count * vol
    assert exact == pytest.approx(approx, rel=2e-2, abs=2e-2)


def test_compose_affine():
    p = Poly.affine(2, np.array([1.0, 1.0]), 0.0)  # x + y
    M = np.array([[2.0, 0.0], [0.0, 3.0]])
    c = np.array([1.0, -1.0])
    q = p.compose_affine(M, c)  # (1 + 2u) + (-1 + 3v)
    u = np.array([1.0, 1.0])
    assert q(u) == pytest.approx(p(c + M @ u))


def test_segment_integral():
    seg = np.array([[0.0, 0.0], [3.0, 4.0]])
    x = Poly.affine(2, np.array([1.0, 0.0]), 0.0)
    # int over segment of x dH^1 = length * mean(x) = 5 * 1.5
    assert integrate_over_simplex(x, seg, 5.0) == pytest.approx(7.5)
