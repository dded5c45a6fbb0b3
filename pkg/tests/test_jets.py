from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finsler import jets
from finsler.errors import DomainError, OrderTooHigh
from finsler.jets import ScalarField, TangentPoint, Taylor, eval_jet, fd_partial
from finsler.metrics import builtin_metric


def random_polynomial(rng, n=2, terms=6, degree=4) -> ScalarField:
    mons = []
    for _ in range(terms):
        powers = rng.multinomial(int(rng.integers(0, degree + 1)), [1 / (2 * n)] * (2 * n))
        mons.append((float(rng.normal()), powers))

    def f(x, y):
        z = list(x) + list(y)
        out = 0.0
        for c, powers in mons:
            term = c
            for v, k in zip(z, powers):
                for _ in range(int(k)):
                    term = term * v
            out = out + term
        return out

    return ScalarField(f, n, "poly")


def random_query(rng, n=2, max_order=3):
    alpha = [0] * (2 * n)
    for v in rng.integers(0, 2 * n, int(rng.integers(1, max_order + 1))):
        alpha[int(v)] += 1
    return alpha


# -- documented examples ---------------------------------------------------------

def test_euclid_second_order():
    jet = eval_jet(builtin_metric("euclid"), TangentPoint((0, 0), (1, 1)), 2)
    assert jet.value == pytest.approx(1.0)
    assert jet.derivative(y=[0, 0]) == pytest.approx(1.0)
    assert jet.derivative(y=[0, 1]) == 0.0
    assert jet.derivative(x=[0]) == 0.0 and jet.derivative(x=[1]) == 0.0


def test_polar_third_order():
    jet = eval_jet(builtin_metric("polar"), TangentPoint((2, 0), (1, 1)), 3)
    assert jet.derivative(x=[0], y=[1, 1]) == pytest.approx(4.0)


def test_randers_first_order():
    E = builtin_metric("randers", {"b": [0.1, 0.0]})
    p = TangentPoint((0, 0), (1, 0))
    assert eval_jet(E, p, 2).derivative(y=[0]) == pytest.approx(1.21, abs=1e-12)
    assert fd_partial(E, p, [0, 0, 1, 0]) == pytest.approx(1.21, abs=1e-8)


def test_fd_examples():
    p = TangentPoint((0.3, -0.2), (0.7, 1.1))
    assert fd_partial(builtin_metric("euclid"), p, [0, 0, 2, 0]) == pytest.approx(1.0, abs=1e-8)
    q = TangentPoint((2, 0), (1, 1))
    assert fd_partial(builtin_metric("polar"), q, [1, 0, 0, 2]) == pytest.approx(4.0, abs=1e-6)


def test_all_multi_indices_present():
    jet = eval_jet(builtin_metric("quartic"), TangentPoint((0, 0), (1, 0.5)), 4)
    assert len(jet.coeffs) == math.comb(4 + 4, 4)
    assert jet.value == pytest.approx(builtin_metric("quartic")((0, 0), (1, 0.5)))


# -- properties --------------------------------------------------------------------

def test_fd_agrees_on_random_polynomials():
    rng = np.random.default_rng(3)
    for _ in range(100):
        f = random_polynomial(rng)
        p = TangentPoint(tuple(rng.uniform(-1, 1, 2)), tuple(rng.uniform(0.5, 1.5, 2)))
        alpha = random_query(rng)
        exact = eval_jet(f, p, 3)[alpha]
        assert abs(fd_partial(f, p, alpha) - exact) <= 1e-6 * max(1.0, abs(exact))


def test_fd_agrees_on_randers():
    E = builtin_metric("randers")
    rng = np.random.default_rng(11)
    p = TangentPoint((0.4, -0.6), (0.9, -0.7))
    jet = eval_jet(E, p, 3)
    for _ in range(20):
        alpha = random_query(rng)
        assert abs(fd_partial(E, p, alpha) - jet[alpha]) <= 1e-6 * max(1.0, abs(jet[alpha]))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_leibniz(seed):
    rng = np.random.default_rng(seed)
    f, g = random_polynomial(rng), random_polynomial(rng)
    fg = ScalarField(lambda x, y: f(x, y) * g(x, y), 2)
    p = TangentPoint(tuple(rng.uniform(-1, 1, 2)), tuple(rng.uniform(0.5, 1.5, 2)))
    direct = eval_jet(fg, p, 5)
    product = eval_jet(f, p, 5) * eval_jet(g, p, 5)
    for alpha, val in direct.coeffs.items():
        assert product[alpha] == pytest.approx(val, rel=1e-10, abs=1e-10)


def test_fiber_scaling():
    lam = 2.0
    E = builtin_metric("randers")
    scaled = ScalarField(lambda x, y: E(x, [lam * v for v in y]), 2)
    p = TangentPoint((0.2, 0.3), (0.8, -0.4))
    a = eval_jet(scaled, p, 4)
    b = eval_jet(E, p.scaled(lam), 4)
    for alpha, val in a.coeffs.items():
        assert val == pytest.approx(lam ** sum(alpha[2:]) * b[alpha], rel=1e-12, abs=1e-12)


def test_schwarz_symmetry_structural():
    # a multi-index names one partial regardless of differentiation order
    E = builtin_metric("randers")
    t = jets.expand(E, TangentPoint((0.1, 0.2), (1.0, 0.3)), 3)
    assert np.allclose(t.d(0).d(2).value, t.d(2).d(0).value)


# -- Taylor arithmetic -----------------------------------------------------------------

def test_taylor_inverse_and_sqrt():
    p = TangentPoint((0.1, 0.2), (0.5, 0.7))
    xs, ys = jets.seed_variables(p, 4)
    s = jets.sqrt(ys[0] * ys[0] + ys[1] * ys[1])
    back = s * s - (ys[0] * ys[0] + ys[1] * ys[1])
    assert np.max(np.abs(back.coef)) < 1e-13
    m = jets.stack([jets.stack([1.0 + xs[0] * xs[0], ys[0]]), jets.stack([ys[1], 2.0 + xs[1]])])
    eye = jets.einsum("ij,jk->ik", m, jets.inverse(m))
    assert np.allclose(eye.coef[..., 0], np.eye(2))
    assert np.max(np.abs(eye.coef[..., 1:])) < 1e-12


def test_power_domain_error():
    t = Taylor.constant(-1.0, 4, 2)
    with pytest.raises(DomainError):
        jets.sqrt(t)
    with pytest.raises(DomainError):
        jets.power(-2.0, 0.5)


# -- errors ------------------------------------------------------------------------------

def test_order_too_high():
    with pytest.raises(OrderTooHigh):
        eval_jet(builtin_metric("euclid"), TangentPoint((0, 0), (1, 0)), 6)
    with pytest.raises(OrderTooHigh):
        fd_partial(builtin_metric("euclid"), TangentPoint((0, 0), (1, 0)), [1, 1, 2, 1])


def test_point_domain():
    with pytest.raises(DomainError):
        TangentPoint((0, 0), (0, 0))
    with pytest.raises(ValueError):
        TangentPoint((0,), (1,))


def test_fd_stencil_crossing_zero():
    with pytest.raises(DomainError):
        fd_partial(builtin_metric("euclid"), TangentPoint((0, 0), (0.01, 0.0)), [0, 0, 2, 0])
