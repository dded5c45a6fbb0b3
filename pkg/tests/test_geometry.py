from __future__ import annotations

import numpy as np
import pytest

from finsler import geometry
from finsler.errors import SingularMetric
from finsler.geometry import Geometry
from finsler.jets import ScalarField, TangentPoint, fd_partial
from finsler.metrics import builtin_metric


def test_metric_examples(polar_point):
    p = TangentPoint((0.3, -0.1), (0.5, 2.0))
    assert np.allclose(geometry.metric(builtin_metric("euclid"), p).g, np.eye(2))
    assert np.allclose(geometry.metric(builtin_metric("polar"), polar_point).g, np.diag([1.0, 4.0]))
    E = builtin_metric("randers", {"b": [0.1, 0.0]})
    q = TangentPoint((0.0, 0.0), (1.0, 0.0))
    g = geometry.metric(E, q).g
    assert g[0, 0] == pytest.approx(1.21, abs=1e-12)
    assert g[0, 0] == pytest.approx(fd_partial(E, q, [0, 0, 2, 0]), abs=1e-7)


def test_metric_inverse_and_singular():
    md = geometry.metric(builtin_metric("randers"), TangentPoint((0.2, 0.1), (0.4, -1.0)))
    assert np.allclose(md.g, md.g.T)
    assert np.allclose(md.g @ md.g_inv, np.eye(2), atol=1e-10)
    assert np.all(np.linalg.eigvalsh(md.g) > 0)
    degenerate = ScalarField(lambda x, y: 0.5 * y[0] * y[0], 2)
    with pytest.raises(SingularMetric):
        geometry.metric(degenerate, TangentPoint((0, 0), (1, 1)))


def test_fundamental_form():
    p = TangentPoint((0.1, 0.4), (1.0, -0.5))
    om = geometry.fundamental_form(builtin_metric("euclid"), p)
    expect = np.zeros((4, 4))
    expect[2:, :2] = np.eye(2)
    expect[:2, 2:] = -np.eye(2)
    assert np.allclose(om, expect)
    for name in ["polar", "randers", "quartic"]:
        om = geometry.fundamental_form(builtin_metric(name), TangentPoint((0.7, 0.4), (1.0, -0.5)))
        assert np.allclose(om, -om.T)


def test_spray_examples(polar_point):
    assert np.allclose(geometry.spray(builtin_metric("euclid"), polar_point).G, 0)
    G = geometry.spray(builtin_metric("polar"), polar_point).G
    assert G == pytest.approx([-1.0, 0.5], abs=1e-12)
    for name in ["polar", "randers", "quartic", "riem-diag"]:
        E = builtin_metric(name)
        p = TangentPoint((0.8, 0.3), (0.6, -0.9))
        assert np.allclose(geometry.spray(E, p.scaled(2.0)).G, 4 * geometry.spray(E, p).G, atol=1e-10)
        assert np.max(np.abs(geometry.euler_lagrange_residual(E, p))) < 1e-8


def test_nonlinear_connection(polar_point):
    nl = geometry.nonlinear_connection(builtin_metric("euclid"), polar_point)
    assert all(np.allclose(a, 0) for a in (nl.N, nl.Gc, nl.Gc3))
    nl = geometry.nonlinear_connection(builtin_metric("polar"), polar_point)
    assert nl.N[0, 1] == pytest.approx(-2.0, abs=1e-12)
    # oracle: finite difference of G^1 along y_2
    G1 = ScalarField(lambda x, y: Geometry(builtin_metric("polar"), TangentPoint(x, y), 2).G.value[0], 2)
    assert fd_partial(G1, polar_point, [0, 0, 0, 1]) == pytest.approx(-2.0, abs=1e-6)
    assert np.allclose(nl.Gc, np.swapaxes(nl.Gc, 1, 2))
    assert np.allclose(nl.N @ np.array(polar_point.y), 2 * nl.G)


def test_cartan_symbols_polar(polar_point):
    geo = Geometry(builtin_metric("polar"), polar_point, 4)
    assert geo.Gamma.value[0, 1, 1] == pytest.approx(-2.0)
    assert geo.Gamma.value[1, 0, 1] == pytest.approx(0.5)


def test_frame():
    fr = geometry.frame(builtin_metric("euclid"), TangentPoint((0, 0), (1, 2)))
    assert np.allclose(fr.h, np.diag([1, 1, 0, 0]))
    assert np.allclose(fr.F, [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
    E = builtin_metric("randers")
    J = np.zeros((4, 4))
    J[2:, :2] = np.eye(2)
    for seed in range(5):
        rng = np.random.default_rng(seed)
        p = TangentPoint(tuple(rng.uniform(-1, 1, 2)), tuple(rng.uniform(0.5, 1.5, 2)))
        fr = geometry.frame(E, p)
        assert np.allclose(fr.F @ fr.F, -np.eye(4))
        assert np.allclose(fr.F @ J, fr.h) and np.allclose(fr.F @ fr.h, -J)
        assert np.allclose(fr.h + fr.v, np.eye(4)) and np.allclose(fr.h @ fr.v, 0)
        assert np.allclose(fr.F @ np.vstack([np.zeros((2, 2)), np.eye(2)]), fr.delta)
        assert np.allclose(geometry.printed_F(E, p), fr.F, atol=1e-12)


def test_barthel_curvature():
    p = TangentPoint((0.3, -0.4), (1.0, 0.7))
    assert np.allclose(geometry.barthel_curvature(builtin_metric("euclid"), p).Rjk, 0)
    assert np.allclose(geometry.barthel_curvature(builtin_metric("quartic"), p).Rjk, 0, atol=1e-12)
    R = geometry.barthel_curvature(builtin_metric("randers"), p).Rjk
    assert np.allclose(R, -np.swapaxes(R, 1, 2))
    assert np.max(np.abs(R)) > 1e-3


def test_cartan_tensor_properties():
    geo = Geometry(builtin_metric("randers"), TangentPoint((0.5, -0.3), (1.0, 0.5)), 4)
    C = geo.C_low.value
    for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
        assert np.allclose(C, C.transpose(perm))
    y = np.array([1.0, 0.5])
    assert np.allclose(np.einsum("kij,i->kj", geo.C.value, y), 0, atol=1e-12)
    assert np.allclose(np.einsum("kij,i->kj", geo.Cprime.value, y), 0, atol=1e-12)
    assert np.max(np.abs(geo.Cprime.value)) > 1e-3
