from __future__ import annotations

import numpy as np
import pytest

from finsler import connections as cn
from finsler.connections import KINDS, ConnectionKind, PointConnections
from finsler.fncalc import VectorFieldTM
from finsler.geometry import Geometry
from finsler.jets import TangentPoint, fd_partial
from finsler.metrics import builtin_metric

RANDERS = builtin_metric("randers")
Q = TangentPoint((0.5, -0.3), (1.0, 0.5))
B, CA, CH, HA = KINDS


def test_kind_parsing():
    assert ConnectionKind.parse("Hashiguchi") is HA
    assert ConnectionKind.parse(CA) is CA
    with pytest.raises(ValueError):
        ConnectionKind.parse("levi-civita")
    assert [k.has_vertical for k in KINDS] == [False, True, False, True]
    assert [k.uses_gamma for k in KINDS] == [False, True, True, False]


def test_coefficient_table():
    geo = Geometry(RANDERS, Q, 4)
    C, Gc, Gm = geo.C.value, geo.Gc.value, geo.Gamma.value
    expect = {B: (0 * C, Gc), HA: (C, Gc), CH: (0 * C, Gm), CA: (C, Gm)}
    for kind, (V, H) in expect.items():
        cc = cn.coefficients(kind, RANDERS, Q)
        assert np.allclose(cc.V, V) and np.allclose(cc.H, H)
        assert np.allclose(cc.V, np.swapaxes(cc.V, 1, 2))
        assert np.allclose(cc.H, np.swapaxes(cc.H, 1, 2))


def test_process_differences():
    C, Cp = cn.cartan_tensor_first(RANDERS, Q)[0], cn.cartan_tensor_second(RANDERS, Q)
    get = {k: cn.coefficients(k, RANDERS, Q) for k in KINDS}
    assert np.allclose(get[HA].V - get[B].V, C) and np.allclose(get[HA].H, get[B].H)
    assert np.allclose(get[CA].H - get[HA].H, Cp) and np.allclose(get[CA].V, get[HA].V)
    assert np.allclose(get[CH].H - get[B].H, Cp)
    assert np.allclose(get[CA].V - get[CH].V, C)


def test_cartan_tensor_first_oracle():
    E = builtin_metric("randers", {"b": [0.1, 0.0]})
    p = TangentPoint((0.0, 0.0), (1.0, 0.0))
    C, C_low = cn.cartan_tensor_first(E, p)
    # at y = (1, 0) the whole tensor vanishes: C(., S) = 0 kills C_1jk and the
    # reflection y2 -> -y2 is a symmetry, which kills C_222
    assert np.allclose(C_low, 0, atol=1e-12)
    q = TangentPoint((0.0, 0.0), (0.6, 0.8))
    C_low = cn.cartan_tensor_first(E, q)[1]
    assert abs(C_low[0, 0, 0]) > 1e-3
    assert C_low[0, 0, 0] == pytest.approx(0.5 * fd_partial(E, q, [0, 0, 3, 0]), abs=1e-7)
    assert np.allclose(np.einsum("kij,i->kj", C, [1.0, 0.0]), 0)
    for name in ["euclid", "polar"]:
        assert np.allclose(cn.cartan_tensor_first(builtin_metric(name), Q)[0], 0)
        assert np.allclose(cn.cartan_tensor_second(builtin_metric(name), Q), 0)


def test_covariant_derivative_frame_rules():
    dy1 = VectorFieldTM.constant([0, 0, 1, 0])
    assert np.allclose(cn.covariant_derivative("berwald", RANDERS, dy1, 3, Q), 0)
    liouville = VectorFieldTM.from_components(2, lambda xs, ys: [0.0, 0.0, ys[0], ys[1]])
    for j in range(2):
        assert np.allclose(cn.covariant_derivative("hashiguchi", RANDERS, liouville, j, Q), 0,
                           atol=1e-12)
        expect = np.zeros(4)
        expect[2 + j] = 1.0
        assert np.allclose(cn.covariant_derivative("hashiguchi", RANDERS, liouville, 2 + j, Q),
                           expect, atol=1e-12)


def test_torsion_table():
    Cp = cn.cartan_tensor_second(RANDERS, Q)
    C = cn.cartan_tensor_first(RANDERS, Q)[0]
    t = {k: cn.torsion(k, RANDERS, Q) for k in KINDS}
    for k in KINDS:
        assert np.allclose(t[k].hh, -np.swapaxes(t[k].hh, 1, 2))
        assert np.allclose(t[k].vv, 0)
        assert np.allclose(t[k].hh, t[B].hh)
    assert np.allclose(t[B].hv, 0)
    assert np.allclose(t[CH].hv[2:], Cp) and np.allclose(t[CH].hv[:2], 0)
    assert np.allclose(t[HA].hv[:2], -C) and np.allclose(t[HA].hv[2:], 0)
    assert np.allclose(t[CA].hv[:2], -C) and np.allclose(t[CA].hv[2:], Cp)


def test_curvature_examples():
    p = TangentPoint((0.2, 0.6), (1.0, 0.8))
    for k in KINDS:
        cc = cn.curvature(k, builtin_metric("euclid"), p)
        assert all(np.allclose(a, 0) for a in (cc.Rh, cc.Phv, cc.Qv))
    quartic = builtin_metric("quartic", n=3)
    p3 = TangentPoint((0.0, 0.0, 0.0), (1.0, 0.5, -0.7))
    for k in KINDS:
        cc = cn.curvature(k, quartic, p3)
        assert np.max(np.abs(cc.Rh)) < 1e-8 and np.max(np.abs(cc.Phv)) < 1e-8
    assert np.max(np.abs(cn.curvature(HA, quartic, p3).Qv)) > 1e-3
    assert np.allclose(cn.curvature(HA, RANDERS, Q).Qv, cn.curvature(CA, RANDERS, Q).Qv)
    assert np.allclose(cn.curvature(B, RANDERS, Q).Qv, 0)
    assert np.allclose(cn.curvature(CH, RANDERS, Q).Qv, 0)


def test_curvature_antisymmetry_and_relations():
    pc = PointConnections(RANDERS, Q)
    for k in KINDS:
        Rh, _, Qv = (a.value for a in pc.curvature_fields(k))
        assert np.allclose(Rh, -np.swapaxes(Rh, 2, 3))
        assert np.allclose(Qv, -np.swapaxes(Qv, 2, 3))
        for a, b in zip(pc.curvature_fields(k), pc.engine_curvature_blocks(k)):
            assert np.allclose(a.value, b.value, atol=1e-12)
    CR = pc.C_R.value
    Rb = pc.curvature_fields(B)[0].value
    assert np.allclose(pc.curvature_fields(HA)[0].value, Rb + CR)
    assert np.allclose(pc.curvature_fields(CH)[0].value, pc.curvature_fields(CA)[0].value - CR)


def test_horizontal_cov_deriv_C():
    assert np.allclose(cn.horizontal_cov_deriv_C("cartan", builtin_metric("polar"), Q), 0)
    with pytest.raises(ValueError):
        cn.horizontal_cov_deriv_C("berwald", RANDERS, Q)
    hc = cn.horizontal_cov_deriv_C("hashiguchi", RANDERS, Q)
    assert hc.shape == (2, 2, 2, 2)


def test_cov_deriv_curvature():
    p = TangentPoint((0.2, 0.6), (1.0, 0.8))
    for which in ["Rh", "Phv", "Qv"]:
        assert np.allclose(cn.cov_deriv_curvature("hashiguchi", which, 0, builtin_metric("euclid"), p), 0)
    with pytest.raises(ValueError):
        cn.cov_deriv_curvature("hashiguchi", "X", 0, RANDERS, Q)
    # D_C Q = -2 Q for the Hashiguchi v-curvature, n = 3 where Q is nonzero
    E3 = builtin_metric("randers", n=3)
    p3 = TangentPoint((0.5, -0.3, 0.2), (1.0, 0.5, -0.4))
    y = np.array(p3.y)
    DQ = sum(y[i] * cn.cov_deriv_curvature("hashiguchi", "Qv", 3 + i, E3, p3) for i in range(3))
    Qv = cn.curvature("hashiguchi", E3, p3).Qv
    assert np.max(np.abs(Qv)) > 1e-3
    assert np.allclose(DQ, -2 * Qv, atol=1e-8)
    DR = sum(y[i] * cn.cov_deriv_curvature("hashiguchi", "Rh", 3 + i, E3, p3) for i in range(3))
    assert np.allclose(DR, 0, atol=1e-8)


def test_riemannian_coincidence():
    for name in ["euclid", "polar", "riem-diag"]:
        E = builtin_metric(name)
        p = TangentPoint((0.9, -0.4), (0.3, 1.2))
        ref = cn.coefficients(B, E, p)
        refc = cn.curvature(B, E, p)
        for k in KINDS[1:]:
            c = cn.coefficients(k, E, p)
            assert np.allclose(c.V, ref.V) and np.allclose(c.H, ref.H)
            cc = cn.curvature(k, E, p)
            assert all(np.allclose(a, b, atol=1e-10) for a, b in
                       zip((cc.Rh, cc.Phv, cc.Qv), (refc.Rh, refc.Phv, refc.Qv)))
