"""The identity suite: every checked statement, its residual and its verdict.

Each registered check maps a point context to a non-negative residual (a
max-norm).  The suite evaluates it at every sample point and keeps the
maximum.  Two modes exist:

* ``zero``: the statement is an identity; pass iff residual <= tolerance.
* ``witness``: the statement is a non-vanishing claim evaluated at the
  metric's documented witness point; pass iff residual > tolerance.

Checks only meaningful for some metric classes declare a requirement
(``riemannian``, ``non-riemannian``, ``minkowski``, ``non-minkowski``,
``witness``, a minimal
dimension).  The class of a metric is detected numerically from the sample
points; checks whose requirement is not met are reported as ``skipped``.

Failures inside a check (singular metric, leaving the domain) mark that
check ``error`` without stopping the suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import fncalc, jets
from .connections import KINDS, ConnectionKind, PointConnections
from .errors import FinslerError
from .frame import RFRAK_SIGN, semibasic_vertical
from .geometry import Geometry, euler_lagrange_residual, fundamental_form, printed_F
from .intrinsic import IntrinsicView, cyclic
from .jets import Taylor, TangentPoint, einsum
from .metrics import MetricInfo, sample_points

B, CA, CH, HA = KINDS  # Berwald, Cartan, Chern, Hashiguchi

TOLERANCES = {"strict": 1e-10, "exact": 1e-8, "oracle": 1e-6, "witness": 1e-3}
#: threshold below which C resp. d_x g count as vanishing
CLASS_THRESHOLD = 1e-10


def mx(x) -> float:
    if isinstance(x, Taylor):
        x = x.value
    arr = np.asarray(x, dtype=float)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


# ----------------------------------------------------------------------------
# per-point context
# ----------------------------------------------------------------------------

class PointContext:
    """Everything the checks need around one point, built lazily and shared."""

    def __init__(self, info: MetricInfo, p: TangentPoint, index: int = 0):
        self.info = info
        self.E = info.field
        self.p = p
        self.n = p.n
        self.index = index

    @cached_property
    def pc(self) -> PointConnections:
        return PointConnections(self.E, self.p)

    @property
    def geo(self) -> Geometry:
        return self.pc.geo

    def view(self, kind) -> IntrinsicView:
        kind = ConnectionKind.parse(kind)
        cache = self.__dict__.setdefault("_views", {})
        if kind not in cache:
            cache[kind] = IntrinsicView(self.pc, kind)
        return cache[kind]

    @cached_property
    def fields(self) -> dict:
        E, geo = self.E, self.geo
        nat = fncalc.natural_structures(self.n)
        return {
            "S": fncalc.spray_field(E, geo),
            "h": fncalc.barthel_h(E, geo),
            "v": fncalc.barthel_v(E, geo),
            "Gamma": fncalc.barthel_gamma(E, geo),
            "F": fncalc.almost_complex(E, geo),
            "J": nat["J"],
            "C": nat["C_liouville"],
            "frame": fncalc.natural_frame(self.n),
        }

    def scaled_geometry(self, lam: float, order: int = 4) -> Geometry:
        return Geometry(self.E, self.p.scaled(lam), order)


# ----------------------------------------------------------------------------
# registry
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    id: str
    anchor: str
    tol_class: str
    fn: Callable[[PointContext], float]
    mode: str = "zero"
    requires: tuple[str, ...] = ()
    min_dim: int = 2


REGISTRY: list[Check] = []


def check(id: str, anchor: str, tol: str = "exact", mode: str = "zero",
          requires: tuple[str, ...] = (), min_dim: int = 2):
    def deco(fn):
        REGISTRY.append(Check(id, anchor, tol, fn, mode, requires, min_dim))
        return fn
    return deco


def _pairs(n: int):
    return [(a, b) for a in range(2 * n) for b in range(2 * n)]


# --- almost tangent structure and brackets -------------------------------------------

@check("jj.bracket_JJ", "[J, J] = 0", "exact")
def _(ctx):
    f = ctx.fields
    e = f["frame"]
    return max(mx(fncalc.fn_bracket_forms(f["J"], f["J"], e[a], e[b], ctx.p)) for a, b in _pairs(ctx.n))


@check("jj.J_squared", "J^2 = 0", "strict")
def _(ctx):
    J = ctx.fields["J"](ctx.p)
    return mx(J @ J)


@check("jj.bracket_CJ", "[C, J] = -J", "exact")
def _(ctx):
    f = ctx.fields
    return mx(fncalc.fn_bracket_vf_form(f["C"], f["J"], ctx.p) + f["J"](ctx.p))


@check("jj.J_vertical", "J vanishes on vertical vectors: J C = 0 and Im J = Ker J", "strict")
def _(ctx):
    f = ctx.fields
    J = f["J"](ctx.p)
    n = ctx.n
    rank_ok = abs(np.linalg.matrix_rank(J) - n)
    return max(mx(J @ f["C"](ctx.p)), mx(J[:, n:]), float(rank_ok))


@check("barthel.gamma_is_JS", "Gamma = [J, S]", "oracle")
def _(ctx):
    f = ctx.fields
    JS = -fncalc.fn_bracket_vf_form(f["S"], f["J"], ctx.p)
    return mx(JS - f["Gamma"](ctx.p))


@check("spray.jx", "J[J eta, S] = J eta", "exact")
def _(ctx):
    f = ctx.fields
    J = f["J"](ctx.p)
    out = 0.0
    for a, e in enumerate(f["frame"]):
        Je = fncalc.VectorFieldTM.constant(J[:, a])
        out = max(out, mx(J @ fncalc.lie_bracket(Je, f["S"], ctx.p) - J[:, a]))
    return out


@check("spray.bracket_CS", "[C, S] = S", "exact")
def _(ctx):
    f = ctx.fields
    return mx(fncalc.lie_bracket(f["C"], f["S"], ctx.p) - f["S"](ctx.p))


@check("barthel.bracket_Ch", "[C, h] = 0, equivalently [C, h zeta] = h[C, zeta]", "exact")
def _(ctx):
    f = ctx.fields
    return mx(fncalc.fn_bracket_vf_form(f["C"], f["h"], ctx.p))


@check("barthel.torsion_t", "t = 1/2 [J, Gamma] = 0", "exact")
def _(ctx):
    f = ctx.fields
    e = f["frame"]
    return max(mx(0.5 * fncalc.fn_bracket_forms(f["J"], f["Gamma"], e[a], e[b], ctx.p))
               for a, b in _pairs(ctx.n))


@check("fn.nijenhuis_F", "N_F(zeta, eta) = 1/2 [F, F](zeta, eta)", "exact")
def _(ctx):
    f = ctx.fields
    e = f["frame"]
    return max(mx(fncalc.nijenhuis(f["F"], e[a], e[b], ctx.p)
                  - 0.5 * fncalc.fn_bracket_forms(f["F"], f["F"], e[a], e[b], ctx.p))
               for a, b in _pairs(ctx.n))


@check("energy.homogeneity", "L_C E = 2E", "exact")
def _(ctx):
    return abs(fncalc.lie_scalar(ctx.fields["C"], ctx.E, ctx.p) - 2.0 * ctx.E(ctx.p.x, ctx.p.y))


@check("metric.homogeneity", "L_C g_ij = 0 and g(x, 2y) = g(x, y)", "exact")
def _(ctx):
    geo = ctx.geo
    lie = einsum("ijk,k->ij", geo.vd(geo.g), geo.y)
    scaled = ctx.scaled_geometry(2.0, 2).g.value
    return max(mx(lie), mx(scaled - geo.g.value))


# --- spray, Barthel connection, metric -------------------------------------------------

@check("spray.euler_lagrange", "i_S Omega + dE = 0", "exact")
def _(ctx):
    return mx(euler_lagrange_residual(ctx.E, ctx.p))


@check("spray.homogeneity", "G(x, 2y) = 4 G(x, y)", "exact")
def _(ctx):
    return mx(ctx.scaled_geometry(2.0, 2).G.value - 4.0 * ctx.geo.G.value)


@check("spray.N_contraction", "N^h_i y^i = 2 G^h", "exact")
def _(ctx):
    geo = ctx.geo
    return mx(geo.N.value @ np.array(ctx.p.y) - 2.0 * geo.G.value)


@check("barthel.dhE", "d_h E = 0: delta_i E = 0", "exact")
def _(ctx):
    return mx(ctx.geo.hd(ctx.geo.jet))


@check("barthel.torsion_free", "G^h_ij = G^h_ji", "strict")
def _(ctx):
    Gc = ctx.geo.Gc.value
    return mx(Gc - Gc.transpose(0, 2, 1))


@check("barthel.homogeneity", "N(x, 2y) = 2 N(x, y)", "exact")
def _(ctx):
    return mx(ctx.scaled_geometry(2.0, 3).N.value - 2.0 * ctx.geo.N.value)


@check("spray.Gc3_symmetric", "dy_k G^i_hj is totally symmetric in h, j, k", "strict")
def _(ctx):
    t = ctx.geo.Gc3.value
    return max(mx(t - t.transpose(0, 2, 1, 3)), mx(t - t.transpose(0, 3, 2, 1)))


@check("metric.symmetric_inverse", "g_ij = g_ji and g g^-1 = I", "strict")
def _(ctx):
    g, gi = ctx.geo.g.value, ctx.geo.g_inv.value
    return max(mx(g - g.T), mx(g @ gi - np.eye(ctx.n)))


@check("omega.antisymmetric", "Omega + Omega^T = 0", "strict")
def _(ctx):
    om = fundamental_form(ctx.E, ctx.p)
    return mx(om + om.T)


@check("metric.metricg", "Omega(zeta, F xi) = gbar(J zeta, J xi) + gbar(v zeta, v xi)", "exact")
def _(ctx):
    m = ctx.geo.natural_matrices()
    n = ctx.n
    om = fundamental_form(ctx.E, ctx.p)
    gv = np.zeros((2 * n, 2 * n))
    gv[n:, n:] = ctx.geo.g.value
    rhs = m["J"].T @ gv @ m["J"] + m["v"].T @ gv @ m["v"]
    return mx(om @ m["F"] - rhs)


# --- adapted frame ------------------------------------------------------------------------

@check("frame.projectors", "h + v = I, h^2 = h, v^2 = v, hv = vh = 0", "strict")
def _(ctx):
    m = ctx.geo.natural_matrices()
    h, v = m["h"], m["v"]
    eye = np.eye(2 * ctx.n)
    return max(mx(h + v - eye), mx(h @ h - h), mx(v @ v - v), mx(h @ v), mx(v @ h))


@check("frame.F_squared", "F^2 = -I", "strict")
def _(ctx):
    F = ctx.geo.natural_matrices()["F"]
    return mx(F @ F + np.eye(2 * ctx.n))


@check("frame.FJ_Fh", "F J = h and F h = -J", "strict")
def _(ctx):
    m = ctx.geo.natural_matrices()
    return max(mx(m["F"] @ m["J"] - m["h"]), mx(m["F"] @ m["h"] + m["J"]))


@check("frame.F_natural_formula",
       "F(d_i) = N^j_i d_j - N^h_i N^j_h dy_j - dy_i agrees with F(dy_i) = delta_i, F(delta_i) = -dy_i",
       "strict")
def _(ctx):
    return mx(printed_F(ctx.E, ctx.p) - ctx.geo.natural_matrices()["F"])


@check("barthel.curvature_bracket", "Rfrak = -1/2 [h, h] has components -R^i_jk on (d_j, d_k)", "oracle")
def _(ctx):
    f = ctx.fields
    e = f["frame"]
    n = ctx.n
    R = ctx.geo.R.value
    out = 0.0
    for j in range(n):
        for k in range(n):
            val = -0.5 * fncalc.fn_bracket_forms(f["h"], f["h"], e[j], e[k], ctx.p)
            expect = np.concatenate([np.zeros(n), RFRAK_SIGN * R[:, j, k]])
            out = max(out, mx(val - expect))
    return out


@check("barthel.curvature_antisymmetric", "R^i_jk = -R^i_kj", "strict")
def _(ctx):
    R = ctx.geo.R.value
    return mx(R + R.transpose(0, 2, 1))


# --- Cartan tensors -----------------------------------------------------------------------

@check("cartan.C_symmetric", "C_ijk is totally symmetric", "strict")
def _(ctx):
    C = ctx.geo.C_low.value
    return max(mx(C - C.transpose(1, 0, 2)), mx(C - C.transpose(0, 2, 1)))


@check("cartan.C_spray", "C^k_ij y^i = 0, i.e. C(eta, S) = 0", "exact")
def _(ctx):
    return mx(np.einsum("kij,i->kj", ctx.geo.C.value, np.array(ctx.p.y)))


@check("cartan.Cprime_symmetric", "C'_ijk = g_im C'^m_jk is totally symmetric", "exact")
def _(ctx):
    low = np.einsum("im,mjk->ijk", ctx.geo.g.value, ctx.geo.Cprime.value)
    return max(mx(low - low.transpose(1, 0, 2)), mx(low - low.transpose(0, 2, 1)))


@check("cartan.Cprime_spray", "C'^k_ij y^i = 0, i.e. C'(eta, S) = 0", "exact")
def _(ctx):
    return mx(np.einsum("kij,i->kj", ctx.geo.Cprime.value, np.array(ctx.p.y)))


@check("cartan.Cprime_definition",
       "g_lm C'^m_ij = 1/2 (delta_i g_lj - G^m_il g_mj - G^m_ij g_lm), the Berwald h-derivative of g",
       "exact")
def _(ctx):
    geo = ctx.geo
    g, Gc, dg = geo.g.value, geo.Gc.value, geo.dg.value  # dg[a, b, c] = delta_c g_ab
    rhs = 0.5 * (dg.transpose(0, 2, 1) - np.einsum("mli,mj->lij", Gc, g)
                 - np.einsum("mij,lm->lij", Gc, g))
    return mx(np.einsum("lm,mij->lij", g, geo.Cprime.value) - rhs)


# --- process diagram -----------------------------------------------------------------------

def _coeff_diff(ctx, a, b, expect_V, expect_H) -> float:
    pc = ctx.pc
    dV = pc.V(a).value - pc.V(b).value
    dH = pc.H(a).value - pc.H(b).value
    ev = ctx.geo.C.value if expect_V else 0.0
    eh = ctx.geo.Cprime.value if expect_H else 0.0
    return max(mx(dV - ev), mx(dH - eh))


@check("process.hashiguchi_minus_berwald", "Hashiguchi - Berwald = (C, 0)", "exact")
def _(ctx):
    return _coeff_diff(ctx, HA, B, True, False)


@check("process.cartan_minus_hashiguchi", "Cartan - Hashiguchi = (0, C')", "exact")
def _(ctx):
    return _coeff_diff(ctx, CA, HA, False, True)


@check("process.chern_minus_berwald", "Chern - Berwald = (0, C')", "exact")
def _(ctx):
    return _coeff_diff(ctx, CH, B, False, True)


@check("process.cartan_minus_chern", "Cartan - Chern = (C, 0)", "exact")
def _(ctx):
    return _coeff_diff(ctx, CA, CH, True, False)


# --- torsion and curvature per kind ------------------------------------------------------------

def _torsion_table(ctx, kind) -> float:
    n = ctx.n
    V = ctx.view(kind)
    T = V.T.value
    hh, hv = ctx.pc.torsion_fields(kind)
    intrinsic_hv = np.zeros((2 * n, 2 * n, 2 * n))
    if kind.uses_gamma:
        intrinsic_hv += V.Cpf.value
    if kind.has_vertical:
        intrinsic_hv -= V.apply_F(V.Cf).value
    return max(mx(T[:, :n, :n] - V.Rf.value[:, :n, :n]),
               mx(T[n:, :n, :n] - RFRAK_SIGN * hh.value),
               mx(T[:, :n, n:] - hv.value),
               mx(T[:, :n, n:] - intrinsic_hv[:, :n, :n]),
               mx(T[:, n:, n:]))


def _curvature_local(ctx, kind) -> float:
    local = ctx.pc.curvature_fields(kind)
    engine = ctx.pc.engine_curvature_blocks(kind)
    return max(mx(a - b) for a, b in zip(local, engine))


_TORSION_ANCHOR = {
    B: "Berwald torsion: hh = Rfrak, hv = 0, vv = 0",
    CA: "Cartan torsion: hh = Rfrak, hv = C' - FC, vv = 0",
    CH: "Chern torsion: hh = Rfrak, hv = C', vv = 0",
    HA: "Hashiguchi torsion: hh = Rfrak, hv = -FC, vv = 0",
}

for _kind in KINDS:
    check(f"torsion.{_kind.value}", _TORSION_ANCHOR[_kind], "exact")(
        lambda ctx, k=_kind: _torsion_table(ctx, k))
    check(f"curvature.{_kind.value}.local_vs_operator",
          f"{_kind.value.capitalize()} local curvature components equal the blocks of "
          "K(X, Y) = [D_X, D_Y] - D_[X,Y]", "exact")(
        lambda ctx, k=_kind: _curvature_local(ctx, k))


def _abc(curv: Taylor) -> Taylor:
    """X[d, c, a, b] = X(a, b)c to [d, a, b, c]."""
    return curv.transpose(0, 2, 3, 1)


def _CFR(V: IntrinsicView) -> Taylor:
    """C(F Rfrak(a, b), c) as [d, a, b, c]."""
    return einsum("dfc,fe,eab->dabc", V.Cf, V.F, V.Rf)


def _Dh(V: IntrinsicView, t: Taylor, A) -> Taylor:
    """(D_{A z} t) with the direction moved to the first argument slot."""
    Dt = V.D(t)
    rank = t.ndim
    letters = "abcdefg"[:rank]
    return einsum(f"{letters}q,qz->{letters[0]}z{letters[1:]}", Dt, A)


@check("hashiguchi.R_relation", "R_H(zeta, eta)xi = R_B(zeta, eta)xi + C(F Rfrak(zeta, eta), xi)", "oracle")
def _(ctx):
    H, Bv = ctx.view(HA), ctx.view(B)
    return mx(_abc(H.Rint) - _abc(Bv.Rint) - _CFR(H))


@check("hashiguchi.P_relation", "P_H(zeta, eta)xi = P_B(zeta, eta)xi + (D_H[h zeta] C)(eta, xi)", "oracle")
def _(ctx):
    H, Bv = ctx.view(HA), ctx.view(B)
    return mx(_abc(H.Pint) - _abc(Bv.Pint) - _Dh(H, H.Cf, H.h))


@check("hashiguchi.Q_equals_cartan", "Q_H = Q_Cartan = C(FC(zeta, xi), eta) - C(FC(eta, xi), zeta)", "exact")
def _(ctx):
    H, Ca = ctx.view(HA), ctx.view(CA)
    FC = H.apply_F(H.Cf)
    rhs = einsum("dfe,fzx->dzex", H.Cf, FC) - einsum("dfz,fex->dzex", H.Cf, FC)
    return max(mx(H.Qint - Ca.Qint), mx(_abc(H.Qint) - rhs))


@check("chern.R_relation", "R_Chern(kappa, eta)xi = R_Cartan(kappa, eta)xi - C(F Rfrak(kappa, eta), xi)", "oracle")
def _(ctx):
    Ch, Ca = ctx.view(CH), ctx.view(CA)
    return mx(_abc(Ch.Rint) - _abc(Ca.Rint) + _CFR(Ch))


@check("chern.P_relation", "P_Chern(kappa, eta)xi = P_B(kappa, eta)xi - (D_Chern[J eta] C')(kappa, xi)", "oracle")
def _(ctx):
    Ch, Bv = ctx.view(CH), ctx.view(B)
    DJ = einsum("dkxq,qe->dkex", Ch.D(Ch.Cpf), Ch.J)  # (D_{J eta} C')(kappa, xi)
    return mx(_abc(Ch.Pint) - _abc(Bv.Pint) + DJ)


@check("cartan.R_relation",
       "R(eta, kappa)xi = R_B(eta, kappa)xi + (D_[h eta] C')(kappa, xi) - (D_[h kappa] C')(eta, xi) "
       "+ C'(FC'(eta, xi), kappa) - C'(FC'(kappa, xi), eta) + C(F Rfrak(eta, kappa), xi)", "oracle")
def _(ctx):
    Ca, Bv = ctx.view(CA), ctx.view(B)
    DCp = Ca.D(Ca.Cpf)
    Dh = einsum("dkxq,qe->dekx", DCp, Ca.h)  # (D_{h eta} C')(kappa, xi) as [d, eta, kappa, xi]
    FCp = Ca.apply_F(Ca.Cpf)
    t1 = einsum("dfk,fex->dekx", Ca.Cpf, FCp)  # C'(FC'(eta, xi), kappa)
    rhs = (_abc(Bv.Rint) + Dh - Dh.transpose(0, 2, 1, 3) + t1 - t1.transpose(0, 2, 1, 3) + _CFR(Ca))
    return mx(_abc(Ca.Rint) - rhs)


@check("cartan.P_relation",
       "P(eta, kappa)xi = P_B(eta, kappa)xi + (D_[h eta] C)(kappa, xi) - (D_[J kappa] C')(eta, xi) "
       "+ C(FC'(eta, xi), kappa) + C(FC'(eta, kappa), xi) - C'(FC(kappa, xi), eta) - C'(FC(eta, kappa), xi)",
       "oracle")
def _(ctx):
    Ca, Bv = ctx.view(CA), ctx.view(B)
    DhC = einsum("dkxq,qe->dekx", Ca.D(Ca.Cf), Ca.h)  # (D_{h eta} C)(kappa, xi)
    DJCp = einsum("dexq,qk->dekx", Ca.D(Ca.Cpf), Ca.J)  # (D_{J kappa} C')(eta, xi)
    FC, FCp = Ca.apply_F(Ca.Cf), Ca.apply_F(Ca.Cpf)
    rhs = (_abc(Bv.Pint) + DhC - DJCp
           + einsum("dfk,fex->dekx", Ca.Cf, FCp) + einsum("dfx,fek->dekx", Ca.Cf, FCp)
           - einsum("dfe,fkx->dekx", Ca.Cpf, FC) - einsum("dfx,fek->dekx", Ca.Cpf, FC))
    return mx(_abc(Ca.Pint) - rhs)


@check("cartan.Q_relation", "Q(eta, kappa)xi = C(FC(eta, xi), kappa) - C(FC(kappa, xi), eta)", "exact")
def _(ctx):
    Ca = ctx.view(CA)
    FC = Ca.apply_F(Ca.Cf)
    t = einsum("dfk,fex->dekx", Ca.Cf, FC)
    return mx(_abc(Ca.Qint) - t + t.transpose(0, 2, 1, 3))


def _slot(X: Taylor, vec: Taylor, slot: str) -> Taylor:
    """Insert ``vec`` into slot 'a', 'b' or 'c' of X(a, b)c stored as [d, c, a, b]."""
    spec = {"a": "dcsb,s->dcb", "b": "dcas,s->dca", "c": "dsab,s->dab"}[slot]
    return einsum(spec, X, vec)


@check("cartan.spray_R", "R(eta, kappa)S = Rfrak(eta, kappa)", "exact")
def _(ctx):
    Ca = ctx.view(CA)
    return mx(_slot(Ca.Rint, Ca.S, "c") - Ca.Rf)


@check("cartan.spray_P", "P(eta, kappa)S = C'(eta, kappa)", "exact")
def _(ctx):
    Ca = ctx.view(CA)
    n = ctx.n
    # P(eta, kappa)S only sees the horizontal part of eta and the J-image of kappa
    Cp_hJ = einsum("dab,bk->dak", Ca.Cpf, np.eye(2 * n))
    return mx(_slot(Ca.Pint, Ca.S, "c") - einsum("dab,ae,bk->dek", Cp_hJ, Ca.h, Ca.h))


@check("cartan.spray_P_slots", "P(S, eta)kappa = P(eta, S)kappa = 0", "exact")
def _(ctx):
    Ca = ctx.view(CA)
    return max(mx(_slot(Ca.Pint, Ca.S, "a")), mx(_slot(Ca.Pint, Ca.S, "b")))


@check("cartan.spray_Q", "Q(S, eta)kappa = Q(eta, S)kappa = Q(eta, kappa)S = 0", "exact")
def _(ctx):
    Ca = ctx.view(CA)
    return max(mx(_slot(Ca.Qint, Ca.S, s)) for s in "abc")


# --- metricity -----------------------------------------------------------------------------------

def _metricity(ctx, kind, part: str) -> float:
    V = ctx.view(kind)
    Dg = V.D(V.metric, n_up=0).value
    n = ctx.n
    return mx(Dg[..., :n] if part == "h" else Dg[..., n:])


_METRICAL = [(CA, "h"), (CA, "v"), (CH, "h"), (HA, "v")]
_NOT_METRICAL = [(B, "h"), (B, "v"), (CH, "v"), (HA, "h")]

for _kind, _part in _METRICAL:
    check(f"metricity.{_kind.value}.{_part}",
          f"{_kind.value.capitalize()} connection is {_part}-metrical: D_{{{'h' if _part == 'h' else 'J'} zeta}} g = 0",
          "exact")(lambda ctx, k=_kind, s=_part: _metricity(ctx, k, s))

for _kind, _part in _NOT_METRICAL:
    check(f"witness.{_kind.value}.not_{_part}_metrical",
          f"{_kind.value.capitalize()} connection is not {_part}-metrical: "
          f"D_{{{'h' if _part == 'h' else 'J'} zeta}} g is nonzero",
          "witness", mode="witness",
          requires=("witness", "non-riemannian") + (("non-minkowski",) if _part == "h" else ()))(
        lambda ctx, k=_kind, s=_part: _metricity(ctx, k, s))


# --- Hashiguchi connection -------------------------------------------------------------------------

def _frame_D(V: IntrinsicView, A) -> Taylor:
    """D_{A e_z} e_e as [d, z, e]."""
    return einsum("dec,cz->dze", V.eng.w, A)


@check("hashiguchi.vertical_rule", "D_H[J zeta] J eta = D_B[J zeta] J eta + C(zeta, eta)", "exact")
def _(ctx):
    H, Bv = ctx.view(HA), ctx.view(B)
    J = H.J
    lhs = einsum("dze,ea->dza", _frame_D(H, J), J) - einsum("dze,ea->dza", _frame_D(Bv, J), J)
    return mx(lhs - H.Cf)


@check("hashiguchi.horizontal_rule", "D_H[h zeta] J eta = D_B[h zeta] J eta", "exact")
def _(ctx):
    H, Bv = ctx.view(HA), ctx.view(B)
    return mx(einsum("dze,ea->dza", _frame_D(H, H.h) - _frame_D(Bv, H.h), H.J))


@check("connection.DF_DJ", "D F = 0 and D J = 0 for all four connections", "exact")
def _(ctx):
    out = 0.0
    for kind in KINDS:
        V = ctx.view(kind)
        for M in (V.F, V.J, V.h):
            t = Taylor.constant(M, 2 * ctx.n, V.eng.w.order)
            out = max(out, mx(V.D(t, n_up=1)))
    return out


@check("hashiguchi.torsion_hh", "T_H(h zeta, h xi) = Rfrak(zeta, xi)", "exact")
def _(ctx):
    H = ctx.view(HA)
    return mx(einsum("dab,ae,bk->dek", H.T, H.h, H.h) - H.Rf)


@check("hashiguchi.torsion_hv", "T_H(h zeta, J xi) = -FC(zeta, xi)", "exact")
def _(ctx):
    H = ctx.view(HA)
    return mx(einsum("dab,ae,bk->dek", H.T, H.h, H.J) + H.apply_F(H.Cf))


@check("hashiguchi.JS", "D_H[h zeta] JS = 0 and D_H[J zeta] JS = J zeta", "exact")
def _(ctx):
    H = ctx.view(HA)
    DC = H.D(H.Cl)  # [d, dir]
    return max(mx(einsum("dq,qz->dz", DC, H.h)), mx(einsum("dq,qz->dz", DC, H.J) - H.J))


@check("hashiguchi.spray_R", "R_H(eta, xi)S = Rfrak(eta, xi)", "exact")
def _(ctx):
    H = ctx.view(HA)
    return mx(_slot(H.Rint, H.S, "c") - H.Rf)


@check("hashiguchi.spray_P", "P_H(eta, xi)S = P_H(eta, S)xi = 0", "exact")
def _(ctx):
    H = ctx.view(HA)
    return max(mx(_slot(H.Pint, H.S, s)) for s in "bc")


@check("hashiguchi.spray_P_first_slot", "P_H(S, eta)xi = (D_H[hS] C)(eta, xi)", "oracle")
def _(ctx):
    H = ctx.view(HA)
    DhSC = einsum("dabq,qs,s->dab", H.D(H.Cf), H.h, H.S)
    return mx(_slot(H.Pint, H.S, "a") - DhSC)


@check("witness.hashiguchi.P_spray_first_slot", "P_H(S, eta)xi is nonzero: P_H is not antisymmetric",
       "witness", mode="witness", requires=("witness", "non-riemannian", "non-minkowski"))
def _(ctx):
    H = ctx.view(HA)
    return mx(_slot(H.Pint, H.S, "a"))


@check("hashiguchi.spray_Q", "Q_H(eta, xi)S = Q_H(eta, S)xi = Q_H(S, eta)xi = 0", "exact")
def _(ctx):
    H = ctx.view(HA)
    return max(mx(_slot(H.Qint, H.S, s)) for s in "abc")


@check("hashiguchi.P_symmetric", "P_H(zeta, kappa)xi = P_H(zeta, xi)kappa", "exact")
def _(ctx):
    P = ctx.view(HA).Pint  # [d, xi, zeta, kappa]
    return mx(P - P.transpose(0, 3, 2, 1))


# --- Bianchi identities ----------------------------------------------------------------------------

def _bianchi1(ctx, kind) -> float:
    V = ctx.view(kind)
    T = V.T
    lhs = cyclic(_abc(V.K))
    TT = einsum("dec,eab->dabc", T, T)
    DT = V.D(T).transpose(0, 3, 1, 2)  # (D_a T)(b, c)
    return mx(lhs - cyclic(TT + DT))


def _bianchi2(ctx, kind) -> float:
    V = ctx.view(kind)
    K, T = V.K, V.T
    KT = einsum("defc,fab->deabc", K, T)  # K(T(a, b), c) acting on e
    DK = V.D(K).transpose(0, 1, 4, 2, 3)  # (D_a K)(b, c) acting on e
    return mx(cyclic(KT + DK, axes=(2, 3, 4)))


for _kind in KINDS:
    check(f"bianchi.first.{_kind.value}",
          f"{_kind.value.capitalize()}: S{{K(zeta, eta)xi}} = S{{T(T(zeta, eta), xi) + (D_zeta T)(eta, xi)}}",
          "oracle")(lambda ctx, k=_kind: _bianchi1(ctx, k))
    check(f"bianchi.second.{_kind.value}",
          f"{_kind.value.capitalize()}: S{{K(T(zeta, eta), xi) + (D_zeta K)(eta, xi)}} = 0",
          "oracle")(lambda ctx, k=_kind: _bianchi2(ctx, k))


@check("hashiguchi.bianchi.a", "S{R_H(zeta, eta)xi} = S{C(F Rfrak(zeta, eta), xi)}", "oracle")
def _(ctx):
    H = ctx.view(HA)
    return mx(cyclic(_abc(H.Rint)) - cyclic(_CFR(H)))


@check("hashiguchi.bianchi.a_vanishing", "S{R_H(zeta, eta)xi} = 0", "oracle")
def _(ctx):
    return mx(cyclic(_abc(ctx.view(HA).Rint)))


@check("hashiguchi.bianchi.b", "S{Q_H(zeta, eta)xi} = 0", "oracle")
def _(ctx):
    return mx(cyclic(_abc(ctx.view(HA).Qint)))


@check("hashiguchi.bianchi.c",
       "C(F Rfrak(zeta, eta), xi) = Rfrak(FC(zeta, xi), eta) - Rfrak(FC(eta, xi), zeta)", "oracle")
def _(ctx):
    H = ctx.view(HA)
    FC = H.apply_F(H.Cf)
    rhs = einsum("dfe,fzx->dzex", H.Rf, FC) - einsum("dfz,fex->dzex", H.Rf, FC)
    return mx(_CFR(H) - rhs)


@check("hashiguchi.R_from_Rfrak",
       "R_H(zeta, eta)xi = Rfrak(FC(zeta, xi), eta) - Rfrak(FC(eta, xi), zeta) + (D_H[J xi] Rfrak)(zeta, eta)",
       "oracle")
def _(ctx):
    H = ctx.view(HA)
    FC = H.apply_F(H.Cf)
    rhs = (einsum("dfe,fzx->dzex", H.Rf, FC) - einsum("dfz,fex->dzex", H.Rf, FC)
           + einsum("dzek,kx->dzex", H.D(H.Rf), H.J))
    return mx(_abc(H.Rint) - rhs)


@check("hashiguchi.bianchi.d", "S{(D_H[h zeta] Rfrak)(eta, xi)} = 0", "oracle")
def _(ctx):
    H = ctx.view(HA)
    return mx(cyclic(_Dh(H, H.Rf, H.h)))


def _DX(V: IntrinsicView, X: Taylor, A) -> Taylor:
    """(D_{A z} X)(a, b)c for X[d, c, a, b] as [d, c, z, a, b]."""
    return einsum("dcabq,qz->dczab", V.D(X), A)


@check("hashiguchi.bianchi.e",
       "S{(D_H[h zeta] R_H)(eta, xi)} = S{P_H(zeta, F Rfrak(eta, xi))}", "oracle")
def _(ctx):
    H = ctx.view(HA)
    lhs = cyclic(_DX(H, H.Rint, H.h), axes=(2, 3, 4))
    rhs = einsum("dcze,eab->dczab", H.Pint, H.apply_F(H.Rf))
    return mx(lhs - cyclic(rhs, axes=(2, 3, 4)))


@check("hashiguchi.bianchi.f",
       "(D_H[h zeta] P_H)(eta, xi) - (D_H[h eta] P_H)(zeta, xi) + (D_H[J xi] R_H)(zeta, eta) "
       "= R_H(FC(eta, xi), zeta) - R_H(FC(zeta, xi), eta) - Q_H(F Rfrak(zeta, eta), xi)", "oracle")
def _(ctx):
    H = ctx.view(HA)
    DhP = _DX(H, H.Pint, H.h)
    DJR = _DX(H, H.Rint, H.J)
    lhs = DhP - DhP.transpose(0, 1, 3, 2, 4) + DJR.transpose(0, 1, 3, 4, 2)
    FC, FR = H.apply_F(H.Cf), H.apply_F(H.Rf)
    rhs = (einsum("dcfz,fex->dczex", H.Rint, FC) - einsum("dcfe,fzx->dczex", H.Rint, FC)
           - einsum("dcfx,fze->dczex", H.Qint, FR))
    return mx(lhs - rhs)


@check("hashiguchi.bianchi.g",
       "(D_H[h zeta] Q_H)(eta, xi) - (D_H[J eta] P_H)(zeta, xi) + (D_H[J xi] P_H)(zeta, eta) "
       "= P_H(FC(zeta, eta), xi) - P_H(FC(xi, zeta), eta)", "oracle")
def _(ctx):
    H = ctx.view(HA)
    DhQ = _DX(H, H.Qint, H.h)
    DJP = _DX(H, H.Pint, H.J)
    lhs = DhQ - DJP.transpose(0, 1, 3, 2, 4) + DJP.transpose(0, 1, 3, 4, 2)
    FC = H.apply_F(H.Cf)
    rhs = einsum("dcfx,fze->dczex", H.Pint, FC) - einsum("dcfe,fxz->dczex", H.Pint, FC)
    return mx(lhs - rhs)


@check("hashiguchi.bianchi.h", "S{(D_H[J zeta] Q_H)(eta, xi)} = 0", "oracle")
def _(ctx):
    H = ctx.view(HA)
    return mx(cyclic(_DX(H, H.Qint, H.J), axes=(2, 3, 4)))


def _DS(V: IntrinsicView, X: Taylor, A) -> Taylor:
    """(D_{A zeta} X)(eta, S)kappa as [d, kappa, eta, zeta]."""
    return einsum("dcesq,qz,s->dcez", V.D(X), A, V.S)


@check("hashiguchi.DP_DQ_spray_h", "(D_H[h zeta] P_H)(eta, S) = 0 and (D_H[h zeta] Q_H)(eta, S) = 0", "oracle")
def _(ctx):
    H = ctx.view(HA)
    return max(mx(_DS(H, H.Pint, H.h)), mx(_DS(H, H.Qint, H.h)))


@check("hashiguchi.DP_DQ_spray_J",
       "(D_H[J zeta] P_H)(eta, S) = -P_H(eta, zeta) and (D_H[J zeta] Q_H)(eta, S) = -Q_H(eta, zeta)",
       "oracle")
def _(ctx):
    H = ctx.view(HA)
    return max(mx(_DS(H, H.Pint, H.J) + H.Pint), mx(_DS(H, H.Qint, H.J) + H.Qint))


def _DC(V: IntrinsicView, X: Taylor) -> Taylor:
    return einsum("dcabq,q->dcab", V.D(X), V.Cl)


@check("hashiguchi.DC_R", "D_H[C] R_H = 0", "oracle")
def _(ctx):
    H = ctx.view(HA)
    return mx(_DC(H, H.Rint))


@check("hashiguchi.DC_P", "D_H[C] P_H = -P_H", "oracle")
def _(ctx):
    H = ctx.view(HA)
    return mx(_DC(H, H.Pint) + H.Pint)


@check("hashiguchi.DC_Q", "D_H[C] Q_H = -2 Q_H", "oracle")
def _(ctx):
    H = ctx.view(HA)
    return mx(_DC(H, H.Qint) + 2.0 * H.Qint)


def _frame_bracket(V: IntrinsicView, A, Bm) -> Taylor:
    """[A e_z, B e_x] for constant A, B as [d, z, x]."""
    return einsum("dab,az,bx->dzx", V.eng.brackets, A, Bm)


@check("hashiguchi.lie_brackets",
       "[J eta, J xi] = J(D_[J eta] xi - D_[J xi] eta); "
       "[h eta, J xi] = J(D_[h eta] xi) - h(D_[J xi] eta) + FC(eta, xi); "
       "[h eta, h xi] = h(D_[h eta] xi - D_[h xi] eta) - Rfrak(eta, xi)", "exact")
def _(ctx):
    H = ctx.view(HA)
    J, h = H.J, H.h
    DJ, Dh = _frame_D(H, J), _frame_D(H, h)  # [d, z, e] = D_{A e_z} e_e
    a = _frame_bracket(H, J, J) - einsum("df,fzx->dzx", J, DJ - DJ.transpose(0, 2, 1))
    b = (_frame_bracket(H, h, J) - einsum("df,fzx->dzx", J, Dh)
         + einsum("df,fxz->dzx", h, DJ) - H.apply_F(H.Cf))
    c = (_frame_bracket(H, h, h) - einsum("df,fzx->dzx", h, Dh - Dh.transpose(0, 2, 1)) + H.Rf)
    return max(mx(a), mx(b), mx(c))


# --- special metric classes ----------------------------------------------------------------------

@check("riemannian.coincidence",
       "Riemannian metrics: the four connections share coefficients, torsion and curvature", "exact",
       requires=("riemannian",))
def _(ctx):
    pc = ctx.pc
    out = 0.0
    ref_c = (pc.V(B).value, pc.H(B).value)
    ref_t = pc.engine(B).torsion.value
    ref_k = [x.value for x in pc.curvature_fields(B)]
    for kind in KINDS[1:]:
        out = max(out, mx(pc.V(kind).value - ref_c[0]), mx(pc.H(kind).value - ref_c[1]))
        out = max(out, mx(pc.engine(kind).torsion.value - ref_t))
        out = max(out, *(mx(a.value - b) for a, b in zip(pc.curvature_fields(kind), ref_k)))
    return out


@check("riemannian.christoffel",
       "Riemannian metrics: G^h = 1/2 gamma^h_ij y^i y^j and Gamma^h_ij = gamma^h_ij", "exact",
       requires=("riemannian",))
def _(ctx):
    geo = ctx.geo
    g, gi = geo.g.value, geo.g_inv.value
    dg = geo.xd(geo.g).value  # [a, b, c] = d_c g_ab
    low = dg.transpose(0, 2, 1) + dg.transpose(1, 0, 2) - dg.transpose(2, 0, 1)
    gamma = 0.5 * np.einsum("hl,lij->hij", gi, low)
    y = np.array(ctx.p.y)
    return max(mx(geo.G.value - 0.5 * np.einsum("hij,i,j->h", gamma, y, y)),
               mx(geo.Gamma.value - gamma))


@check("minkowski.flat", "Locally Minkowski: Rfrak = 0 and every h- and hv-curvature vanishes", "exact",
       requires=("minkowski",))
def _(ctx):
    out = mx(ctx.geo.R)
    for kind in KINDS:
        Rh, Phv, _ = ctx.pc.curvature_fields(kind)
        out = max(out, mx(Rh), mx(Phv))
    return out


@check("witness.minkowski.v_curvature",
       "Locally Minkowski, non-Riemannian: the Cartan and Hashiguchi v-curvatures are nonzero",
       "witness", mode="witness", requires=("witness", "minkowski", "non-riemannian"), min_dim=3)
def _(ctx):
    return min(mx(ctx.pc.curvature_fields(kind)[2]) for kind in (CA, HA))


# --- oracle independence ----------------------------------------------------------------------------

#: number of random derivative queries per sample point
FD_QUERIES = 5


@check("jets.fd_oracle", "jet partial derivatives agree with Richardson-extrapolated central differences "
       "(relative error)", "oracle")
def _(ctx):
    rng = np.random.default_rng(1000 + ctx.index)
    n2 = 2 * ctx.n
    jet = jets.eval_jet(ctx.E, ctx.p, 3)
    out = 0.0
    for _ in range(FD_QUERIES):
        order = int(rng.integers(1, 4))
        alpha = [0] * n2
        for v in rng.integers(0, n2, order):
            alpha[int(v)] += 1
        exact = jet[alpha]
        approx = jets.fd_partial(ctx.E, ctx.p, alpha)
        out = max(out, abs(exact - approx) / max(1.0, abs(exact)))
    return out


# ----------------------------------------------------------------------------
# running the suite
# ----------------------------------------------------------------------------

@dataclass
class CheckResult:
    id: str
    anchor: str
    mode: str
    tolerance: float
    residual: float | None
    passed: bool | None
    status: str  # pass, fail, error, skipped
    error: str | None = None

    def as_dict(self) -> dict:
        return {"id": self.id, "anchor": self.anchor, "mode": self.mode,
                "tolerance": self.tolerance, "residual": self.residual,
                "pass": self.passed, "status": self.status, "error": self.error}


@dataclass
class ResidualReport:
    metric: str
    dim: int
    seed: int
    n_points: int
    classes: dict
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        counts = {"pass": 0, "fail": 0, "error": 0, "skipped": 0}
        for c in self.checks:
            counts[c.status] += 1
        counts["total"] = len(self.checks)
        return counts

    @property
    def ok(self) -> bool:
        return self.summary["fail"] == 0 and self.summary["error"] == 0

    def by_id(self, check_id: str) -> CheckResult:
        for c in self.checks:
            if c.id == check_id:
                return c
        raise KeyError(check_id)

    def as_dict(self) -> dict:
        return {"metric": self.metric, "dim": self.dim, "seed": self.seed,
                "n_points": self.n_points, "classes": dict(self.classes),
                "checks": [c.as_dict() for c in self.checks], "summary": self.summary}


def check_ids() -> list[str]:
    return [c.id for c in REGISTRY]


def classify(contexts: list[PointContext]) -> dict:
    """Detect metric classes numerically from the sample points."""
    maxC, maxdx = 0.0, 0.0
    for ctx in contexts:
        try:
            maxC = max(maxC, mx(ctx.geo.C))
            maxdx = max(maxdx, mx(ctx.geo.xd(ctx.geo.g)))
        except FinslerError:
            continue
    riem = maxC <= CLASS_THRESHOLD
    return {"riemannian": riem, "non-riemannian": not riem,
            "minkowski": maxdx <= CLASS_THRESHOLD, "non-minkowski": maxdx > CLASS_THRESHOLD}


def _applicable(chk: Check, classes: dict, info: MetricInfo, n: int) -> bool:
    if n < chk.min_dim:
        return False
    for req in chk.requires:
        if req == "witness":
            if info.witness_point is None:
                return False
        elif not classes.get(req, False):
            return False
    return True


def run_suite(info: MetricInfo, points: list[TangentPoint], tolerances: dict | None = None,
              seed: int = 0, only: list[str] | None = None) -> ResidualReport:
    tols = dict(TOLERANCES)
    tols.update(tolerances or {})
    n = info.field.n
    contexts = [PointContext(info, p, k) for k, p in enumerate(points)]
    classes = classify(contexts)
    witness_ctx = (PointContext(info, info.witness_point, 0)
                   if info.witness_point is not None else None)
    report = ResidualReport(info.name, n, seed, len(points), classes)
    for chk in REGISTRY:
        if only is not None and chk.id not in only:
            continue
        tol = tols[chk.tol_class]
        if not _applicable(chk, classes, info, n):
            report.checks.append(CheckResult(chk.id, chk.anchor, chk.mode, tol, None, None, "skipped"))
            continue
        targets = [witness_ctx] if chk.mode == "witness" else contexts
        residual, error = 0.0, None
        for ctx in targets:
            try:
                value = float(chk.fn(ctx))
            except (FinslerError, ArithmeticError, ValueError) as exc:
                error = f"{type(exc).__name__}: {exc}"
                break
            if not np.isfinite(value):
                error = "non-finite residual"
                break
            residual = max(residual, value)
        if error is not None:
            report.checks.append(CheckResult(chk.id, chk.anchor, chk.mode, tol, None, None, "error", error))
            continue
        passed = residual > tol if chk.mode == "witness" else residual <= tol
        report.checks.append(CheckResult(chk.id, chk.anchor, chk.mode, tol, residual, passed,
                                         "pass" if passed else "fail"))
    return report


# ----------------------------------------------------------------------------
# process diagram
# ----------------------------------------------------------------------------

_ARROWS = [
    ("berwald", "hashiguchi", "C-process", True, False),
    ("hashiguchi", "cartan", "C'-process", False, True),
    ("berwald", "chern", "C'-process", False, True),
    ("chern", "cartan", "C-process", True, False),
]


def compare_connections(E, p) -> list[dict]:
    """Differences between connections linked in the process diagram.

    Each entry carries the vertical and horizontal coefficient differences
    (target minus source), the expected pair ((C, 0) or (0, C')) and the
    max-norm residual between them.
    """
    pc = PointConnections(E, p, order=4)
    C, Cp = pc.geo.C.value, pc.geo.Cprime.value
    out = []
    for src, dst, label, addV, addH in _ARROWS:
        s, d = ConnectionKind(src), ConnectionKind(dst)
        dV = pc.V(d).value - pc.V(s).value
        dH = pc.H(d).value - pc.H(s).value
        eV = C if addV else np.zeros_like(C)
        eH = Cp if addH else np.zeros_like(Cp)
        out.append({"from": src, "to": dst, "process": label, "dV": dV, "dH": dH,
                    "expected_V": "C" if addV else "0", "expected_H": "C'" if addH else "0",
                    "residual": max(mx(dV - eV), mx(dH - eH))})
    return out
