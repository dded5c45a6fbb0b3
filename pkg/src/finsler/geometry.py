"""Metric, spray, Barthel connection and adapted frame of an energy function.

Everything is computed from one Taylor expansion of ``E`` at the point.  The
intermediate objects (g, G, N, ...) are themselves kept as Taylor fields so
later stages can differentiate them again without re-expanding: every
``d/dy`` or ``delta`` costs one order.  With ``E`` expanded to order K:

    g, g^-1, G    K-2        C, Gamma     K-3
    N             K-3        R, Gc        K-4
    Gc3           K-5

Arrays are laid out upper index first, then lower indices in the order they
are written: ``N[h, i] = N^h_i``, ``Gc[h, i, j] = G^h_ij``,
``Gc3[i, h, j, k] = d/dy^k G^i_hj``, ``R[i, j, k] = R^i_jk``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import jets
from .errors import OrderTooHigh, SingularMetric
from .jets import ScalarField, Taylor, TangentPoint, einsum

#: condition number above which g is treated as singular
COND_LIMIT = 1e12
#: default expansion order; enough for covariant derivatives of curvature
DEFAULT_ORDER = jets.MAX_INTERNAL_ORDER


def _flat_apply(t: Taylor, mat, spec: str) -> Taylor:
    """Contract the last axis of ``t`` with ``mat`` per ``spec`` ("ah,hj->aj")."""
    lead = t.shape[:-1]
    flat = t.reshape(int(np.prod(lead, dtype=int)), t.shape[-1])
    out = einsum(spec, flat, mat)
    return out.reshape(*lead, out.shape[-1])


class Geometry:
    """Lazily evaluated geometric data of ``E`` around one tangent point."""

    def __init__(self, E: ScalarField, p, order: int = DEFAULT_ORDER):
        self.p = jets.coerce_point(p)
        self.E = E
        self.n = self.p.n
        self.order = order
        self.jet = jets.expand(E, self.p, order)
        self.xs = list(range(self.n))
        self.ys = list(range(self.n, 2 * self.n))

    def _need(self, field: Taylor, what: str) -> Taylor:
        if field.order < 0:
            raise OrderTooHigh(f"{what} needs a higher expansion order than {self.order}")
        return field

    # derivative helpers -----------------------------------------------------
    def vd(self, t: Taylor) -> Taylor:
        """Vertical derivative; new trailing axis k holds d/dy^k."""
        return t.gradient(self.ys)

    def xd(self, t: Taylor) -> Taylor:
        return t.gradient(self.xs)

    def hd(self, t: Taylor) -> Taylor:
        """Horizontal derivative delta_k = d_k - N^h_k d/dy^h as a trailing axis."""
        if t.ndim == 0:
            return self.xd(t) - einsum("h,hk->k", self.vd(t), self.N)
        return self.xd(t) - _flat_apply(self.vd(t), self.N, "ah,hk->ak")

    def frame_d(self, t: Taylor) -> Taylor:
        """Derivative along the adapted frame (delta_1..delta_n, dy_1..dy_n)."""
        hor, ver = self.hd(t), self.vd(t)
        order = min(hor.order, ver.order)
        coef = np.concatenate([hor.truncate(order).coef, ver.truncate(order).coef], axis=-2)
        return Taylor(coef, t.nvar, order)

    @cached_property
    def y(self) -> Taylor:
        _, ys = jets.seed_variables(self.p, self.order)
        return jets.stack(ys)

    # metric -------------------------------------------------------------------
    @cached_property
    def dE_x(self) -> Taylor:
        return self.xd(self.jet)

    @cached_property
    def dE_y(self) -> Taylor:
        return self.vd(self.jet)

    @cached_property
    def g(self) -> Taylor:
        return self._need(self.vd(self.dE_y), "g")

    @cached_property
    def g_inv(self) -> Taylor:
        g0 = self.g.value
        if not np.all(np.isfinite(g0)) or np.linalg.cond(g0) > COND_LIMIT:
            raise SingularMetric(f"fundamental tensor is singular at {self.p}")
        return jets.inverse(self.g)

    # spray and Barthel connection --------------------------------------------------
    @cached_property
    def G(self) -> Taylor:
        mixed = self.xd(self.dE_y)  # [r, s] = d_s dy_r E
        rhs = einsum("rs,s->r", mixed, self.y) - self.dE_x
        return 0.5 * einsum("hr,r->h", self.g_inv, rhs)

    @cached_property
    def N(self) -> Taylor:
        return self._need(self.vd(self.G), "N")

    @cached_property
    def Gc(self) -> Taylor:
        return self._need(self.vd(self.N), "Berwald coefficients")

    @cached_property
    def Gc3(self) -> Taylor:
        return self._need(self.vd(self.Gc), "Berwald hv-curvature")

    @cached_property
    def R(self) -> Taylor:
        dN = self._need(self.hd(self.N), "Barthel curvature")  # [i, j, k] = delta_k N^i_j
        return dN - dN.transpose(0, 2, 1)

    # Cartan tensors and Cartan coefficients --------------------------------------------
    @cached_property
    def C_low(self) -> Taylor:
        return 0.5 * self.vd(self.g)  # [i, j, k] = 1/2 dy_k g_ij

    @cached_property
    def C(self) -> Taylor:
        return einsum("kl,lij->kij", self.g_inv, self.C_low)

    @cached_property
    def dg(self) -> Taylor:
        return self.hd(self.g)  # [a, b, c] = delta_c g_ab

    @cached_property
    def Gamma(self) -> Taylor:
        dg = self.dg
        low = dg.transpose(0, 2, 1) + dg.transpose(1, 0, 2) - dg.transpose(2, 0, 1)
        # low[l, i, j] = delta_i g_lj + delta_j g_il - delta_l g_ij
        return 0.5 * einsum("hl,lij->hij", self.g_inv, low)

    @cached_property
    def Cprime(self) -> Taylor:
        return self.Gamma - self.Gc

    # natural-frame matrices (values only) ------------------------------------------
    def natural_matrices(self) -> dict[str, np.ndarray]:
        n = self.n
        N = self.N.value
        eye, zero = np.eye(n), np.zeros((n, n))
        h = np.block([[eye, zero], [-N, zero]])
        F = np.block([[N, eye], [-N @ N - eye, -N]])
        J = np.block([[zero, zero], [eye, zero]])
        return {"h": h, "v": np.eye(2 * n) - h, "F": F, "J": J,
                "delta": np.vstack([eye, -N])}


# ----------------------------------------------------------------------------
# public data types
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricData:
    g: np.ndarray
    g_inv: np.ndarray
    at: TangentPoint


@dataclass(frozen=True)
class SprayData:
    G: np.ndarray
    N: np.ndarray | None = None
    Gc: np.ndarray | None = None
    Gc3: np.ndarray | None = None


@dataclass(frozen=True)
class FrameData:
    delta: np.ndarray
    h: np.ndarray
    v: np.ndarray
    F: np.ndarray


@dataclass(frozen=True)
class BarthelCurvature:
    Rjk: np.ndarray


def metric(E: ScalarField, p) -> MetricData:
    geo = Geometry(E, p, order=2)
    return MetricData(geo.g.value, geo.g_inv.value, geo.p)


def fundamental_form(E: ScalarField, p) -> np.ndarray:
    """Omega = dd_J E in the natural frame (d_1..d_n, dy_1..dy_n)."""
    geo = Geometry(E, p, order=2)
    n = geo.n
    mixed = geo.xd(geo.dE_y).value  # [i, j] = d_j dy_i E
    om = np.zeros((2 * n, 2 * n))
    om[:n, :n] = mixed.T - mixed  # Omega(d_j, d_i) = d_j dy_i E - d_i dy_j E
    om[n:, :n] = geo.g.value
    om[:n, n:] = -geo.g.value
    return om


def euler_lagrange_residual(E: ScalarField, p) -> np.ndarray:
    """Components of i_S Omega + dE, which vanish for the canonical spray."""
    geo = Geometry(E, p, order=2)
    S = np.concatenate([np.array(geo.p.y), -2.0 * geo.G.value])
    dE = np.concatenate([geo.dE_x.value, geo.dE_y.value])
    return S @ fundamental_form(E, p) + dE


def spray(E: ScalarField, p) -> SprayData:
    return SprayData(G=Geometry(E, p, order=2).G.value)


def nonlinear_connection(E: ScalarField, p) -> SprayData:
    geo = Geometry(E, p, order=5)
    return SprayData(geo.G.value, geo.N.value, geo.Gc.value, geo.Gc3.value)


def frame(E: ScalarField, p) -> FrameData:
    m = Geometry(E, p, order=3).natural_matrices()
    return FrameData(m["delta"], m["h"], m["v"], m["F"])


def printed_F(E: ScalarField, p) -> np.ndarray:
    """F assembled column by column from its natural-frame expression.

    F(d_i) = N^j_i d_j - N^h_i N^j_h dy_j - dy_i and F(dy_i) = delta_i; kept
    separate from :func:`frame` so the two can be compared.
    """
    geo = Geometry(E, p, order=3)
    n = geo.n
    N = geo.N.value
    F = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            F[j, i] += N[j, i]
            F[n + j, i] -= sum(N[h, i] * N[j, h] for h in range(n))
        F[n + i, i] -= 1.0
        F[i, n + i] = 1.0
        for h in range(n):
            F[n + h, n + i] = -N[h, i]
    return F


def barthel_curvature(E: ScalarField, p) -> BarthelCurvature:
    return BarthelCurvature(Geometry(E, p, order=4).R.value)
