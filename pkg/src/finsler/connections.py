"""The Berwald, Cartan, Chern and Hashiguchi connections in components.

Each connection is a pair (V, H) of vertical and horizontal coefficients:

    kind         V      H
    Berwald      0      G^k_ij   (Berwald coefficients)
    Cartan       C      Gamma
    Chern        0      Gamma
    Hashiguchi   C      G^k_ij

Torsion and curvature returned here use the classical local formulas.  The
generic engine in :mod:`finsler.frame` computes the same objects from
(V, H) alone and is used as an independent cross-check.

Curvature conventions: ``Rh[i, h, j, k]`` is R^i_hjk, and likewise for
``Phv`` and ``Qv``.  In terms of the curvature operator K of the connection,
R^i_hjk dy_i = K(delta_k, delta_j) dy_h, P^i_hjk dy_i = K(dy_k, delta_j) dy_h
and Q^i_hjk dy_i = K(dy_k, dy_j) dy_h.

The Cartan h-curvature carries the term ``+ C^i_hm R^m_jk``.  This is the
sign produced by the curvature operator of the Cartan coefficients and by
the intrinsic relation between the Cartan and Berwald h-curvatures.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .frame import AdaptedConnection
from .geometry import DEFAULT_ORDER, Geometry
from .jets import ScalarField, Taylor, TangentPoint, einsum


class ConnectionKind(enum.Enum):
    BERWALD = "berwald"
    CARTAN = "cartan"
    CHERN = "chern"
    HASHIGUCHI = "hashiguchi"

    @classmethod
    def parse(cls, value) -> ConnectionKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown connection kind {value!r}") from None

    @property
    def has_vertical(self) -> bool:
        return self in (ConnectionKind.CARTAN, ConnectionKind.HASHIGUCHI)

    @property
    def uses_gamma(self) -> bool:
        return self in (ConnectionKind.CARTAN, ConnectionKind.CHERN)


KINDS = tuple(ConnectionKind)


@dataclass(frozen=True)
class ConnectionCoefficients:
    kind: ConnectionKind
    V: np.ndarray
    H: np.ndarray
    at: TangentPoint


@dataclass(frozen=True)
class TorsionComponents:
    """Torsion blocks.

    ``hh[i, j, k]`` is R^i_jk.  ``hv[d, j, k]`` holds the adapted components
    (first n horizontal, last n vertical) of T(delta_j, dy_k); ``vv`` is the
    corresponding array for T(dy_j, dy_k).
    """

    hh: np.ndarray
    hv: np.ndarray
    vv: np.ndarray


@dataclass(frozen=True)
class CurvatureComponents:
    Rh: np.ndarray
    Phv: np.ndarray
    Qv: np.ndarray


def _antisym(x: Taylor) -> Taylor:
    return x - x.transpose(0, 1, 3, 2)


class PointConnections:
    """All four connections around one point, sharing one :class:`Geometry`."""

    def __init__(self, E: ScalarField, p, order: int = DEFAULT_ORDER, geo: Geometry | None = None):
        self.geo = geo if geo is not None else Geometry(E, p, order)
        self.n = self.geo.n

    # coefficient fields ---------------------------------------------------------
    def zero3(self, order: int) -> Taylor:
        return Taylor.zeros((self.n,) * 3, 2 * self.n, order)

    def V(self, kind: ConnectionKind) -> Taylor:
        return self.geo.C if kind.has_vertical else self.zero3(self.geo.C.order)

    def H(self, kind: ConnectionKind) -> Taylor:
        return self.geo.Gamma if kind.uses_gamma else self.geo.Gc

    def engine(self, kind) -> AdaptedConnection:
        kind = ConnectionKind.parse(kind)
        cache = self.__dict__.setdefault("_engines", {})
        if kind not in cache:
            cache[kind] = AdaptedConnection(self.geo, self.V(kind), self.H(kind), kind.value)
        return cache[kind]

    # local formulas --------------------------------------------------------------
    def hcov_C(self, kind) -> Taylor:
        """C^i_hk|j with respect to the horizontal coefficients of ``kind``; [i, h, k, j]."""
        H, C = self.H(ConnectionKind.parse(kind)), self.geo.C
        return (self.geo.hd(C) + einsum("imj,mhk->ihkj", H, C)
                - einsum("mhj,imk->ihkj", H, C) - einsum("mkj,ihm->ihkj", H, C))

    @cached_property
    def v_curvature_local(self) -> Taylor:
        C = self.geo.C
        return einsum("mhk,imj->ihjk", C, C) - einsum("mhj,imk->ihjk", C, C)

    @cached_property
    def C_R(self) -> Taylor:
        return einsum("ihm,mjk->ihjk", self.geo.C, self.geo.R)

    def _h_curvature_of(self, H: Taylor) -> Taylor:
        return _antisym(self.geo.hd(H) + einsum("mhj,imk->ihjk", H, H))

    def curvature_fields(self, kind) -> tuple[Taylor, Taylor, Taylor]:
        kind = ConnectionKind.parse(kind)
        geo = self.geo
        if kind is ConnectionKind.BERWALD:
            Rh = self._h_curvature_of(geo.Gc)
            Phv = geo.Gc3
            Qv = 0.0 * self.v_curvature_local
        elif kind is ConnectionKind.CHERN:
            Rh = self._h_curvature_of(geo.Gamma)
            Phv = geo.vd(geo.Gamma)
            Qv = 0.0 * self.v_curvature_local
        elif kind is ConnectionKind.CARTAN:
            Rh = self._h_curvature_of(geo.Gamma) + self.C_R
            P_torsion = -geo.Cprime  # P^i_jk = G^i_jk - Gamma^i_jk
            Phv = (geo.vd(geo.Gamma) - self.hcov_C(kind).transpose(0, 1, 3, 2)
                   + einsum("ihm,mjk->ihjk", geo.C, P_torsion))
            Qv = self.v_curvature_local
        else:
            Rh = self._h_curvature_of(geo.Gc) + self.C_R
            Phv = geo.Gc3 - self.hcov_C(kind).transpose(0, 1, 3, 2)
            Qv = self.v_curvature_local
        return Rh, Phv, Qv

    def torsion_fields(self, kind) -> tuple[Taylor, Taylor]:
        kind = ConnectionKind.parse(kind)
        geo, n = self.geo, self.n
        hv = Taylor.zeros((2 * n, n, n), 2 * n, geo.Cprime.order)
        if kind.has_vertical:
            hv.coef[:n] = -geo.C.truncate(hv.order).coef  # -F C
        if kind.uses_gamma:
            hv.coef[n:] = geo.Cprime.coef  # C'
        return geo.R, hv

    # engine-side views ----------------------------------------------------------
    def engine_curvature_blocks(self, kind) -> tuple[Taylor, Taylor, Taylor]:
        """The three curvature blocks read off the curvature operator, local layout."""
        n = self.n
        K = self.engine(kind).curvature
        Rh = K[n:, n:, :n, :n].transpose(0, 1, 3, 2)
        Phv = K[n:, n:, n:, :n].transpose(0, 1, 3, 2)
        Qv = K[n:, n:, n:, n:].transpose(0, 1, 3, 2)
        return Rh, Phv, Qv


# ----------------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------------

def cartan_tensor_first(E: ScalarField, p) -> tuple[np.ndarray, np.ndarray]:
    """(C^k_ij as [k, i, j], lowered C_ijk)."""
    geo = Geometry(E, p, order=3)
    return geo.C.value, geo.C_low.value


def cartan_coeffs(E: ScalarField, p) -> np.ndarray:
    return Geometry(E, p, order=4).Gamma.value


def cartan_tensor_second(E: ScalarField, p) -> np.ndarray:
    return Geometry(E, p, order=4).Cprime.value


def coefficients(kind, E: ScalarField, p) -> ConnectionCoefficients:
    kind = ConnectionKind.parse(kind)
    pc = PointConnections(E, p, order=4)
    return ConnectionCoefficients(kind, pc.V(kind).value, pc.H(kind).value, pc.geo.p)


def covariant_derivative(kind, E: ScalarField, X, direction: int, at) -> np.ndarray:
    """D_{e_direction} X for an adapted-frame field X at ``at``.

    ``X`` is a :class:`~finsler.fncalc.VectorFieldTM` whose components are read
    against (delta_1..delta_n, dy_1..dy_n); ``direction`` indexes that frame.
    """
    kind = ConnectionKind.parse(kind)
    pc = PointConnections(E, at, order=4)
    field = X.jet(pc.geo.p, 1)
    return pc.engine(kind).covariant(field, n_up=1)[:, direction].value


def torsion(kind, E: ScalarField, p) -> TorsionComponents:
    pc = PointConnections(E, p, order=4)
    hh, hv = pc.torsion_fields(kind)
    n = pc.n
    return TorsionComponents(hh.value, hv.value, np.zeros((2 * n, n, n)))


def curvature(kind, E: ScalarField, p) -> CurvatureComponents:
    pc = PointConnections(E, p, order=5)
    Rh, Phv, Qv = pc.curvature_fields(kind)
    return CurvatureComponents(Rh.value, Phv.value, Qv.value)


def horizontal_cov_deriv_C(kind, E: ScalarField, p) -> np.ndarray:
    kind = ConnectionKind.parse(kind)
    if not kind.has_vertical:
        raise ValueError("only defined for the Cartan and Hashiguchi connections")
    return PointConnections(E, p, order=4).hcov_C(kind).value


_BLOCKS = {"Rh": 0, "Phv": 1, "Qv": 2}


def cov_deriv_curvature(kind, which: str, direction: int, E: ScalarField, p) -> np.ndarray:
    """Covariant derivative of a curvature block along adapted direction ``direction``.

    Uses the full curvature operator as a (1,3) tensor; the result is
    returned in the same local layout as :func:`curvature`.
    """
    if which not in _BLOCKS:
        raise ValueError(f"which must be one of {sorted(_BLOCKS)}")
    pc = PointConnections(E, p, order=DEFAULT_ORDER)
    eng = pc.engine(kind)
    DK = eng.covariant(eng.curvature, n_up=1)[..., direction]
    n = pc.n
    sl = [(slice(None, n), slice(None, n)), (slice(n, None), slice(None, n)),
          (slice(n, None), slice(n, None))][_BLOCKS[which]]
    block = DK[n:, n:, sl[0], sl[1]].transpose(0, 1, 3, 2)
    return block.value
