"""Frölicher-Nijenhuis calculus on TM in the natural frame.

Vector fields and vector 1-forms on TM are represented by their component
functions against (d_1..d_n, dy_1..dy_n).  A field only has to be able to
produce an order-1 jet of its components at a point; brackets are then
evaluated pointwise:

    [X, Y]^a      = X^b d_b Y^a - Y^b d_b X^a
    [X, L]^a_c    = X^b d_b L^a_c - L^b_c d_b X^a + L^a_b d_c X^b

The second line is [X, L]xi = [X, L xi] - L[X, xi] applied to the constant
frame fields, whose mutual brackets vanish.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import jets
from .geometry import Geometry
from .jets import ScalarField, Taylor, TangentPoint, einsum

JetFn = Callable[[TangentPoint, int], Taylor]


def _flatten(obj) -> list:
    if isinstance(obj, (list, tuple)):
        return [leaf for item in obj for leaf in _flatten(item)]
    if isinstance(obj, np.ndarray) and obj.dtype == object:
        return [leaf for item in obj for leaf in _flatten(item)]
    if isinstance(obj, np.ndarray) and obj.ndim:
        return list(obj.reshape(-1))
    return [obj]


def _generic(func, p: TangentPoint, order: int, shape) -> Taylor:
    xs, ys = jets.seed_variables(p, order)
    leaves = _flatten(func(xs, ys))
    if len(leaves) != int(np.prod(shape)):
        raise ValueError(f"expected {int(np.prod(shape))} components, got {len(leaves)}")
    nvar = 2 * p.n
    coef = np.stack([jets.as_taylor(t, nvar, order).truncate(order).coef for t in leaves])
    return Taylor(coef.reshape(*shape, -1), nvar, order)


class VectorFieldTM:
    """Vector field on TM given by a jet provider for its 2n components."""

    def __init__(self, n: int, jet: JetFn, name: str = "field"):
        self.n = n
        self._jet = jet
        self.name = name

    def jet(self, p, order: int = 1) -> Taylor:
        p = jets.coerce_point(p)
        out = self._jet(p, order)
        if out.shape != (2 * self.n,):
            raise ValueError(f"{self.name}: expected {2 * self.n} components, got {out.shape}")
        return out

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.jet(p, 0).value)

    @classmethod
    def from_components(cls, n: int, func, name: str = "field") -> VectorFieldTM:
        """``func(xs, ys)`` returns 2n components over the generic arithmetic."""
        return cls(n, lambda p, order: _generic(func, p, order, (2 * n,)), name)

    @classmethod
    def constant(cls, vec: Sequence[float], name: str = "constant") -> VectorFieldTM:
        vec = np.asarray(vec, dtype=float)
        n = len(vec) // 2
        return cls(n, lambda p, order: Taylor.constant(vec, 2 * n, order), name)


class VectorOneFormTM:
    """Vector 1-form on TM: a 2n x 2n matrix field acting on natural components."""

    def __init__(self, n: int, jet: JetFn, name: str = "form"):
        self.n = n
        self._jet = jet
        self.name = name

    def jet(self, p, order: int = 1) -> Taylor:
        p = jets.coerce_point(p)
        out = self._jet(p, order)
        if out.shape != (2 * self.n, 2 * self.n):
            raise ValueError(f"{self.name}: expected a {2 * self.n}x{2 * self.n} matrix")
        return out

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.jet(p, 0).value)

    @classmethod
    def from_components(cls, n: int, func, name: str = "form") -> VectorOneFormTM:
        return cls(n, lambda p, order: _generic(func, p, order, (2 * n, 2 * n)), name)

    @classmethod
    def constant(cls, mat, name: str = "constant") -> VectorOneFormTM:
        mat = np.asarray(mat, dtype=float)
        n = mat.shape[0] // 2
        return cls(n, lambda p, order: Taylor.constant(mat, 2 * n, order), name)

    @classmethod
    def identity(cls, n: int) -> VectorOneFormTM:
        return cls.constant(np.eye(2 * n), "identity")


def natural_structures(n: int) -> dict[str, object]:
    """The almost tangent structure J and the Liouville field C."""
    if n < 2:
        raise ValueError("dimension must be at least 2")
    J = np.zeros((2 * n, 2 * n))
    J[n:, :n] = np.eye(n)
    C = VectorFieldTM.from_components(n, lambda xs, ys: [0.0] * n + list(ys), "C")
    return {"J": VectorOneFormTM.constant(J, "J"), "C_liouville": C}


# ----------------------------------------------------------------------------
# fields derived from an energy function
# ----------------------------------------------------------------------------

def _geometry_jet(E: ScalarField, extra: int, build, geo: Geometry | None = None) -> JetFn:
    """Jet provider for a field built from :class:`Geometry` data.

    ``extra`` is the number of orders the construction consumes.  When a
    pre-built ``geo`` covers the requested point and order it is reused.
    """
    def jet(p: TangentPoint, order: int) -> Taylor:
        if geo is not None and p == geo.p and order + extra <= geo.order:
            return build(geo).truncate(order)
        return build(Geometry(E, p, order + extra))
    return jet


def _spray(geo: Geometry) -> Taylor:
    return jets.stack([*geo.y, *(-2.0 * geo.G)])


def _h_matrix(geo: Geometry) -> Taylor:
    n, N = geo.n, geo.N
    out = Taylor.zeros((2 * n, 2 * n), 2 * n, N.order)
    out.coef[:n, :n] = Taylor.constant(np.eye(n), 2 * n, N.order).coef
    out.coef[n:, :n] = -N.coef
    return out


def _gamma_matrix(geo: Geometry) -> Taylor:
    n, N = geo.n, geo.N
    out = Taylor.zeros((2 * n, 2 * n), 2 * n, N.order)
    out.coef[:n, :n] = Taylor.constant(np.eye(n), 2 * n, N.order).coef
    out.coef[n:, :n] = -2.0 * N.coef
    out.coef[n:, n:] = Taylor.constant(-np.eye(n), 2 * n, N.order).coef
    return out


def _F_matrix(geo: Geometry) -> Taylor:
    n, N = geo.n, geo.N
    eye = Taylor.constant(np.eye(n), 2 * n, N.order).coef
    NN = einsum("ij,jk->ik", N, N)
    out = Taylor.zeros((2 * n, 2 * n), 2 * n, N.order)
    out.coef[:n, :n] = N.coef
    out.coef[:n, n:] = eye
    out.coef[n:, :n] = -NN.coef - eye
    out.coef[n:, n:] = -N.coef
    return out


def spray_field(E: ScalarField, geo: Geometry | None = None) -> VectorFieldTM:
    """S = y^i d_i - 2 G^h dy_h."""
    return VectorFieldTM(E.n, _geometry_jet(E, 2, _spray, geo), "S")


def barthel_h(E: ScalarField, geo: Geometry | None = None) -> VectorOneFormTM:
    return VectorOneFormTM(E.n, _geometry_jet(E, 3, _h_matrix, geo), "h")


def _v_matrix(geo: Geometry) -> Taylor:
    h = _h_matrix(geo)
    return Taylor.constant(np.eye(2 * geo.n), h.nvar, h.order) - h


def barthel_v(E: ScalarField, geo: Geometry | None = None) -> VectorOneFormTM:
    return VectorOneFormTM(E.n, _geometry_jet(E, 3, _v_matrix, geo), "v")


def barthel_gamma(E: ScalarField, geo: Geometry | None = None) -> VectorOneFormTM:
    """Gamma = 2h - I assembled from N^h_i."""
    return VectorOneFormTM(E.n, _geometry_jet(E, 3, _gamma_matrix, geo), "Gamma")


def almost_complex(E: ScalarField, geo: Geometry | None = None) -> VectorOneFormTM:
    return VectorOneFormTM(E.n, _geometry_jet(E, 3, _F_matrix, geo), "F")


def natural_frame(n: int) -> list[VectorFieldTM]:
    """The constant fields d_1..d_n, dy_1..dy_n."""
    eye = np.eye(2 * n)
    names = [f"d_{i + 1}" for i in range(n)] + [f"dy_{i + 1}" for i in range(n)]
    return [VectorFieldTM.constant(eye[a], names[a]) for a in range(2 * n)]


# ----------------------------------------------------------------------------
# brackets
# ----------------------------------------------------------------------------

def _jet_d(t: Taylor) -> np.ndarray:
    """Values of all first partials; trailing axis indexes the 2n coordinates."""
    return np.asarray(t.gradient().value)


def lie_bracket_jets(X: Taylor, Y: Taylor) -> Taylor:
    """[X, Y] as a Taylor field of one order less."""
    dX, dY = X.gradient(), Y.gradient()
    return einsum("b,ab->a", X, dY) - einsum("b,ab->a", Y, dX)


def lie_bracket(X: VectorFieldTM, Y: VectorFieldTM, at) -> np.ndarray:
    return np.asarray(lie_bracket_jets(X.jet(at, 1), Y.jet(at, 1)).value)


def _apply(L: Taylor, X: Taylor) -> Taylor:
    return einsum("ab,b->a", L, X)


def fn_bracket_vf_form(zeta: VectorFieldTM, L: VectorOneFormTM, at) -> np.ndarray:
    """The vector 1-form [zeta, L] at ``at`` as a 2n x 2n matrix."""
    p = jets.coerce_point(at)
    Z, M = zeta.jet(p, 1), L.jet(p, 1)
    z, m = Z.value, M.value
    dZ, dM = _jet_d(Z), _jet_d(M)
    return (np.einsum("b,acb->ac", z, dM) - np.einsum("bc,ab->ac", m, dZ)
            + np.einsum("ab,bc->ac", m, dZ))


def fn_bracket_forms(K: VectorOneFormTM, L: VectorOneFormTM,
                     zeta: VectorFieldTM, eta: VectorFieldTM, at) -> np.ndarray:
    """[K, L](zeta, eta) by the eight-term formula for vector 1-forms."""
    p = jets.coerce_point(at)
    Kj, Lj = K.jet(p, 1), L.jet(p, 1)
    Z, W = zeta.jet(p, 1), eta.jet(p, 1)
    k0, l0 = Kj.value, Lj.value
    br = lie_bracket_jets
    zw = np.asarray(br(Z, W).value)
    out = (br(_apply(Kj, Z), _apply(Lj, W)).value + br(_apply(Lj, Z), _apply(Kj, W)).value
           + k0 @ (l0 @ zw) + l0 @ (k0 @ zw)
           - k0 @ br(_apply(Lj, Z), W).value - k0 @ br(Z, _apply(Lj, W)).value
           - l0 @ br(_apply(Kj, Z), W).value - l0 @ br(Z, _apply(Kj, W)).value)
    return np.asarray(out)


def nijenhuis(K: VectorOneFormTM, zeta: VectorFieldTM, eta: VectorFieldTM, at) -> np.ndarray:
    """N_K(zeta, eta) = [K zeta, K eta] + K^2 [zeta, eta] - K[K zeta, eta] - K[zeta, K eta]."""
    p = jets.coerce_point(at)
    Kj = K.jet(p, 1)
    Z, W = zeta.jet(p, 1), eta.jet(p, 1)
    k0 = Kj.value
    br = lie_bracket_jets
    KZ, KW = _apply(Kj, Z), _apply(Kj, W)
    out = (br(KZ, KW).value + k0 @ (k0 @ br(Z, W).value)
           - k0 @ br(KZ, W).value - k0 @ br(Z, KW).value)
    return np.asarray(out)


def lie_scalar(zeta: VectorFieldTM, f: ScalarField, at) -> float:
    p = jets.coerce_point(at)
    df = _jet_d(jets.expand(f, p, 1))
    return float(np.dot(zeta.jet(p, 0).value, df))
