"""Intrinsic tensors of a connection as adapted-frame arrays.

Vector-valued forms are stored with the output index first: ``X[d, a, b]``
is the d-component of X(e_a, e_b).  Curvature-type tensors are stored as
``X[d, c, a, b]`` = d-component of X(e_a, e_b) e_c.  Covariant derivatives
append the direction as a trailing axis.  With these conventions every
intrinsic identity is a finite tensor contraction over the frame.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .connections import ConnectionKind, PointConnections
from .frame import (RFRAK_SIGN, adapted_liouville, adapted_metric, adapted_spray,
                    constant_forms, semibasic_vertical)
from .jets import Taylor, einsum


def cyclic(x: Taylor | np.ndarray, axes=(1, 2, 3)):
    """Cyclic sum of x(zeta, eta, xi) over the three argument axes."""
    ndim = x.ndim
    a, b, c = axes
    perm1 = list(range(ndim))
    perm2 = list(range(ndim))
    # result[.., z, e, x] = x[.., z, e, x] + x[.., e, x, z] + x[.., x, z, e]
    perm1[a], perm1[b], perm1[c] = b, c, a
    perm2[a], perm2[b], perm2[c] = c, a, b
    inv1 = list(np.argsort(perm1))
    inv2 = list(np.argsort(perm2))
    return x + x.transpose(*inv1) + x.transpose(*inv2)


class IntrinsicView:
    """Intrinsic objects of one connection around one point."""

    def __init__(self, pc: PointConnections, kind):
        self.pc = pc
        self.geo = pc.geo
        self.kind = ConnectionKind.parse(kind)
        self.eng = pc.engine(self.kind)
        self.n = pc.n
        forms = constant_forms(self.n)
        self.J, self.h, self.v, self.F = forms["J"], forms["h"], forms["v"], forms["F"]
        self._dcache: dict = {}

    # first-order objects ------------------------------------------------------------
    @cached_property
    def Cf(self) -> Taylor:
        return semibasic_vertical(self.geo.C)

    @cached_property
    def Cpf(self) -> Taylor:
        return semibasic_vertical(self.geo.Cprime)

    @cached_property
    def Rf(self) -> Taylor:
        return RFRAK_SIGN * semibasic_vertical(self.geo.R)

    @cached_property
    def S(self) -> Taylor:
        return adapted_spray(self.geo)

    @cached_property
    def Cl(self) -> Taylor:
        return adapted_liouville(self.geo)

    @cached_property
    def metric(self) -> Taylor:
        return adapted_metric(self.geo)

    @property
    def T(self) -> Taylor:
        return self.eng.torsion

    @property
    def K(self) -> Taylor:
        return self.eng.curvature

    def D(self, t: Taylor, n_up: int = 1) -> Taylor:
        # keyed on identity; the stored tensor keeps its id from being reused
        key = (id(t), n_up)
        hit = self._dcache.get(key)
        if hit is None:
            hit = self._dcache[key] = (t, self.eng.covariant(t, n_up))
        return hit[1]

    # curvature blocks -------------------------------------------------------------------
    def _block(self, A: np.ndarray, B: np.ndarray) -> Taylor:
        return einsum("dfgk,fc,ga,kb->dcab", self.K, self.J, A, B)

    @cached_property
    def Rint(self) -> Taylor:
        """R(zeta, eta) xi = K(h zeta, h eta) J xi."""
        return self._block(self.h, self.h)

    @cached_property
    def Pint(self) -> Taylor:
        """P(zeta, eta) xi = K(h zeta, J eta) J xi."""
        return self._block(self.h, self.J)

    @cached_property
    def Qint(self) -> Taylor:
        """Q(zeta, eta) xi = K(J zeta, J eta) J xi."""
        return self._block(self.J, self.J)

    # helpers ------------------------------------------------------------------------------
    def apply_F(self, form: Taylor) -> Taylor:
        return einsum("de,eab->dab", self.F, form)

    def compose_first(self, outer: Taylor, inner: Taylor) -> Taylor:
        """outer(inner(a, b), c) with layout [d, a, b, c]."""
        return einsum("dec,eab->dabc", outer, inner)
