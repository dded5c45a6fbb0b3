"""Generic linear connections on TM written in the adapted frame.

Frame: ``e_i = delta_i`` and ``e_{n+i} = dy_i`` for ``i < n``.  A connection
that preserves the horizontal/vertical split and commutes with J and F is
fixed by two coefficient arrays ``V[k, i, j]`` and ``H[k, i, j]``:

    D_{dy_j} e_i = V^k_ij e_k        D_{delta_j} e_i = H^k_ij e_k

(same coefficients on both blocks).  From these the engine builds the full
coefficient array ``w[b, a, c]`` with ``D_{e_c} e_a = w^b_ac e_b`` and the
frame structure constants ``c[d, a, b]`` with ``[e_a, e_b] = c^d_ab e_d``;
torsion, curvature and covariant derivatives of arbitrary tensors then follow
from the textbook formulas.  All results are Taylor fields, so they can be
differentiated again as long as the expansion order allows.

Intrinsic vector-valued forms (the Cartan tensors, the Barthel curvature,
J, h, v, F) are also provided as full adapted-frame arrays so intrinsic
identities become plain tensor contractions.
"""

from __future__ import annotations

import string
from functools import cached_property

import numpy as np

from .geometry import Geometry
from .jets import Taylor, einsum

#: sign linking the Barthel curvature form to R^i_jk:
#: Rfrak(delta_j, delta_k) = RFRAK_SIGN * R^i_jk dy_i.  Follows from
#: Rfrak = -v[h, h] and [delta_j, delta_k] = R^i_jk dy_i.
RFRAK_SIGN = -1.0


def _common(*fields: Taylor) -> int:
    return min(f.order for f in fields)


class AdaptedConnection:
    """Connection with vertical coefficients ``V`` and horizontal ``H``."""

    def __init__(self, geo: Geometry, V: Taylor, H: Taylor, name: str = ""):
        self.geo = geo
        self.n = geo.n
        self.name = name
        order = _common(V, H)
        n = self.n
        nvar = 2 * n
        w = Taylor.zeros((2 * n, 2 * n, 2 * n), nvar, order)
        Vc, Hc = V.truncate(order).coef, H.truncate(order).coef
        w.coef[:n, :n, :n] = Hc
        w.coef[n:, n:, :n] = Hc
        w.coef[:n, :n, n:] = Vc
        w.coef[n:, n:, n:] = Vc
        self.V, self.H, self.w = V, H, w

    # structure ---------------------------------------------------------------
    @cached_property
    def brackets(self) -> Taylor:
        geo, n = self.geo, self.n
        R, Gc = geo.R, geo.Gc
        order = _common(R, Gc)
        c = Taylor.zeros((2 * n,) * 3, 2 * n, order)
        c.coef[n:, :n, :n] = R.truncate(order).coef  # [delta_j, delta_k] = R^i_jk dy_i
        Gcc = Gc.truncate(order).coef
        c.coef[n:, :n, n:] = Gcc  # [delta_j, dy_k] = G^i_jk dy_i
        c.coef[n:, n:, :n] = -np.swapaxes(Gcc, 1, 2)
        return c

    def d(self, t: Taylor) -> Taylor:
        """Frame derivative: trailing axis a holds e_a(t)."""
        return self.geo.frame_d(t)

    @cached_property
    def torsion(self) -> Taylor:
        """T[d, a, b] = components of T(e_a, e_b)."""
        w = self.w
        return w.transpose(0, 2, 1) - w - self.brackets

    @cached_property
    def curvature(self) -> Taylor:
        """K[d, c, a, b] = components of K(e_a, e_b) e_c."""
        w, c = self.w, self.brackets
        dw = self.d(w)  # [d, c, b, a] = e_a(w^d_cb)
        out = dw.transpose(0, 1, 3, 2) - dw
        out = out + einsum("ecb,dea->dcab", w, w) - einsum("eca,deb->dcab", w, w)
        return out - einsum("eab,dce->dcab", c, w)

    def covariant(self, t: Taylor, n_up: int) -> Taylor:
        """Covariant derivative of a tensor field with ``n_up`` leading upper slots.

        The new trailing axis is the differentiation direction.
        """
        rank = t.ndim
        letters = string.ascii_lowercase[:rank]
        dirn, dummy = "y", "z"
        out = self.d(t)
        for slot in range(rank):
            spec = letters[:slot] + dummy + letters[slot + 1:]
            if slot < n_up:
                term = einsum(f"{letters[slot]}{dummy}{dirn},{spec}->{letters}{dirn}", self.w, t)
                out = out + term
            else:
                term = einsum(f"{dummy}{letters[slot]}{dirn},{spec}->{letters}{dirn}", self.w, t)
                out = out - term
        return out


# ----------------------------------------------------------------------------
# intrinsic objects as adapted-frame arrays
# ----------------------------------------------------------------------------

def constant_forms(n: int) -> dict[str, np.ndarray]:
    """J, h, v, F as matrices acting on adapted-frame components."""
    eye, zero = np.eye(n), np.zeros((n, n))
    return {
        "J": np.block([[zero, zero], [eye, zero]]),
        "h": np.block([[eye, zero], [zero, zero]]),
        "v": np.block([[zero, zero], [zero, eye]]),
        "F": np.block([[zero, eye], [-eye, zero]]),
    }


def semibasic_vertical(t: Taylor) -> Taylor:
    """Embed a local ``X^k_ij`` as the form X(delta_i, delta_j) = X^k_ij dy_k.

    The result is zero whenever an argument is vertical; layout [d, a, b] is
    the value of X(e_a, e_b).
    """
    n = t.shape[0]
    out = Taylor.zeros((2 * n,) * 3, t.nvar, t.order)
    out.coef[n:, :n, :n] = t.coef
    return out


def adapted_spray(geo: Geometry) -> Taylor:
    """S = y^i delta_i in adapted components."""
    n = geo.n
    y = geo.y
    out = Taylor.zeros((2 * n,), y.nvar, y.order)
    out.coef[:n] = y.coef
    return out


def adapted_liouville(geo: Geometry) -> Taylor:
    """C = y^i dy_i in adapted components."""
    n = geo.n
    y = geo.y
    out = Taylor.zeros((2 * n,), y.nvar, y.order)
    out.coef[n:] = y.coef
    return out


def adapted_metric(geo: Geometry) -> Taylor:
    """The lifted metric g(X, Y) = gbar(JX, JY) + gbar(vX, vY): block-diag(g, g)."""
    n = geo.n
    g = geo.g
    out = Taylor.zeros((2 * n, 2 * n), g.nvar, g.order)
    out.coef[:n, :n] = g.coef
    out.coef[n:, n:] = g.coef
    return out


def natural_to_adapted(geo: Geometry) -> np.ndarray:
    """Matrix whose columns are the adapted frame vectors in natural components."""
    n = geo.n
    P = np.eye(2 * n)
    P[n:, :n] = -geo.N.value
    return P
