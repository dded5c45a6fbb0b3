"""Higher-order forward derivatives of fields on the slit tangent bundle.

The workhorse is :class:`Taylor`, a tensor whose entries are truncated
multivariate Taylor polynomials in the 2n coordinates ``(x, y)`` around a
point.  Multi-indices are stored in graded order, so an order-k expansion is
a prefix of any higher-order one and truncation is slicing.  Internally the
coefficients are normalized (``f^(a) / a!``) which turns products into plain
convolutions; :class:`Jet` is the public view holding raw partial
derivatives.

:func:`fd_partial` is a finite-difference oracle kept separate from the jet
path on purpose; it never touches :class:`Taylor`.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Any, Callable, Iterator, Mapping, Sequence

import numpy as np

from .errors import DomainError, OrderTooHigh

#: highest order :func:`eval_jet` guarantees
MAX_ORDER = 5
#: highest order the internal pipeline expands to (derivatives of curvature)
MAX_INTERNAL_ORDER = 6


# --------------------------------------------------------------------------
# multi-index bookkeeping
# --------------------------------------------------------------------------

def ncoef(nvar: int, order: int) -> int:
    return math.comb(nvar + order, order)


@lru_cache(maxsize=None)
def multi_indices(nvar: int, order: int) -> np.ndarray:
    """All multi-indices over ``nvar`` variables with total degree <= order, graded."""
    rows = []
    for degree in range(order + 1):
        for combo in combinations_with_replacement(range(nvar), degree):
            row = [0] * nvar
            for v in combo:
                row[v] += 1
            rows.append(row)
    out = np.array(rows, dtype=np.int64).reshape(-1, nvar)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _sorted_keys(nvar: int, order: int):
    base = (order + 1) ** np.arange(nvar, dtype=np.int64)
    keys = multi_indices(nvar, order) @ base
    perm = np.argsort(keys)
    return base, keys[perm], perm


def _locate(nvar: int, order: int, rows: np.ndarray) -> np.ndarray:
    base, keys, perm = _sorted_keys(nvar, order)
    return perm[np.searchsorted(keys, rows @ base)]


@lru_cache(maxsize=None)
def _product_table(nvar: int, order: int):
    idx = multi_indices(nvar, order)
    degree = idx.sum(axis=1)
    counts = np.array([ncoef(nvar, order - d) for d in degree])
    left = np.repeat(np.arange(len(idx)), counts)
    right = np.concatenate([np.arange(c) for c in counts])
    target = _locate(nvar, order, idx[left] + idx[right])
    perm = np.argsort(target, kind="stable")
    left, right, target = left[perm], right[perm], target[perm]
    starts = np.searchsorted(target, np.arange(len(idx)))
    return left, right, starts


@lru_cache(maxsize=None)
def _derivative_table(nvar: int, order: int, var: int):
    out = multi_indices(nvar, order - 1)
    src = out.copy()
    src[:, var] += 1
    return _locate(nvar, order, src), (out[:, var] + 1).astype(float)


@lru_cache(maxsize=None)
def _factorials(nvar: int, order: int) -> np.ndarray:
    idx = multi_indices(nvar, order)
    return np.array([math.prod(math.factorial(int(a)) for a in row) for row in idx],
                    dtype=float)


# --------------------------------------------------------------------------
# Taylor tensors
# --------------------------------------------------------------------------

class Taylor:
    """Tensor of truncated Taylor polynomials in ``nvar`` variables.

    ``coef`` has shape ``tensor_shape + (ncoef(nvar, order),)``.  Arithmetic
    broadcasts over the tensor shape like numpy; mixing orders truncates to
    the smaller one.
    """

    __slots__ = ("coef", "nvar", "order")
    __array_priority__ = 1000.0

    def __init__(self, coef: np.ndarray, nvar: int, order: int):
        coef = np.asarray(coef, dtype=float)
        if coef.shape[-1:] != (ncoef(nvar, order),):
            raise ValueError(f"coefficient axis must have length {ncoef(nvar, order)}")
        self.coef = coef
        self.nvar = nvar
        self.order = order

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, value, nvar: int, order: int) -> Taylor:
        value = np.asarray(value, dtype=float)
        coef = np.zeros(value.shape + (ncoef(nvar, order),))
        coef[..., 0] = value
        return cls(coef, nvar, order)

    @classmethod
    def variable(cls, index: int, value: float, nvar: int, order: int) -> Taylor:
        coef = np.zeros(ncoef(nvar, order))
        coef[0] = value
        if order >= 1:
            coef[1 + index] = 1.0
        return cls(coef, nvar, order)

    @classmethod
    def zeros(cls, shape, nvar: int, order: int) -> Taylor:
        return cls(np.zeros(tuple(shape) + (ncoef(nvar, order),)), nvar, order)

    # introspection ----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.coef.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coef.ndim - 1

    @property
    def value(self):
        v = self.coef[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def __len__(self) -> int:
        return self.shape[0]

    def __iter__(self) -> Iterator[Taylor]:
        for i in range(len(self)):
            yield self[i]

    def __repr__(self) -> str:
        return f"Taylor(shape={self.shape}, nvar={self.nvar}, order={self.order})"

    def partial(self, alpha: Sequence[int]):
        """Raw partial derivative d^alpha at the expansion point."""
        alpha = np.asarray(alpha, dtype=np.int64)
        if alpha.sum() > self.order:
            raise OrderTooHigh(f"|alpha|={alpha.sum()} exceeds jet order {self.order}")
        pos = _locate(self.nvar, self.order, alpha[None, :])[0]
        out = self.coef[..., pos] * _factorials(self.nvar, self.order)[pos]
        return float(out) if np.ndim(out) == 0 else out

    # structure ---------------------------------------------------------------
    def truncate(self, order: int) -> Taylor:
        if order == self.order:
            return self
        if order > self.order:
            raise OrderTooHigh(f"cannot raise jet order {self.order} to {order}")
        return Taylor(self.coef[..., :ncoef(self.nvar, order)], self.nvar, order)

    def __getitem__(self, item) -> Taylor:
        if not isinstance(item, tuple):
            item = (item,)
        return Taylor(self.coef[item + (slice(None),)], self.nvar, self.order)

    def __setitem__(self, item, value) -> None:
        if not isinstance(item, tuple):
            item = (item,)
        if isinstance(value, Taylor):
            self.coef[item + (slice(None),)] = value.truncate(self.order).coef
        else:
            self.coef[item + (slice(None),)] = 0.0
            self.coef[item + (0,)] = value

    def transpose(self, *axes: int) -> Taylor:
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Taylor(self.coef.transpose(*axes, self.ndim), self.nvar, self.order)

    @property
    def T(self) -> Taylor:
        return self.transpose()

    def reshape(self, *shape: int) -> Taylor:
        return Taylor(self.coef.reshape(*shape, self.coef.shape[-1]), self.nvar, self.order)

    def sum(self, axis=None) -> Taylor:
        if axis is None:
            axis = tuple(range(self.ndim))
        axis = axis if isinstance(axis, tuple) else (axis,)
        axis = tuple(a % self.ndim for a in axis)
        return Taylor(self.coef.sum(axis=axis), self.nvar, self.order)

    def copy(self) -> Taylor:
        return Taylor(self.coef.copy(), self.nvar, self.order)

    # arithmetic ---------------------------------------------------------------
    def _lift(self, other) -> Taylor:
        if isinstance(other, Taylor):
            if other.nvar != self.nvar:
                raise ValueError("Taylor operands over different variable sets")
            return other
        return Taylor.constant(other, self.nvar, 0)

    def _aligned(self, other):
        other = self._lift(other)
        order = min(self.order, other.order) if isinstance(other, Taylor) else self.order
        return self.truncate(order).coef, other.truncate(order).coef, order

    def __add__(self, other) -> Taylor:
        if not isinstance(other, Taylor):
            coef = np.array(np.broadcast_to(self.coef, np.broadcast_shapes(
                self.coef.shape, np.shape(other) + (1,))))
            coef[..., 0] += other
            return Taylor(coef, self.nvar, self.order)
        a, b, order = self._aligned(other)
        return Taylor(a + b, self.nvar, order)

    __radd__ = __add__

    def __neg__(self) -> Taylor:
        return Taylor(-self.coef, self.nvar, self.order)

    def __pos__(self) -> Taylor:
        return self

    def __sub__(self, other) -> Taylor:
        return self + (-other)

    def __rsub__(self, other) -> Taylor:
        return (-self) + other

    def __mul__(self, other) -> Taylor:
        if not isinstance(other, Taylor):
            return Taylor(self.coef * np.asarray(other, dtype=float)[..., None],
                          self.nvar, self.order)
        a, b, order = self._aligned(other)
        left, right, starts = _product_table(self.nvar, order)
        return Taylor(np.add.reduceat(a[..., left] * b[..., right], starts, axis=-1),
                      self.nvar, order)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Taylor:
        if not isinstance(other, Taylor):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> Taylor:
        return self.reciprocal() * other

    def __pow__(self, exponent) -> Taylor:
        return self.power(exponent)

    # calculus ---------------------------------------------------------------
    def d(self, var: int) -> Taylor:
        """Partial derivative along variable ``var``; the order drops by one."""
        if self.order == 0:
            raise OrderTooHigh("cannot differentiate an order-0 jet")
        pos, fac = _derivative_table(self.nvar, self.order, var)
        return Taylor(self.coef[..., pos] * fac, self.nvar, self.order - 1)

    def gradient(self, variables: Sequence[int] | None = None) -> Taylor:
        """Stack of partials along ``variables`` as a new trailing tensor axis."""
        if variables is None:
            variables = range(self.nvar)
        parts = [self.d(v).coef for v in variables]
        return Taylor(np.stack(parts, axis=-2), self.nvar, self.order - 1)

    def _compose(self, derivs: Sequence[np.ndarray]) -> Taylor:
        """f(self) from f, f', f'', ... evaluated at the constant term."""
        du = self.copy()
        du.coef[..., 0] = 0.0
        out = Taylor.constant(derivs[0], self.nvar, self.order)
        power = du
        for m in range(1, self.order + 1):
            out = out + power * (derivs[m] / math.factorial(m))
            if m < self.order:
                power = power * du
        return out

    def reciprocal(self) -> Taylor:
        u0 = self.coef[..., 0]
        if np.any(u0 == 0.0):
            raise DomainError("division by a jet with zero constant term")
        derivs = [(-1.0) ** m * math.factorial(m) / u0 ** (m + 1)
                  for m in range(self.order + 1)]
        return self._compose(derivs)

    def sqrt(self) -> Taylor:
        return self.power(0.5)

    def power(self, exponent) -> Taylor:
        exponent = float(exponent)
        if exponent.is_integer():
            k = int(exponent)
            if k < 0:
                return self.reciprocal().power(-k)
            result = Taylor.constant(np.ones(self.shape), self.nvar, self.order)
            base = self
            while k:
                if k & 1:
                    result = result * base
                k >>= 1
                if k:
                    base = base * base
            return result
        u0 = self.coef[..., 0]
        if np.any(u0 <= 0.0):
            raise DomainError("non-integer power of a jet with non-positive value")
        derivs = []
        falling = 1.0
        for m in range(self.order + 1):
            derivs.append(falling * u0 ** (exponent - m))
            falling *= exponent - m
        return self._compose(derivs)


def as_taylor(value, nvar: int, order: int) -> Taylor:
    if isinstance(value, Taylor):
        return value
    return Taylor.constant(value, nvar, order)


def stack(items: Sequence, axis: int = 0) -> Taylor:
    """Stack Taylor tensors (or constants) along a new tensor axis."""
    ref = next(t for t in items if isinstance(t, Taylor))
    order = min(t.order for t in items if isinstance(t, Taylor))
    coefs = [as_taylor(t, ref.nvar, order).truncate(order).coef for t in items]
    shape = np.broadcast_shapes(*(c.shape for c in coefs))
    coefs = [np.broadcast_to(c, shape) for c in coefs]
    axis = axis if axis >= 0 else axis + len(shape)
    return Taylor(np.stack(coefs, axis=axis), ref.nvar, order)


def _free_letter(*specs: str) -> str:
    used = set("".join(specs))
    return next(c for c in string.ascii_letters if c not in used)


def _einsum2(spec_a: str, a, spec_b: str, b, out: str):
    ta, tb = isinstance(a, Taylor), isinstance(b, Taylor)
    if not (ta or tb):
        return np.einsum(f"{spec_a},{spec_b}->{out}", a, b)
    z = _free_letter(spec_a, spec_b, out)
    if ta and not tb:
        return Taylor(np.einsum(f"{spec_a}{z},{spec_b}->{out}{z}", a.coef, b),
                      a.nvar, a.order)
    if tb and not ta:
        return Taylor(np.einsum(f"{spec_a},{spec_b}{z}->{out}{z}", a, b.coef),
                      b.nvar, b.order)
    order = min(a.order, b.order)
    left, right, starts = _product_table(a.nvar, order)
    ca = a.truncate(order).coef[..., left]
    cb = b.truncate(order).coef[..., right]
    prod = np.einsum(f"{spec_a}{z},{spec_b}{z}->{out}{z}", ca, cb, optimize=True)
    return Taylor(np.add.reduceat(prod, starts, axis=-1), a.nvar, order)


def einsum(subscripts: str, *operands):
    """``numpy.einsum`` over Taylor tensors and plain arrays (explicit ``->`` only)."""
    inputs, output = subscripts.replace(" ", "").split("->")
    specs = inputs.split(",")
    if len(specs) != len(operands):
        raise ValueError("operand count does not match subscripts")
    acc_spec, acc = specs[0], operands[0]
    for k in range(1, len(specs)):
        needed = set(output) | set("".join(specs[k + 1:]))
        keep = "".join(c for c in dict.fromkeys(acc_spec + specs[k]) if c in needed)
        acc = _einsum2(acc_spec, acc, specs[k], operands[k], keep)
        acc_spec = keep
    if acc_spec != output or len(specs) == 1:
        if isinstance(acc, Taylor):
            z = _free_letter(acc_spec, output)
            acc = Taylor(np.einsum(f"{acc_spec}{z}->{output}{z}", acc.coef), acc.nvar, acc.order)
        else:
            acc = np.einsum(f"{acc_spec}->{output}", acc)
    return acc


def inverse(matrix: Taylor) -> Taylor:
    """Inverse of a square Taylor matrix via the terminating Neumann series."""
    a0 = matrix.value
    inv0 = np.linalg.inv(a0)
    nil = matrix.copy()
    nil.coef[..., 0] = 0.0
    step = -einsum("ij,jk->ik", inv0, nil)
    out = Taylor.constant(inv0, matrix.nvar, matrix.order)
    term = out
    for _ in range(matrix.order):
        term = einsum("ij,jk->ik", step, term)
        out = out + term
    return out


def sqrt(value):
    """Square root over the generic arithmetic used by scalar fields."""
    if isinstance(value, Taylor):
        return value.sqrt()
    if value < 0:
        raise DomainError("square root of a negative number")
    return math.sqrt(value)


def power(base, exponent):
    """``base ** exponent`` without silently producing complex numbers."""
    if isinstance(base, Taylor):
        return base.power(exponent)
    exponent = float(exponent)
    if not exponent.is_integer() and base < 0:
        raise DomainError("non-integer power of a negative number")
    if exponent < 0 and base == 0:
        raise DomainError("negative power of zero")
    return float(base) ** (int(exponent) if exponent.is_integer() else exponent)


# --------------------------------------------------------------------------
# points, fields and public jets
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TangentPoint:
    """A point ``(x, y)`` of the slit tangent bundle."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(v) for v in np.ravel(self.x))
        y = tuple(float(v) for v in np.ravel(self.y))
        if len(x) != len(y):
            raise ValueError("x and y must have the same length")
        if len(x) < 2:
            raise ValueError("dimension must be at least 2")
        if not math.hypot(*y) > 0.0:
            raise DomainError("y = 0 lies outside the slit tangent bundle")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.x)

    def scaled(self, lam: float) -> TangentPoint:
        return TangentPoint(self.x, tuple(lam * v for v in self.y))

    def as_array(self) -> np.ndarray:
        return np.array(self.x + self.y)


class ScalarField:
    """A function ``E(x, y)`` written against the generic arithmetic.

    ``func`` receives two sequences of scalars which may be floats or
    :class:`Taylor` jets, and must only use ``+ - * /``, :func:`power` and
    :func:`sqrt` on them so that derivatives propagate exactly.
    """

    def __init__(self, func: Callable[[Sequence[Any], Sequence[Any]], Any], n: int,
                 name: str | None = None):
        if n < 2:
            raise ValueError("dimension must be at least 2")
        self.func = func
        self.n = n
        self.name = name or getattr(func, "__name__", "field")

    def __call__(self, x: Sequence[Any], y: Sequence[Any]):
        return self.func(x, y)

    def __repr__(self) -> str:
        return f"ScalarField({self.name!r}, n={self.n})"


def coerce_point(p) -> TangentPoint:
    if isinstance(p, TangentPoint):
        return p
    x, y = p
    return TangentPoint(tuple(x), tuple(y))


def seed_variables(p: TangentPoint, order: int) -> tuple[list[Taylor], list[Taylor]]:
    n = p.n
    xs = [Taylor.variable(i, p.x[i], 2 * n, order) for i in range(n)]
    ys = [Taylor.variable(n + i, p.y[i], 2 * n, order) for i in range(n)]
    return xs, ys


def expand(f: ScalarField, p: TangentPoint, order: int) -> Taylor:
    """Taylor expansion of ``f`` at ``p``; allows up to :data:`MAX_INTERNAL_ORDER`."""
    p = coerce_point(p)
    if order > MAX_INTERNAL_ORDER:
        raise OrderTooHigh(f"order {order} exceeds {MAX_INTERNAL_ORDER}")
    if order < 0:
        raise ValueError("order must be non-negative")
    if f.n != p.n:
        raise ValueError(f"field of dimension {f.n} evaluated at a point of dimension {p.n}")
    xs, ys = seed_variables(p, order)
    out = as_taylor(f(xs, ys), 2 * p.n, order)
    if out.shape != ():
        raise ValueError("scalar field returned a non-scalar")
    return out


@dataclass(frozen=True)
class Jet:
    """Raw mixed partials of a scalar field at ``center`` up to ``order``.

    ``coeffs`` maps a multi-index over ``(x_1..x_n, y_1..y_n)`` to the partial
    derivative itself (not divided by ``alpha!``).
    """

    center: TangentPoint
    order: int
    coeffs: Mapping[tuple[int, ...], float]

    @property
    def value(self) -> float:
        return self.coeffs[(0,) * (2 * self.center.n)]

    def __getitem__(self, alpha: Sequence[int]) -> float:
        return self.coeffs[tuple(alpha)]

    def derivative(self, x: Sequence[int] = (), y: Sequence[int] = ()) -> float:
        """Partial along the listed base (``x``) and fiber (``y``) coordinates, 0-based."""
        n = self.center.n
        alpha = [0] * (2 * n)
        for i in x:
            alpha[i] += 1
        for i in y:
            alpha[n + i] += 1
        return self[alpha]

    def __mul__(self, other: Jet) -> Jet:
        # Leibniz rule on raw partials; deliberately independent of Taylor products
        if self.center != other.center:
            raise ValueError("jets at different points")
        order = min(self.order, other.order)
        out = {}
        for alpha in self.coeffs:
            if sum(alpha) > order:
                continue
            total = 0.0
            for beta in product(*(range(a + 1) for a in alpha)):
                gamma = tuple(a - b for a, b in zip(alpha, beta))
                weight = math.prod(math.comb(a, b) for a, b in zip(alpha, beta))
                total += weight * self.coeffs[beta] * other.coeffs[gamma]
            out[alpha] = total
        return Jet(self.center, order, out)


def eval_jet(f: ScalarField, p, order: int) -> Jet:
    """Exact mixed partials of ``f`` at ``p`` up to total ``order`` (at most 5)."""
    p = coerce_point(p)
    if order > MAX_ORDER:
        raise OrderTooHigh(f"order {order} exceeds the supported maximum {MAX_ORDER}")
    t = expand(f, p, order)
    idx = multi_indices(2 * p.n, order)
    raw = t.coef * _factorials(2 * p.n, order)
    return Jet(p, order, {tuple(int(a) for a in row): float(c) for row, c in zip(idx, raw)})


# --------------------------------------------------------------------------
# finite-difference oracle
# --------------------------------------------------------------------------

def _stencil(alpha: Sequence[int]):
    """Tensor-product central-difference stencil: (offsets in units of h, weights)."""
    axes = [(v, m) for v, m in enumerate(alpha) if m]
    per_axis = []
    for v, m in axes:
        per_axis.append([(v, m / 2 - j, (-1) ** j * math.comb(m, j)) for j in range(m + 1)])
    points = []
    for combo in product(*per_axis):
        offset = np.zeros(len(alpha))
        weight = 1.0
        for v, shift, w in combo:
            offset[v] = shift
            weight *= w
        points.append((offset, weight))
    return points


def fd_partial(f: ScalarField, p, multi_index: Sequence[int], h: float = 0.1) -> float:
    """Central differences with Ridders-Richardson extrapolation.

    Each central difference has an error expansion in even powers of the
    step; every extrapolation level removes one of them (O(h^2) -> O(h^4)
    -> ...).  The step is halved per level and the tableau stops once the
    estimated error starts to grow.  Stencils must not reach y = 0.
    """
    p = coerce_point(p)
    alpha = tuple(int(a) for a in multi_index)
    n = p.n
    if len(alpha) != 2 * n:
        raise ValueError(f"multi-index must have length {2 * n}")
    total = sum(alpha)
    if total > 4:
        raise OrderTooHigh("finite differences are only trusted up to total order 4")
    x0 = np.array(p.x)
    y0 = np.array(p.y)
    if total == 0:
        return float(f(list(x0), list(y0)))
    reach = 0.5 * h * math.sqrt(sum(m * m for m in alpha[n:]))
    if reach >= np.linalg.norm(y0):
        raise DomainError("finite-difference stencil crosses y = 0")

    stencil = _stencil(alpha)

    def central(step: float) -> float:
        acc = 0.0
        for offset, weight in stencil:
            z = offset * step
            acc += weight * float(f(list(x0 + z[:n]), list(y0 + z[n:])))
        return acc / step ** total

    shrink, safe = 2.0, 2.0
    table = [[central(h)]]
    best, err = table[0][0], math.inf
    for k in range(1, 8):
        row = [central(h / shrink ** k)]
        fac = shrink ** 2
        for j in range(1, k + 1):
            row.append((row[j - 1] * fac - table[k - 1][j - 1]) / (fac - 1.0))
            fac *= shrink ** 2
            errt = max(abs(row[j] - row[j - 1]), abs(row[j] - table[k - 1][j - 1]))
            if errt <= err:
                err, best = errt, row[j]
        if abs(row[k] - table[k - 1][k - 1]) >= safe * err:
            break
        table.append(row)
    return float(best)
