"""Built-in energy functions, metric spec strings and sample points.

Metric strings accepted by :func:`resolve`::

    euclid                    built-in with default parameters
    randers:b=0.2,0:k=0.1     built-in with parameters (comma separated vectors)
    expr:0.5*(y1^2 + y2^2)    expression (see :mod:`finsler.expr`)

Zoo members:

    euclid     E = 1/2 |y|^2
    polar      E = 1/2 (y1^2 + x1^2 y2^2 + y3^2 + ...), sampled with x1 in [0.5, 2]
    riem-diag  E = 1/2 sum a_i(x) y_i^2,  a_i = 1 + c x_{i+1}^2 (indices cyclic)
    randers    E = 1/2 (|y| + b(x).y)^2,  b_i(x) = b_i + k x_{i+1}
    quartic    E = 1/2 sqrt(sum y_i^4), sampled away from the coordinate axes

The Randers one-form depends on x by default: with a constant b the metric is
locally Minkowski and the Berwald/Hashiguchi h-metricity defects vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as exprmod
from . import jets
from .errors import BadParams, DomainError, UnknownMetric
from .jets import ScalarField, TangentPoint


@dataclass(frozen=True)
class MetricInfo:
    name: str
    field: ScalarField
    params: dict = field(default_factory=dict)
    x_box: tuple[float, float] | None = None  # override for x_1 sampling
    min_axis_ratio: float = 0.0  # quartic: min |y_i| / |y|
    witness_point: TangentPoint | None = None
    expression: str | None = None  # equivalent DSL source


def _sumsq(vals):
    out = vals[0] * vals[0]
    for v in vals[1:]:
        out = out + v * v
    return out


def _euclid(n: int, params: dict) -> MetricInfo:
    _no_params("euclid", params)
    f = ScalarField(lambda x, y: 0.5 * _sumsq(y), n, "euclid")
    src = "0.5*(" + " + ".join(f"y{i}^2" for i in range(1, n + 1)) + ")"
    return MetricInfo("euclid", f, {}, expression=src)


def _polar(n: int, params: dict) -> MetricInfo:
    _no_params("polar", params)

    def E(x, y):
        out = y[0] * y[0] + x[0] * x[0] * y[1] * y[1]
        for v in y[2:]:
            out = out + v * v
        return 0.5 * out

    src = "0.5*(y1^2 + x1^2*y2^2" + "".join(f" + y{i}^2" for i in range(3, n + 1)) + ")"
    return MetricInfo("polar", ScalarField(E, n, "polar"), {}, x_box=(0.5, 2.0), expression=src)


def _riem_diag(n: int, params: dict) -> MetricInfo:
    c = _scalar(params, "c", 0.5)
    if c < 0:
        raise BadParams("riem-diag needs c >= 0 so that every a_i stays positive")

    def E(x, y):
        out = 0.0
        for i in range(n):
            xi = x[(i + 1) % n]
            out = out + (1.0 + c * xi * xi) * y[i] * y[i]
        return 0.5 * out

    src = "0.5*(" + " + ".join(
        f"(1 + {c!r}*x{(i + 1) % n + 1}^2)*y{i + 1}^2" for i in range(n)) + ")"
    return MetricInfo("riem-diag", ScalarField(E, n, "riem-diag"), {"c": c}, expression=src)


def _randers(n: int, params: dict) -> MetricInfo:
    b = _vector(params, "b", [0.1] + [0.0] * (n - 1), n)
    k = _scalar(params, "k", 0.2)
    if float(np.linalg.norm(b)) >= 1.0:
        raise BadParams("randers needs |b| < 1 for a positive-definite metric")
    # |b(x)| < 1 must hold on the sampling box [-1, 1]^n
    if float(np.linalg.norm(b)) + abs(k) * math.sqrt(n) >= 1.0:
        raise BadParams("randers needs |b| + |k| sqrt(n) < 1 on the sampling box")
    extra = {k2: v for k2, v in params.items() if k2 not in ("b", "k")}
    _no_params("randers", extra)

    def E(x, y):
        bx = [b[i] + k * x[(i + 1) % n] for i in range(n)]
        bnorm = math.sqrt(sum(float(_value(v)) ** 2 for v in bx))
        if bnorm >= 1.0:
            raise DomainError("randers one-form has norm >= 1 here")
        beta = bx[0] * y[0]
        for i in range(1, n):
            beta = beta + bx[i] * y[i]
        F = jets.sqrt(_sumsq(y)) + beta
        return 0.5 * F * F

    norm = "sqrt(" + " + ".join(f"y{i}^2" for i in range(1, n + 1)) + ")"
    beta = " + ".join(f"({b[i]!r} + {k!r}*x{(i + 1) % n + 1})*y{i + 1}" for i in range(n))
    src = f"0.5*({norm} + {beta})^2"
    witness = TangentPoint((0.5, -0.3) + (0.2,) * (n - 2), (1.0, 0.5) + (-0.4,) * (n - 2))
    return MetricInfo("randers", ScalarField(E, n, "randers"), {"b": list(b), "k": k},
                      witness_point=witness, expression=src)


def _quartic(n: int, params: dict) -> MetricInfo:
    _no_params("quartic", params)

    def E(x, y):
        out = y[0] ** 4
        for v in y[1:]:
            out = out + v ** 4
        return 0.5 * jets.sqrt(out)

    src = "0.5*sqrt(" + " + ".join(f"y{i}^4" for i in range(1, n + 1)) + ")"
    witness = TangentPoint((0.0,) * n, (1.0, 0.5) + (-0.7,) * (n - 2))
    return MetricInfo("quartic", ScalarField(E, n, "quartic"), {}, min_axis_ratio=0.25,
                      witness_point=witness, expression=src)


ZOO: dict[str, Callable[[int, dict], MetricInfo]] = {
    "euclid": _euclid,
    "polar": _polar,
    "riem-diag": _riem_diag,
    "randers": _randers,
    "quartic": _quartic,
}


def _value(v):
    return v.value if isinstance(v, jets.Taylor) else v


def _no_params(name: str, params: dict) -> None:
    if params:
        raise BadParams(f"{name} takes no parameters {sorted(params)}")


def _scalar(params: dict, key: str, default: float) -> float:
    if key not in params:
        return default
    val = params[key]
    if isinstance(val, (list, tuple)):
        if len(val) != 1:
            raise BadParams(f"parameter {key} must be a single number")
        val = val[0]
    return float(val)


def _vector(params: dict, key: str, default, n: int) -> list[float]:
    if key not in params:
        return list(default)
    val = params[key]
    val = list(val) if isinstance(val, (list, tuple)) else [val]
    if len(val) == 1 and n > 1:
        val = val + [0.0] * (n - 1)
    if len(val) != n:
        raise BadParams(f"parameter {key} needs {n} components")
    return [float(v) for v in val]


def builtin_metric(name: str, params: dict | None = None, n: int = 2) -> ScalarField:
    return builtin_info(name, params, n).field


def builtin_info(name: str, params: dict | None = None, n: int = 2) -> MetricInfo:
    if name not in ZOO:
        raise UnknownMetric(f"unknown metric {name!r}; known: {', '.join(sorted(ZOO))}")
    if n < 2:
        raise BadParams("dimension must be at least 2")
    return ZOO[name](n, dict(params or {}))


def parse_params(text: str) -> dict:
    params = {}
    for chunk in filter(None, text.split(":")):
        if "=" not in chunk:
            raise BadParams(f"malformed parameter {chunk!r}; expected key=value")
        key, raw = chunk.split("=", 1)
        try:
            vals = [float(v) for v in raw.split(",")]
        except ValueError:
            raise BadParams(f"parameter {key} is not numeric: {raw!r}") from None
        params[key.strip()] = vals if len(vals) > 1 else vals[0]
    return params


def resolve(spec: str, dim: int | None = None) -> MetricInfo:
    """Turn a metric spec string into a :class:`MetricInfo`."""
    spec = spec.strip()
    if spec.startswith("expr:"):
        source = spec[5:]
        node = exprmod.parse_energy(source, dim)
        n = dim if dim is not None else exprmod.infer_dimension(node)
        return MetricInfo(spec, exprmod.energy_field(node, n, spec), expression=source)
    name, _, rest = spec.partition(":")
    return builtin_info(name, parse_params(rest), dim if dim is not None else 2)


# ----------------------------------------------------------------------------
# sample points
# ----------------------------------------------------------------------------

def sample_points(n: int, count: int, seed: int, info: MetricInfo | None = None) -> list[TangentPoint]:
    """Seeded points with x in [-1, 1]^n and y uniform on 0.5 <= |y| <= 2.

    Metric-specific restrictions (positive x_1 for polar, y away from the axes
    for quartic) are applied by rejection, so the stream stays reproducible.
    """
    rng = np.random.default_rng(seed)
    out: list[TangentPoint] = []
    while len(out) < count:
        x = rng.uniform(-1.0, 1.0, n)
        if info is not None and info.x_box is not None:
            x[0] = rng.uniform(*info.x_box)
        direction = rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        # radius density proportional to r^(n-1): uniform in volume
        u = rng.uniform()
        radius = (0.5 ** n + u * (2.0 ** n - 0.5 ** n)) ** (1.0 / n)
        y = radius * direction
        if info is not None and info.min_axis_ratio > 0.0:
            if np.min(np.abs(y)) / np.linalg.norm(y) < info.min_axis_ratio:
                continue
        out.append(TangentPoint(tuple(x), tuple(y)))
    return out


def parse_point(text: str) -> TangentPoint:
    """``"x1,...,xn;y1,...,yn"`` to a :class:`TangentPoint`."""
    if text.count(";") != 1:
        raise ValueError("point must look like 'x1,...,xn;y1,...,yn'")
    xs, ys = text.split(";")
    try:
        x = tuple(float(v) for v in xs.split(","))
        y = tuple(float(v) for v in ys.split(","))
    except ValueError:
        raise ValueError(f"point coordinates must be numbers: {text!r}") from None
    return TangentPoint(x, y)
