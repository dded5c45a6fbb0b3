"""Define an energy in the expression language and run the identity suite on it.

The energy below is a quartic norm with an x-dependent mixed term, so it is
neither Riemannian nor locally Minkowski.  Any positive expression that is
homogeneous of degree 2 in y works.

    python3 demos/custom_expression.py
"""

from __future__ import annotations

from finsler import parse_energy, run_suite
from finsler.expr import energy_field, pretty
from finsler.metrics import MetricInfo, sample_points
from finsler.report import to_table

source = "0.5*sqrt(y1^4 + y2^4 + 0.3*(1 + x1^2)*y1^2*y2^2)"
ast = parse_energy(source, 2)
print("parsed:", pretty(ast))

info = MetricInfo("custom", energy_field(ast, 2, "custom"), expression=source)
points = sample_points(2, 5, seed=3, info=info)
rep = run_suite(info, points, seed=3)
print(to_table(rep))
