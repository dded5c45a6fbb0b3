"""Walk through the geometry of a Randers metric at one tangent vector.

Prints the spray, the Barthel connection, the four connections' differences
and the curvature pieces that tell them apart.

    python3 demos/randers_walkthrough.py
"""

from __future__ import annotations

import numpy as np

from finsler import (ConnectionKind, TangentPoint, builtin_metric, coefficients,
                     compare_connections, curvature, eval_jet, metric, nonlinear_connection)
from finsler.connections import KINDS
from finsler.geometry import barthel_curvature

np.set_printoptions(precision=5, suppress=True)

E = builtin_metric("randers", {"b": [0.1, 0.0], "k": 0.2})
p = TangentPoint((0.5, -0.3), (1.0, 0.5))

print("energy E =", eval_jet(E, p, 0).value)
print("fundamental tensor g =\n", metric(E, p).g)

nl = nonlinear_connection(E, p)
print("spray coefficients G =", nl.G)
print("Barthel connection N =\n", nl.N)
print("Barthel curvature R^i_jk (i = 0) =\n", barthel_curvature(E, p).Rjk[0])

print("\nvertical coefficients differ only by the Cartan tensor C:")
V = {k: coefficients(k, E, p).V for k in KINDS}
print("  |V_cartan - V_berwald| =", np.max(np.abs(V[ConnectionKind.CARTAN] - V[ConnectionKind.BERWALD])))
print("  |V_cartan - V_hashiguchi| =", np.max(np.abs(V[ConnectionKind.CARTAN] - V[ConnectionKind.HASHIGUCHI])))

print("\nprocess diagram (expected difference, residual):")
for d in compare_connections(E, p):
    print(f"  {d['from']:>10} -> {d['to']:<10} ({d['expected_V']}, {d['expected_H']})  {d['residual']:.1e}")

print("\nlargest curvature components:")
for kind in KINDS:
    k = curvature(kind, E, p)
    print(f"  {kind.value:>10}: R {np.max(np.abs(k.Rh)):.4f}  P {np.max(np.abs(k.Phv)):.4f}"
          f"  Q {np.max(np.abs(k.Qv)):.4f}")
