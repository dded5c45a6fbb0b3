"""Acceptance criteria, one test each, at the required tolerances.

Each criterion prints a single ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line.  Run ``python3 tests/test_acceptance.py`` for the summary alone.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
from functools import lru_cache

import numpy as np
import pytest

from finsler import connections, geometry, report
from finsler.connections import KINDS, ConnectionKind
from finsler.metrics import builtin_info, sample_points

ZOO = ["euclid", "polar", "riem-diag", "randers", "quartic"]
RIEMANNIAN = ["euclid", "polar", "riem-diag"]
SEED = 7
POINTS = 20


@lru_cache(maxsize=None)
def suite(name: str, ids: tuple[str, ...], n: int = 2, count: int = POINTS):
    from finsler.verify import run_suite
    info = builtin_info(name, n=n)
    return run_suite(info, sample_points(n, count, SEED, info), seed=SEED, only=list(ids))


def residual(name, check_id, n=2, count=POINTS, group=None):
    rep = suite(name, tuple(group or (check_id,)), n, count)
    c = rep.by_id(check_id)
    if c.status in ("error", "skipped"):
        raise AssertionError(f"{check_id} on {name}: {c.status} {c.error or ''}")
    return c.residual


# a measurement is (label, value, bound, "<" | ">" | "==")
CRITERIA: dict[int, tuple[str, object]] = {}


def criterion(number: int, title: str):
    def wrap(fn):
        CRITERIA[number] = (title, fn)
        return fn
    return wrap


@criterion(1, "Euler-Lagrange |i_S Omega + dE| < 1e-8 at 20 points, every zoo metric")
def c1():
    return [(name, residual(name, "spray.euler_lagrange"), 1e-8, "<") for name in ZOO]


C2_IDS = ("barthel.dhE", "barthel.torsion_free", "barthel.gamma_is_JS", "barthel.homogeneity")
C2_BOUNDS = {"barthel.dhE": 1e-8, "barthel.torsion_free": 1e-10,
             "barthel.gamma_is_JS": 1e-6, "barthel.homogeneity": 1e-8}


@criterion(2, "Barthel axioms: d_h E, torsion, Gamma vs [J, S], N(x, 2y) = 2 N(x, y)")
def c2():
    return [(f"{name} {cid}", residual(name, cid, group=C2_IDS), C2_BOUNDS[cid], "<")
            for name in ZOO for cid in C2_IDS]


@criterion(3, "four connections coincide on Riemannian metrics (< 1e-8)")
def c3():
    return [(name, residual(name, "riemannian.coincidence"), 1e-8, "<") for name in RIEMANNIAN]


C4_IDS = ("process.hashiguchi_minus_berwald", "process.cartan_minus_hashiguchi",
          "process.chern_minus_berwald", "process.cartan_minus_chern")


@criterion(4, "process diagram differences (C, 0) and (0, C') on randers (< 1e-8)")
def c4():
    return [(cid, residual("randers", cid, group=C4_IDS), 1e-8, "<") for cid in C4_IDS]


C5_BOUNDS = {
    "metricity.hashiguchi.v": 1e-8,
    "hashiguchi.torsion_hv": 1e-8,
    "hashiguchi.R_relation": 1e-6,
    "hashiguchi.Q_equals_cartan": 1e-8,
    "hashiguchi.spray_P": 1e-8,
    "hashiguchi.spray_Q": 1e-8,
    "hashiguchi.P_symmetric": 1e-8,
}


@criterion(5, "Hashiguchi package on randers: v-metricity, hv-torsion, R, Q, spray contractions, P symmetry")
def c5():
    ids = tuple(C5_BOUNDS)
    return [(cid, residual("randers", cid, group=ids), bound, "<") for cid, bound in C5_BOUNDS.items()]


C6_IDS = tuple(f"bianchi.first.{k.value}" for k in KINDS) + (
    "hashiguchi.bianchi.b", "hashiguchi.bianchi.c", "hashiguchi.bianchi.d",
    "hashiguchi.DC_R", "hashiguchi.DC_P", "hashiguchi.DC_Q")


@criterion(6, "first Bianchi (four kinds), Hashiguchi Bianchi b/c/d, D_C of R, P, Q (< 1e-6)")
def c6():
    return [(f"{name} {cid}", residual(name, cid, group=C6_IDS), 1e-6, "<")
            for name in ("randers", "quartic", "riem-diag") for cid in C6_IDS]


C7_IDS = ("witness.berwald.not_h_metrical", "witness.berwald.not_v_metrical",
          "witness.chern.not_v_metrical", "witness.hashiguchi.not_h_metrical")


@criterion(7, "non-metricity witnesses on randers at the witness point (> 1e-3)")
def c7():
    return [(cid, residual("randers", cid, group=C7_IDS, count=1), 1e-3, ">") for cid in C7_IDS]


@criterion(8, "quartic (n = 3): Rfrak, all Rh, all Phv < 1e-8; Cartan and Hashiguchi Qv > 1e-3")
def c8():
    info = builtin_info("quartic", n=3)
    flat, q = 0.0, {ConnectionKind.CARTAN: 0.0, ConnectionKind.HASHIGUCHI: 0.0}
    for p in sample_points(3, 5, SEED, info):
        flat = max(flat, float(np.max(np.abs(geometry.barthel_curvature(info.field, p).Rjk))))
        for kind in KINDS:
            k = connections.curvature(kind, info.field, p)
            flat = max(flat, float(np.max(np.abs(k.Rh))), float(np.max(np.abs(k.Phv))))
            if kind in q:
                q[kind] = max(q[kind], float(np.max(np.abs(k.Qv))))
    return [("Rfrak, Rh, Phv", flat, 1e-8, "<")] + [
        (f"{kind.value} Qv", val, 1e-3, ">") for kind, val in q.items()]


@criterion(9, "jets vs finite differences, 100 queries per metric, relative 1e-6")
def c9():
    # 20 points x 5 queries per point
    return [(name, residual(name, "jets.fd_oracle"), 1e-6, "<") for name in ZOO]


def _verify_json():
    cmd = [sys.executable, "-m", "finsler", "verify", "--metric", "randers", "--seed", "7",
           "--format", "json"]
    env = {k: v for k, v in os.environ.items() if k != "FINSLER_SEED"}
    return subprocess.run(cmd, capture_output=True, env=env, timeout=600)


@criterion(10, "verify --metric randers --seed 7: schema-valid JSON, byte-identical twice, exit 0")
def c10():
    a, b = _verify_json(), _verify_json()
    doc = json.loads(a.stdout)
    report.validate(doc)
    return [("exit code first run", a.returncode, 0, "=="), ("exit code second run", b.returncode, 0, "=="),
            ("byte difference", int(a.stdout != b.stdout), 0, "=="),
            ("failed checks", doc["summary"]["fail"], 0, "==")]


def evaluate(number: int) -> tuple[bool, str]:
    title, fn = CRITERIA[number]
    rows = fn()
    ok = True
    worst = []
    for label, value, bound, op in rows:
        good = {"<": value < bound, ">": value > bound, "==": value == bound}[op]
        ok &= bool(good)
        if not good:
            worst.append(f"{label} = {value:.3g} (needs {op} {bound:g})")
    detail = "; ".join(worst) if worst else ", ".join(f"{label} {value:.2g}" for label, value, _, _ in rows[:4])
    if len(rows) > 4 and not worst:
        detail += f", ... ({len(rows)} measurements)"
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{detail}]"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, line = evaluate(number)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(k) for k in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
