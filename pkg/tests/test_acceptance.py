"""Acceptance criteria; each test prints one PASS/FAIL line."""

import time
from itertools import combinations

import pytest

from hkrlab import suites
from hkrlab.cli import main
from hkrlab.cohomology import Truncation, truncated_cohomology
from hkrlab.diffop import DIFFOPS, FUNCTIONS, DiffOp, Projection, Space
from hkrlab.hochschild import antisymmetrize, class_of, hochschild_differential, is_cocycle
from hkrlab.koszul import KoszulCochain, g_tilde
from hkrlab.sampling import derive_rng, random_diffop, random_multidiffop, random_polynomial


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {number} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else ""))
        assert ok, detail

    return emit


def _timed(t):
    start = time.perf_counter()
    rep = truncated_cohomology(t)
    return rep, time.perf_counter() - start


def test_criterion_1_function_module(verdict):
    bad, slowest = [], 0.0
    for m, n in [(1, 1), (2, 2), (2, 3)]:
        for d in range(3):
            rep, dt = _timed(Truncation(m, min(m, n), n, d, 0, "functions"))
            slowest = max(slowest, dt)
            if not rep.ok or dt >= 30:
                bad.append((m, n, d, rep.dims, rep.closed_form, round(dt, 2)))
    verdict(1, "function-module HKR dimensions", not bad, f"slowest {slowest:.2f}s" if not bad else str(bad))


def test_criterion_2_diffop_module(verdict):
    bad, slowest = [], 0.0
    for m, k, n in [(1, 1, 1), (2, 1, 2), (2, 1, 3), (3, 2, 3)]:
        for d in range(3):
            for o in range(3):
                rep, dt = _timed(Truncation(m, k, n, d, o, "diffop"))
                slowest = max(slowest, dt)
                if not rep.ok or dt >= 120:
                    bad.append((m, k, n, d, o, rep.dims, rep.closed_form))
    key = truncated_cohomology(Truncation(2, 1, 2, 1, 1, "diffop")).dims
    if key != [6, 6, 0]:
        bad.append(("(2,1,2,1,1)", key))
    verdict(2, "DiffOp-module HKR sweep", not bad, f"36 configurations, (2,1,2,1,1) -> {tuple(key)}, slowest {slowest:.2f}s" if not bad else str(bad))


def test_criterion_3_fibered_triviality(verdict):
    bad = []
    for m, n in [(1, 1), (2, 2), (2, 3), (3, 3)]:
        for d in range(3):
            for o in range(3):
                rep = truncated_cohomology(Truncation(m, m, n, d, o, "diffop"))
                if any(rep.dims[1:]):
                    bad.append((m, n, d, o, rep.dims))
    verdict(3, "H^j = 0 for j >= 1 when k = m", not bad, str(bad) if bad else "")


def test_criterion_4_chain_maps(verdict):
    start = time.perf_counter()
    failures, checks = [], 0
    for m in (1, 2, 3):
        res = suites.chainmaps_suite(m=m, degree=3, samples=50, seed=2024)
        checks += len(res.checks)
        failures += [c for c in res.checks if c["status"] != suites.PASS]
    dt = time.perf_counter() - start
    ok = not failures and dt < 60
    verdict(4, "bar/Koszul chain-map suite", ok, f"{checks} identity checks x 50 samples in {dt:.1f}s" if ok else str(failures[:1] or dt))


def test_criterion_5_deformation(verdict):
    start = time.perf_counter()
    runs = {
        "assoc": suites.assoc_suite(order=3, samples=50, seed=5),
        "obstruction": suites.obstruction_suite(order=3, samples=20, seed=5),
        "sp-check": suites.sp_check_suite(samples=20, seed=5),
        "bimodule": suites.bimodule_suite(order=3, seed=5),
        "subalgebra": suites.subalgebra_suite(order=3, samples=50, seed=5),
    }
    dt = time.perf_counter() - start
    failures = [(name, c) for name, res in runs.items() for c in res.checks if c["status"] != suites.PASS]
    ok = not failures and dt < 120
    verdict(5, "deformation suite", ok, f"{sum(len(r.checks) for r in runs.values())} checks in {dt:.1f}s" if ok else str(failures[:1] or dt))


def test_criterion_6_cross_module(verdict):
    rng = derive_rng(6, "acceptance.cross")
    M = Space.standard("x", 3)
    N = Space.standard("y", 3, 2)
    pr = Projection(M, N, 2)
    problems = []
    for s in range(50):
        degree = s % 4
        if s % 2:
            # vertical operator values on fiber forms survive the quotient
            tuples = [I for I in combinations(range(3), degree) if all(i >= 2 for i in I)] or [()]
            degree = len(tuples[0])
            values = {I: random_diffop(rng, N, 2, vertical=True) for I in tuples}
            eta = KoszulCochain(pr, degree, DIFFOPS, values)
        else:
            tuples = list(combinations(range(3), degree))
            eta = KoszulCochain(pr, degree, FUNCTIONS, {I: random_polynomial(rng, N.names, 2) for I in tuples})
        phi = g_tilde(eta)
        if not is_cocycle(phi)[0]:
            problems.append(("g_tilde not a cocycle", s))
        elif class_of(phi) != eta:
            problems.append(("class_of o g_tilde != id", s))
    for s in range(50):
        psi = random_multidiffop(rng, pr, 1 + s % 2, FUNCTIONS)
        if not antisymmetrize(hochschild_differential(psi)).is_zero():
            problems.append(("Alt(delta psi) != 0", s))
        psi = random_multidiffop(rng, pr, 1 + s % 2, DIFFOPS)
        if not class_of(hochschild_differential(psi)).is_zero():
            problems.append(("class of an operator coboundary != 0", s))
    verdict(6, "cross-module consistency", not problems, str(problems[:3]) if problems else "50 samples each")


COMMANDS = [
    ["assoc"],
    ["obstruction"],
    ["sp-check"],
    ["bimodule"],
    ["subalgebra"],
    ["chainmaps"],
    ["hkr"],
]


def test_criterion_7_determinism(verdict, tmp_path, capsys):
    differ = []
    for argv in COMMANDS:
        outs = []
        for run in range(2):
            path = tmp_path / f"{argv[0]}.{run}.json"
            code = main(argv + ["--seed", "31", "--out", str(path)])
            outs.append((code, path.read_bytes()))
        if outs[0] != outs[1] or outs[0][0] != 0:
            differ.append(argv[0])
    capsys.readouterr()
    verdict(7, "byte-identical reports for equal seeds", not differ, f"{len(COMMANDS)} commands" if not differ else str(differ))
