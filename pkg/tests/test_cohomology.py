from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from hkrlab.cohomology import (
    TruncatedHochschildCohomology,
    Truncation,
    hkr_compare,
    koszul_hom_differential,
    truncated_cohomology,
)
from hkrlab.diffop import DIFFOPS, FUNCTIONS, DiffOp
from hkrlab.hochschild import hochschild_differential, is_cocycle
from hkrlab.koszul import KoszulCochain
from hkrlab.linalg import bareiss_rank, complement_basis, nullspace, rank, rref
from hkrlab.sampling import derive_rng, random_multidiffop

T212 = Truncation(2, 1, 2, 1, 1, "diffop")
PR = T212.projection()
N = PR.target


def test_delta_k_on_base_derivative():
    phi = KoszulCochain(PR, 0, DIFFOPS, {(): DiffOp.partial(N, 0)})
    want = KoszulCochain(PR, 1, DIFFOPS, {(0,): -DiffOp.identity(N)})
    assert koszul_hom_differential(phi) == want


def test_delta_k_kills_vertical_symbols():
    phi = KoszulCochain(PR, 1, DIFFOPS, {(0,): DiffOp.partial(N, 1)})
    assert koszul_hom_differential(phi).is_zero()


def test_delta_k_zero_on_functions():
    phi = KoszulCochain(PR, 1, FUNCTIONS, {(1,): N.var(0) * N.var(1)})
    assert koszul_hom_differential(phi).is_zero()


def test_delta_k_squares_to_zero():
    phi = KoszulCochain(PR, 0, DIFFOPS, {(): DiffOp(N, {(2, 1): N.var(1)})})
    assert koszul_hom_differential(koszul_hom_differential(phi)).is_zero()


@pytest.mark.parametrize(
    "t, dims",
    [
        (T212, [6, 6, 0]),
        (Truncation(1, 1, 1, 2, 0, "functions"), [3, 3]),
        (Truncation(2, 2, 2, 1, 0, "functions"), [3, 6, 3]),
        (Truncation(1, 1, 1, 2, 2, "diffop"), [3, 0]),
        (Truncation(2, 0, 2, 0, 1, "diffop"), [3, 6, 3]),
    ],
)
def test_known_dimensions(t, dims):
    rep = truncated_cohomology(t)
    assert rep.dims == dims
    assert rep.ok


@pytest.mark.parametrize("m, k, n", [(1, 1, 1), (2, 1, 2), (2, 1, 3), (3, 2, 3)])
@pytest.mark.parametrize("module", ["functions", "diffop"])
def test_sweep_matches_closed_form(m, k, n, module):
    for d in range(3):
        for o in range(3):
            assert hkr_compare(Truncation(m, k, n, d, o, module))["ok"]


def test_euler_characteristic():
    rep = truncated_cohomology(Truncation(3, 2, 3, 1, 2, "diffop"))
    chi_chains = sum((-1) ** j * c for j, c in enumerate(rep.cochain_dims))
    chi_cohom = sum((-1) ** j * c for j, c in enumerate(rep.dims))
    assert chi_chains == chi_cohom


def test_representatives_embed_as_cocycles():
    from hkrlab.koszul import g_tilde

    rep = truncated_cohomology(T212)
    assert len(rep.representatives[1]) == 6
    for reps in rep.representatives.values():
        for r in reps:
            assert is_cocycle(g_tilde(r))[0]


@pytest.mark.parametrize(
    "kwargs",
    [dict(m=2, k=3, n=2, d=1), dict(m=0, k=0, n=1, d=0), dict(m=1, k=1, n=1, d=-1), dict(m=1, k=1, n=1, d=0, module="x")],
)
def test_truncation_validation(kwargs):
    with pytest.raises(ValueError):
        Truncation(**kwargs)


def test_budget():
    with pytest.raises(ValueError, match="basis cochains"):
        truncated_cohomology(Truncation(3, 1, 3, 2, 2, "diffop"), max_basis=10)


# --- linear algebra ---------------------------------------------------------------------

entries = st.integers(-3, 3).map(Fraction)


@settings(max_examples=80)
@given(st.integers(1, 5).flatmap(lambda c: st.lists(st.lists(entries, min_size=c, max_size=c), min_size=1, max_size=5)))
def test_bareiss_matches_rref(rows):
    assert bareiss_rank(rows) == len(rref(rows)[1])
    ncols = len(rows[0])
    for v in nullspace(rows, ncols):
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)
    assert rank(rows) + len(nullspace(rows, ncols)) == ncols


def test_complement_basis():
    span = [[Fraction(1), Fraction(0), Fraction(0)]]
    vecs = [[Fraction(2), Fraction(0), Fraction(0)], [Fraction(0), Fraction(1), Fraction(0)]]
    assert complement_basis(span, vecs) == [vecs[1]]


# --- estimator --------------------------------------------------------------------------

def test_estimator_fit_and_params():
    est = TruncatedHochschildCohomology(m=2, k=1, n=2, degree=1, order=1, module="diffop").fit()
    assert est.dims_ == [6, 6, 0]
    assert est.closed_form_ == [6, 6, 0]
    assert clone(est).get_params() == est.get_params()


def test_estimator_transform_roundtrip():
    est = TruncatedHochschildCohomology(m=2, k=1, n=2, degree=1, order=1, module="diffop").fit()
    cocycles = est.embed(1)
    coords = est.transform(cocycles)
    for i, row in enumerate(coords):
        assert row == [Fraction(int(i == j)) for j in range(len(row))]


def test_transform_ignores_coboundaries():
    est = TruncatedHochschildCohomology(m=2, k=2, n=2, degree=1, order=0, module="functions").fit()
    pr = est.report_.truncation.projection()
    phi = est.embed(2)[0]
    psi = random_multidiffop(derive_rng(0, "cob"), pr, 1, FUNCTIONS)
    assert est.transform([phi + hochschild_differential(psi)]) == est.transform([phi])


def test_transform_requires_fit():
    with pytest.raises(RuntimeError):
        TruncatedHochschildCohomology().transform([])
