import pytest

from hkrlab.algebra import Polynomial, Scalar
from hkrlab.diffop import (
    DIFFOPS,
    FUNCTIONS,
    DiffOp,
    MultiDiffOp,
    Projection,
    Space,
    commute_pullback,
    split_index,
)
from hkrlab.sampling import derive_rng, random_args, random_diffop, random_multidiffop, random_polynomial

M = Space.standard("x", 2)
N = Space.standard("y", 3, 2)
PR = Projection(M, N, 2)
SEEDS = range(8)


def test_weyl_relation():
    S = Space.standard("x", 1)
    d = DiffOp.partial(S, 0)
    x = DiffOp.multiplication(S, S.var(0))
    assert d.commutator(x) == DiffOp.identity(S)


def test_normal_ordering_of_square():
    S = Space.standard("x", 1)
    x = S.var(0)
    d = DiffOp.partial(S, 0)
    # d x d = x d^2 + d
    got = d.compose(DiffOp.multiplication(S, x)).compose(d)
    assert got == DiffOp(S, {(2,): x, (1,): S.one()})


@pytest.mark.parametrize("seed", SEEDS)
def test_compose_matches_apply(seed):
    rng = derive_rng(seed, "compose")
    D, E = random_diffop(rng, N, 2), random_diffop(rng, N, 2)
    f = random_polynomial(rng, N.names, 3)
    assert D.compose(E).apply(f) == D.apply(E.apply(f))


@pytest.mark.parametrize("seed", SEEDS)
def test_commute_pullback(seed):
    rng = derive_rng(seed, "commute")
    D = random_diffop(rng, N, 2)
    g = random_polynomial(rng, M.names, 3)
    f = random_polynomial(rng, N.names, 2)
    lhs = D.apply(PR.pullback(g) * f)
    rhs = N.zero()
    for P, DP in commute_pullback(D, PR).items():
        rhs = rhs + PR.pullback(g.diff_multi(P)) * DP.apply(f)
    assert lhs == rhs


def test_vertical_operator_commutes_with_pullbacks():
    D = DiffOp.partial(N, 2)
    assert D.is_vertical()
    assert set(commute_pullback(D, PR)) == {(0, 0)}


def test_split_index_multinomial_total():
    # sum of multinomial coefficients is parts^|I|
    assert sum(c for c, _ in split_index((2, 1), 3)) == 3**3


def test_projection_checks_rank():
    with pytest.raises(ValueError):
        Projection(M, Space.standard("y", 3, 1), 2)


@pytest.mark.parametrize("kind", [FUNCTIONS, DIFFOPS])
@pytest.mark.parametrize("seed", SEEDS)
def test_substitute_matches_evaluation(kind, seed):
    rng = derive_rng(seed, f"substitute.{kind}")
    phi = random_multidiffop(rng, PR, 2, kind)
    inner = random_multidiffop(rng, Projection.identity(M), 2, FUNCTIONS)
    a, b, c = random_args(rng, M, 3, 2)
    f = random_polynomial(rng, N.names, 2)
    got = phi.substitute(1, inner).apply([a, b, c], f if kind == DIFFOPS else None)
    want = phi.apply([a, inner.apply([b, c])], f if kind == DIFFOPS else None)
    assert got == want


@pytest.mark.parametrize("kind", [FUNCTIONS, DIFFOPS])
@pytest.mark.parametrize("seed", SEEDS)
def test_postcompose_matches_evaluation(kind, seed):
    rng = derive_rng(seed, f"postcompose.{kind}")
    phi = random_multidiffop(rng, PR, 2, kind)
    D = random_diffop(rng, N, 2)
    a, b = random_args(rng, M, 2, 3)
    f = random_polynomial(rng, N.names, 2)
    if kind == FUNCTIONS:
        assert phi.postcompose(D).apply([a, b]) == D.apply(phi.apply([a, b]))
    else:
        assert phi.postcompose(D).apply([a, b], f) == D.apply(phi.apply([a, b], f))


@pytest.mark.parametrize("seed", SEEDS)
def test_compose_values_matches_evaluation(seed):
    rng = derive_rng(seed, "compose_values")
    L = random_multidiffop(rng, PR, 1, DIFFOPS)
    R = random_multidiffop(rng, PR, 1, DIFFOPS)
    a, b = random_args(rng, M, 2, 3)
    f = random_polynomial(rng, N.names, 2)
    assert L.compose_values(R).apply([a, b], f) == L.apply([a], R.apply([b], f))


def test_multidiffop_rejects_wrong_value_type():
    with pytest.raises(TypeError):
        MultiDiffOp(PR, 1, FUNCTIONS, {((1, 0),): DiffOp.identity(N)})


def test_apply_checks_arity():
    phi = MultiDiffOp.zero(PR, 2, FUNCTIONS)
    with pytest.raises(ValueError):
        phi.apply([M.one()])


def test_scalar_coefficients_survive():
    D = DiffOp(N, {(0, 0, 1): N.one().scale(Scalar(0, 1))})
    assert D.apply(N.var(2)) == N.one().scale(Scalar(0, 1))
