import pytest

from hkrlab.algebra import Polynomial, Scalar
from hkrlab.diffop import DIFFOPS, FUNCTIONS, DiffOp, MultiDiffOp, Projection, Space
from hkrlab.hochschild import (
    antisymmetrize,
    class_of,
    delta_by_evaluation,
    hochschild_differential,
    is_cocycle,
)
from hkrlab.koszul import BarChain, BarCochain, KoszulCochain, g_tilde, xi, xi_inverse
from hkrlab.sampling import derive_rng, random_args, random_diffop, random_multidiffop, random_polynomial

M = Space.standard("x", 2)
N = Space.standard("y", 3, 2)
PR = Projection(M, N, 2)
ID = Projection.identity(M)
KINDS = [FUNCTIONS, DIFFOPS]
SEEDS = range(6)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("arity", [0, 1, 2])
@pytest.mark.parametrize("seed", SEEDS)
def test_delta_squared_zero(kind, arity, seed):
    phi = random_multidiffop(derive_rng(seed, f"d2.{kind}.{arity}"), PR, arity, kind)
    assert hochschild_differential(hochschild_differential(phi)).is_zero()


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("arity", [1, 2])
@pytest.mark.parametrize("seed", SEEDS)
def test_symbolic_delta_matches_evaluation(kind, arity, seed):
    rng = derive_rng(seed, f"delta.{kind}.{arity}")
    phi = random_multidiffop(rng, PR, arity, kind)
    args = random_args(rng, M, arity + 1, 2)
    got = hochschild_differential(phi).apply(args)
    assert got == delta_by_evaluation(phi, args)


def test_second_derivative_is_not_a_cocycle():
    S1 = Space.standard("x", 1)
    phi = MultiDiffOp(Projection.identity(S1), 1, FUNCTIONS, {((2,),): S1.one()})
    closed, witness = is_cocycle(phi)
    assert not closed
    assert witness == {"args": ["x1", "x1"], "value": "-2"}


def test_derivation_is_a_cocycle():
    phi = MultiDiffOp(PR, 1, FUNCTIONS, {((1, 0),): N.var(2)})
    assert is_cocycle(phi) == (True, None)


@pytest.mark.parametrize("seed", SEEDS)
def test_antisymmetrize_kills_coboundaries(seed):
    psi = random_multidiffop(derive_rng(seed, "alt"), PR, 1, FUNCTIONS)
    assert antisymmetrize(hochschild_differential(psi)).is_zero()


@pytest.mark.parametrize("seed", SEEDS)
def test_class_of_coboundary_is_zero(seed):
    psi = random_multidiffop(derive_rng(seed, "class"), PR, 1, DIFFOPS)
    assert class_of(hochschild_differential(psi)).is_zero()


@pytest.mark.parametrize("degree", [0, 1, 2])
@pytest.mark.parametrize("seed", SEEDS)
def test_g_tilde_roundtrip_functions(degree, seed):
    rng = derive_rng(seed, f"gt.{degree}")
    from itertools import combinations

    values = {I: random_polynomial(rng, N.names, 2) for I in combinations(range(2), degree)}
    eta = KoszulCochain(PR, degree, FUNCTIONS, values)
    phi = g_tilde(eta)
    assert is_cocycle(phi)[0]
    assert class_of(phi) == eta


def test_g_tilde_roundtrip_vertical_operators():
    # fiber direction only: projection x^3 -> x^2 with fiber y3
    M3 = Space.standard("x", 3)
    N3 = Space.standard("y", 3, 2)
    pr = Projection(M3, N3, 2)
    eta = KoszulCochain(pr, 1, DIFFOPS, {(2,): DiffOp.partial(N3, 2)})
    phi = g_tilde(eta)
    assert is_cocycle(phi)[0]
    assert class_of(phi) == eta


def test_class_of_rejects_non_cocycles():
    phi = MultiDiffOp(ID, 1, FUNCTIONS, {((2, 0),): M.one()})
    with pytest.raises(ValueError, match="cocycle"):
        class_of(phi)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("seed", SEEDS)
def test_bar_cochain_evaluation_and_xi(kind, seed):
    rng = derive_rng(seed, f"xi.{kind}")
    phi = random_multidiffop(rng, PR, 2, kind)
    psi = xi_inverse(phi)
    assert xi(psi) == phi
    a, b = random_args(rng, M, 2, 2)
    got = psi.evaluate(BarChain.elementary([a, b]))
    assert got == phi.apply([a, b])


def test_xi_rejects_non_linear_cochains():
    zero = (0, 0)
    psi = BarCochain(PR, 1, FUNCTIONS, {((1, 0), zero): N.one(), ((0, 0), (1, 0)): N.one()})
    with pytest.raises(ValueError, match="A\\^e-linear"):
        xi(psi)
