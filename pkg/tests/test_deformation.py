import pytest

from hkrlab.algebra import Polynomial, Scalar
from hkrlab.deformation import (
    RIGHT,
    BimoduleStructure,
    QModifier,
    SPBracket,
    build_bimodule_from_sp,
    check_bimodule,
    check_module_to_order,
    check_sp_properties,
    conjugate_bimodule,
    coordinate_lifts,
    curvature_cochain,
    desk_spaces,
    lift_star_product,
    modify_bimodule,
    module_defect,
    obstruction_E,
    obstruction_R,
    pulled_back_bracket,
    sampled_module_defect,
    sp_bracket_of,
    sp_from_lifts,
    sp_residual_cochains,
    sp_shift,
    subalgebra_defect,
    trivial_module,
)
from hkrlab.diffop import DiffOp, MultiDiffOp
from hkrlab.hochschild import hochschild_differential
from hkrlab.sampling import derive_rng, random_diffop, random_polynomial
from hkrlab.star import associativity_defect, moyal, operator_space, poisson_cochain, trivial_star
from hkrlab.suites import _connection_bracket, _twisted_bracket

M, P, PR = desk_spaces()
S = moyal(M, "0 1; 0 0", 3)
y1, y2, y3 = Polynomial.gens(P.names)


@pytest.fixture(scope="module")
def flat():
    return sp_from_lifts(poisson_cochain(S), PR, coordinate_lifts(PR))


@pytest.fixture(scope="module", params=[0, 3, Scalar(-1, 2)])
def bimodule(request):
    br = _connection_bracket(S, PR, request.param)
    return br, build_bimodule_from_sp(S, br)


def test_trivial_module_only_works_for_trivial_star():
    assert check_module_to_order(trivial_module(trivial_star(M, 2), PR), 2) == []
    bad = check_module_to_order(trivial_module(S, PR), 2)
    assert bad and bad[0]["order"] == 1 and bad[0]["witness"]


@pytest.mark.parametrize("seed", range(4))
def test_module_defect_matches_sampling(seed, bimodule):
    _, B = bimodule
    rng = derive_rng(seed, "module_defect")
    L = B.left.replace(2, MultiDiffOp.zero(PR, 1, "diffops"))
    a, b = (random_polynomial(rng, M.names, 3) for _ in range(2))
    f = random_polynomial(rng, P.names, 2)
    for s in range(3):
        assert module_defect(L, s).apply([a, b], f) == sampled_module_defect(L, a, b, f, s)


def test_flat_bracket_properties(flat):
    assert all(v.is_zero() for v in sp_residual_cochains(flat).values())
    out = check_sp_properties(flat, derive_rng(0, "flat"), 10)
    assert all(v["ok"] for v in out.values())
    assert flat.fiber_preserving and flat.natural


def test_twisted_bracket_fails_only_curvature(flat):
    tw = _twisted_bracket(flat)
    residuals = sp_residual_cochains(tw)
    assert residuals["i"].is_zero() and residuals["ii"].is_zero()
    assert not residuals["iii"].is_zero()
    assert not curvature_cochain(tw).is_zero()
    out = check_sp_properties(tw, derive_rng(0, "twisted"), 10)
    assert not out["iii"]["ok"] and out["iii"]["witness"]["residual"]


def test_build_and_recover(bimodule):
    br, B = bimodule
    assert check_bimodule(B) == []
    assert B.left.is_fiber_preserving() and B.right.is_fiber_preserving()
    assert sp_bracket_of(B).cochain == br.cochain


def test_obstructions_are_delta_of_next_order(bimodule):
    _, B = bimodule
    for r in range(3):
        R = obstruction_R(B.left, r)
        assert R == hochschild_differential(B.left.L(r + 1))
        assert hochschild_differential(R).is_zero()


@pytest.mark.parametrize("seed", range(3))
def test_equivalence_obstructions(seed, bimodule):
    br, B = bimodule
    rng = derive_rng(seed, "conj")
    T = [DiffOp.identity(P)] + [random_diffop(rng, P, 2) for _ in range(3)]
    Bt = conjugate_bimodule(B, T)
    assert check_bimodule(Bt) == []
    assert sp_bracket_of(Bt).cochain == br.cochain
    for r in range(3):
        E = obstruction_E(B.left, Bt.left, T[: r + 1], r)
        assert E == hochschild_differential(MultiDiffOp.constant(PR, T[r + 1]))


def test_broken_module_has_nonclosed_cochain(bimodule):
    _, B = bimodule
    broken = B.left.replace(1, B.left.L(1) + MultiDiffOp(PR, 1, "diffops", {((2, 0),): DiffOp.identity(P)}))
    assert check_module_to_order(broken, 1)


def test_modification_shift(bimodule):
    br, B = bimodule
    # the Euler field in the fiber commutes with every connection used here
    Q = QModifier(((DiffOp.partial(operator_space(M), 0), DiffOp(P, {(0, 0, 1): y3})),))
    Bm = modify_bimodule(B, Q)
    assert check_bimodule(Bm) == []
    assert Bm.right == B.right
    assert sp_bracket_of(Bm, verify=False).cochain - br.cochain == sp_shift(Q, PR)


def test_modification_needs_commuting_fiber_operator():
    B = build_bimodule_from_sp(S, _connection_bracket(S, PR, 3))
    Q = QModifier(((DiffOp.partial(operator_space(M), 0), DiffOp.partial(P, 2)),))
    with pytest.raises(ValueError, match="does not commute"):
        modify_bimodule(B, Q)
    B0 = build_bimodule_from_sp(S, _connection_bracket(S, PR, 0))
    assert modify_bimodule(B0, Q).right == B0.right


def test_modification_rejects_non_derivation(bimodule):
    _, B = bimodule
    Q = QModifier(((DiffOp(operator_space(M), {(2, 0): M.one()}), DiffOp.partial(P, 2)),))
    with pytest.raises(ValueError, match="derivation"):
        modify_bimodule(B, Q)


@pytest.mark.parametrize("seed", range(4))
def test_lifted_star_product(seed, bimodule):
    br, _ = bimodule
    SP = lift_star_product(S, br)
    rng = derive_rng(seed, "lift")
    a, b = (random_polynomial(rng, M.names, 3) for _ in range(2))
    assert subalgebra_defect(SP, S, PR, a, b) == []
    f, g, h = (random_polynomial(rng, P.names, 2) for _ in range(3))
    assert all(not associativity_defect(SP, f, g, h, r) for r in range(4))
    pb = pulled_back_bracket(SP, PR)
    assert all(v.is_zero() for v in sp_residual_cochains(pb).values())


def test_right_module_side(bimodule):
    _, B = bimodule
    assert B.right.side == RIGHT
