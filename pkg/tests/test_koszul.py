import pytest

from hkrlab.algebra import Polynomial
from hkrlab.diffop import Space
from hkrlab.koszul import (
    BarChain,
    KoszulChain,
    augmentation,
    bar_differential,
    bar_variables,
    block,
    chain_map_F,
    chain_map_G,
    koszul_differential_chain,
    koszul_eta_eps,
    koszul_homotopy,
    perm_sign,
    theta,
    vw_variables,
    wedge_front,
)
from hkrlab.sampling import derive_rng
from hkrlab.suites import _bar_checks, _koszul_checks, _random_bar, _random_koszul


def test_bar_differential_degree_one():
    M = Space.standard("x", 1)
    a = M.var(0) ** 2
    chi = BarChain.elementary([a])
    out = bar_differential(chi).poly
    names = bar_variables(1, 0)
    v, w = Polynomial.gens(names)
    # a (x) 1 - 1 (x) a
    assert out == v**2 - w**2


def test_augmentation_multiplies():
    M = Space.standard("x", 1)
    x = M.var(0)
    chi = BarChain.elementary([], x, x + M.one())
    v = Polynomial.var(block("v", 1), "v1")
    assert augmentation(chi) == v * (v + 1)


def test_koszul_differential_contracts():
    vw = vw_variables(2)
    om = KoszulChain(2, 1, {(0,): Polynomial.one(vw)})
    v1, v2, w1, w2 = (Polynomial.var(vw, n) for n in ("v1", "v2", "w1", "w2"))
    assert koszul_differential_chain(om).comps == {(): v1 - w1}
    om2 = KoszulChain(2, 2, {(0, 1): Polynomial.one(vw)})
    assert koszul_differential_chain(om2).comps == {(1,): v1 - w1, (0,): -(v2 - w2)}


def test_homotopy_of_xi_is_unit_form():
    vw = vw_variables(1)
    v1, w1 = (Polynomial.var(vw, n) for n in ("v1", "w1"))
    om = KoszulChain(1, 0, {(): v1 - w1})
    assert koszul_homotopy(om).comps == {(0,): Polynomial.one(vw)}


def test_g_after_f_on_basis_form():
    vw = vw_variables(2)
    om = KoszulChain(2, 2, {(0, 1): Polynomial.one(vw)})
    assert chain_map_G(chain_map_F(om)) == om


def test_wedge_and_signs():
    assert wedge_front(1, (0, 2)) == (-1, (0, 1, 2))
    assert wedge_front(0, (0,))[0] == 0
    assert perm_sign((1, 0, 2)) == -1


def test_theta_fixes_image_of_f():
    vw = vw_variables(2)
    om = KoszulChain(2, 1, {(1,): Polynomial.var(vw, "v1") * Polynomial.var(vw, "w2")})
    F = chain_map_F(om)
    assert theta(F) == F


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_bar_identities(m, degree):
    rng = derive_rng(11, f"bar.{m}.{degree}")
    for _ in range(5):
        for name, residual in _bar_checks(_random_bar(rng, m, degree)).items():
            assert not residual, name


@pytest.mark.parametrize("m, degree", [(m, k) for m in (1, 2, 3) for k in range(m + 1)])
def test_koszul_identities(m, degree):
    rng = derive_rng(11, f"koszul.{m}.{degree}")
    for _ in range(5):
        for name, residual in _koszul_checks(_random_koszul(rng, m, degree)).items():
            assert not residual, name


def test_broken_homotopy_is_detected():
    # dropping the sign of h breaks dh + hd = id
    from hkrlab import koszul

    rng = derive_rng(0, "broken")
    chi = _random_bar(rng, 2, 1)
    h = koszul.bar_homotopy
    lhs = bar_differential(h(chi).scale(-1)) + h(bar_differential(chi)).scale(-1)
    assert lhs != chi


def test_homotopy_degree_zero_correction():
    vw = vw_variables(1)
    v1, w1 = (Polynomial.var(vw, n) for n in ("v1", "w1"))
    om = KoszulChain(1, 0, {(): w1})
    h = koszul_homotopy(om)
    assert h.comps == {(0,): -Polynomial.one(vw)}
    assert koszul_differential_chain(h).comps == {(): w1 - v1}
    assert koszul_differential_chain(h) + koszul_eta_eps(om) == om
