from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hkrlab.algebra import (
    HALF_I,
    I,
    FormalSeries,
    Polynomial,
    Scalar,
    grlex_key,
    integrate,
    integrate_simplex,
    multi_binomial,
    multi_indices,
)

XY = ("x1", "x2")
x1, x2 = Polynomial.gens(XY)

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)
scalars = st.builds(Scalar, small, small)


@st.composite
def polys(draw, variables=XY, max_degree=3):
    exps = st.tuples(*[st.integers(0, max_degree)] * len(variables))
    terms = draw(st.dictionaries(exps, scalars, max_size=4))
    return Polynomial(variables, terms)


# --- scalars --------------------------------------------------------------------

@pytest.mark.parametrize(
    "text, expected",
    [("3", Scalar(3)), ("-1/2", Scalar(Fraction(-1, 2))), ("i", I), ("1/2*i", HALF_I), ("2-3i", Scalar(2, -3))],
)
def test_scalar_parse(text, expected):
    assert Scalar.parse(text) == expected


def test_scalar_i_squared():
    assert I * I == Scalar(-1)
    assert str(HALF_I) == "1/2*i"


@given(scalars, scalars, scalars)
def test_scalar_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    if b:
        assert (a / b) * b == a


# --- polynomials ------------------------------------------------------------------

@settings(max_examples=60)
@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == Polynomial.zero(XY)
    assert p * Polynomial.one(XY) == p


@settings(max_examples=60)
@given(polys(), polys())
def test_leibniz(p, q):
    assert (p * q).diff("x1") == p.diff("x1") * q + p * q.diff("x1")


def test_variable_mismatch_raises():
    with pytest.raises(ValueError):
        x1 + Polynomial.var(("y1",), "y1")


def test_grlex_rendering():
    p = x1 * x2 + x1**2 + Polynomial.constant(XY, 3) + x2
    assert str(p) == "x1^2 + x1*x2 + x2 + 3"


def test_rename_merges_variables():
    p = x1 * x2
    assert p.rename({"x2": "x1"}, ("x1",)) == Polynomial.var(("x1",), "x1") ** 2


def test_substitute_and_evaluate():
    p = x1**2 + x2
    sub = p.substitute({"x1": x1 + x2, "x2": x2}, XY)
    assert sub == x1**2 + 2 * x1 * x2 + x2**2 + x2
    assert p.evaluate({"x1": 2, "x2": Scalar(0, 1)}) == Scalar(4, 1)


def test_integrate():
    t = Polynomial.var(("t",), "t")
    assert integrate(t**2, "t", 0, 1) == Polynomial.constant(("t",), Fraction(1, 3))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_simplex_volume(k):
    params = tuple(f"t{j}" for j in range(k))
    vol = integrate_simplex(Polynomial.one(params), params)
    assert vol.constant_term() == Scalar(Fraction(1, [1, 1, 2, 6][k]))


@pytest.mark.parametrize("n, d", [(1, 3), (2, 2), (3, 2), (4, 1)])
def test_multi_indices_matches_brute_force(n, d):
    brute = sorted((e for e in product(range(d + 1), repeat=n) if sum(e) <= d), key=grlex_key)
    assert multi_indices(n, d) == brute


def test_multi_binomial():
    assert multi_binomial((2, 3), (1, 1)) == 6


def test_formal_series_cauchy():
    f = FormalSeries([x1, x2], 1)
    g = FormalSeries([x2, x1], 1)
    h = f.cauchy(g, lambda a, b: a * b)
    assert h[0] == x1 * x2
    assert h[1] == x1**2 + x2**2
