"""Differential Hochschild cochains with values in functions or operators on N.

The bimodule structure is (a . m . b) = pr*a * m * pr*b, where for operator
values the products are compositions with multiplication operators.
"""

from __future__ import annotations

from itertools import permutations
from math import factorial
from typing import Sequence

from fractions import Fraction

from .algebra import Polynomial, Scalar, multi_binomial, sub_index, sub_indices
from .diffop import DIFFOPS, FUNCTIONS, DiffOp, MultiDiffOp, commute_pullback
from .koszul import KoszulCochain, perm_sign

HochschildCochain = MultiDiffOp


def hochschild_differential(phi: MultiDiffOp) -> MultiDiffOp:
    """delta phi in local form, face by face."""
    pr = phi.projection
    k = phi.arity
    zero = (0,) * pr.source.dim
    acc: dict = {}

    def add(key, val):
        s = acc.get(key)
        acc[key] = val if s is None else s + val

    for key, val in phi.terms.items():
        # a_1 . phi(a_2..)
        add((zero,) + key, val)
        # phi(.., a_i a_{i+1}, ..)
        for i in range(1, k + 1):
            I = key[i - 1]
            sign = -1 if i % 2 else 1
            for L in sub_indices(I):
                mult = sign * multi_binomial(I, L)
                nk = key[: i - 1] + (tuple(L), sub_index(I, L)) + key[i:]
                add(nk, val.scale(mult))
        # phi(a_1..a_k) . a_{k+1}
        sign = -1 if (k + 1) % 2 else 1
        if phi.kind == FUNCTIONS:
            add(key + (zero,), val.scale(sign))
        else:
            for P, VP in commute_pullback(val, pr).items():
                add(key + (P,), VP.scale(sign))
    return MultiDiffOp._raw(pr, k + 1, phi.kind, {kk: v for kk, v in acc.items() if v})


def delta_by_evaluation(phi: MultiDiffOp, args: Sequence[Polynomial]):
    """(delta phi)(a_1..a_{k+1}) computed from the face formula by direct evaluation."""
    pr = phi.projection
    k = phi.arity
    if len(args) != k + 1:
        raise ValueError(f"delta of an arity-{k} cochain takes {k + 1} arguments")
    N = pr.target
    first = pr.pullback(args[0])
    last = pr.pullback(args[-1])
    if phi.kind == FUNCTIONS:
        out = first * phi.apply(args[1:])
        for i in range(1, k + 1):
            merged = list(args[: i - 1]) + [args[i - 1] * args[i]] + list(args[i + 1:])
            term = phi.apply(merged)
            out = out - term if i % 2 else out + term
        term = phi.apply(args[:k]) * last
        return out - term if (k + 1) % 2 else out + term
    out = DiffOp.multiplication(N, first).compose(phi.apply(args[1:]))
    for i in range(1, k + 1):
        merged = list(args[: i - 1]) + [args[i - 1] * args[i]] + list(args[i + 1:])
        term = phi.apply(merged)
        out = out - term if i % 2 else out + term
    term = phi.apply(args[:k]).compose(DiffOp.multiplication(N, last))
    return out - term if (k + 1) % 2 else out + term


def monomial_witness(phi: MultiDiffOp):
    """Arguments on which a nonzero cochain is guaranteed not to vanish.

    Picking the term (I_1..I_k) of least total order and feeding the
    monomials x^{I_j} isolates that term: every other term either needs a
    derivative the monomials cannot supply or is the same term.
    """
    if not phi.terms:
        return None
    key = min(phi.terms, key=lambda kk: (sum(sum(I) for I in kk), kk))
    names = phi.source.names
    args = [Polynomial.monomial(names, I) for I in key]
    return args, phi.apply(args)


def is_cocycle(phi: MultiDiffOp) -> tuple[bool, dict | None]:
    d = hochschild_differential(phi)
    if d.is_zero():
        return True, None
    args, value = monomial_witness(d)
    return False, {"args": [str(a) for a in args], "value": str(value)}


def antisymmetrize(phi: MultiDiffOp) -> MultiDiffOp:
    """(1/k!) sum_sigma sign(sigma) phi(a_sigma(1), .., a_sigma(k))."""
    k = phi.arity
    if k <= 1:
        return phi
    acc: dict = {}
    for key, val in phi.terms.items():
        for sigma in permutations(range(k)):
            new = [None] * k
            for j in range(k):
                new[sigma[j]] = key[j]
            nk = tuple(new)
            v = val if perm_sign(sigma) > 0 else -val
            acc[nk] = acc[nk] + v if nk in acc else v
    scale = Scalar(Fraction(1, factorial(k)))
    return MultiDiffOp._raw(
        phi.projection, k, phi.kind,
        {kk: v.scale(scale) for kk, v in acc.items() if v},
    )


def class_of(phi: MultiDiffOp) -> KoszulCochain:
    """Koszul representative of the class of a cocycle.

    The totally antisymmetric first-order coefficients of Alt(phi) give a
    Koszul cochain.  For operator values the class lives in the quotient
    by base directions: values are projected to their vertical part and
    forms involving a base index are dropped.
    """
    closed, witness = is_cocycle(phi)
    if not closed:
        raise ValueError(f"class_of needs a cocycle; delta phi != 0 at {witness}")
    pr = phi.projection
    k = phi.arity
    alt = antisymmetrize(phi)
    m = pr.source.dim
    values = {}
    for key, val in alt.terms.items():
        idx = []
        for I in key:
            if sum(I) != 1:
                break
            idx.append(I.index(1))
        else:
            if idx != sorted(set(idx)):
                continue
            if phi.kind == DIFFOPS:
                if any(i < pr.rank for i in idx):
                    continue
                val = val.vertical_split()[0]
            values[tuple(idx)] = val
    return KoszulCochain(pr, k, phi.kind, values)
