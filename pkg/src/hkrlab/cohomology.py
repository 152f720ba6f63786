"""Truncated cohomology of Hom(K, M) for M = functions or operators on N.

Cochains e^I (x) y^alpha d^J are graded by
    weight = |J_base| + |I_base|,
with "base" meaning the first k directions.  The Koszul differential moves
one unit from |J_base| to |I_base| and leaves alpha, the fiber part of J
and the fiber part of I alone, so the complex splits into finite blocks
labelled by (alpha, J_fiber, I_fiber, weight).  The truncation keeps
|alpha| <= d and weight + |J_fiber| <= o, which is a union of whole blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Sequence

from sklearn.base import BaseEstimator

from .algebra import Polynomial, multi_indices
from .diffop import DIFFOPS, FUNCTIONS, DiffOp, MultiDiffOp, Projection, Space
from .hochschild import class_of
from .koszul import KoszulCochain, g_tilde, wedge_front
from .linalg import complement_basis, nullspace, rank, rref

MODULE_ALIASES = {"functions": FUNCTIONS, "function": FUNCTIONS, "diffop": DIFFOPS, "diffops": DIFFOPS}


def koszul_hom_differential(phi: KoszulCochain) -> KoszulCochain:
    """delta_K(e^I (x) m) = sum_i e^i ^ e^I (x) xi_i . m with xi_i . m = pr*x^i m - m pr*x^i."""
    pr = phi.projection
    M, N = pr.source, pr.target
    acc: dict = {}
    for I, val in phi.values.items():
        for i in range(M.dim):
            sign, J = wedge_front(i, I)
            if not sign:
                continue
            x = pr.pullback(M.var(i))
            if phi.kind == FUNCTIONS:
                act = x * val - val * x
            else:
                mult = DiffOp.multiplication(N, x)
                act = mult.compose(val) - val.compose(mult)
            if not act:
                continue
            if sign < 0:
                act = -act
            acc[J] = acc[J] + act if J in acc else act
    return KoszulCochain(pr, phi.degree + 1, phi.kind, acc)


@dataclass(frozen=True)
class Truncation:
    m: int
    k: int
    n: int
    d: int
    o: int = 0
    module: str = FUNCTIONS

    def __post_init__(self):
        kind = MODULE_ALIASES.get(self.module)
        if kind is None:
            raise ValueError(f"module must be functions or diffop, not {self.module!r}")
        object.__setattr__(self, "module", kind)
        if min(self.m, self.n) < 1:
            raise ValueError("m and n must be positive")
        if self.d < 0 or self.o < 0:
            raise ValueError("d and o must be nonnegative")
        if not 0 <= self.k <= min(self.m, self.n):
            raise ValueError(f"k = {self.k} must lie in 0..min(m, n) = {min(self.m, self.n)}")

    def projection(self) -> Projection:
        return Projection(Space.standard("x", self.m), Space.standard("y", self.n, self.k), self.k)

    def closed_form(self, j: int) -> int:
        """Predicted dim H^j."""
        coeffs = comb(self.n + self.d, self.d)
        if self.module == FUNCTIONS:
            return comb(self.m, j) * coeffs
        vertical = comb(self.n - self.k + self.o, self.o)
        return comb(self.m - self.k, j) * vertical * coeffs


@dataclass
class CohomologyReport:
    truncation: Truncation
    dims: list[int]
    closed_form: list[int]
    representatives: dict[int, list[KoszulCochain]] = field(default_factory=dict)
    cochain_dims: list[int] = field(default_factory=list)
    blocks: int = 0

    @property
    def matches(self) -> list[bool]:
        return [a == b for a, b in zip(self.dims, self.closed_form)]

    @property
    def ok(self) -> bool:
        return all(self.matches)

    def table(self) -> list[dict]:
        return [
            {"degree": j, "direct": a, "closed_form": b, "match": a == b}
            for j, (a, b) in enumerate(zip(self.dims, self.closed_form))
        ]


def _basis(t: Truncation):
    """Basis elements (I, alpha, J) grouped by block key."""
    k = t.k
    coeff_exps = multi_indices(t.n, t.d)
    if t.module == FUNCTIONS:
        syms = [(0,) * t.n]
    else:
        syms = multi_indices(t.n, t.o)
    blocks: dict = {}
    for j in range(t.m + 1):
        for I in combinations(range(t.m), j):
            i_base = sum(1 for i in I if i < k)
            i_fib = tuple(i for i in I if i >= k)
            for J in syms:
                w = sum(J[:k]) + (i_base if t.module == DIFFOPS else 0)
                if t.module == DIFFOPS and w + sum(J[k:]) > t.o:
                    continue
                for alpha in coeff_exps:
                    key = (alpha, J[k:], i_fib, w)
                    blocks.setdefault(key, {}).setdefault(j, []).append((I, alpha, J))
    return blocks


def _element(t: Truncation, pr: Projection, I, alpha, J) -> KoszulCochain:
    N = pr.target
    mono = Polynomial.monomial(N.names, alpha)
    val = mono if t.module == FUNCTIONS else DiffOp(N, {J: mono})
    return KoszulCochain(pr, len(I), t.module, {I: val})


def _coordinates(t: Truncation, cochain: KoszulCochain, index: dict) -> list[Fraction]:
    vec = [Fraction(0)] * len(index)
    for I, val in cochain.values.items():
        if t.module == FUNCTIONS:
            items = ((e, (0,) * t.n, c) for e, c in val.terms.items())
        else:
            items = ((e, J, c) for J, p in val.terms.items() for e, c in p.terms.items())
        for alpha, J, c in items:
            pos = index.get((I, alpha, J))
            if pos is None:
                raise ValueError(f"component {(I, alpha, J)} leaves its block")
            if not c.is_real:
                raise ValueError("differential produced a non-real coefficient")
            vec[pos] += c.re
    return vec


def estimate_size(t: Truncation) -> int:
    coeffs = comb(t.n + t.d, t.d)
    syms = 1 if t.module == FUNCTIONS else comb(t.n + t.o, t.o)
    return (2 ** t.m) * coeffs * syms


def truncated_cohomology(t: Truncation, max_basis: int = 200_000) -> CohomologyReport:
    size = estimate_size(t)
    if size > max_basis:
        raise ValueError(f"truncation needs about {size} basis cochains, budget is {max_basis}")
    pr = t.projection()
    blocks = _basis(t)
    dims = [0] * (t.m + 1)
    cdims = [0] * (t.m + 1)
    reps: dict[int, list[KoszulCochain]] = {j: [] for j in range(t.m + 1)}
    for key in sorted(blocks):
        by_degree = blocks[key]
        index = {j: {b: p for p, b in enumerate(els)} for j, els in by_degree.items()}
        # matrices of delta from degree j to j + 1, columns = source basis
        mats: dict = {}
        for j, els in by_degree.items():
            if j + 1 not in by_degree:
                for b in els:
                    if not koszul_hom_differential(_element(t, pr, *b)).is_zero():
                        raise ValueError(f"differential leaves block {key}")
                mats[j] = None
                continue
            cols = [_coordinates(t, koszul_hom_differential(_element(t, pr, *b)), index[j + 1]) for b in els]
            mats[j] = [list(row) for row in zip(*cols)]
        ranks = {j: (rank(mat) if mat else 0) for j, mat in mats.items()}
        for j, els in by_degree.items():
            cdims[j] += len(els)
            h = len(els) - ranks[j] - ranks.get(j - 1, 0)
            dims[j] += h
            if h:
                mat = mats[j]
                kernel = nullspace(mat, len(els)) if mat else [
                    [Fraction(int(p == q)) for q in range(len(els))] for p in range(len(els))
                ]
                prev = mats.get(j - 1)
                image = [list(col) for col in zip(*prev)] if prev else []
                image = [v for v in image if any(v)]
                for vec in complement_basis(image, kernel):
                    rep = KoszulCochain(pr, j, t.module, {})
                    for c, b in zip(vec, els):
                        if c:
                            rep = rep + _element(t, pr, *b).scale(c)
                    reps[j].append(rep)
    closed = [t.closed_form(j) for j in range(t.m + 1)]
    return CohomologyReport(t, dims, closed, reps, cdims, len(blocks))


def hkr_compare(t: Truncation) -> dict:
    rep = truncated_cohomology(t)
    return {
        "params": {"m": t.m, "k": t.k, "n": t.n, "d": t.d, "o": t.o, "module": t.module},
        "rows": rep.table(),
        "ok": rep.ok,
    }


class TruncatedHochschildCohomology(BaseEstimator):
    """Estimator-style front end: ``fit`` computes the cohomology, ``transform``
    maps Hochschild cocycles to coordinates in the computed basis."""

    def __init__(self, m=2, k=1, n=2, degree=1, order=1, module="diffop"):
        self.m = m
        self.k = k
        self.n = n
        self.degree = degree
        self.order = order
        self.module = module

    def _truncation(self) -> Truncation:
        return Truncation(self.m, self.k, self.n, self.degree, self.order, self.module)

    def fit(self, X=None, y=None):
        report = truncated_cohomology(self._truncation())
        self.report_ = report
        self.dims_ = list(report.dims)
        self.closed_form_ = list(report.closed_form)
        self.representatives_ = report.representatives
        return self

    def _check_fitted(self):
        if not hasattr(self, "report_"):
            raise RuntimeError("call fit before transform")

    def transform(self, X: Sequence[MultiDiffOp]) -> list[list[Fraction]]:
        self._check_fitted()
        t = self._truncation()
        out = []
        for phi in X:
            eta = class_of(phi)
            reps = self.representatives_.get(eta.degree, [])
            basis = _basis(t)
            keys = sorted({b for blk in basis.values() for b in blk.get(eta.degree, [])})
            index = {b: p for p, b in enumerate(keys)}
            target = _coordinates(t, eta, index)
            cols = [_coordinates(t, r, index) for r in reps]
            aug = [[c[p] for c in cols] + [target[p]] for p in range(len(keys))]
            R, pivots = rref(aug)
            if len(cols) in pivots:
                raise ValueError("cocycle class is not in the span of the representatives")
            coords = [Fraction(0)] * len(cols)
            for row, p in zip(R, pivots):
                coords[p] = row[-1]
            out.append(coords)
        return out

    def embed(self, degree: int) -> list[MultiDiffOp]:
        """Hochschild cocycles g_tilde(representative) for one degree."""
        self._check_fitted()
        return [g_tilde(r) for r in self.representatives_.get(degree, [])]
