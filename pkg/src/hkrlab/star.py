"""Star products on R^m as truncated series of bidifferential operators."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

from .algebra import HALF_I, FormalSeries, Polynomial, Scalar
from .diffop import FUNCTIONS, DiffOp, MultiDiffOp, Projection, Space


def operator_space(M: Space) -> Space:
    """The space on which operators acting on functions of M live."""
    return Space(M.names, M.dim)


def _as_operator(D: DiffOp, M: Space) -> DiffOp:
    S = operator_space(M)
    if D.space == S:
        return D
    if D.space.names != M.names:
        raise ValueError(f"operator lives on {D.space.names}, expected {M.names}")
    return DiffOp._raw(S, dict(D.terms))


def parse_matrix(text: str) -> list[list[Scalar]]:
    """Parse ``"0 1; -1 0"`` into a matrix of Scalars."""
    rows = [r.split() for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
        raise ValueError(f"matrix {text!r} is not square")
    return [[Scalar.parse(x) for x in r] for r in rows]


@dataclass(frozen=True)
class StarProduct:
    """f * g = sum_r lambda^r C_r(f, g), truncated at ``order_cap``."""

    space: Space
    order_cap: int
    cochains: tuple

    def __post_init__(self):
        object.__setattr__(self, "cochains", tuple(self.cochains))
        if len(self.cochains) != self.order_cap + 1:
            raise ValueError("need one cochain per order 0..order_cap")
        pr = self.projection
        for r, C in enumerate(self.cochains):
            if C.arity != 2 or C.kind != FUNCTIONS or C.projection != pr:
                raise ValueError(f"C_{r} is not a bidifferential operator on {self.space.names}")
        if self.cochains[0] != undeformed_product(self.space):
            raise ValueError("C_0 must be the pointwise product")

    @property
    def projection(self) -> Projection:
        return Projection.identity(self.space)

    def C(self, r: int) -> MultiDiffOp:
        return self.cochains[r]

    def coefficient(self, r: int, f: Polynomial, g: Polynomial) -> Polynomial:
        return self.cochains[r].apply([f, g])

    def is_natural(self) -> bool:
        return all(max(C.orders(), default=-1) <= r for r, C in enumerate(self.cochains))

    def unitality_defect(self, f: Polynomial) -> list[int]:
        one = Polynomial.one(self.space.names)
        return [
            r for r in range(1, self.order_cap + 1)
            if self.coefficient(r, one, f) or self.coefficient(r, f, one)
        ]

    def truncate(self, order_cap: int) -> "StarProduct":
        return StarProduct(self.space, order_cap, self.cochains[: order_cap + 1])

    def to_config(self) -> dict:
        return {
            "space": list(self.space.names),
            "order_cap": self.order_cap,
            "cochains": [C.to_json() for C in self.cochains],
        }


def undeformed_product(M: Space) -> MultiDiffOp:
    zero = (0,) * M.dim
    return MultiDiffOp(Projection.identity(M), 2, FUNCTIONS, {(zero, zero): Polynomial.one(M.names)})


def exp_star(fields: Sequence[DiffOp], A, order_cap: int, space: Space | None = None) -> StarProduct:
    """mu o exp(lambda sum A^{ij} X_i (x) X_j), truncated.

    Fields must be first order without constant term and commute pairwise.
    """
    if isinstance(A, str):
        A = parse_matrix(A)
    p = len(fields)
    if len(A) != p or any(len(row) != p for row in A):
        raise ValueError(f"matrix must be {p}x{p} for {p} fields")
    if not fields:
        raise ValueError("need at least one vector field")
    M = space or Space(fields[0].space.names)
    X = [_as_operator(D, M) for D in fields]
    for i, D in enumerate(X):
        if D.order() > 1 or D.coefficient((0,) * M.dim):
            raise ValueError(f"field X_{i + 1} is not a vector field (order <= 1, no constant term)")
    for i in range(p):
        for j in range(i + 1, p):
            if X[i].commutator(X[j]):
                raise ValueError(f"fields X_{i + 1} and X_{j + 1} do not commute")
    A = [[Scalar.coerce(x) for x in row] for row in A]
    pairs = [(A[i][j], i, j) for i in range(p) for j in range(p) if A[i][j]]
    pr = Projection.identity(M)
    S = operator_space(M)
    ident = DiffOp.identity(S)
    words = [(Scalar(1), ident, ident)]
    cochains = [undeformed_product(M)]
    for r in range(1, order_cap + 1):
        grouped: dict = {}
        for c, L, R in words:
            for a, i, j in pairs:
                key_l, key_r = L.compose(X[i]), R.compose(X[j])
                key = (key_l, key_r)
                grouped[key] = grouped.get(key, Scalar(0)) + c * a
        words = [(c, L, R) for (L, R), c in grouped.items() if c]
        inv = Scalar(Fraction(1, factorial(r)))
        terms: dict = {}
        for c, L, R in words:
            for P, dP in L.terms.items():
                for Q, eQ in R.terms.items():
                    val = (dP * eQ).scale(c * inv)
                    terms[(P, Q)] = terms[(P, Q)] + val if (P, Q) in terms else val
        cochains.append(MultiDiffOp(pr, 2, FUNCTIONS, terms))
    return StarProduct(M, order_cap, cochains)


def moyal(M: Space, A, order_cap: int) -> StarProduct:
    """exp_star with the coordinate fields d_1..d_m."""
    S = operator_space(M)
    return exp_star([DiffOp.partial(S, i) for i in range(M.dim)], A, order_cap, M)


def trivial_star(M: Space, order_cap: int) -> StarProduct:
    pr = Projection.identity(M)
    return StarProduct(M, order_cap, [undeformed_product(M)] + [MultiDiffOp.zero(pr, 2, FUNCTIONS)] * order_cap)


def star_multiply(S: StarProduct, f: FormalSeries, g: FormalSeries) -> FormalSeries:
    cap = min(S.order_cap, f.order_cap, g.order_cap)
    out = []
    for r in range(cap + 1):
        acc = Polynomial.zero(S.space.names)
        for a in range(r + 1):
            for b in range(r + 1 - a):
                c = r - a - b
                acc = acc + S.coefficient(a, f[b], g[c])
        out.append(acc)
    return FormalSeries(out, cap)


def associativity_defect(S: StarProduct, a: Polynomial, b: Polynomial, c: Polynomial, r: int) -> Polynomial:
    """Coefficient of lambda^r in (a*b)*c - a*(b*c)."""
    if r > S.order_cap:
        raise ValueError(f"order {r} exceeds order cap {S.order_cap}")
    out = Polynomial.zero(S.space.names)
    for s in range(r + 1):
        t = r - s
        out = out + S.coefficient(s, S.coefficient(t, a, b), c)
        out = out - S.coefficient(s, a, S.coefficient(t, b, c))
    return out


def swap_arguments(C: MultiDiffOp) -> MultiDiffOp:
    if C.arity != 2:
        raise ValueError("swap needs a bidifferential operator")
    return MultiDiffOp(C.projection, 2, C.kind, {(J, I): v for (I, J), v in C.terms.items()})


def poisson_cochain(S: StarProduct) -> MultiDiffOp:
    """{f, g} = (i/2)(C_1(f, g) - C_1(g, f)) as a bidifferential operator."""
    if S.order_cap < 1:
        raise ValueError("Poisson bracket needs order_cap >= 1")
    C1 = S.C(1)
    return (C1 - swap_arguments(C1)).scale(HALF_I)


def poisson_bracket(S: StarProduct, f: Polynomial, g: Polynomial) -> Polynomial:
    return poisson_cochain(S).apply([f, g])


def poisson_matrix(S: StarProduct) -> list[list[Scalar]]:
    """Entries {x_i, x_j}; constant for the products built here."""
    x = Polynomial.gens(S.space.names)
    out = []
    for xi in x:
        row = []
        for xj in x:
            v = poisson_bracket(S, xi, xj)
            if not v.is_constant():
                raise ValueError("Poisson structure is not constant")
            row.append(v.constant_term())
        out.append(row)
    return out


# --- equivalences -------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceOp:
    """T = id + lambda T_1 + ... as a truncated series of operators on M."""

    space: Space
    ops: tuple

    def __post_init__(self):
        S = operator_space(self.space)
        ops = tuple(_as_operator(T, self.space) for T in self.ops)
        object.__setattr__(self, "ops", ops)
        if not ops or ops[0] != DiffOp.identity(S):
            raise ValueError("T_0 must be the identity")
        zero = (0,) * self.space.dim
        for r, T in enumerate(ops[1:], start=1):
            if T.coefficient(zero):
                raise ValueError(f"T_{r} has a constant term, so T(1) != 1")

    @property
    def order_cap(self) -> int:
        return len(self.ops) - 1

    @classmethod
    def identity(cls, M: Space, order_cap: int) -> "EquivalenceOp":
        S = operator_space(M)
        return cls(M, (DiffOp.identity(S),) + (DiffOp.zero(S),) * order_cap)

    def inverse_ops(self) -> list[DiffOp]:
        return series_inverse(list(self.ops))

    def apply(self, f: FormalSeries) -> FormalSeries:
        cap = min(self.order_cap, f.order_cap)
        out = []
        for r in range(cap + 1):
            acc = Polynomial.zero(self.space.names)
            for s in range(r + 1):
                acc = acc + self.ops[s].apply(f[r - s])
            out.append(acc)
        return FormalSeries(out, cap)


def series_compose(A: Sequence[DiffOp], B: Sequence[DiffOp]) -> list[DiffOp]:
    cap = min(len(A), len(B)) - 1
    out = []
    for r in range(cap + 1):
        acc = A[0].compose(B[r])
        for s in range(1, r + 1):
            acc = acc + A[s].compose(B[r - s])
        out.append(acc)
    return out


def series_inverse(T: Sequence[DiffOp]) -> list[DiffOp]:
    """T^{-1} = sum_n (-1)^n (T - id)^n for T_0 = id, truncated."""
    space = T[0].space
    ident = DiffOp.identity(space)
    if T[0] != ident:
        raise ValueError("series inverse needs T_0 = id")
    cap = len(T) - 1
    zero = DiffOp.zero(space)
    nil = [zero] + list(T[1:])
    power = [ident] + [zero] * cap
    out = list(power)
    for n in range(1, cap + 1):
        power = series_compose(power, nil)
        for r in range(cap + 1):
            out[r] = out[r] - power[r] if n % 2 else out[r] + power[r]
    return out


def apply_equivalence(T: EquivalenceOp, S: StarProduct) -> StarProduct:
    """The product f *' g = T^{-1}(T f * T g)."""
    if T.space.names != S.space.names:
        raise ValueError("equivalence and star product live on different spaces")
    if T.order_cap < S.order_cap:
        raise ValueError("equivalence order cap is below the star product's")
    N = S.order_cap
    U = T.inverse_ops()
    pr = S.projection
    cochains = []
    for r in range(N + 1):
        acc = MultiDiffOp.zero(pr, 2, FUNCTIONS)
        for s in range(r + 1):
            for p in range(r + 1 - s):
                for q in range(r + 1 - s - p):
                    u = r - s - p - q
                    if not U[u] or not T.ops[p] or not T.ops[q]:
                        continue
                    term = S.C(s).precompose(0, T.ops[p]).precompose(1, T.ops[q])
                    acc = acc + term.postcompose(U[u])
        cochains.append(acc)
    return StarProduct(S.space, N, cochains)


def reparametrize(S: StarProduct, power: int) -> StarProduct:
    """Substitute lambda -> lambda^power, keeping the order cap."""
    if power < 1:
        raise ValueError("power must be positive")
    pr = S.projection
    zero = MultiDiffOp.zero(pr, 2, FUNCTIONS)
    cochains = [zero] * (S.order_cap + 1)
    for r, C in enumerate(S.cochains):
        if r * power <= S.order_cap:
            cochains[r * power] = C
    return StarProduct(S.space, S.order_cap, cochains)
