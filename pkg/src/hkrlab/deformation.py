"""Module and bimodule deformations over a star product, sP-brackets and lifts.

A left module structure is a series a . f = sum_r lambda^r L_r(a)(f) and a
right module structure f . a = sum_r lambda^r R_r(a)(f); both store each
order as an arity-1 operator-valued cochain, L_0 = R_0 = multiplication
by pr*a.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from math import factorial
from typing import Sequence

import numpy as np

from .algebra import HALF_I, FormalSeries, Polynomial, Scalar
from .diffop import (
    DIFFOPS,
    FUNCTIONS,
    DiffOp,
    MultiDiffOp,
    Projection,
    Space,
    commute_pullback,
    multiplication_cochain,
)
from .hochschild import hochschild_differential, monomial_witness
from .linalg import inverse
from .sampling import random_args, random_polynomial
from .star import (
    StarProduct,
    operator_space,
    poisson_cochain,
    poisson_matrix,
    series_inverse,
    swap_arguments,
)

LEFT = "left"
RIGHT = "right"


def desk_spaces(fiber: int = 1) -> tuple[Space, Space, Projection]:
    """M = R^2 with coordinates x1, x2 and P = M x R^fiber."""
    M = Space.standard("x", 2)
    P = Space.standard("y", 2 + fiber, 2)
    return M, P, Projection(M, P, 2)


def operator_witness(cochain: MultiDiffOp) -> dict | None:
    """Arguments and a test function on which a nonzero operator cochain acts nontrivially."""
    if cochain.is_zero():
        return None
    args, value = monomial_witness(cochain)
    out = {"args": [str(a) for a in args]}
    if cochain.kind == DIFFOPS:
        J = min(value.terms, key=lambda s: (sum(s), s))
        f = Polynomial.monomial(cochain.target.names, J)
        out["f"] = str(f)
        out["value"] = str(value.apply(f))
    else:
        out["value"] = str(value)
    return out


# --- module structures ----------------------------------------------------------

@dataclass(frozen=True)
class ModuleStructure:
    side: str
    star: StarProduct
    projection: Projection
    cochains: tuple

    def __post_init__(self):
        object.__setattr__(self, "cochains", tuple(self.cochains))
        if self.side not in (LEFT, RIGHT):
            raise ValueError(f"side must be left or right, not {self.side!r}")
        if self.order_cap > self.star.order_cap:
            raise ValueError("module order cap exceeds the star product's")
        if self.projection.source.names != self.star.space.names:
            raise ValueError("projection source is not the star product's space")
        for r, L in enumerate(self.cochains):
            if L.arity != 1 or L.kind != DIFFOPS or L.projection != self.projection:
                raise ValueError(f"order {r} is not an arity-1 operator-valued cochain")
        if self.cochains[0] != multiplication_cochain(self.projection):
            raise ValueError("order 0 must be multiplication by pr*a")

    @property
    def order_cap(self) -> int:
        return len(self.cochains) - 1

    def L(self, r: int) -> MultiDiffOp:
        return self.cochains[r]

    def truncate(self, order_cap: int) -> "ModuleStructure":
        return ModuleStructure(self.side, self.star, self.projection, self.cochains[: order_cap + 1])

    def replace(self, r: int, cochain: MultiDiffOp) -> "ModuleStructure":
        c = list(self.cochains)
        c[r] = cochain
        return ModuleStructure(self.side, self.star, self.projection, c)

    def act(self, a: Polynomial, f: Polynomial) -> FormalSeries:
        """The series a . f (left) or f . a (right)."""
        return FormalSeries([L.apply([a], f) for L in self.cochains])

    def is_fiber_preserving(self) -> bool:
        """a . 1 = pr*a, i.e. no order >= 1 value has a zeroth-order part."""
        zero = (0,) * self.projection.target.dim
        return all(
            not v.coefficient(zero)
            for L in self.cochains[1:]
            for v in L.terms.values()
        )


def trivial_module(star: StarProduct, pr: Projection, side: str = LEFT, order_cap: int | None = None) -> ModuleStructure:
    N = star.order_cap if order_cap is None else order_cap
    zero = MultiDiffOp.zero(pr, 1, DIFFOPS)
    return ModuleStructure(side, star, pr, [multiplication_cochain(pr)] + [zero] * N)


def module_defect(Mstr: ModuleStructure, s: int) -> MultiDiffOp:
    """Order-s coefficient of (a*b).f - a.(b.f) (left) or f.(a*b) - (f.a).b (right)."""
    if s > Mstr.order_cap:
        raise ValueError(f"order {s} exceeds the module order cap {Mstr.order_cap}")
    S = Mstr.star
    acc = MultiDiffOp.zero(Mstr.projection, 2, DIFFOPS)
    for r in range(s + 1):
        t = s - r
        acc = acc + Mstr.L(r).substitute(0, S.C(t))
        if Mstr.side == LEFT:
            acc = acc - Mstr.L(r).compose_values(Mstr.L(t))
        else:
            # (f.a).b = R(b) o R(a)
            acc = acc - swap_arguments(Mstr.L(r).compose_values(Mstr.L(t)))
    return acc


def check_module_to_order(Mstr: ModuleStructure, r: int) -> list[dict]:
    """Failing orders with witnesses; empty means a module up to order r."""
    out = []
    for s in range(r + 1):
        d = module_defect(Mstr, s)
        if d:
            out.append({"order": s, "witness": operator_witness(d)})
    return out


def sampled_module_defect(Mstr: ModuleStructure, a, b, f, s: int) -> Polynomial:
    """The same defect evaluated directly on polynomials."""
    S = Mstr.star
    out = Mstr.projection.target.zero()
    for r in range(s + 1):
        t = s - r
        out = out + Mstr.L(r).apply([S.coefficient(t, a, b)], f)
        if Mstr.side == LEFT:
            out = out - Mstr.L(r).apply([a], Mstr.L(t).apply([b], f))
        else:
            out = out - Mstr.L(t).apply([b], Mstr.L(r).apply([a], f))
    return out


def obstruction_R(Mstr: ModuleStructure, r: int) -> MultiDiffOp:
    """Obstruction to extending a left module valid to order r.

    R_r(a, b) = sum_{k=0}^r L_k(C_{r+1-k}(a, b)) - sum_{k=1}^r L_k(a) o L_{r+1-k}(b),
    which equals delta L_{r+1} whenever an extension exists.
    """
    if Mstr.side != LEFT:
        raise ValueError("obstruction_R is stated for left modules")
    if r + 1 > Mstr.star.order_cap or r > Mstr.order_cap:
        raise ValueError(f"order {r} needs C_{r + 1} and L_0..L_{r}")
    bad = check_module_to_order(Mstr.truncate(r), r)
    if bad:
        raise ValueError(f"not a module to order {r}: first failure at order {bad[0]['order']}")
    S = Mstr.star
    acc = MultiDiffOp.zero(Mstr.projection, 2, DIFFOPS)
    for k in range(r + 1):
        acc = acc + Mstr.L(k).substitute(0, S.C(r + 1 - k))
    for k in range(1, r + 1):
        acc = acc - Mstr.L(k).compose_values(Mstr.L(r + 1 - k))
    if not hochschild_differential(acc).is_zero():
        raise RuntimeError("internal error: obstruction R_r is not closed")
    return acc


def _series_ops(T: Sequence[DiffOp], N: Space) -> list[DiffOp]:
    out = []
    for D in T:
        if D.space != N:
            raise ValueError("equivalence operators must live on the total space")
        out.append(D)
    return out


def equivalence_defect(Mstr: ModuleStructure, Mt: ModuleStructure, T: Sequence[DiffOp], s: int) -> MultiDiffOp:
    """Order-s coefficient of T(a . f) - a .~ T(f)."""
    acc = MultiDiffOp.zero(Mstr.projection, 1, DIFFOPS)
    for p in range(s + 1):
        q = s - p
        acc = acc + Mstr.L(q).postcompose(T[p]) - Mt.L(q).then(T[p])
    return acc


def obstruction_E(Mstr: ModuleStructure, Mt: ModuleStructure, T: Sequence[DiffOp], r: int) -> MultiDiffOp:
    """Obstruction to extending an equivalence T_0..T_r one order.

    E_r(a) = sum_{s=0}^r (T_s o L_{r+1-s}(a) - L~_{r+1-s}(a) o T_s);
    an extension T_{r+1} exists iff E_r = delta T_{r+1} is solvable.
    """
    T = _series_ops(T, Mstr.projection.target)
    if len(T) < r + 1:
        raise ValueError(f"need T_0..T_{r}")
    if T[0] != DiffOp.identity(Mstr.projection.target):
        raise ValueError("T_0 must be the identity")
    if r + 1 > min(Mstr.order_cap, Mt.order_cap):
        raise ValueError(f"order {r + 1} exceeds the module order caps")
    for s in range(r + 1):
        if equivalence_defect(Mstr, Mt, T, s):
            raise ValueError(f"T is not an equivalence to order {r}: first failure at order {s}")
    acc = MultiDiffOp.zero(Mstr.projection, 1, DIFFOPS)
    for s in range(r + 1):
        acc = acc + Mstr.L(r + 1 - s).postcompose(T[s]) - Mt.L(r + 1 - s).then(T[s])
    if not hochschild_differential(acc).is_zero():
        raise RuntimeError("internal error: obstruction E_r is not closed")
    return acc


def conjugate_module(Mstr: ModuleStructure, T: Sequence[DiffOp]) -> ModuleStructure:
    """The structure with T(a . f) = a .~ T(f), i.e. L~(a) = T o L(a) o T^{-1}."""
    T = _series_ops(T, Mstr.projection.target)
    N = Mstr.order_cap
    if len(T) < N + 1:
        raise ValueError("equivalence series is shorter than the module")
    U = series_inverse(T[: N + 1])
    out = []
    for s in range(N + 1):
        acc = MultiDiffOp.zero(Mstr.projection, 1, DIFFOPS)
        for p in range(s + 1):
            for q in range(s + 1 - p):
                u = s - p - q
                if T[p] and U[u]:
                    acc = acc + Mstr.L(q).postcompose(T[p]).then(U[u])
        out.append(acc)
    return ModuleStructure(Mstr.side, Mstr.star, Mstr.projection, out)


# --- bimodules ------------------------------------------------------------------------------

@dataclass(frozen=True)
class BimoduleStructure:
    left: ModuleStructure
    right: ModuleStructure

    def __post_init__(self):
        if self.left.side != LEFT or self.right.side != RIGHT:
            raise ValueError("bimodule needs a left and a right structure")
        if self.left.projection != self.right.projection:
            raise ValueError("left and right structures live over different projections")

    @property
    def projection(self) -> Projection:
        return self.left.projection

    @property
    def order_cap(self) -> int:
        return min(self.left.order_cap, self.right.order_cap)


def compatibility_defect(B: BimoduleStructure, s: int) -> MultiDiffOp:
    """Order-s coefficient of (a . f) . b - a . (f . b), as a cochain in (a, b)."""
    acc = MultiDiffOp.zero(B.projection, 2, DIFFOPS)
    for p in range(s + 1):
        q = s - p
        acc = acc + swap_arguments(B.right.L(q).compose_values(B.left.L(p)))
        acc = acc - B.left.L(p).compose_values(B.right.L(q))
    return acc


def check_bimodule(B: BimoduleStructure, r: int | None = None) -> list[dict]:
    r = B.order_cap if r is None else r
    out = []
    for side, Mstr in (("left", B.left), ("right", B.right)):
        for bad in check_module_to_order(Mstr, r):
            out.append({"check": f"{side} module", **bad})
    for s in range(r + 1):
        d = compatibility_defect(B, s)
        if d:
            out.append({"check": "compatibility", "order": s, "witness": operator_witness(d)})
    return out


def conjugate_bimodule(B: BimoduleStructure, T: Sequence[DiffOp]) -> BimoduleStructure:
    return BimoduleStructure(conjugate_module(B.left, T), conjugate_module(B.right, T))


# --- semi-Poisson brackets --------------------------------------------------------------------

@dataclass(frozen=True)
class SPBracket:
    """Bracket {{a, f}} = beta(a)(f) with a Poisson structure on the base."""

    projection: Projection
    cochain: MultiDiffOp
    poisson: MultiDiffOp

    def __post_init__(self):
        c = self.cochain
        if c.arity != 1 or c.kind != DIFFOPS or c.projection != self.projection:
            raise ValueError("sP-bracket needs an arity-1 operator-valued cochain")
        p = self.poisson
        if p.arity != 2 or p.kind != FUNCTIONS or p.source.names != self.projection.source.names:
            raise ValueError("Poisson structure must be a bidifferential operator on the base")

    def __call__(self, a: Polynomial, f: Polynomial) -> Polynomial:
        return self.cochain.apply([a], f)

    def operator(self, a: Polynomial) -> DiffOp:
        return self.cochain.apply([a])

    def base_bracket(self, a: Polynomial, b: Polynomial) -> Polynomial:
        return self.poisson.apply([a, b])

    @property
    def fiber_preserving(self) -> bool:
        zero = (0,) * self.projection.target.dim
        return all(not v.coefficient(zero) for v in self.cochain.terms.values())

    @property
    def natural(self) -> bool:
        zero = (0,) * self.projection.target.dim
        return all(
            v.order() <= 1 and not v.coefficient(zero) for v in self.cochain.terms.values()
        )

    def __add__(self, other: "SPBracket") -> "SPBracket":
        return SPBracket(self.projection, self.cochain + other.cochain, self.poisson)


def sp_from_lifts(poisson: MultiDiffOp, pr: Projection, lifts: Sequence[DiffOp]) -> SPBracket:
    """{{a, f}} = sum_{j,l} {x_j, x_l} pr*(d_j a) (d_l)^h f for constant Poisson tensors."""
    M = pr.source
    x = Polynomial.gens(M.names)
    if len(lifts) != M.dim:
        raise ValueError("need one horizontal lift per base coordinate")
    terms = {}
    for j in range(M.dim):
        val = DiffOp.zero(pr.target)
        for l in range(M.dim):
            c = poisson.apply([x[j], x[l]])
            if not c.is_constant():
                raise ValueError("sp_from_lifts needs a constant Poisson tensor")
            if c:
                val = val + lifts[l].scale(c.constant_term())
        terms[(M.unit(j),)] = val
    return SPBracket(pr, MultiDiffOp(pr, 1, DIFFOPS, terms), poisson)


def coordinate_lifts(pr: Projection, twist: Sequence[DiffOp] | None = None) -> list[DiffOp]:
    """d_{y_l} plus optional vertical corrections, one per base coordinate."""
    N = pr.target
    out = []
    for l in range(pr.source.dim):
        D = DiffOp.partial(N, l)
        if twist is not None and twist[l]:
            D = D + twist[l]
        out.append(D)
    return out


def sp_bracket_of(B: BimoduleStructure, verify: bool = True) -> SPBracket:
    """{{a, f}} = (i/2)(L_1(a, f) - R_1(f, a))."""
    if B.order_cap < 1:
        raise ValueError("sP-bracket needs order cap >= 1")
    beta = (B.left.L(1) - B.right.L(1)).scale(HALF_I)
    br = SPBracket(B.projection, beta, poisson_cochain(B.left.star))
    if verify:
        residuals = sp_residual_cochains(br)
        bad = [name for name, c in residuals.items() if c]
        if bad:
            raise ValueError(f"sP-bracket of the input fails {bad}; input is not a bimodule")
    return br


def curvature_cochain(br: SPBracket) -> MultiDiffOp:
    """(a, b) -> [beta(a), beta(b)] - beta({a, b})."""
    C = br.cochain.compose_values(br.cochain)
    return C - swap_arguments(C) - br.cochain.substitute(0, br.poisson)


def sp_residual_cochains(br: SPBracket) -> dict[str, MultiDiffOp]:
    """Residuals of the three bracket properties as cochains (zero means it holds).

    i)   {{ab, f}} - pr*a {{b, f}} - pr*b {{a, f}}
    ii)  {{a, pr*b}} - pr*{a, b}, via the zeroth right-action part of beta(a)
    iii) the curvature cochain
    """
    pr = br.projection
    beta = br.cochain
    zero = (0,) * pr.source.dim
    prod = MultiDiffOp(
        Projection.identity(pr.source), 2, FUNCTIONS, {(zero, zero): pr.source.one()}
    )
    first = MultiDiffOp(pr, 2, DIFFOPS, {(zero, I): v for (I,), v in beta.terms.items()})
    second = MultiDiffOp(pr, 2, DIFFOPS, {(I, zero): v for (I,), v in beta.terms.items()})
    i_res = beta.substitute(0, prod) - first - second
    # beta(a)(pr*b) = sum_P pr*(d^P b) * (beta(a))_P(1)
    terms: dict = {}
    for (I,), V in beta.terms.items():
        for P, VP in commute_pullback(V, pr).items():
            c = VP.apply(pr.target.one())
            if c:
                key = (I, P)
                terms[key] = terms[key] + c if key in terms else c
    lhs = MultiDiffOp(pr, 2, FUNCTIONS, terms)
    rhs = MultiDiffOp(pr, 2, FUNCTIONS, {k: pr.pullback(v) for k, v in br.poisson.terms.items()})
    ii_res = lhs - rhs
    return {"i": i_res, "ii": ii_res, "iii": curvature_cochain(br)}


def curvature(br: SPBracket, a: Polynomial, b: Polynomial, f: Polynomial) -> Polynomial:
    """{{a, {{b, f}}}} - {{b, {{a, f}}}} - {{{a, b}, f}}."""
    return br(a, br(b, f)) - br(b, br(a, f)) - br(br.base_bracket(a, b), f)


def check_sp_properties(br: SPBracket, rng: np.random.Generator, samples: int = 20,
                        max_degree: int = 3) -> dict[str, dict]:
    """Residuals of properties i)-iii), fiber preservation and naturality on samples."""
    pr = br.projection
    M, N = pr.source, pr.target
    found: dict[str, dict | None] = {k: None for k in ("i", "ii", "iii", "fiber_preserving", "natural")}
    for _ in range(samples):
        a, b = random_args(rng, M, 2, max_degree)
        f = random_polynomial(rng, N.names, max_degree)
        g = random_polynomial(rng, N.names, max_degree)
        res = {
            "i": br(a * b, f) - pr.pullback(a) * br(b, f) - pr.pullback(b) * br(a, f),
            "ii": br(a, pr.pullback(b)) - pr.pullback(br.base_bracket(a, b)),
            "iii": curvature(br, a, b, f),
            "fiber_preserving": br(a, N.one()),
            "natural": br(a, f * g) - br(a, f) * g - f * br(a, g),
        }
        for name, val in res.items():
            if val and found[name] is None:
                found[name] = {"a": str(a), "b": str(b), "f": str(f), "g": str(g), "residual": str(val)}
    return {name: {"ok": w is None, "witness": w} for name, w in found.items()}


# --- lifts --------------------------------------------------------------------------------

def _require_symplectic(br: SPBracket) -> list[list[Scalar]]:
    M = br.projection.source
    if M.dim % 2:
        raise ValueError("horizontal lifts need an even-dimensional symplectic base")
    x = Polynomial.gens(M.names)
    omega = []
    for xi in x:
        row = []
        for xj in x:
            v = br.base_bracket(xi, xj)
            if not v.is_constant():
                raise ValueError("base Poisson structure is not constant")
            row.append(v.constant_term())
        omega.append(row)
    try:
        return inverse(omega)
    except ValueError:
        raise ValueError("base Poisson structure is degenerate") from None


def horizontal_lift(br: SPBracket, a: Polynomial) -> DiffOp:
    """X_a^h = {{a, .}} as a vector field on the total space."""
    if not br.natural:
        raise ValueError("bracket is not natural, so {{a, .}} is not a vector field")
    _require_symplectic(br)
    return br.operator(a)


def coordinate_horizontal_lifts(br: SPBracket) -> list[DiffOp]:
    """(d_l)^h = sum_j c_{lj} X_{x_j}^h with c the inverse of ({x_j, x_l})."""
    inv = _require_symplectic(br)
    M = br.projection.source
    x = Polynomial.gens(M.names)
    X = [horizontal_lift(br, xj) for xj in x]
    out = []
    for l in range(M.dim):
        D = DiffOp.zero(br.projection.target)
        for j in range(M.dim):
            # d_l = sum_j (omega^{-1})_{l j} X_{x_j} since X_{x_j} = sum_l omega_{j l} d_l
            c = inv[l][j]
            if c:
                D = D + X[j].scale(c)
        out.append(D)
    return out


class Lift:
    """Algebra map DiffOp(M) -> DiffOp(N) from a flat sP-bracket."""

    def __init__(self, br: SPBracket):
        if curvature_cochain(br):
            raise ValueError("bracket violates property iii), so the lift is not flat")
        res = sp_residual_cochains(br)
        if res["i"] or res["ii"]:
            raise ValueError("bracket violates properties i)/ii)")
        self.bracket = br
        self.projection = br.projection
        self.partials = coordinate_horizontal_lifts(br)
        self._cache: dict = {}

    def symbol(self, K: Sequence[int]) -> DiffOp:
        K = tuple(K)
        if K not in self._cache:
            N = self.projection.target
            D = DiffOp.identity(N)
            for l, e in enumerate(K):
                for _ in range(e):
                    D = D.compose(self.partials[l])
            self._cache[K] = D
        return self._cache[K]

    def __call__(self, D: DiffOp) -> DiffOp:
        pr = self.projection
        if D.space.names != pr.source.names:
            raise ValueError("operator does not live on the base")
        out = DiffOp.zero(pr.target)
        for K, c in D.terms.items():
            out = out + self.symbol(K).left_mul(pr.pullback(c))
        return out


def lift_diffop(D: DiffOp, br: SPBracket) -> DiffOp:
    return Lift(br)(D)


def build_bimodule_from_sp(S: StarProduct, br: SPBracket, verify: bool = True) -> BimoduleStructure:
    """L_i(a) = C_i(a, .)^h and R_i(a) = C_i(., a)^h."""
    pr = br.projection
    if poisson_matrix(S) != [
        [br.base_bracket(xi, xj).constant_term() for xj in Polynomial.gens(S.space.names)]
        for xi in Polynomial.gens(S.space.names)
    ]:
        raise ValueError("star product and sP-bracket induce different Poisson structures")
    lift = Lift(br)
    left = [multiplication_cochain(pr)]
    right = [multiplication_cochain(pr)]
    for i in range(1, S.order_cap + 1):
        lt: dict = {}
        rt: dict = {}
        for (P, Q), v in S.C(i).terms.items():
            pv = pr.pullback(v)
            if not pv:
                continue
            lv = lift.symbol(Q).left_mul(pv)
            rv = lift.symbol(P).left_mul(pv)
            lt[(P,)] = lt[(P,)] + lv if (P,) in lt else lv
            rt[(Q,)] = rt[(Q,)] + rv if (Q,) in rt else rv
        left.append(MultiDiffOp(pr, 1, DIFFOPS, lt))
        right.append(MultiDiffOp(pr, 1, DIFFOPS, rt))
    B = BimoduleStructure(
        ModuleStructure(LEFT, S, pr, left), ModuleStructure(RIGHT, S, pr, right)
    )
    if verify:
        bad = check_bimodule(B)
        if bad:
            raise RuntimeError(f"internal error: lifted structure fails {bad[0]}")
    return B


# --- modification by exp(lambda Q) --------------------------------------------------------------

@dataclass(frozen=True)
class QModifier:
    """Q = sum_i E_i (x) D_i with E_i on the base and D_i on the total space."""

    pairs: tuple

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))


def check_qmodifier(Q: QModifier, B: BimoduleStructure) -> list[str]:
    problems = []
    S = B.left.star
    OS = operator_space(S.space)
    Es = [DiffOp._raw(OS, dict(E.terms)) for E, _ in Q.pairs]
    for i, (E, (_, D)) in enumerate(zip(Es, Q.pairs), start=1):
        for r in range(S.order_cap + 1):
            C = S.C(r)
            if C.postcompose(E) != C.precompose(0, E) + C.precompose(1, E):
                problems.append(f"E_{i} is not a derivation of C_{r}")
                break
        for side, Mstr in (("left", B.left), ("right", B.right)):
            for r in range(Mstr.order_cap + 1):
                L = Mstr.L(r)
                if L.postcompose(D) != L.then(D):
                    problems.append(f"D_{i} does not commute with the {side} action at order {r}")
                    break
    for i in range(len(Es)):
        for j in range(i + 1, len(Es)):
            if Es[i].commutator(Es[j]):
                problems.append(f"E_{i + 1} and E_{j + 1} do not commute")
            if Q.pairs[i][1].commutator(Q.pairs[j][1]):
                problems.append(f"D_{i + 1} and D_{j + 1} do not commute")
    return problems


def modify_bimodule(B: BimoduleStructure, Q: QModifier, power: int = 1) -> BimoduleStructure:
    """Left action replaced by l o exp(lambda^power Q); the right action is kept."""
    problems = check_qmodifier(Q, B)
    if problems:
        raise ValueError(problems[0])
    if not Q.pairs:
        return B
    S = B.left.star
    OS = operator_space(S.space)
    N = B.left.order_cap
    pr = B.projection
    words: dict[int, list] = {0: [(Scalar(1), DiffOp.identity(OS), DiffOp.identity(pr.target))]}
    n = 1
    while n * power <= N:
        nxt = []
        for c, E, D in words[n - 1]:
            for Ei, Di in Q.pairs:
                nxt.append((c, E.compose(DiffOp._raw(OS, dict(Ei.terms))), D.compose(Di)))
        words[n] = nxt
        n += 1
    left = []
    for s in range(N + 1):
        acc = MultiDiffOp.zero(pr, 1, DIFFOPS)
        for n, ws in words.items():
            r = s - n * power
            if r < 0:
                continue
            inv = Scalar(Fraction(1, factorial(n)))
            for c, E, D in ws:
                acc = acc + B.left.L(r).precompose(0, E).then(D).scale(c * inv)
        left.append(acc)
    out = BimoduleStructure(ModuleStructure(LEFT, S, pr, left), B.right)
    bad = check_bimodule(out)
    if bad:
        raise RuntimeError(f"internal error: modified structure fails {bad[0]}")
    return out


def sp_shift(Q: QModifier, pr: Projection) -> MultiDiffOp:
    """a -> (i/2) sum_i pr*(E_i a) D_i, the change of the sP-bracket under exp(lambda Q)."""
    acc = MultiDiffOp.zero(pr, 1, DIFFOPS)
    base = MultiDiffOp(pr, 1, DIFFOPS, {((0,) * pr.source.dim,): DiffOp.identity(pr.target)})
    for E, D in Q.pairs:
        acc = acc + base.precompose(0, E).then(D)
    return acc.scale(HALF_I)


# --- subalgebra deformations -------------------------------------------------------------------

def lift_star_product(S: StarProduct, br: SPBracket) -> StarProduct:
    """Star product on the total space from the lifted C_k."""
    lift = Lift(br)
    pr = br.projection
    P = Space(pr.target.names)
    prP = Projection.identity(P)
    cochains = []
    for r in range(S.order_cap + 1):
        terms: dict = {}
        for (I, J), v in S.C(r).terms.items():
            pv = pr.pullback(v)
            for R, dR in lift.symbol(I).terms.items():
                for T, eT in lift.symbol(J).terms.items():
                    val = pv * dR * eT
                    if val:
                        terms[(R, T)] = terms[(R, T)] + val if (R, T) in terms else val
        cochains.append(MultiDiffOp(prP, 2, FUNCTIONS, terms))
    return StarProduct(P, S.order_cap, cochains)


def pulled_back_bracket(SP: StarProduct, pr: Projection) -> SPBracket:
    """{{a, f}} = {pr*a, f}_P for a star product on the total space."""
    pc = poisson_cochain(SP)
    terms: dict = {}
    N = pr.target
    OS = Space(N.names, N.base_rank)
    for (R, T), v in pc.terms.items():
        I = pr.base_index(R)
        if I is None:
            continue
        val = DiffOp(OS, {T: v})
        terms[(I,)] = terms[(I,)] + val if (I,) in terms else val
    base = Projection.identity(pr.source)
    x = Polynomial.gens(pr.source.names)
    # the base bracket is recovered from pr*{a, b} = {pr*a, pr*b}_P
    cochain = MultiDiffOp(pr, 1, DIFFOPS, terms)
    M = pr.source
    zero_poisson = {}
    for i in range(M.dim):
        for j in range(M.dim):
            val = pc.apply([pr.pullback(x[i]), pr.pullback(x[j])])
            if not val.is_constant():
                raise ValueError("lifted Poisson structure is not constant on pulled-back coordinates")
            if val:
                zero_poisson[(M.unit(i), M.unit(j))] = M.one().scale(val.constant_term())
    return SPBracket(pr, cochain, MultiDiffOp(base, 2, FUNCTIONS, zero_poisson))


def subalgebra_defect(SP: StarProduct, S: StarProduct, pr: Projection, a: Polynomial, b: Polynomial) -> list[int]:
    """Orders r at which pr*(a * b) differs from pr*a *_P pr*b."""
    return [
        r for r in range(S.order_cap + 1)
        if pr.pullback(S.coefficient(r, a, b)) != SP.coefficient(r, pr.pullback(a), pr.pullback(b))
    ]
