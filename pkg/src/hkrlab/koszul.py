"""Bar and Koszul resolutions of the polynomial algebra on R^m.

Bar chains of degree k are polynomials in the blocks (v, q1..qk, w),
Koszul chains are exterior-basis indexed polynomials in (v, w).  Index
tuples are 0-based and strictly increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Mapping, Sequence

from .algebra import (
    ONE,
    Polynomial,
    Scalar,
    drop_variables,
    integrate,
    integrate_simplex,
)
from .diffop import (
    DIFFOPS,
    FUNCTIONS,
    DiffOp,
    MultiDiffOp,
    Projection,
    commute_pullback,
)


# --- variable blocks -------------------------------------------------------------

def block(name: str, m: int) -> tuple[str, ...]:
    return tuple(f"{name}{i + 1}" for i in range(m))


def q_block(j: int, m: int) -> tuple[str, ...]:
    """Coordinates of the j-th middle factor (1-based j)."""
    return tuple(f"q{j}_{i + 1}" for i in range(m))


def bar_variables(m: int, k: int) -> tuple[str, ...]:
    out = block("v", m)
    for j in range(1, k + 1):
        out += q_block(j, m)
    return out + block("w", m)


def vw_variables(m: int) -> tuple[str, ...]:
    return block("v", m) + block("w", m)


def _slots(m: int, k: int) -> list[tuple[str, ...]]:
    return [block("v", m)] + [q_block(j, m) for j in range(1, k + 1)] + [block("w", m)]


def perm_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq`` (0 if entries repeat)."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def wedge_front(j: int, I: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """e^j wedge e^I = sign * e^{sorted}; sign 0 if j is already in I."""
    if j in I:
        return 0, I
    before = sum(1 for i in I if i < j)
    return (-1) ** before, tuple(sorted(I + (j,)))


def increasing_tuples(m: int, k: int) -> list[tuple[int, ...]]:
    from itertools import combinations

    return list(combinations(range(m), k))


# --- bar complex --------------------------------------------------------------------

@dataclass(frozen=True)
class BarChain:
    """Element of X_k: a polynomial on V x V^k x V."""

    m: int
    degree: int
    poly: Polynomial

    def __post_init__(self):
        want = bar_variables(self.m, self.degree)
        if self.poly.variables != want:
            raise ValueError(f"bar chain of degree {self.degree} needs variables {want}")

    @classmethod
    def from_poly(cls, m: int, degree: int, p: Polynomial) -> "BarChain":
        return cls(m, degree, p.embed(bar_variables(m, degree)) if p.variables != bar_variables(m, degree) else p)

    @classmethod
    def elementary(cls, args: Sequence[Polynomial], left: Polynomial | None = None,
                   right: Polynomial | None = None) -> "BarChain":
        """left(v) * a_1(q_1) ... a_k(q_k) * right(w) for polynomials on R^m."""
        k = len(args)
        names = (left or right or args[0]).variables
        m = len(names)
        target = bar_variables(m, k)
        out = Polynomial.one(target)
        slots = _slots(m, k)
        factors = [left] + list(args) + [right]
        for s, f in enumerate(factors):
            if f is None:
                continue
            out = out * f.rename(dict(zip(names, slots[s])), target)
        return cls(m, k, out)

    def __add__(self, other: "BarChain") -> "BarChain":
        return BarChain(self.m, self.degree, self.poly + other.poly)

    def __sub__(self, other: "BarChain") -> "BarChain":
        return BarChain(self.m, self.degree, self.poly - other.poly)

    def scale(self, s) -> "BarChain":
        return BarChain(self.m, self.degree, self.poly.scale(s))

    def is_zero(self) -> bool:
        return self.poly.is_zero()


def _merge(chi: BarChain, out_slots: list[int]) -> Polynomial:
    """Substitute slot s of chi by output slot out_slots[s] of one degree lower chain."""
    m, k = chi.m, chi.degree
    src = _slots(m, k)
    dst = _slots(m, len(set(out_slots)) - 2)
    mapping = {}
    for s, names in enumerate(src):
        for a, b in zip(names, dst[out_slots[s]]):
            mapping[a] = b
    return chi.poly.rename(mapping, bar_variables(m, len(dst) - 2))


def bar_differential(chi: BarChain) -> BarChain:
    """Alternating sum of the faces duplicating one argument slot."""
    k = chi.degree
    if k < 1:
        raise ValueError("bar differential starts in degree 1; use augmentation in degree 0")
    out = Polynomial.zero(bar_variables(chi.m, k - 1))
    for i in range(k + 1):
        # face i: output slot i feeds chi slots i and i+1
        slots = [s if s <= i else s - 1 for s in range(k + 2)]
        term = _merge(chi, slots)
        out = out + term if i % 2 == 0 else out - term
    return BarChain(chi.m, k - 1, out)


def augmentation(chi: BarChain) -> Polynomial:
    """(eps chi)(v) = chi(v, v), returned as a polynomial in the v block."""
    if chi.degree != 0:
        raise ValueError("augmentation is defined on degree 0")
    m = chi.m
    v = block("v", m)
    return chi.poly.rename(dict(zip(block("w", m), v)), v)


def bar_eta(a: Polynomial, m: int) -> BarChain:
    """(eta a)(v, w) = a(v) for a polynomial in the v block."""
    return BarChain(m, 0, a.embed(bar_variables(m, 0)))


def bar_homotopy(chi: BarChain) -> BarChain:
    """(h chi)(v, q_1..q_{k+1}, w) = -(-1)^k chi(v, q_1..q_{k+1})."""
    m, k = chi.m, chi.degree
    target = bar_variables(m, k + 1)
    mapping = dict(zip(block("w", m), q_block(k + 1, m)))
    p = chi.poly.rename(mapping, target)
    return BarChain(m, k + 1, p if k % 2 == 1 else -p)


# --- Koszul complex --------------------------------------------------------------------

@dataclass(frozen=True)
class KoszulChain:
    """Element of K_k: increasing index tuples -> polynomials in (v, w)."""

    m: int
    degree: int
    comps: Mapping = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        want = vw_variables(self.m)
        for I, p in self.comps.items():
            I = tuple(I)
            if len(I) != self.degree or list(I) != sorted(set(I)) or any(not 0 <= i < self.m for i in I):
                raise ValueError(f"bad index tuple {I} for degree {self.degree} on R^{self.m}")
            if p.variables != want:
                raise ValueError(f"Koszul coefficients need variables {want}")
            if p:
                clean[I] = p
        object.__setattr__(self, "comps", clean)

    def __add__(self, other: "KoszulChain") -> "KoszulChain":
        acc = dict(self.comps)
        for I, p in other.comps.items():
            acc[I] = acc[I] + p if I in acc else p
        return KoszulChain(self.m, self.degree, acc)

    def __neg__(self):
        return KoszulChain(self.m, self.degree, {I: -p for I, p in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, KoszulChain):
            return NotImplemented
        return (self.m, self.degree, self.comps) == (other.m, other.degree, other.comps)

    def __hash__(self):
        return hash((self.m, self.degree, frozenset(self.comps.items())))

    def is_zero(self) -> bool:
        return not self.comps


def xi_poly(i: int, m: int) -> Polynomial:
    vw = vw_variables(m)
    return Polynomial.var(vw, f"v{i + 1}") - Polynomial.var(vw, f"w{i + 1}")


def koszul_differential_chain(omega: KoszulChain) -> KoszulChain:
    """Contraction with v - w."""
    k, m = omega.degree, omega.m
    if k < 1:
        raise ValueError("Koszul differential starts in degree 1")
    acc: dict = {}
    for I, p in omega.comps.items():
        for l, i in enumerate(I):
            rest = I[:l] + I[l + 1:]
            term = xi_poly(i, m) * p
            if l % 2:
                term = -term
            acc[rest] = acc[rest] + term if rest in acc else term
    return KoszulChain(m, k - 1, acc)


def koszul_eta_eps(omega: KoszulChain) -> KoszulChain:
    """(eta eps omega)(v, w) = omega(v, v) in degree 0."""
    if omega.degree != 0:
        raise ValueError("eta eps is defined on degree 0")
    m = omega.m
    vw = vw_variables(m)
    p = omega.comps.get((), Polynomial.zero(vw))
    return KoszulChain(m, 0, {(): p.rename(dict(zip(block("w", m), block("v", m))), vw)})


def koszul_homotopy(omega: KoszulChain) -> KoszulChain:
    """-sum_j e^j wedge int_0^1 t^k d omega / d w^j (v, t w + (1 - t) v) dt."""
    k, m = omega.degree, omega.m
    vw = vw_variables(m)
    ring = vw + ("t",)
    t = Polynomial.var(ring, "t")
    mapping = {}
    for i in range(m):
        v_i = Polynomial.var(ring, f"v{i + 1}")
        w_i = Polynomial.var(ring, f"w{i + 1}")
        mapping[f"v{i + 1}"] = v_i
        mapping[f"w{i + 1}"] = t * w_i + (1 - t) * v_i
    weight = t**k
    acc: dict = {}
    for I, p in omega.comps.items():
        for j in range(m):
            sign, J = wedge_front(j, I)
            if not sign:
                continue
            dp = p.diff(f"w{j + 1}")
            if not dp:
                continue
            integrand = dp.substitute(mapping, ring) * weight
            val = drop_variables(integrate(integrand, "t", 0, 1), vw)
            val = val if sign < 0 else -val
            acc[J] = acc[J] + val if J in acc else val
    return KoszulChain(m, k + 1, acc)


# --- comparison maps -------------------------------------------------------------------

def _det_poly(I: tuple[int, ...], m: int) -> Polynomial:
    """det[(q_j - v)^{i_l}] as a polynomial in the bar variables of degree len(I)."""
    k = len(I)
    target = bar_variables(m, k)
    out = Polynomial.zero(target)
    for perm in permutations(range(k)):
        sign = perm_sign(perm)
        term = Polynomial.one(target)
        for j in range(k):
            i = I[perm[j]]
            term = term * (
                Polynomial.var(target, f"q{j + 1}_{i + 1}") - Polynomial.var(target, f"v{i + 1}")
            )
        out = out + term if sign > 0 else out - term
    return out


def chain_map_F(omega: KoszulChain) -> BarChain:
    """F(omega)(v, q, w) = omega(v, w)(q_1 - v, ..., q_k - v)."""
    k, m = omega.degree, omega.m
    target = bar_variables(m, k)
    out = Polynomial.zero(target)
    for I, p in omega.comps.items():
        out = out + p.embed(target) * _det_poly(I, m)
    return BarChain(m, k, out)


def _simplex_term(chi: BarChain, idx: tuple[int, ...]) -> Polynomial:
    """Iterated simplex integral of d^k chi / dq_1^{i_1}..dq_k^{i_k} at q_j = t_j v + (1 - t_j) w."""
    m, k = chi.m, chi.degree
    d = chi.poly
    for j, i in enumerate(idx):
        d = d.diff(f"q{j + 1}_{i + 1}")
        if not d:
            return Polynomial.zero(vw_variables(m))
    params = tuple(f"t{j + 1}" for j in range(k))
    ring = vw_variables(m) + params
    mapping = {}
    for i in range(m):
        v_i = Polynomial.var(ring, f"v{i + 1}")
        w_i = Polynomial.var(ring, f"w{i + 1}")
        mapping[f"v{i + 1}"] = v_i
        mapping[f"w{i + 1}"] = w_i
        for j in range(k):
            t = Polynomial.var(ring, params[j])
            mapping[f"q{j + 1}_{i + 1}"] = t * v_i + (1 - t) * w_i
    return integrate_simplex(d.substitute(mapping, ring), params)


def chain_map_G(chi: BarChain) -> KoszulChain:
    m, k = chi.m, chi.degree
    if k == 0:
        return KoszulChain(m, 0, {(): chi.poly})
    acc: dict = {}
    for idx in permutations(range(m), k):
        # repeated indices give e^i wedge e^i = 0, so only distinct tuples appear
        val = _simplex_term(chi, idx)
        if not val:
            continue
        I = tuple(sorted(idx))
        if perm_sign(idx) < 0:
            val = -val
        acc[I] = acc[I] + val if I in acc else val
    return KoszulChain(m, k, acc)


def theta(chi: BarChain) -> BarChain:
    """Explicit projection formula, computed without going through F and G."""
    m, k = chi.m, chi.degree
    target = bar_variables(m, k)
    if k == 0:
        return chi
    out = Polynomial.zero(target)
    for idx in permutations(range(m), k):
        # tuples with a repeated index drop out of the signed sum
        integral = _simplex_term(chi, idx)
        if not integral:
            continue
        alt = Polynomial.zero(target)
        for sigma in permutations(range(k)):
            term = Polynomial.one(target)
            for j in range(k):
                i = idx[sigma[j]]
                term = term * (
                    Polynomial.var(target, f"q{j + 1}_{i + 1}") - Polynomial.var(target, f"v{i + 1}")
                )
            alt = alt + term if perm_sign(sigma) > 0 else alt - term
        out = out + alt * integral.embed(target)
    return BarChain(m, k, out)


# --- cochains on the Koszul complex ---------------------------------------------------

class KoszulCochain:
    """Element of Lambda^k(R^m) tensor M: increasing tuples -> module values."""

    __slots__ = ("projection", "degree", "kind", "values")

    def __init__(self, projection: Projection, degree: int, kind: str, values: Mapping | None = None):
        if kind not in (FUNCTIONS, DIFFOPS):
            raise ValueError(f"unknown module kind {kind!r}")
        self.projection = projection
        self.degree = degree
        self.kind = kind
        m = projection.source.dim
        clean = {}
        for I, val in (values or {}).items():
            I = tuple(I)
            if len(I) != degree or list(I) != sorted(set(I)) or any(not 0 <= i < m for i in I):
                raise ValueError(f"bad index tuple {I} for degree {degree} on R^{m}")
            if kind == FUNCTIONS and not isinstance(val, Polynomial):
                raise TypeError("function module needs Polynomial values")
            if kind == DIFFOPS and not isinstance(val, DiffOp):
                raise TypeError("operator module needs DiffOp values")
            if I in clean:
                val = clean[I] + val
            if val:
                clean[I] = val
            else:
                clean.pop(I, None)
        self.values = clean

    def zero_value(self):
        N = self.projection.target
        return N.zero() if self.kind == FUNCTIONS else DiffOp.zero(N)

    def _like(self, values) -> "KoszulCochain":
        return KoszulCochain(self.projection, self.degree, self.kind, values)

    def __add__(self, other: "KoszulCochain") -> "KoszulCochain":
        if (self.projection, self.degree, self.kind) != (other.projection, other.degree, other.kind):
            raise ValueError("incompatible Koszul cochains")
        acc = dict(self.values)
        for I, v in other.values.items():
            acc[I] = acc[I] + v if I in acc else v
        return self._like(acc)

    def __neg__(self):
        return self._like({I: -v for I, v in self.values.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "KoszulCochain":
        return self._like({I: v.scale(s) for I, v in self.values.items()})

    def is_zero(self) -> bool:
        return not self.values

    def __bool__(self):
        return bool(self.values)

    def __eq__(self, other):
        if not isinstance(other, KoszulCochain):
            return NotImplemented
        return (self.projection, self.degree, self.kind, self.values) == (
            other.projection, other.degree, other.kind, other.values
        )

    def __hash__(self):
        return hash((self.projection, self.degree, self.kind, frozenset(self.values.items())))

    def to_json(self) -> list:
        return [
            {"form": [i + 1 for i in I], "value": str(v)}
            for I, v in sorted(self.values.items())
        ]

    def __str__(self):
        if not self.values:
            return "0"
        parts = []
        for I, v in sorted(self.values.items()):
            form = "^".join(f"e{i + 1}" for i in I) or "1"
            parts.append(f"{form} (x) {v}")
        return " + ".join(parts)

    def __repr__(self):
        return f"KoszulCochain(degree={self.degree}, {self})"


def g_tilde(eta: KoszulCochain) -> MultiDiffOp:
    """sum over index tuples (d_{i_1} a_1)...(d_{i_k} a_k) * eta(e^{i_1} ^ ... ^ e^{i_k})."""
    pr = eta.projection
    m = pr.source.dim
    unit = [tuple(1 if j == i else 0 for j in range(m)) for i in range(m)]
    terms: dict = {}
    for I, val in eta.values.items():
        for order in permutations(I):
            key = tuple(unit[i] for i in order)
            terms[key] = val if perm_sign(order) > 0 else -val
    return MultiDiffOp(pr, eta.degree, eta.kind, terms)


# --- cochains on the bar complex in local form --------------------------------------------

class BarCochain:
    """A^e-linear map X_k -> M given by its local form.

    psi(chi) = sum over (I_1..I_k, J) of
    Delta*(d^{I_1}_{q_1} .. d^{I_k}_{q_k} d^J_w chi) . psi^{I, J},
    with Delta* the restriction to the diagonal and "." the left action.
    """

    __slots__ = ("projection", "degree", "kind", "terms")

    def __init__(self, projection: Projection, degree: int, kind: str, terms: Mapping):
        self.projection = projection
        self.degree = degree
        self.kind = kind
        clean = {}
        for key, val in terms.items():
            key = tuple(tuple(I) for I in key)
            if len(key) != degree + 1:
                raise ValueError("bar cochain keys carry k + 1 multi-indices")
            if val:
                clean[key] = val
        self.terms = clean

    def __eq__(self, other):
        if not isinstance(other, BarCochain):
            return NotImplemented
        return (self.projection, self.degree, self.kind, self.terms) == (
            other.projection, other.degree, other.kind, other.terms
        )

    def evaluate(self, chi: BarChain):
        pr = self.projection
        m = pr.source.dim
        if chi.m != m or chi.degree != self.degree:
            raise ValueError("chain does not match cochain degree or dimension")
        slots = _slots(m, self.degree)
        M = pr.source.names
        diag = {name: M[i] for names in slots for i, name in enumerate(names)}
        N = pr.target
        out = N.zero() if self.kind == FUNCTIONS else DiffOp.zero(N)
        for key, val in self.terms.items():
            d = chi.poly
            for s, idx in enumerate(key):
                d = d.diff_multi(_block_index(idx, slots[s + 1], d.variables))
                if not d:
                    break
            if not d:
                continue
            f = pr.pullback(d.rename(diag, M))
            if not f:
                continue
            out = out + (f * val if self.kind == FUNCTIONS else val.left_mul(f))
        return out


def _block_index(idx, names, variables) -> tuple[int, ...]:
    full = [0] * len(variables)
    for e, name in zip(idx, names):
        full[variables.index(name)] = e
    return tuple(full)


def xi(psi: BarCochain) -> MultiDiffOp:
    """(Xi psi)(a_1..a_k) = psi(1 (x) a_1 (x) ... (x) a_k (x) 1)."""
    m = psi.projection.source.dim
    zero = (0,) * m
    terms = {key[:-1]: val for key, val in psi.terms.items() if key[-1] == zero}
    phi = MultiDiffOp(psi.projection, psi.degree, psi.kind, terms)
    if xi_inverse(phi) != psi:
        raise ValueError("bar cochain is not A^e-linear: w-derivative terms disagree with the right action")
    return phi


def xi_inverse(phi: MultiDiffOp) -> BarCochain:
    pr = phi.projection
    m = pr.source.dim
    zero = (0,) * m
    terms: dict = {}
    for key, val in phi.terms.items():
        if phi.kind == FUNCTIONS:
            terms[key + (zero,)] = val
            continue
        for P, VP in commute_pullback(val, pr).items():
            nk = key + (P,)
            terms[nk] = terms[nk] + VP if nk in terms else VP
    return BarCochain(pr, phi.arity, phi.kind, terms)
