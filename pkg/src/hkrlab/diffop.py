"""Differential and multidifferential operators on coordinate spaces.

A ``Projection`` pr: N -> M sends (y1..yn) to (y1..yk, 0..0) in M = R^m,
so pr*(a)(y) = a(y1..yk, 0..0).  Operators on N are kept in the normal
form sum coeff * d^J with coefficients on the left.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from math import comb, factorial
from typing import Callable, Iterable, Mapping, Sequence

from .algebra import (
    ONE,
    Polynomial,
    Scalar,
    add_index,
    grlex_key,
    multi_binomial,
    render_terms,
    sub_index,
    sub_indices,
)


@dataclass(frozen=True)
class Space:
    """Coordinate space R^n whose first ``base_rank`` coordinates are base directions."""

    names: tuple[str, ...]
    base_rank: int = 0

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if not 0 <= self.base_rank <= len(self.names):
            raise ValueError(
                f"base_rank {self.base_rank} outside 0..{len(self.names)}"
            )
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate coordinate names in {self.names}")

    @classmethod
    def standard(cls, prefix: str, n: int, base_rank: int = 0) -> "Space":
        return cls(tuple(f"{prefix}{i + 1}" for i in range(n)), base_rank)

    @property
    def dim(self) -> int:
        return len(self.names)

    total_dim = dim

    def zero_index(self) -> tuple[int, ...]:
        return (0,) * self.dim

    def unit(self, i: int) -> tuple[int, ...]:
        return tuple(1 if j == i else 0 for j in range(self.dim))

    def poly(self, terms=None) -> Polynomial:
        return Polynomial(self.names, terms)

    def var(self, i: int) -> Polynomial:
        return Polynomial.var(self.names, self.names[i])

    def zero(self) -> Polynomial:
        return Polynomial.zero(self.names)

    def one(self) -> Polynomial:
        return Polynomial.one(self.names)

    def check(self, p: Polynomial, what: str = "polynomial"):
        if p.variables != self.names:
            raise ValueError(
                f"{what} lives in {p.variables}, expected the space {self.names}"
            )


@dataclass(frozen=True)
class Projection:
    """Coordinate projection from ``target`` (N) onto the first k coordinates of ``source`` (M)."""

    source: Space
    target: Space
    rank: int

    def __post_init__(self):
        k = self.rank
        if k > self.source.dim or k > self.target.dim:
            raise ValueError(
                f"rank {k} exceeds dim M = {self.source.dim} or dim N = {self.target.dim}"
            )
        if self.target.base_rank != k:
            raise ValueError(
                f"rank mismatch: projection rank {k}, target base_rank {self.target.base_rank}"
            )

    @classmethod
    def identity(cls, space: Space) -> "Projection":
        return cls(Space(space.names, 0), Space(space.names, space.dim), space.dim)

    @property
    def is_identity(self) -> bool:
        return self.source.names == self.target.names and self.rank == self.source.dim

    def pullback(self, a: Polynomial) -> Polynomial:
        self.source.check(a, "argument of pullback")
        k, n = self.rank, self.target.dim
        out = {}
        for e, c in a.terms.items():
            if any(e[k:]):
                continue
            ne = e[:k] + (0,) * (n - k)
            out[ne] = c
        return Polynomial._raw(self.target.names, out)

    def lift_index(self, P: Sequence[int]) -> tuple[int, ...]:
        """Embed a base-supported multi-index on M as a multi-index on N."""
        k = self.rank
        if any(P[k:]):
            raise ValueError(f"multi-index {tuple(P)} is not supported on base coordinates")
        return tuple(P[:k]) + (0,) * (self.target.dim - k)

    def base_index(self, L: Sequence[int]) -> tuple[int, ...] | None:
        """Inverse of ``lift_index``; ``None`` if L involves fiber directions."""
        k = self.rank
        if any(L[k:]):
            return None
        return tuple(L[:k]) + (0,) * (self.source.dim - k)


def pullback(pr: Projection, a: Polynomial) -> Polynomial:
    return pr.pullback(a)


class DiffOp:
    """Differential operator sum_J coeff_J * d^J on a Space."""

    __slots__ = ("space", "terms", "_hash")

    def __init__(self, space: Space, terms: Mapping | None = None):
        self.space = space
        clean = {}
        if terms:
            for J, c in terms.items():
                J = tuple(J)
                if len(J) != space.dim:
                    raise ValueError(f"symbol {J} has wrong length for {space.names}")
                if not isinstance(c, Polynomial):
                    c = Polynomial.constant(space.names, c)
                space.check(c, "coefficient")
                if J in clean:
                    c = clean[J] + c
                if c:
                    clean[J] = c
                else:
                    clean.pop(J, None)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, space: Space, terms: dict) -> "DiffOp":
        d = object.__new__(cls)
        d.space = space
        d.terms = terms
        d._hash = None
        return d

    @classmethod
    def zero(cls, space: Space) -> "DiffOp":
        return cls._raw(space, {})

    @classmethod
    def identity(cls, space: Space) -> "DiffOp":
        return cls.multiplication(space, space.one())

    @classmethod
    def multiplication(cls, space: Space, f: Polynomial) -> "DiffOp":
        space.check(f)
        if not f:
            return cls.zero(space)
        return cls._raw(space, {space.zero_index(): f})

    @classmethod
    def partial(cls, space: Space, i: int | str, times: int = 1) -> "DiffOp":
        if isinstance(i, str):
            i = space.names.index(i)
        J = tuple(times if j == i else 0 for j in range(space.dim))
        return cls._raw(space, {J: space.one()})

    @classmethod
    def symbol(cls, space: Space, J: Sequence[int], coeff: Polynomial | None = None) -> "DiffOp":
        return cls(space, {tuple(J): coeff if coeff is not None else space.one()})

    # --- queries -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def order(self) -> int:
        if not self.terms:
            return -1
        return max(sum(J) for J in self.terms)

    def coefficient(self, J: Sequence[int]) -> Polynomial:
        return self.terms.get(tuple(J), self.space.zero())

    def _check(self, other: "DiffOp"):
        if not isinstance(other, DiffOp):
            raise TypeError(f"expected DiffOp, got {type(other).__name__}")
        if self.space != other.space:
            raise ValueError(f"space mismatch: {self.space.names} vs {other.space.names}")

    # --- linear structure -------------------------------------------------------
    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        out = dict(self.terms)
        for J, c in other.terms.items():
            s = out.get(J)
            if s is None:
                out[J] = c
            else:
                s = s + c
                if s:
                    out[J] = s
                else:
                    del out[J]
        return DiffOp._raw(self.space, out)

    def __neg__(self):
        return DiffOp._raw(self.space, {J: -c for J, c in self.terms.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def scale(self, s) -> "DiffOp":
        s = Scalar.coerce(s)
        if not s:
            return DiffOp.zero(self.space)
        return DiffOp._raw(self.space, {J: c.scale(s) for J, c in self.terms.items()})

    def left_mul(self, f: Polynomial) -> "DiffOp":
        """Multiplication by ``f`` followed by this operator's output: f * D."""
        self.space.check(f)
        out = {}
        for J, c in self.terms.items():
            p = f * c
            if p:
                out[J] = p
        return DiffOp._raw(self.space, out)

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.space == other.space and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, frozenset(self.terms.items())))
        return self._hash

    # --- action and composition -------------------------------------------
    def apply(self, f: Polynomial) -> Polynomial:
        self.space.check(f, "operand")
        out = self.space.zero()
        for J, c in self.terms.items():
            g = f.diff_multi(J)
            if g:
                out = out + c * g
        return out

    __call__ = apply

    def compose(self, other: "DiffOp") -> "DiffOp":
        """Normal form of self o other via the Leibniz rule."""
        self._check(other)
        acc: dict = {}
        for J, a in self.terms.items():
            for K, b in other.terms.items():
                for L in sub_indices(J):
                    db = b.diff_multi(L)
                    if not db:
                        continue
                    coeff = a * db
                    mult = multi_binomial(J, L)
                    if mult != 1:
                        coeff = coeff.scale(mult)
                    sym = add_index(sub_index(J, L), K)
                    s = acc.get(sym)
                    acc[sym] = coeff if s is None else s + coeff
        return DiffOp._raw(self.space, {J: c for J, c in acc.items() if c})

    __matmul__ = compose

    def commutator(self, other: "DiffOp") -> "DiffOp":
        return self.compose(other) - other.compose(self)

    def power(self, n: int) -> "DiffOp":
        out = DiffOp.identity(self.space)
        for _ in range(n):
            out = out.compose(self)
        return out

    # --- structure relative to a projection ------------------------------------
    def vertical_split(self) -> tuple["DiffOp", "DiffOp"]:
        k = self.space.base_rank
        ver, hor = {}, {}
        for J, c in self.terms.items():
            (hor if any(J[:k]) else ver)[J] = c
        return DiffOp._raw(self.space, ver), DiffOp._raw(self.space, hor)

    def is_vertical(self) -> bool:
        return not self.vertical_split()[1]

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for J, c in self.sorted_terms():
            sym = _symbol_str(self.space.names, J)
            cs = str(c)
            if not sym:
                parts.append(cs)
            elif cs == "1":
                parts.append(sym)
            elif len(c.terms) == 1:
                parts.append(f"{cs}*{sym}")
            else:
                parts.append(f"({cs})*{sym}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"DiffOp({self})"


def _symbol_str(names, J) -> str:
    parts = []
    for v, k in zip(names, J):
        if k == 1:
            parts.append(f"d_{v}")
        elif k > 1:
            parts.append(f"d_{v}^{k}")
    return "*".join(parts)


def compose(D: DiffOp, E: DiffOp) -> DiffOp:
    return D.compose(E)


def vertical_split(D: DiffOp) -> tuple[DiffOp, DiffOp]:
    return D.vertical_split()


def commute_pullback(D: DiffOp, pr: Projection) -> dict[tuple[int, ...], DiffOp]:
    """Coefficients D_P with D o pr*(g) = sum_P pr*(d^P g) * D_P.

    P runs over multi-indices on M supported on the first k coordinates.
    """
    if D.space != pr.target:
        raise ValueError("operator does not live on the projection target")
    k = pr.rank
    out: dict = {}
    for K, c in D.terms.items():
        ranges = [range(K[i] + 1) if i < k else range(1) for i in range(len(K))]
        for L in iproduct(*ranges):
            mult = multi_binomial(K, L)
            P = pr.base_index(L)
            bucket = out.setdefault(P, {})
            rest = sub_index(K, L)
            term = c.scale(mult) if mult != 1 else c
            s = bucket.get(rest)
            bucket[rest] = term if s is None else s + term
    return {
        P: DiffOp._raw(D.space, {J: c for J, c in t.items() if c})
        for P, t in out.items()
        if any(t.values())
    }


# --- multinomial splitting of multi-indices ----------------------------------

def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def split_index(I: Sequence[int], parts: int):
    """Yield (coefficient, (L_1..L_parts)) with sum L_j = I, weighted multinomially."""
    per_coord = []
    for a in I:
        options = []
        for comp in _compositions(a, parts):
            mult = factorial(a)
            for c in comp:
                mult //= factorial(c)
            options.append((mult, comp))
        per_coord.append(options)
    for choice in iproduct(*per_coord):
        coeff = 1
        for mult, _ in choice:
            coeff *= mult
        pieces = tuple(tuple(comp[j] for _, comp in choice) for j in range(parts))
        yield coeff, pieces


# --- multidifferential operators in local form ------------------------------------

FUNCTIONS = "functions"
DIFFOPS = "diffops"


class MultiDiffOp:
    """Multidifferential operator in local form.

    phi(a_1..a_k) = sum over terms (I_1..I_k) of
    pr*(d^I_1 a_1) ... pr*(d^I_k a_k) * value, where each I_j is a
    multi-index on M and the value is a polynomial (``kind='functions'``)
    or a DiffOp on N (``kind='diffops'``).  Values multiply from the left.
    """

    __slots__ = ("projection", "arity", "kind", "terms", "_hash")

    def __init__(self, projection: Projection, arity: int, kind: str, terms: Mapping | None = None):
        if kind not in (FUNCTIONS, DIFFOPS):
            raise ValueError(f"unknown module kind {kind!r}")
        if arity < 0:
            raise ValueError("arity must be nonnegative")
        self.projection = projection
        self.arity = arity
        self.kind = kind
        m = projection.source.dim
        clean: dict = {}
        for key, val in (terms or {}).items():
            key = tuple(tuple(I) for I in key)
            if len(key) != arity or any(len(I) != m for I in key):
                raise ValueError(f"term key {key} does not match arity {arity} on R^{m}")
            self._check_value(val)
            if key in clean:
                val = clean[key] + val
            if val:
                clean[key] = val
            else:
                clean.pop(key, None)
        self.terms = clean
        self._hash = None

    def _check_value(self, val):
        N = self.projection.target
        if self.kind == FUNCTIONS:
            if not isinstance(val, Polynomial):
                raise TypeError("function-valued cochain needs Polynomial values")
            N.check(val, "value")
        else:
            if not isinstance(val, DiffOp):
                raise TypeError("operator-valued cochain needs DiffOp values")
            if val.space != N:
                raise ValueError("value operator lives on the wrong space")

    @classmethod
    def _raw(cls, projection, arity, kind, terms) -> "MultiDiffOp":
        o = object.__new__(cls)
        o.projection = projection
        o.arity = arity
        o.kind = kind
        o.terms = terms
        o._hash = None
        return o

    def _new(self, arity: int, acc: dict) -> "MultiDiffOp":
        return MultiDiffOp._raw(self.projection, arity, self.kind, {k: v for k, v in acc.items() if v})

    @classmethod
    def zero(cls, projection: Projection, arity: int, kind: str) -> "MultiDiffOp":
        return cls._raw(projection, arity, kind, {})

    @classmethod
    def constant(cls, projection: Projection, value) -> "MultiDiffOp":
        """Arity-0 cochain, i.e. a bare module element."""
        kind = DIFFOPS if isinstance(value, DiffOp) else FUNCTIONS
        return cls(projection, 0, kind, {(): value})

    @classmethod
    def from_diffop(cls, D: DiffOp) -> "MultiDiffOp":
        """View a DiffOp on M as the arity-1 function-valued operator a -> D(a)."""
        pr = Projection.identity(D.space)
        return cls._raw(pr, 1, FUNCTIONS, {(J,): c for J, c in D.terms.items()})

    # --- queries -------------------------------------------------------------
    @property
    def source(self) -> Space:
        return self.projection.source

    @property
    def target(self) -> Space:
        return self.projection.target

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def value_zero(self):
        N = self.target
        return N.zero() if self.kind == FUNCTIONS else DiffOp.zero(N)

    def orders(self) -> tuple[int, ...]:
        """Maximal differentiation order in each argument (-1 for zero)."""
        if not self.terms:
            return (-1,) * self.arity
        return tuple(max(sum(key[j]) for key in self.terms) for j in range(self.arity))

    def value_at(self, key) -> object:
        return self.terms.get(tuple(tuple(I) for I in key), self.value_zero())

    def _compatible(self, other: "MultiDiffOp"):
        if not isinstance(other, MultiDiffOp):
            raise TypeError(f"expected MultiDiffOp, got {type(other).__name__}")
        if (self.projection, self.arity, self.kind) != (other.projection, other.arity, other.kind):
            raise ValueError(
                "incompatible cochains: "
                f"arity {self.arity}/{other.arity}, kind {self.kind}/{other.kind}"
            )

    def __add__(self, other: "MultiDiffOp") -> "MultiDiffOp":
        self._compatible(other)
        acc = dict(self.terms)
        for k, v in other.terms.items():
            s = acc.get(k)
            acc[k] = v if s is None else s + v
        return self._new(self.arity, acc)

    def __neg__(self):
        return MultiDiffOp._raw(
            self.projection, self.arity, self.kind, {k: -v for k, v in self.terms.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "MultiDiffOp":
        s = Scalar.coerce(s)
        return self._new(self.arity, {k: v.scale(s) for k, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, MultiDiffOp):
            return NotImplemented
        return (
            self.projection == other.projection
            and self.arity == other.arity
            and self.kind == other.kind
            and self.terms == other.terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.projection, self.arity, self.kind, frozenset(self.terms.items())))
        return self._hash

    def map_values(self, fn: Callable, kind: str | None = None) -> "MultiDiffOp":
        kind = kind or self.kind
        acc = {k: fn(v) for k, v in self.terms.items()}
        return MultiDiffOp._raw(self.projection, self.arity, kind, {k: v for k, v in acc.items() if v})

    def with_projection(self, projection: Projection) -> "MultiDiffOp":
        return MultiDiffOp(projection, self.arity, self.kind, self.terms)

    # --- evaluation ------------------------------------------------------------
    def apply(self, args: Sequence[Polynomial], f: Polynomial | None = None):
        """phi(a_1..a_k); with ``f`` given, operator values are applied to f."""
        if len(args) != self.arity:
            raise ValueError(f"expected {self.arity} arguments, got {len(args)}")
        M = self.source
        for a in args:
            M.check(a, "argument")
        pr = self.projection
        cache: dict = {}

        def factor(j, I):
            key = (j, I)
            if key not in cache:
                cache[key] = pr.pullback(args[j].diff_multi(I))
            return cache[key]

        N = self.target
        if self.kind == FUNCTIONS:
            out = N.zero()
            for key, val in self.terms.items():
                w = N.one()
                for j, I in enumerate(key):
                    w = w * factor(j, I)
                    if not w:
                        break
                if w:
                    out = out + w * val
            if f is not None:
                N.check(f, "module argument")
                out = out * f
            return out
        out = DiffOp.zero(N)
        for key, val in self.terms.items():
            w = N.one()
            for j, I in enumerate(key):
                w = w * factor(j, I)
                if not w:
                    break
            if w:
                out = out + val.left_mul(w)
        if f is not None:
            return out.apply(f)
        return out

    __call__ = apply

    # --- composition operations -------------------------------------------------------
    def substitute(self, slot: int, inner: "MultiDiffOp") -> "MultiDiffOp":
        """phi(.., inner(b_1..b_r), ..): the slot is replaced by r new slots.

        ``inner`` must be function valued with identity projection on M.
        """
        if not 0 <= slot < self.arity:
            raise ValueError(f"slot {slot} out of range for arity {self.arity}")
        if inner.kind != FUNCTIONS or not inner.projection.is_identity:
            raise ValueError("inner operator must be function valued on the base space")
        if inner.source.names != self.source.names:
            raise ValueError("inner operator lives on a different base space")
        pr = self.projection
        r = inner.arity
        acc: dict = {}
        for key, val in self.terms.items():
            I = key[slot]
            for ikey, c in inner.terms.items():
                for mult, pieces in split_index(I, r + 1):
                    dc = c.diff_multi(pieces[r])
                    if not dc:
                        continue
                    pc = pr.pullback(dc)
                    if not pc:
                        continue
                    if mult != 1:
                        pc = pc.scale(mult)
                    new_val = (pc * val) if self.kind == FUNCTIONS else val.left_mul(pc)
                    if not new_val:
                        continue
                    mid = tuple(add_index(ikey[j], pieces[j]) for j in range(r))
                    nk = key[:slot] + mid + key[slot + 1:]
                    s = acc.get(nk)
                    acc[nk] = new_val if s is None else s + new_val
        return self._new(self.arity + r - 1, acc)

    def precompose(self, slot: int, D: DiffOp) -> "MultiDiffOp":
        """phi(.., D(a), ..) for a DiffOp D on M."""
        return self.substitute(slot, MultiDiffOp.from_diffop(D))

    def postcompose(self, D: DiffOp) -> "MultiDiffOp":
        """D o phi: D applied to function values, or composed before operator values."""
        pr = self.projection
        if D.space != pr.target:
            raise ValueError("postcomposed operator lives on the wrong space")
        parts = commute_pullback(D, pr)
        k = self.arity
        acc: dict = {}
        for key, val in self.terms.items():
            for P, DP in parts.items():
                if k == 0:
                    if any(P):
                        continue
                    splits = [(1, ())]
                else:
                    splits = split_index(P, k)
                for mult, pieces in splits:
                    nv = DP.apply(val) if self.kind == FUNCTIONS else DP.compose(val)
                    if not nv:
                        continue
                    if mult != 1:
                        nv = nv.scale(mult)
                    nk = tuple(add_index(key[j], pieces[j]) for j in range(k))
                    s = acc.get(nk)
                    acc[nk] = nv if s is None else s + nv
        return self._new(k, acc)

    def then(self, E: DiffOp) -> "MultiDiffOp":
        """Operator values composed with E on the right: phi(..) o E."""
        if self.kind != DIFFOPS:
            raise ValueError("right composition needs operator values")
        return self.map_values(lambda v: v.compose(E))

    def compose_values(self, other: "MultiDiffOp") -> "MultiDiffOp":
        """(a, b) -> self(a) o other(b) for arity-1 operator-valued cochains."""
        if self.arity != 1 or other.arity != 1 or self.kind != DIFFOPS or other.kind != DIFFOPS:
            raise ValueError("compose_values needs two arity-1 operator-valued cochains")
        if self.projection != other.projection:
            raise ValueError("cochains over different projections")
        pr = self.projection
        acc: dict = {}
        for (I,), V in self.terms.items():
            parts = commute_pullback(V, pr)
            for (J,), W in other.terms.items():
                for P, VP in parts.items():
                    nv = VP.compose(W)
                    if not nv:
                        continue
                    nk = (I, add_index(J, P))
                    s = acc.get(nk)
                    acc[nk] = nv if s is None else s + nv
        return self._new(2, acc)

    def sorted_terms(self):
        return sorted(
            self.terms.items(),
            key=lambda kv: tuple(grlex_key(I) for I in kv[0]),
        )

    def to_json(self) -> list:
        return [
            {"indices": [list(I) for I in key], "value": str(val)}
            for key, val in self.sorted_terms()
        ]

    def __str__(self):
        if not self.terms:
            return "0"
        return "; ".join(
            f"{[list(I) for I in key]}: {val}" for key, val in self.sorted_terms()
        )

    def __repr__(self):
        return f"MultiDiffOp(arity={self.arity}, kind={self.kind}, {self})"


def apply_multidiffop(phi: MultiDiffOp, args: Sequence[Polynomial], f: Polynomial | None = None):
    return phi.apply(args, f)


def multiplication_cochain(pr: Projection) -> MultiDiffOp:
    """a -> multiplication by pr*(a), the zeroth order of a module structure."""
    m = pr.source.dim
    return MultiDiffOp._raw(
        pr, 1, DIFFOPS, {((0,) * m,): DiffOp.identity(pr.target)}
    )
