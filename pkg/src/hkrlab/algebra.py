"""Exact arithmetic: Gaussian rationals, sparse polynomials, truncated series.

Everything here is immutable after construction.  Polynomials live in a
ring fixed by an ordered tuple of variable names; arithmetic between
different rings is an error rather than an implicit coercion.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from math import factorial
from numbers import Rational
from typing import Callable, Iterable, Mapping, Sequence


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


class Scalar:
    """Gaussian rational ``re + im*i`` with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, Scalar):
            if im:
                raise TypeError("Scalar(re=Scalar, im=...) is ambiguous")
            self.re, self.im = re.re, re.im
            return
        if isinstance(re, complex):
            raise TypeError("floating point complex numbers are not exact")
        self.re = _frac(re)
        self.im = _frac(im)

    @staticmethod
    def _make(re: Fraction, im: Fraction) -> "Scalar":
        s = object.__new__(Scalar)
        s.re = re
        s.im = im
        return s

    @classmethod
    def coerce(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        return cls(x)

    @classmethod
    def parse(cls, text: str) -> "Scalar":
        """Parse renderings such as ``3/4``, ``-i``, ``1/2*i``, ``(1+2*i)``."""
        t = text.strip().replace(" ", "")
        if t.startswith("(") and t.endswith(")"):
            t = t[1:-1]
        if "i" not in t:
            return cls(Fraction(t))
        # split into real and imaginary pieces at a sign not at position 0
        cut = max(t.rfind("+"), t.rfind("-"))
        if cut > 0 and "i" in t[cut:] and "i" not in t[:cut]:
            re_part, im_part = t[:cut], t[cut:]
        else:
            re_part, im_part = "0", t
        im_part = im_part.replace("*i", "").replace("i", "")
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return cls(Fraction(re_part), Fraction(im_part))

    def __add__(self, other):
        if not isinstance(other, Scalar):
            other = Scalar.coerce(other)
        return Scalar._make(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._make(-self.re, -self.im)

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            other = Scalar.coerce(other)
        return Scalar._make(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            other = Scalar.coerce(other)
        if not self.im and not other.im:
            return Scalar._make(self.re * other.re, self.im)
        return Scalar._make(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Scalar.coerce(other)
        if not other:
            raise ZeroDivisionError("division by zero Scalar")
        if not other.im:
            return Scalar._make(self.re / other.re, self.im / other.re)
        den = other.re * other.re + other.im * other.im
        return Scalar._make(
            (self.re * other.re + self.im * other.im) / den,
            (self.im * other.re - self.re * other.im) / den,
        )

    def __rtruediv__(self, other):
        return Scalar.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return Scalar(1) / self**(-n)
        out = Scalar._make(Fraction(1), Fraction(0))
        for _ in range(n):
            out = out * self
        return out

    def conjugate(self) -> "Scalar":
        return Scalar._make(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    @property
    def is_real(self) -> bool:
        return not self.im

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return _imag_str(self.im)
        sign = "-" if self.im < 0 else "+"
        return f"({self.re}{sign}{_imag_str(abs(self.im))})"

    def __repr__(self):
        return f"Scalar({self})"


def _imag_str(im: Fraction) -> str:
    if im == 1:
        return "i"
    if im == -1:
        return "-i"
    return f"{im}*i"


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)
HALF_I = Scalar(0, Fraction(1, 2))


def grlex_key(exps: tuple[int, ...]):
    return (sum(exps), exps)


class Polynomial:
    """Sparse polynomial with Gaussian-rational coefficients.

    ``variables`` is the ordered tuple of coordinate names of the ring;
    ``terms`` maps exponent tuples (one entry per variable) to nonzero
    coefficients.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != n:
                    raise ValueError(
                        f"exponent {exps} has length {len(exps)}, ring has {n} variables"
                    )
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                c = Scalar.coerce(c)
                if c:
                    clean[exps] = clean.get(exps, ZERO) + c
                    if not clean[exps]:
                        del clean[exps]
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, variables: tuple[str, ...], terms: dict) -> "Polynomial":
        # terms must already be normalized (no zeros)
        p = object.__new__(cls)
        p.variables = variables
        p.terms = terms
        p._hash = None
        return p

    # --- constructors -------------------------------------------------
    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Polynomial":
        return cls._raw(tuple(variables), {})

    @classmethod
    def constant(cls, variables: Sequence[str], c) -> "Polynomial":
        variables = tuple(variables)
        c = Scalar.coerce(c)
        if not c:
            return cls._raw(variables, {})
        return cls._raw(variables, {(0,) * len(variables): c})

    @classmethod
    def one(cls, variables: Sequence[str]) -> "Polynomial":
        return cls.constant(variables, ONE)

    @classmethod
    def var(cls, variables: Sequence[str], name: str) -> "Polynomial":
        variables = tuple(variables)
        if name not in variables:
            raise KeyError(f"unknown variable {name!r}; ring has {variables}")
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls._raw(variables, {exps: ONE})

    @classmethod
    def monomial(cls, variables: Sequence[str], exps: Sequence[int], c=1) -> "Polynomial":
        return cls(variables, {tuple(exps): c})

    @classmethod
    def gens(cls, variables: Sequence[str]) -> tuple["Polynomial", ...]:
        return tuple(cls.var(variables, v) for v in variables)

    # --- basic queries --------------------------------------------------
    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        j = self._index(name)
        if not self.terms:
            return -1
        return max(e[j] for e in self.terms)

    def constant_term(self) -> Scalar:
        return self.terms.get((0,) * self.nvars, ZERO)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def coefficient(self, exps: Sequence[int]) -> Scalar:
        return self.terms.get(tuple(exps), ZERO)

    def _index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}; ring has {self.variables}") from None

    def _check(self, other: "Polynomial"):
        if self.variables != other.variables:
            raise ValueError(
                f"variable-set mismatch: {self.variables} vs {other.variables}"
            )

    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.variables, other)

    # --- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, (Polynomial, Scalar, int, Rational)):
            return NotImplemented
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Polynomial._raw(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, (Polynomial, Scalar, int, Rational)):
            return NotImplemented
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            out: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    s = out.get(e)
                    out[e] = c1 * c2 if s is None else s + c1 * c2
            return Polynomial._raw(self.variables, {e: c for e, c in out.items() if c})
        if isinstance(other, (Scalar, int, Rational)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (Scalar, int, Rational)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c) -> "Polynomial":
        c = Scalar.coerce(c)
        if not c:
            return Polynomial._raw(self.variables, {})
        return Polynomial._raw(self.variables, {e: v * c for e, v in self.terms.items()})

    def __truediv__(self, c):
        return self.scale(ONE / Scalar.coerce(c))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial.one(self.variables)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.variables == other.variables and self.terms == other.terms
        if isinstance(other, (Scalar, int, Rational)):
            return self == Polynomial.constant(self.variables, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    # --- calculus ----------------------------------------------------------
    def diff(self, name: str, times: int = 1) -> "Polynomial":
        j = self._index(name)
        return self._diff_index(j, times)

    def _diff_index(self, j: int, times: int = 1) -> "Polynomial":
        if times == 0:
            return self
        out = {}
        for e, c in self.terms.items():
            k = e[j]
            if k < times:
                continue
            f = 1
            for r in range(k - times + 1, k + 1):
                f *= r
            ne = e[:j] + (k - times,) + e[j + 1:]
            out[ne] = c * f
        return Polynomial._raw(self.variables, out)

    def diff_multi(self, exps: Sequence[int]) -> "Polynomial":
        """Apply the mixed partial ``d^exps`` (one order per variable)."""
        if len(exps) != self.nvars:
            raise ValueError("derivative multi-index has wrong length")
        out = {}
        for e, c in self.terms.items():
            if any(a < b for a, b in zip(e, exps)):
                continue
            f = 1
            for a, b in zip(e, exps):
                for r in range(a - b + 1, a + 1):
                    f *= r
            out[tuple(a - b for a, b in zip(e, exps))] = c * f
        return Polynomial._raw(self.variables, out)

    # --- change of ring ----------------------------------------------------
    def rename(self, mapping: Mapping[str, str], variables: Sequence[str] | None = None) -> "Polynomial":
        """Rename variables (a bijection onto a subset of the new ring)."""
        new_vars = tuple(variables) if variables is not None else tuple(
            mapping.get(v, v) for v in self.variables
        )
        pos = []
        for v in self.variables:
            target = mapping.get(v, v)
            if target not in new_vars:
                raise KeyError(f"variable {v!r} -> {target!r} not in target ring {new_vars}")
            pos.append(new_vars.index(target))
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(new_vars)
            for p, k in zip(pos, e):
                ne[p] += k
            ne = tuple(ne)
            s = out.get(ne)
            out[ne] = c if s is None else s + c
        return Polynomial._raw(new_vars, {e: c for e, c in out.items() if c})

    def embed(self, variables: Sequence[str]) -> "Polynomial":
        """View this polynomial in a larger ring containing all its variables."""
        return self.rename({}, variables)

    def substitute(self, mapping: Mapping[str, "Polynomial"], variables: Sequence[str]) -> "Polynomial":
        """Compose with a polynomial map; every variable must be mapped.

        Images are polynomials in the ring ``variables``.
        """
        variables = tuple(variables)
        missing = [v for v in self.variables if v not in mapping]
        if missing:
            raise KeyError(f"unmapped coordinate(s) {missing}")
        images = []
        for v in self.variables:
            img = mapping[v]
            if not isinstance(img, Polynomial):
                img = Polynomial.constant(variables, img)
            if img.variables != variables:
                raise ValueError(
                    f"image of {v!r} lives in {img.variables}, expected {variables}"
                )
            images.append(img)
        powers: list[dict[int, Polynomial]] = [{0: Polynomial.one(variables)} for _ in images]

        def power(j: int, k: int) -> Polynomial:
            cache = powers[j]
            if k not in cache:
                cache[k] = power(j, k - 1) * images[j]
            return cache[k]

        acc: dict = {}
        for e, c in self.terms.items():
            mono = None
            for j, k in enumerate(e):
                if k:
                    mono = power(j, k) if mono is None else mono * power(j, k)
            if mono is None:
                mono = powers[0][0] if images else Polynomial.one(variables)
            for me, mc in mono.terms.items():
                s = acc.get(me)
                acc[me] = mc * c if s is None else s + mc * c
        return Polynomial._raw(variables, {e: c for e, c in acc.items() if c})

    def evaluate(self, point: Mapping[str, object]) -> Scalar:
        """Evaluate at a point given as a full name -> number mapping."""
        vals = [Scalar.coerce(point[v]) for v in self.variables]
        total = ZERO
        for e, c in self.terms.items():
            t = c
            for x, k in zip(vals, e):
                if k:
                    t = t * x**k
            total = total + t
        return total

    # --- rendering ---------------------------------------------------------
    def sorted_terms(self) -> list[tuple[tuple[int, ...], Scalar]]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def __str__(self):
        return render_terms(
            ((_monomial_str(self.variables, e), c) for e, c in self.sorted_terms())
        )

    def __repr__(self):
        return f"Polynomial({self.variables}, {self})"


def _monomial_str(variables: Sequence[str], exps: Sequence[int]) -> str:
    parts = []
    for v, k in zip(variables, exps):
        if k == 1:
            parts.append(v)
        elif k > 1:
            parts.append(f"{v}^{k}")
    return "*".join(parts)


def render_terms(items: Iterable[tuple[str, Scalar]]) -> str:
    """Render ``coeff*basis`` pairs as a signed sum; empty basis means 1."""
    out = []
    for basis, c in items:
        if c.is_real:
            neg = c.re < 0
            mag = str(abs(c.re))
        elif not c.re:
            neg = c.im < 0
            mag = _imag_str(abs(c.im))
        else:
            neg = False
            mag = str(c)
        if basis:
            if mag == "1":
                body = basis
            else:
                body = f"{mag}*{basis}"
        else:
            body = mag
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out) if out else "0"


# --- operations named in the contract -------------------------------------

def poly_arith(p: Polynomial, q, op: str) -> Polynomial:
    """Add, multiply, or scale; ``q`` is a Scalar for ``scalar_mul``."""
    if op == "add":
        p._check(q)
        return p + q
    if op == "mul":
        p._check(q)
        return p * q
    if op == "scalar_mul":
        return p.scale(q)
    raise ValueError(f"unknown polynomial operation {op!r}")


def partial_derivative(p: Polynomial, var: str) -> Polynomial:
    return p.diff(var)


def substitute_affine(p: Polynomial, mapping: Mapping[str, Polynomial], variables: Sequence[str]) -> Polynomial:
    """Compose ``p`` with an affine map (images of degree <= 1 in the new ring).

    Products of a simplex parameter with a coordinate such as ``t*w`` count
    as affine here, since they are affine in the coordinates.
    """
    params = [v for v in variables if v.startswith("t")]
    for name, img in mapping.items():
        if not isinstance(img, Polynomial):
            continue
        for e in img.terms:
            coord_deg = sum(k for v, k in zip(img.variables, e) if v not in params)
            if coord_deg > 1:
                raise ValueError(f"image of {name!r} is not affine: {img}")
    return p.substitute(mapping, variables)


def integrate(p: Polynomial, var: str, lower, upper) -> Polynomial:
    """Definite integral in ``var`` with polynomial (or constant) limits.

    The limits must not depend on ``var``; the result keeps the ring.
    """
    j = p._index(var)
    anti = {}
    for e, c in p.terms.items():
        k = e[j] + 1
        anti[e[:j] + (k,) + e[j + 1:]] = c / k
    F = Polynomial._raw(p.variables, anti)

    def at(limit):
        if not isinstance(limit, Polynomial):
            limit = Polynomial.constant(p.variables, limit)
        if limit.degree_in(var) > 0:
            raise ValueError(f"integration limit depends on {var!r}")
        mapping = {v: Polynomial.var(p.variables, v) for v in p.variables}
        mapping[var] = limit
        return F.substitute(mapping, p.variables)

    return at(upper) - at(lower)


def integrate_simplex(p: Polynomial, params: Sequence[str], drop: bool = True) -> Polynomial:
    """Integrate over ``1 >= t1 >= t2 >= ... >= tk >= 0``.

    ``params`` lists ``t1..tk`` in order.  With ``drop`` the parameters
    are removed from the ring of the result.
    """
    params = list(params)
    out = p
    for j in range(len(params) - 1, -1, -1):
        upper = 1 if j == 0 else Polynomial.var(p.variables, params[j - 1])
        out = integrate(out, params[j], 0, upper)
    if drop and params:
        keep = tuple(v for v in p.variables if v not in params)
        out = _drop_variables(out, keep)
    return out


def _drop_variables(p: Polynomial, keep: tuple[str, ...]) -> Polynomial:
    idx = [p.variables.index(v) for v in keep]
    dropped = [j for j in range(p.nvars) if j not in idx]
    out = {}
    for e, c in p.terms.items():
        if any(e[j] for j in dropped):
            raise ValueError("cannot drop a variable the polynomial depends on")
        out[tuple(e[j] for j in idx)] = c
    return Polynomial._raw(keep, out)


def drop_variables(p: Polynomial, keep: Sequence[str]) -> Polynomial:
    return _drop_variables(p, tuple(keep))


# --- multi-index helpers -----------------------------------------------------

def multi_indices(n: int, max_order: int) -> list[tuple[int, ...]]:
    """All exponent tuples of length ``n`` with total order <= ``max_order``, grlex."""
    def bounded(length, budget):
        if length == 0:
            yield ()
            return
        for first in range(budget + 1):
            for rest in bounded(length - 1, budget - first):
                yield (first,) + rest

    return sorted(bounded(n, max_order), key=grlex_key)


def multi_binomial(top: Sequence[int], bottom: Sequence[int]) -> int:
    from math import comb

    out = 1
    for a, b in zip(top, bottom):
        out *= comb(a, b)
    return out


def sub_indices(top: Sequence[int]) -> Iterable[tuple[int, ...]]:
    """All L with 0 <= L <= top componentwise."""
    return iproduct(*(range(a + 1) for a in top))


def multi_factorial(e: Sequence[int]) -> int:
    out = 1
    for k in e:
        out *= factorial(k)
    return out


def add_index(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def sub_index(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


def unit_index(n: int, i: int) -> tuple[int, ...]:
    return tuple(1 if j == i else 0 for j in range(n))


# --- truncated series ------------------------------------------------------------

class FormalSeries:
    """Coefficients ``c_0..c_N`` of a series in the deformation parameter.

    Coefficients can be any type supporting ``+``, ``-`` and scalar
    multiplication; products take the multiplication explicitly.
    """

    __slots__ = ("coeffs", "order_cap")

    def __init__(self, coeffs: Sequence, order_cap: int | None = None):
        coeffs = list(coeffs)
        if order_cap is None:
            order_cap = len(coeffs) - 1
        if order_cap < 0:
            raise ValueError("order_cap must be nonnegative")
        if len(coeffs) < order_cap + 1:
            raise ValueError(
                f"need {order_cap + 1} coefficients for order cap {order_cap}, got {len(coeffs)}"
            )
        self.coeffs = tuple(coeffs[: order_cap + 1])
        self.order_cap = order_cap

    @classmethod
    def constant(cls, c, zero, order_cap: int) -> "FormalSeries":
        return cls([c] + [zero] * order_cap, order_cap)

    def __getitem__(self, r: int):
        return self.coeffs[r]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def truncate(self, order_cap: int) -> "FormalSeries":
        if order_cap > self.order_cap:
            raise ValueError("cannot extend a truncated series")
        return FormalSeries(self.coeffs[: order_cap + 1], order_cap)

    def __add__(self, other: "FormalSeries"):
        cap = min(self.order_cap, other.order_cap)
        return FormalSeries([self[r] + other[r] for r in range(cap + 1)], cap)

    def __sub__(self, other: "FormalSeries"):
        cap = min(self.order_cap, other.order_cap)
        return FormalSeries([self[r] - other[r] for r in range(cap + 1)], cap)

    def __neg__(self):
        return FormalSeries([-c for c in self.coeffs], self.order_cap)

    def scale(self, s) -> "FormalSeries":
        return FormalSeries([c * s for c in self.coeffs], self.order_cap)

    def cauchy(self, other: "FormalSeries", mul: Callable) -> "FormalSeries":
        """Cauchy product with coefficient multiplication ``mul``."""
        cap = min(self.order_cap, other.order_cap)
        out = []
        for r in range(cap + 1):
            acc = None
            for s in range(r + 1):
                t = mul(self[s], other[r - s])
                acc = t if acc is None else acc + t
            out.append(acc)
        return FormalSeries(out, cap)

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return self.order_cap == other.order_cap and self.coeffs == other.coeffs

    def __repr__(self):
        body = ", ".join(str(c) for c in self.coeffs)
        return f"FormalSeries([{body}], order_cap={self.order_cap})"
