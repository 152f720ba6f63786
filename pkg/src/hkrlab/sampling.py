"""Seeded random polynomials and operators for the property checks.

Every check derives its own generator from a root seed and a label, so a
report is reproducible no matter which checks run or in what order.
"""

from __future__ import annotations

import zlib
from typing import Sequence

import numpy as np

from .algebra import Polynomial, Scalar, multi_indices
from .diffop import DIFFOPS, FUNCTIONS, DiffOp, MultiDiffOp, Projection, Space


def derive_rng(seed: int, label: str) -> np.random.Generator:
    """Independent generator for the check named ``label``."""
    tag = zlib.crc32(label.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag]))


def random_scalar(rng: np.random.Generator, height: int = 3, complex_part: bool = False) -> Scalar:
    re = int(rng.integers(-height, height + 1))
    im = int(rng.integers(-height, height + 1)) if complex_part else 0
    if not re and not im:
        re = 1
    den = int(rng.integers(1, 3))
    return Scalar(re, im) / den


def random_polynomial(
    rng: np.random.Generator,
    variables: Sequence[str],
    max_degree: int = 3,
    max_terms: int = 4,
    height: int = 3,
    complex_part: bool = False,
) -> Polynomial:
    monos = multi_indices(len(variables), max_degree)
    count = int(rng.integers(1, max_terms + 1))
    picks = rng.choice(len(monos), size=min(count, len(monos)), replace=False)
    terms = {monos[int(j)]: random_scalar(rng, height, complex_part) for j in sorted(picks)}
    return Polynomial(variables, terms)


def random_diffop(
    rng: np.random.Generator,
    space: Space,
    max_order: int = 2,
    max_terms: int = 3,
    coeff_degree: int = 2,
    vertical: bool = False,
    constant_term: bool = True,
) -> DiffOp:
    syms = multi_indices(space.dim, max_order)
    if vertical:
        k = space.base_rank
        syms = [J for J in syms if not any(J[:k])]
    if not constant_term:
        syms = [J for J in syms if any(J)]
    count = int(rng.integers(1, max_terms + 1))
    picks = rng.choice(len(syms), size=min(count, len(syms)), replace=False)
    terms = {
        syms[int(j)]: random_polynomial(rng, space.names, coeff_degree, 2)
        for j in sorted(picks)
    }
    return DiffOp(space, terms)


def random_multidiffop(
    rng: np.random.Generator,
    pr: Projection,
    arity: int,
    kind: str = FUNCTIONS,
    max_order: int = 2,
    max_terms: int = 3,
    coeff_degree: int = 2,
    vertical: bool = False,
) -> MultiDiffOp:
    idx = multi_indices(pr.source.dim, max_order)
    count = int(rng.integers(1, max_terms + 1))
    terms = {}
    for _ in range(count):
        key = tuple(idx[int(rng.integers(len(idx)))] for _ in range(arity))
        if kind == FUNCTIONS:
            val = random_polynomial(rng, pr.target.names, coeff_degree, 2)
        else:
            val = random_diffop(rng, pr.target, max_order=2, coeff_degree=coeff_degree, vertical=vertical)
        terms[key] = val
    return MultiDiffOp(pr, arity, kind, terms)


def random_args(rng: np.random.Generator, space: Space, count: int, max_degree: int = 3):
    return [random_polynomial(rng, space.names, max_degree) for _ in range(count)]


__all__ = [
    "DIFFOPS",
    "FUNCTIONS",
    "derive_rng",
    "random_args",
    "random_diffop",
    "random_multidiffop",
    "random_polynomial",
    "random_scalar",
]
