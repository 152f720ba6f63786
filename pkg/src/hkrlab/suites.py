"""Verification suites behind the CLI subcommands.

Each suite takes plain parameters and a seed and returns a ``Result`` whose
checks are dicts {name, status, witness?}.  Every sampled check draws from
its own generator derived from the seed and the check name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .algebra import Polynomial, Scalar
from .cohomology import Truncation, koszul_hom_differential, truncated_cohomology, _basis, _element
from .deformation import (
    BimoduleStructure,
    QModifier,
    SPBracket,
    build_bimodule_from_sp,
    check_bimodule,
    check_qmodifier,
    check_sp_properties,
    conjugate_bimodule,
    coordinate_lifts,
    curvature,
    curvature_cochain,
    desk_spaces,
    lift_star_product,
    modify_bimodule,
    obstruction_E,
    obstruction_R,
    operator_witness,
    pulled_back_bracket,
    sp_bracket_of,
    sp_from_lifts,
    sp_residual_cochains,
    sp_shift,
    subalgebra_defect,
)
from .diffop import DIFFOPS, DiffOp, MultiDiffOp, Space
from .hochschild import hochschild_differential, is_cocycle
from .koszul import (
    BarChain,
    KoszulChain,
    augmentation,
    bar_differential,
    bar_eta,
    bar_homotopy,
    bar_variables,
    chain_map_F,
    chain_map_G,
    g_tilde,
    increasing_tuples,
    koszul_differential_chain,
    koszul_eta_eps,
    koszul_homotopy,
    theta,
    vw_variables,
)
from .sampling import derive_rng, random_diffop, random_polynomial, random_scalar
from .star import (
    StarProduct,
    associativity_defect,
    moyal,
    operator_space,
    parse_matrix,
    poisson_cochain,
    poisson_matrix,
)

PASS = "pass"
FAIL = "fail"
DEFAULT_MATRIX = "0 1; 0 0"


@dataclass
class Result:
    checks: list[dict] = field(default_factory=list)
    tables: dict = field(default_factory=dict)

    def add(self, name: str, ok: bool, witness=None):
        entry = {"name": name, "status": PASS if ok else FAIL}
        if witness is not None:
            entry["witness"] = witness
        self.checks.append(entry)

    def first_failure(self, name: str, samples: int, probe: Callable):
        """Run ``probe(i)`` for i < samples; a non-None return is a witness and stops the loop."""
        for i in range(samples):
            w = probe(i)
            if w is not None:
                self.add(name, False, w)
                return
        self.add(name, True)

    @property
    def ok(self) -> bool:
        return all(c["status"] == PASS for c in self.checks)


def _desk_star(A, order: int) -> tuple[StarProduct, object, object, object]:
    M, P, pr = desk_spaces()
    matrix = parse_matrix(A) if isinstance(A, str) else A
    if len(matrix) != 2:
        raise ValueError("deformation suites run on R^2; --A must be a 2x2 matrix")
    return moyal(M, matrix, order), M, P, pr


def _connection_bracket(S: StarProduct, pr, c) -> SPBracket:
    """sP-bracket of the flat connection lifting d_1 to d_{y1} + c y3 d_{y3}."""
    P = pr.target
    y3 = P.var(2)
    twist = [DiffOp(P, {(0, 0, 1): y3.scale(c)}), None] if c else None
    return sp_from_lifts(poisson_cochain(S), pr, coordinate_lifts(pr, twist))


def _twisted_bracket(flat: SPBracket) -> SPBracket:
    """Negative control: adds (d_1 a) y1 d_{y3}, which breaks flatness."""
    pr = flat.projection
    P = pr.target
    extra = MultiDiffOp(pr, 1, DIFFOPS, {((1, 0),): DiffOp(P, {(0, 0, 1): P.var(0)})})
    return SPBracket(pr, flat.cochain + extra, flat.poisson)


def _cochain_witness(d):
    return None if d.is_zero() else operator_witness(d)


# --- assoc ---------------------------------------------------------------------------------

def assoc_suite(A: str = DEFAULT_MATRIX, order: int = 3, samples: int = 50, seed: int = 0) -> Result:
    res = Result()
    matrix = parse_matrix(A)
    M = Space.standard("x", len(matrix))
    S = moyal(M, matrix, order)
    rng = derive_rng(seed, "assoc.associativity")
    triples = [[random_polynomial(rng, M.names, 3) for _ in range(3)] for _ in range(samples)]

    def assoc_probe(i):
        a, b, c = triples[i]
        for r in range(order + 1):
            d = associativity_defect(S, a, b, c, r)
            if d:
                return {"a": str(a), "b": str(b), "c": str(c), "order": r, "defect": str(d)}
        return None

    res.first_failure("associativity", samples, assoc_probe)

    def unit_probe(i):
        bad = S.unitality_defect(triples[i][0])
        return {"f": str(triples[i][0]), "orders": bad} if bad else None

    res.first_failure("unitality", samples, unit_probe)
    res.add("natural", S.is_natural())
    pc = poisson_cochain(S)
    rng = derive_rng(seed, "assoc.poisson")

    def biderivation_probe(i):
        a, b, c = (random_polynomial(rng, M.names, 3) for _ in range(3))
        d = pc.apply([a * b, c]) - a * pc.apply([b, c]) - b * pc.apply([a, c])
        s = pc.apply([a, b]) + pc.apply([b, a])
        if d or s:
            return {"a": str(a), "b": str(b), "c": str(c), "leibniz": str(d), "symmetry": str(s)}
        return None

    res.first_failure("poisson_antisymmetric_biderivation", samples, biderivation_probe)
    res.tables["poisson_matrix"] = [[str(x) for x in row] for row in poisson_matrix(S)]
    res.tables["cochains"] = {str(r): S.C(r).to_json() for r in range(order + 1)}
    return res


# --- obstruction ---------------------------------------------------------------------------

def _random_matrix(rng) -> list[list[Scalar]]:
    """Random 2x2 matrix whose antisymmetric part, hence the Poisson structure, is nondegenerate."""
    a, d = (random_scalar(rng, 2) if rng.integers(2) else Scalar(0) for _ in range(2))
    b = random_scalar(rng, 2)
    return [[a, b], [b - random_scalar(rng, 2), d]]


def obstruction_suite(order: int = 3, samples: int = 20, seed: int = 0) -> Result:
    res = Result()
    rng = derive_rng(seed, "obstruction.configurations")
    M, P, pr = desk_spaces()
    bad_R = bad_E = None
    bad_Rd = bad_Ed = None
    for cfg in range(samples):
        S = moyal(M, _random_matrix(rng), order)
        c = random_scalar(rng, 2)
        B = build_bimodule_from_sp(S, _connection_bracket(S, pr, c), verify=False)
        T = [DiffOp.identity(P)] + [random_diffop(rng, P, 2) for _ in range(order)]
        Bt = conjugate_bimodule(B, T)
        for r in range(order):
            R = obstruction_R(B.left, r)
            if bad_R is None and not hochschild_differential(R).is_zero():
                bad_R = {"configuration": cfg, "r": r, "witness": operator_witness(hochschild_differential(R))}
            if bad_Rd is None and R != hochschild_differential(B.left.L(r + 1)):
                bad_Rd = {"configuration": cfg, "r": r}
            E = obstruction_E(B.left, Bt.left, T[: r + 1], r)
            if bad_E is None and not hochschild_differential(E).is_zero():
                bad_E = {"configuration": cfg, "r": r, "witness": operator_witness(hochschild_differential(E))}
            if bad_Ed is None and E != hochschild_differential(MultiDiffOp.constant(pr, T[r + 1])):
                bad_Ed = {"configuration": cfg, "r": r}
    res.add("R_closed", bad_R is None, bad_R)
    res.add("R_equals_delta_L_next", bad_Rd is None, bad_Rd)
    res.add("E_closed", bad_E is None, bad_E)
    res.add("E_equals_delta_T_next", bad_Ed is None, bad_Ed)
    res.tables["configurations"] = samples
    return res


# --- sp-check ------------------------------------------------------------------------------

def _sp_checks(res: Result, label: str, br: SPBracket, seed: int, samples: int):
    residuals = sp_residual_cochains(br)
    for name in ("i", "ii", "iii"):
        res.add(f"{label}.property_{name}", residuals[name].is_zero(), _cochain_witness(residuals[name]))
    sampled = check_sp_properties(br, derive_rng(seed, f"sp.{label}"), samples)
    for name, out in sampled.items():
        res.add(f"{label}.sampled_{name}", out["ok"], out["witness"])
    res.add(f"{label}.curvature_zero", curvature_cochain(br).is_zero(), _cochain_witness(curvature_cochain(br)))


def sp_check_suite(A: str = DEFAULT_MATRIX, order: int = 1, samples: int = 20, seed: int = 0) -> Result:
    res = Result()
    S, M, P, pr = _desk_star(A, max(order, 1))
    c = random_scalar(derive_rng(seed, "sp.connection"), 3)
    flat = _connection_bracket(S, pr, 0)
    conn = _connection_bracket(S, pr, c)
    _sp_checks(res, "flat", flat, seed, samples)
    _sp_checks(res, "connection", conn, seed, samples)
    B = build_bimodule_from_sp(S.truncate(1), conn, verify=False)
    _sp_checks(res, "from_bimodule", sp_bracket_of(B), seed, samples)
    # the twisted control must be caught by iii) and by a curvature witness
    tw = _twisted_bracket(flat)
    residuals = sp_residual_cochains(tw)
    res.add("twisted.i_ii_hold", residuals["i"].is_zero() and residuals["ii"].is_zero())
    rng = derive_rng(seed, "sp.twisted")
    witness = None
    for _ in range(samples):
        a, b = (random_polynomial(rng, M.names, 3) for _ in range(2))
        f = random_polynomial(rng, P.names, 3)
        val = curvature(tw, a, b, f)
        if val:
            witness = {"a": str(a), "b": str(b), "f": str(f), "curvature": str(val)}
            break
    res.add("twisted.curvature_detected", witness is not None, witness)
    res.tables["connection_constant"] = str(c)
    res.tables["brackets"] = {"flat": flat.cochain.to_json(), "connection": conn.cochain.to_json()}
    return res


# --- bimodule ------------------------------------------------------------------------------

def bimodule_suite(A: str = DEFAULT_MATRIX, order: int = 3, samples: int = 20, seed: int = 0) -> Result:
    res = Result()
    S, M, P, pr = _desk_star(A, order)
    rng = derive_rng(seed, "bimodule.setup")
    c = random_scalar(rng, 3)
    br = _connection_bracket(S, pr, c)
    B = build_bimodule_from_sp(S, br, verify=False)
    fails = check_bimodule(B)
    res.add("built_bimodule", not fails, fails[0] if fails else None)
    res.add("fiber_preserving", B.left.is_fiber_preserving() and B.right.is_fiber_preserving())
    res.add("recovers_sp_bracket", sp_bracket_of(B, verify=False).cochain == br.cochain)
    T = [DiffOp.identity(P)] + [random_diffop(rng, P, 2) for _ in range(order)]
    Bt = conjugate_bimodule(B, T)
    fails = check_bimodule(Bt)
    res.add("conjugated_bimodule", not fails, fails[0] if fails else None)
    res.add("conjugation_keeps_sp_bracket", sp_bracket_of(Bt, verify=False).cochain == br.cochain)
    OS = operator_space(M)
    y3 = P.var(2)
    Q = QModifier(((DiffOp.partial(OS, 0), DiffOp(P, {(0, 0, 1): y3})),))
    problems = check_qmodifier(Q, B)
    res.add("modifier_admissible", not problems, problems[0] if problems else None)
    Bm = modify_bimodule(B, Q)
    fails = check_bimodule(Bm)
    res.add("modified_bimodule", not fails, fails[0] if fails else None)
    shift = sp_bracket_of(Bm, verify=False).cochain - br.cochain
    expected = sp_shift(Q, pr)
    res.add("modification_shift", shift == expected, _cochain_witness(shift - expected))
    res.add("modification_keeps_right_module", Bm.right == B.right)
    res.tables["sp_bracket"] = br.cochain.to_json()
    res.tables["left"] = {str(r): B.left.L(r).to_json() for r in range(order + 1)}
    res.tables["right"] = {str(r): B.right.L(r).to_json() for r in range(order + 1)}
    return res


# --- subalgebra ----------------------------------------------------------------------------

def subalgebra_suite(A: str = DEFAULT_MATRIX, order: int = 3, samples: int = 50, seed: int = 0) -> Result:
    res = Result()
    S, M, P, pr = _desk_star(A, order)
    c = random_scalar(derive_rng(seed, "subalgebra.connection"), 3)
    br = _connection_bracket(S, pr, c)
    SP = lift_star_product(S, br)
    rng = derive_rng(seed, "subalgebra.pairs")

    def sub_probe(i):
        a, b = (random_polynomial(rng, M.names, 3) for _ in range(2))
        bad = subalgebra_defect(SP, S, pr, a, b)
        return {"a": str(a), "b": str(b), "orders": bad} if bad else None

    res.first_failure("pullback_is_subalgebra", samples, sub_probe)
    rng = derive_rng(seed, "subalgebra.triples")

    def assoc_probe(i):
        f, g, h = (random_polynomial(rng, P.names, 2) for _ in range(3))
        for r in range(order + 1):
            d = associativity_defect(SP, f, g, h, r)
            if d:
                return {"f": str(f), "g": str(g), "h": str(h), "order": r, "defect": str(d)}
        return None

    res.first_failure("lift_associative", samples, assoc_probe)
    res.add("lift_natural", SP.is_natural())
    pb = pulled_back_bracket(SP, pr)
    residuals = sp_residual_cochains(pb)
    for name in ("i", "ii", "iii"):
        res.add(f"pulled_back_bracket_{name}", residuals[name].is_zero(), _cochain_witness(residuals[name]))
    res.tables["connection_constant"] = str(c)
    return res


# --- chainmaps -----------------------------------------------------------------------------

def _random_bar(rng, m: int, k: int) -> BarChain:
    """An elementary tensor a_0 (x) a_1 (x) .. (x) a_{k+1} plus a small dense term."""
    names = Space.standard("x", m).names
    out = BarChain(m, k, random_polynomial(rng, bar_variables(m, k), 2, 2))
    factors = [random_polynomial(rng, names, 2, 2) for _ in range(k + 2)]
    left = factors[0] if rng.integers(2) else None
    right = factors[-1] if rng.integers(2) else None
    if k == 0 and left is None and right is None:
        left = factors[0]
    return out + BarChain.elementary(factors[1:-1], left, right)


def _random_koszul(rng, m: int, k: int) -> KoszulChain:
    tuples = increasing_tuples(m, k)
    comps = {}
    for _ in range(int(rng.integers(1, 3))):
        I = tuples[int(rng.integers(len(tuples)))]
        comps[I] = random_polynomial(rng, vw_variables(m), 2, 3)
    return KoszulChain(m, k, comps)


def _bar_checks(chi: BarChain) -> dict:
    """Identity name -> residual (zero when it holds)."""
    m, k = chi.m, chi.degree
    out = {}
    if k >= 2:
        out["bar_d_squared"] = bar_differential(bar_differential(chi)).poly
    h = bar_homotopy(chi)
    lhs = bar_differential(h)
    if k >= 1:
        lhs = lhs + bar_homotopy(bar_differential(chi))
    else:
        lhs = lhs + bar_eta(augmentation(chi), m)
    out["bar_homotopy"] = (lhs - chi).poly
    G = chain_map_G(chi)
    if k >= 1:
        out["G_chain_map"] = _kdiff(koszul_differential_chain(G) if G.degree else G, chain_map_G(bar_differential(chi)))
    Th = theta(chi)
    out["theta_equals_FG"] = (Th - chain_map_F(G)).poly
    out["theta_idempotent"] = (theta(Th) - Th).poly
    return out


def _kdiff(a: KoszulChain, b: KoszulChain):
    d = a - b
    return None if d.is_zero() else {I: str(p) for I, p in d.comps.items()}


def _koszul_checks(om: KoszulChain) -> dict:
    m, k = om.m, om.degree
    out = {}
    if k >= 2:
        out["koszul_d_squared"] = _kdiff(koszul_differential_chain(koszul_differential_chain(om)), KoszulChain(m, k - 2))
    lhs = koszul_differential_chain(koszul_homotopy(om))
    if k >= 1:
        lhs = lhs + koszul_homotopy(koszul_differential_chain(om))
    else:
        lhs = lhs + koszul_eta_eps(om)
    out["koszul_homotopy"] = _kdiff(lhs, om)
    F = chain_map_F(om)
    if k >= 1:
        out["F_chain_map"] = (bar_differential(F) - chain_map_F(koszul_differential_chain(om))).poly
    out["G_after_F"] = _kdiff(chain_map_G(F), om)
    return out


CHAIN_IDENTITIES = (
    "bar_d_squared", "bar_homotopy", "G_chain_map", "theta_equals_FG", "theta_idempotent",
    "koszul_d_squared", "koszul_homotopy", "F_chain_map", "G_after_F",
)


def chainmaps_suite(m: int = 2, degree: int = 3, samples: int = 50, seed: int = 0) -> Result:
    res = Result()
    counts = {}
    for k in range(degree + 1):
        found: dict = {}
        rng_bar = derive_rng(seed, f"chainmaps.bar.{m}.{k}")
        rng_kos = derive_rng(seed, f"chainmaps.koszul.{m}.{k}")
        for s in range(samples):
            chi = _random_bar(rng_bar, m, k)
            for name, val in _bar_checks(chi).items():
                counts[(name, k)] = counts.get((name, k), 0) + 1
                if val and name not in found:
                    found[name] = {"sample": s, "chain": str(chi.poly), "residual": str(val)}
            if k <= m:
                om = _random_koszul(rng_kos, m, k)
                for name, val in _koszul_checks(om).items():
                    counts[(name, k)] = counts.get((name, k), 0) + 1
                    if val and name not in found:
                        found[name] = {"sample": s, "chain": {str(I): str(p) for I, p in om.comps.items()},
                                       "residual": str(val)}
        for name in CHAIN_IDENTITIES:
            if (name, k) in counts:
                res.add(f"degree_{k}.{name}", name not in found, found.get(name))
    res.tables["samples_per_identity"] = {f"{n}@{k}": c for (n, k), c in sorted(counts.items())}
    return res


# --- hkr -----------------------------------------------------------------------------------

def hkr_suite(m: int = 2, k: int = 1, n: int = 2, d: int = 1, o: int = 1, module: str = "diffop",
              max_reps: int = 25) -> Result:
    res = Result()
    t = Truncation(m, k, n, d, o, module)
    report = truncated_cohomology(t)
    for row in report.table():
        res.add(f"H^{row['degree']}", row["match"],
                None if row["match"] else {"direct": row["direct"], "closed_form": row["closed_form"]})
    pr = t.projection()
    bad = None
    for key, by_degree in sorted(_basis(t).items()):
        for j, els in sorted(by_degree.items()):
            for b in els:
                dd = koszul_hom_differential(koszul_hom_differential(_element(t, pr, *b)))
                if not dd.is_zero() and bad is None:
                    bad = {"basis": str(_element(t, pr, *b))}
    res.add("differential_squares_to_zero", bad is None, bad)
    bad = None
    for j, reps in sorted(report.representatives.items()):
        for rep in reps[:max_reps]:
            ok, w = is_cocycle(g_tilde(rep))
            if not ok and bad is None:
                bad = {"representative": str(rep), "witness": w}
    res.add("representatives_embed_as_cocycles", bad is None, bad)
    res.tables["cohomology"] = report.table()
    res.tables["cochain_dims"] = report.cochain_dims
    res.tables["blocks"] = report.blocks
    res.tables["representatives"] = {
        str(j): [str(r) for r in reps[:max_reps]] for j, reps in sorted(report.representatives.items())
    }
    return res
