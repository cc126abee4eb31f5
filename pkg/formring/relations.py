"""Root model of the elementary generators and conjugation absorption.

Every generator is a product of root elements x_δ(p) for roots δ of type
C_n. Conjugating x_γ(P) by x_α(a) is rewritten with the commutator terms
of the relation table, and each rewrite is checked by exact evaluation
before it is used.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import ArgNotInLambda, CertificationFailure, InsufficientDivisibility, MembershipFailure, RuleGap
from .forms import FormSpec, group_inverse
from .log import get_logger
from .poly import VARS, X, Poly, PolyMat
from .words import (
    ElemGen,
    ElemWord,
    PolyElemWord,
    PolyGen,
    lift_gen,
    lift_word,
    poly_gen_matrix,
    poly_word_eval,
    to_elem_gen,
)

logger = get_logger(__name__)

Root = Tuple[int, ...]
RootItem = Tuple[Root, Poly]

_TABLE_PATH = Path(__file__).with_name("relations.json")


@dataclass(frozen=True)
class RelationTable:
    version: int
    commutator_terms: Tuple[Tuple[int, int], ...]
    first_k: int
    second_k: int
    structure_scalars: Tuple[str, ...]
    conjugate_argument: Tuple[bool, ...]

    @staticmethod
    def from_dict(data: Dict) -> "RelationTable":
        split = data.get("short_split", {})
        return RelationTable(
            version=int(data["version"]),
            commutator_terms=tuple(tuple(t) for t in data["commutator_terms"]),
            first_k=int(split.get("first_k", -1)),
            second_k=int(split.get("second_k", 1)),
            structure_scalars=tuple(data.get("structure_scalars", ["1", "-1"])),
            conjugate_argument=tuple(data.get("conjugate_argument", [False])),
        )

    @staticmethod
    def load(path: Optional[Union[str, Path]] = None) -> "RelationTable":
        with open(path or _TABLE_PATH, "r", encoding="utf-8") as f:
            return RelationTable.from_dict(json.load(f))

    def scalars(self, spec: FormSpec) -> List[int]:
        ctx = spec.ctx
        named = {"1": ctx.one, "lambda": ctx.lam, "lambdabar": ctx.lam_bar}
        out = []
        for s in self.structure_scalars:
            base = named[s.lstrip("-")]
            out.append(int(ctx.neg[base]) if s.startswith("-") else int(base))
        return out


_DEFAULT: Optional[RelationTable] = None


def default_table() -> RelationTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = RelationTable.load()
    return _DEFAULT


# --- roots ------------------------------------------------------------------------


def root_of(n: int, pairs: Sequence[Tuple[int, int]]) -> Root:
    """Root from (index, coefficient) pairs, 1-based indices."""
    out = [0] * n
    for i, c in pairs:
        out[i - 1] += c
    return tuple(out)


def is_root(v: Root) -> bool:
    nz = [c for c in v if c]
    if len(nz) == 1:
        return abs(nz[0]) == 2
    return len(nz) == 2 and all(abs(c) == 1 for c in nz)


def is_long(v: Root) -> bool:
    return sum(1 for c in v if c) == 1


def _support(root: Root) -> List[Tuple[int, int]]:
    return [(k + 1, c) for k, c in enumerate(root) if c]


def root_position(spec: FormSpec, root: Root) -> Tuple[int, int]:
    """Matrix position (0-based) that carries the parameter of x_root."""
    I, P = spec.row, spec.rho
    nz = _support(root)
    if len(nz) == 1:
        i, c = nz[0]
        return (I(i), P(i)) if c > 0 else (P(i), I(i))
    (i, ci), (j, cj) = nz
    if ci > 0 and cj < 0:
        return I(i), I(j)
    if ci < 0 and cj > 0:
        return I(j), I(i)
    if ci > 0:
        return I(i), P(j)
    return P(i), I(j)


def _hermitian_supported(spec: FormSpec) -> bool:
    return spec.kind == "quadratic" or (spec.r == 1 and all(a == 0 for a in spec.a))


def root_factors(spec: FormSpec, g: PolyGen) -> List[RootItem]:
    """Root elements whose ordered product is ``g``."""
    n, ctx = spec.n, spec.ctx
    if not _hermitian_supported(spec):
        raise RuleGap("root model needs r = 1 and a_1 = 0 for hermitian forms", rule="root_model")
    k, i, j = g.kind, g.i, g.j
    if k == "hm":
        # qe_1i(ζ)·ql_ii(f̄)
        return [(root_of(n, [(1, 1), (i, -1)]), g.zeta[0]), (root_of(n, [(i, -2)]), g.f.conj())]
    if k == "hrv":
        # qr_1i(ζ)·qr_ii(f)
        return [(root_of(n, [(1, 1), (i, 1)]), g.zeta[0]), (root_of(n, [(i, 2)]), g.f)]
    a = g.arg
    if k in ("qe", "he"):
        return [(root_of(n, [(i, 1), (j, -1)]), a)]
    if k in ("qr", "hr"):
        if i == j:
            return [(root_of(n, [(i, 2)]), a)]
        return [(root_of(n, [(i, 1), (j, 1)]), a if i < j else -(a.conj() * ctx.lam))]
    if i == j:
        return [(root_of(n, [(i, -2)]), a)]
    return [(root_of(n, [(i, -1), (j, -1)]), a if i < j else -(a.conj() * ctx.lam_bar))]


def realize_root(spec: FormSpec, root: Root, p: Poly) -> PolyGen:
    """The generator equal to x_root(p)."""
    if not is_root(root):
        raise RuleGap(f"{root} is not a root", rule="realize", root=root)
    ctx = spec.ctx
    nz = _support(root)
    herm = spec.kind == "hermitian"
    zero = Poly(ctx)
    if len(nz) == 1:
        i, c = nz[0]
        if c > 0:
            if not herm:
                return PolyGen("qr", i, i, arg=p)
            if i == 1:
                raise RuleGap("2e_1 has no generator for hermitian forms", rule="realize", root=root)
            if all(spec.in_lambda(v) for v in p.coefficients()):
                return PolyGen("hr", i, i, arg=p)
            return PolyGen("hrv", i, 0, zeta=(zero,), f=p)
        if not herm or all(spec.in_lambda_bar(v) for v in p.coefficients()):
            return PolyGen("hl" if herm else "ql", i, i, arg=p)
        if i == 1:
            raise RuleGap("-2e_1 with argument outside Lambda-bar has no generator", rule="realize", root=root)
        return PolyGen("hm", i, 0, zeta=(zero,), f=p.conj())
    (i, ci), (j, cj) = nz
    if ci * cj < 0:
        src, dst = (i, j) if ci > 0 else (j, i)
        if herm and src == 1:
            return PolyGen("hm", dst, 0, zeta=(p,), f=zero)
        return PolyGen("he" if herm else "qe", src, dst, arg=p)
    if ci > 0:
        if herm and i == 1:
            return PolyGen("hrv", j, 0, zeta=(p,), f=zero)
        return PolyGen("hr" if herm else "qr", i, j, arg=p)
    return PolyGen("hl" if herm else "ql", i, j, arg=p)


def root_matrix(spec: FormSpec, root: Root, p: Poly) -> PolyMat:
    try:
        return poly_gen_matrix(spec, realize_root(spec, root, p))
    except (ArgNotInLambda, MembershipFailure) as exc:
        raise RuleGap(f"root element {root} is not realizable: {exc}", rule="realize", root=root) from exc


def _product(spec: FormSpec, items: Sequence[RootItem]) -> PolyMat:
    out = PolyMat.identity(spec.ctx, spec.size)
    for root, p in items:
        if not p.is_zero():
            out = out * root_matrix(spec, root, p)
    return out


def _inverse_items(items: Sequence[RootItem]) -> List[RootItem]:
    return [(root, -p) for root, p in reversed(items)]


# --- absorption -------------------------------------------------------------------


def _absorb_adjacent(spec: FormSpec, table: RelationTable, alpha: Root, a: Poly, gamma: Root, P: Poly) -> List[RootItem]:
    """x_α(a)·x_γ(P)·x_α(−a) = (Π x_δ(p_δ))·x_γ(P) for α ≠ −γ."""
    h = root_matrix(spec, alpha, a)
    g = root_matrix(spec, gamma, P)
    C = h * g * root_matrix(spec, alpha, -a) * root_matrix(spec, gamma, -P)
    out: List[RootItem] = []
    for ci, cj in table.commutator_terms:
        delta = tuple(ci * x + cj * y for x, y in zip(alpha, gamma))
        if not is_root(delta):
            continue
        r, c = root_position(spec, delta)
        p = C.entry(r, c)
        if not p.is_zero():
            out.append((delta, p))
    if _product(spec, out) != C:
        raise RuleGap(f"commutator of roots {alpha} and {gamma} is not covered by the table", rule="commutator", alpha=alpha, gamma=gamma)
    return out + [(gamma, P)]


def _short_split(spec: FormSpec, table: RelationTable, gamma: Root, Y: Poly, v: Poly) -> Tuple[RootItem, RootItem]:
    """(β1, u), (β2, v) with [x_β1(u), x_β2(v)] = x_γ(v²·Y)-style target; checked exactly."""
    n = spec.n
    (a, sa), (b, sb) = _support(gamma)
    k = next(idx for idx in range(1, n + 1) if idx not in (a, b))
    beta1 = root_of(n, [(a, sa), (k, table.first_k)])
    beta2 = root_of(n, [(k, table.second_k), (b, sb)])
    target = root_matrix(spec, gamma, v * v * Y)
    if is_root(beta1) and is_root(beta2):
        for kappa in table.scalars(spec):
            for conj in table.conjugate_argument:
                u = v * (Y.conj() if conj else Y) * kappa
                A, B = root_matrix(spec, beta1, u), root_matrix(spec, beta2, v)
                Ainv, Binv = root_matrix(spec, beta1, -u), root_matrix(spec, beta2, -v)
                if A * B * Ainv * Binv == target:
                    return (beta1, u), (beta2, v)
    raise RuleGap(f"no commutator split of short root {gamma} in the table", rule="short_split", gamma=gamma)


def absorb_root(
    spec: FormSpec, table: RelationTable, alpha: Root, a: Poly, item: RootItem, level: int, var: int = X
) -> List[RootItem]:
    """Rewrite x_α(a)·x_γ(P)·x_α(−a) with every parameter divisible by var^level."""
    gamma, P = item
    if all(x == -y for x, y in zip(alpha, gamma)):
        if is_long(gamma):
            raise RuleGap(f"conjugating long root {gamma} by its opposite is not in the table", rule="opposite_long", gamma=gamma)
        if not P.divisible_by(var, 2 * level):
            raise InsufficientDivisibility(f"argument not divisible by {VARS[var]}^{2 * level}")
        vpow = Poly.var(spec.ctx, var, power=level)
        (b1, u), (b2, v) = _short_split(spec, table, gamma, P.divide(var, 2 * level), vpow)
        A = _absorb_adjacent(spec, table, alpha, a, b1, u)
        B = _absorb_adjacent(spec, table, alpha, a, b2, v)
        out = A + B + _inverse_items(A) + _inverse_items(B)
    else:
        out = _absorb_adjacent(spec, table, alpha, a, gamma, P)
    for root, p in out:
        if not p.divisible_by(var, level):
            raise CertificationFailure(f"absorbed parameter for {root} is not divisible by {VARS[var]}^{level}")
    return out


def count_root_factors(spec: FormSpec, word: PolyElemWord) -> int:
    return sum(len(root_factors(spec, g)) for g in word.gens)


def conjugate_absorb(
    spec: FormSpec,
    conj: Union[ElemWord, PolyElemWord],
    target: PolyGen,
    m: int,
    var: int = X,
    table: Optional[RelationTable] = None,
) -> PolyElemWord:
    """Word for eval(conj)·target·eval(conj)^{-1} with all arguments divisible by var^m.

    ``target`` must be divisible by var^(2^c·m), c the number of root
    factors of ``conj``.
    Hermitian specs are covered only for r = 1 with a_1 = 0, where every
    generator is a product of root elements; other hermitian specs raise
    RuleGap from the root model.
    """
    table = table or default_table()
    if isinstance(conj, ElemWord):
        conj = lift_word(conj)
    c = count_root_factors(spec, conj) if conj.gens else 0
    level = (2**c) * m
    items = root_factors(spec, target) if conj.gens else None
    values = [p for _, p in items] if items is not None else target.values()
    if not all(p.divisible_by(var, level) for p in values):
        raise InsufficientDivisibility(f"target is not divisible by {VARS[var]}^{level}", required=level)
    if not conj.gens:
        return PolyElemWord(spec, (target,))
    for g in reversed(conj.gens):
        for alpha, a in reversed(root_factors(spec, g)):
            if a.is_zero():
                continue
            level //= 2
            new_items: List[RootItem] = []
            for item in items:
                if item[1].is_zero():
                    continue
                new_items += absorb_root(spec, table, alpha, a, item, level, var)
            items = new_items
    word = PolyElemWord(spec, tuple(realize_root(spec, root, p) for root, p in items if not p.is_zero()))
    expected = poly_word_eval(conj) * poly_gen_matrix(spec, target) * group_inverse(spec, poly_word_eval(conj))
    got = poly_word_eval(word)
    if got != expected:
        raise CertificationFailure("absorbed word does not evaluate to the conjugate", entry=got.first_difference(expected))
    for g in word.gens:
        if not all(v.divisible_by(var, m) for v in g.values()):
            raise CertificationFailure(f"absorbed generator {g.kind}_{g.i},{g.j} is not divisible by {VARS[var]}^{m}")
    logger.debug("absorbed conjugation by %d root factors into %d generators", c, len(word))
    return word


def perfectness_witness(spec: FormSpec, g: ElemGen, table: Optional[RelationTable] = None) -> Optional[ElemWord]:
    """A commutator word [x_β1(u), x_β2(1)] equal to a short-root generator, or None."""
    table = table or default_table()
    pg = lift_gen(spec, g)
    try:
        factors = root_factors(spec, pg)
    except RuleGap:
        return None
    factors = [(r, p) for r, p in factors if not p.is_zero()]
    if len(factors) != 1 or is_long(factors[0][0]):
        return None
    gamma, P = factors[0]
    one = Poly.const(spec.ctx, spec.ctx.one)
    try:
        (b1, u), (b2, v) = _short_split(spec, table, gamma, P, one)
    except RuleGap:
        return None
    items = [(b1, u), (b2, v), (b1, -u), (b2, -v)]
    word = PolyElemWord(spec, tuple(realize_root(spec, r, p) for r, p in items))
    if poly_word_eval(word) != poly_gen_matrix(spec, pg):
        raise CertificationFailure("perfectness witness does not evaluate to the generator")
    return ElemWord(spec, tuple(to_elem_gen(x) for x in word.gens))
