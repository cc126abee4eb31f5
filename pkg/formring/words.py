"""Elementary generators, words over R and R[X], and the key decompositions.

A word is a certificate: its meaning is the ordered product of generator
matrices, and every construction here re-evaluates what it emits.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import linalg
from .errors import (
    ArgNotInLambda,
    CertificationFailure,
    ClosingArgNotInLambda,
    IndexOutOfRange,
    MembershipFailure,
    NotCongruentToIdentity,
    NotOrthogonal,
)
from .forms import FormSpec, is_member, transvection
from .log import get_logger
from .poly import X, Poly, PolyMat

logger = get_logger(__name__)

QUADRATIC_KINDS = ("qe", "qr", "ql")
HERMITIAN_KINDS = ("he", "hr", "hl", "hm", "hrv")
VECTOR_KINDS = ("hm", "hrv")
KINDS = QUADRATIC_KINDS + HERMITIAN_KINDS


@dataclass(frozen=True)
class ElemGen:
    """One elementary generator; ``zeta``/``f`` are used by hm and hrv only."""

    kind: str
    i: int
    j: int = 0
    arg: int = 0
    zeta: Tuple[int, ...] = ()
    f: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "arg", int(self.arg))
        object.__setattr__(self, "zeta", tuple(int(z) for z in self.zeta))
        object.__setattr__(self, "f", int(self.f))

    @property
    def is_vector(self) -> bool:
        return self.kind in VECTOR_KINDS


@dataclass(frozen=True)
class PolyGen:
    kind: str
    i: int
    j: int = 0
    arg: Optional[Poly] = None
    zeta: Tuple[Poly, ...] = ()
    f: Optional[Poly] = None

    @property
    def is_vector(self) -> bool:
        return self.kind in VECTOR_KINDS

    def values(self) -> List[Poly]:
        return list(self.zeta) + [self.f] if self.is_vector else [self.arg]


Gen = Union[ElemGen, PolyGen]


@dataclass(frozen=True)
class ElemWord:
    spec: FormSpec
    gens: Tuple[ElemGen, ...] = ()

    def __len__(self) -> int:
        return len(self.gens)

    def __iter__(self) -> Iterator[ElemGen]:
        return iter(self.gens)

    def __add__(self, other: "ElemWord") -> "ElemWord":
        return ElemWord(self.spec, self.gens + tuple(other.gens))


@dataclass(frozen=True)
class PolyElemWord:
    spec: FormSpec
    gens: Tuple[PolyGen, ...] = ()

    def __len__(self) -> int:
        return len(self.gens)

    def __iter__(self) -> Iterator[PolyGen]:
        return iter(self.gens)

    def __add__(self, other: "PolyElemWord") -> "PolyElemWord":
        return PolyElemWord(self.spec, self.gens + tuple(other.gens))

    def is_constant(self) -> bool:
        return all(v.is_constant() for g in self.gens for v in g.values())

    def as_elem_word(self) -> ElemWord:
        return ElemWord(self.spec, tuple(to_elem_gen(g) for g in self.gens))


# --- scalar / polynomial arithmetic adapters ------------------------------------


class _ScalarOps:
    def __init__(self, spec: FormSpec) -> None:
        self.ctx = spec.ctx
        self.zero = 0

    def const(self, c: int) -> int:
        return int(c)

    def add(self, x, y):
        return int(self.ctx.add[x, y])

    def neg(self, x):
        return int(self.ctx.neg[x])

    def mul(self, x, y):
        return int(self.ctx.mul[x, y])

    def conj(self, x):
        return int(self.ctx.bar[x])

    def is_zero(self, x) -> bool:
        return int(x) == 0

    def members(self, x) -> List[int]:
        return [int(x)]


class _PolyOps:
    def __init__(self, spec: FormSpec) -> None:
        self.ctx = spec.ctx
        self.zero = Poly(spec.ctx)

    def const(self, c: int) -> Poly:
        return Poly.const(self.ctx, c)

    def add(self, x, y):
        return x + y

    def neg(self, x):
        return -x

    def mul(self, x, y):
        return x * y

    def conj(self, x):
        return x.conj()

    def is_zero(self, x) -> bool:
        return x.is_zero()

    def members(self, x) -> List[int]:
        return x.coefficients()


def _ops(spec: FormSpec, g: Gen):
    return _PolyOps(spec) if isinstance(g, PolyGen) else _ScalarOps(spec)


def _sum(ops, values):
    acc = ops.zero
    for v in values:
        acc = ops.add(acc, v)
    return acc


def _zeta_target(spec: FormSpec, ops, zeta) -> object:
    """Σ ζ̄_k a_k ζ_k, the value f + λf̄ must take."""
    return _sum(ops, (ops.mul(ops.mul(ops.conj(z), ops.const(a)), z) for z, a in zip(zeta, spec.a)))


def _check_indices(spec: FormSpec, g: Gen) -> None:
    n, r, k = spec.n, spec.r, g.kind
    allowed = QUADRATIC_KINDS if spec.kind == "quadratic" else HERMITIAN_KINDS
    if k not in allowed:
        raise IndexOutOfRange(f"generator kind {k!r} is not available for {spec.kind} forms", kind=k)

    def bad(why: str):
        raise IndexOutOfRange(f"{k}_{g.i}{g.j if not g.is_vector else ''}: {why}", kind=k, i=g.i, j=g.j)

    if g.is_vector:
        if not r + 1 <= g.i <= n:
            bad(f"index must lie in {r + 1}..{n}")
        if len(g.zeta) != r:
            bad(f"expected {r} zeta entries, got {len(g.zeta)}")
        return
    lo_i = r + 1 if k in ("he", "hr") else 1
    lo_j = r + 1 if k == "hr" else 1
    if not (lo_i <= g.i <= n and lo_j <= g.j <= n):
        bad(f"indices must lie in {lo_i}..{n} x {lo_j}..{n}")
    if k in ("qe", "he") and g.i == g.j:
        bad("indices must differ")


def validate_gen(spec: FormSpec, g: Gen) -> None:
    _check_indices(spec, g)
    ops = _ops(spec, g)
    ctx = spec.ctx
    if g.kind in ("qr", "hr", "ql", "hl") and g.i == g.j:
        upper = g.kind in ("qr", "hr")
        pool = spec.Lambda.elements if upper else spec.Lambda_bar
        bad = [c for c in ops.members(g.arg) if c not in pool]
        if bad:
            name = "Lambda" if upper else "Lambda-bar"
            raise ArgNotInLambda(
                f"{g.kind}_{g.i}{g.i}: argument {ctx.label(bad[0])} is not in {name}", kind=g.kind, arg=ctx.label(bad[0])
            )
    if g.is_vector:
        lhs = ops.add(g.f, ops.mul(ops.const(ctx.lam), ops.conj(g.f)))
        if lhs != _zeta_target(spec, ops, g.zeta):
            raise MembershipFailure(f"{g.kind}_{g.i}: f + lambda f̄ does not match the zeta constraint", block="zeta_f")


def _entries(spec: FormSpec, g: Gen) -> List[Tuple[Tuple[int, int], object]]:
    """Nonzero positions of σ − I for a generator (0-based)."""
    ops = _ops(spec, g)
    ctx = spec.ctx
    I, P = spec.row, spec.rho
    lam, lb = ops.const(ctx.lam), ops.const(ctx.lam_bar)
    i, j, k = g.i, g.j, g.kind
    if k in ("qe", "he"):
        a = g.arg
        return [((I(i), I(j)), a), ((P(j), P(i)), ops.neg(ops.conj(a)))]
    if k in ("qr", "hr"):
        a = g.arg
        if i == j:
            return [((I(i), P(i)), a)]
        return [((I(i), P(j)), a), ((I(j), P(i)), ops.neg(ops.mul(lam, ops.conj(a))))]
    if k in ("ql", "hl"):
        a = g.arg
        if i == j:
            return [((P(i), I(i)), a)]
        return [((P(i), I(j)), a), ((P(j), I(i)), ops.neg(ops.mul(lb, ops.conj(a))))]
    out = []
    for idx, (z, ak) in enumerate(zip(g.zeta, spec.a), start=1):
        abar = ops.const(ctx.bar[ak])
        if k == "hm":
            out += [((I(idx), I(i)), z), ((P(idx), I(i)), ops.neg(ops.mul(abar, z))), ((P(i), P(idx)), ops.neg(ops.conj(z)))]
        else:
            out += [
                ((I(idx), P(i)), z),
                ((I(i), P(idx)), ops.neg(ops.mul(lam, ops.conj(z)))),
                ((P(idx), P(i)), ops.neg(ops.mul(abar, z))),
            ]
    out.append(((P(i), I(i)), ops.conj(g.f)) if k == "hm" else ((I(i), P(i)), g.f))
    return out


@lru_cache(maxsize=65536)
def _gen_matrix_cached(spec: FormSpec, g: ElemGen) -> np.ndarray:
    validate_gen(spec, g)
    ctx = spec.ctx
    out = linalg.identity(ctx, spec.size)
    for (r, c), v in _entries(spec, g):
        out[r, c] = ctx.add[out[r, c], v]
    res = is_member(spec, out)
    if not res:
        raise MembershipFailure(f"{g.kind}_{g.i},{g.j} is not a member: {res.reason}", block=res.block, entry=res.entry)
    out.setflags(write=False)
    return out


def gen_matrix(spec: FormSpec, g: ElemGen) -> np.ndarray:
    return _gen_matrix_cached(spec, g)


def poly_gen_matrix(spec: FormSpec, g: PolyGen) -> PolyMat:
    validate_gen(spec, g)
    return PolyMat.from_entries(spec.ctx, spec.size, _entries(spec, g), base=PolyMat.identity(spec.ctx, spec.size))


def vector_gen(spec: FormSpec, kind: str, i: int, zeta: Sequence[int], f: Optional[int] = None) -> ElemGen:
    """hm/hrv generator; without ``f`` the least admissible value is chosen."""
    if f is None:
        ops = _ScalarOps(spec)
        target = _zeta_target(spec, ops, [int(z) for z in zeta])
        if target not in spec.ctx.half_table:
            raise MembershipFailure(f"no zeta_f exists for {kind}_{i}", block="zeta_f")
        f = spec.ctx.half_table[target]
    return ElemGen(kind, i, 0, zeta=tuple(zeta), f=f)


def poly_vector_gen(spec: FormSpec, kind: str, i: int, zeta: Sequence[Poly], f: Optional[Poly] = None) -> PolyGen:
    if f is None:
        ctx = spec.ctx
        f = Poly(ctx)
        for z, c in zip(zeta, spec.a_halves):
            f = f + z.conj() * z * c
    return PolyGen(kind, i, 0, zeta=tuple(zeta), f=f)


def lift_gen(spec: FormSpec, g: ElemGen) -> PolyGen:
    ctx = spec.ctx
    if g.is_vector:
        return PolyGen(g.kind, g.i, 0, zeta=tuple(Poly.const(ctx, z) for z in g.zeta), f=Poly.const(ctx, g.f))
    return PolyGen(g.kind, g.i, g.j, arg=Poly.const(ctx, g.arg))


def lift_word(w: ElemWord) -> PolyElemWord:
    return PolyElemWord(w.spec, tuple(lift_gen(w.spec, g) for g in w.gens))


def to_elem_gen(g: PolyGen) -> ElemGen:
    assert all(v.is_constant() for v in g.values()), "generator has non-constant arguments"
    if g.is_vector:
        return ElemGen(g.kind, g.i, 0, zeta=tuple(z.constant_term() for z in g.zeta), f=g.f.constant_term())
    return ElemGen(g.kind, g.i, g.j, arg=g.arg.constant_term())


def is_trivial_gen(g: Gen) -> bool:
    if isinstance(g, PolyGen):
        return all(v.is_zero() for v in g.values())
    return g.f == 0 and not any(g.zeta) if g.is_vector else g.arg == 0


def word_eval(w: ElemWord) -> np.ndarray:
    return linalg.mat_prod(w.spec.ctx, [gen_matrix(w.spec, g) for g in w.gens], w.spec.size)


def poly_word_eval(w: PolyElemWord) -> PolyMat:
    out = PolyMat.identity(w.spec.ctx, w.spec.size)
    for g in w.gens:
        out = out * poly_gen_matrix(w.spec, g)
    return out


def gen_inverse(spec: FormSpec, g: Gen) -> Gen:
    ops = _ops(spec, g)
    if not g.is_vector:
        return replace(g, arg=ops.neg(g.arg))
    ctx = spec.ctx
    zeta = tuple(ops.neg(z) for z in g.zeta)
    if g.kind == "hm":
        extra = _sum(ops, (ops.mul(ops.mul(ops.const(a), z), ops.conj(z)) for z, a in zip(g.zeta, spec.a)))
    else:
        lam = ops.const(ctx.lam)
        extra = ops.mul(
            lam, _sum(ops, (ops.mul(ops.mul(ops.conj(z), ops.const(ctx.bar[a])), z) for z, a in zip(g.zeta, spec.a)))
        )
    return replace(g, zeta=zeta, f=ops.add(ops.neg(g.f), extra))


def word_inverse(w):
    return type(w)(w.spec, tuple(gen_inverse(w.spec, g) for g in reversed(w.gens)))


def compose_vector_args(spec: FormSpec, kind: str, first, second, ops=None):
    """(ζ, f)·(ζ', f') for hm/hrv generators at the same index."""
    ctx = spec.ctx
    (z1, f1), (z2, f2) = first, second
    ops = ops or _ScalarOps(spec)
    zeta = tuple(ops.add(a, b) for a, b in zip(z1, z2))
    if kind == "hm":
        cross = _sum(ops, (ops.mul(ops.mul(a, ops.const(ak)), ops.conj(b)) for a, b, ak in zip(z1, z2, spec.a)))
    else:
        cross = ops.mul(
            ops.const(ctx.lam),
            _sum(ops, (ops.mul(ops.mul(ops.conj(a), ops.const(ctx.bar[ak])), b) for a, b, ak in zip(z1, z2, spec.a))),
        )
    return zeta, ops.add(ops.add(f1, f2), cross)


def check_splitting(spec: FormSpec, kind: str, i: int, j: int, x, y) -> bool:
    """g(x+y) == g(x)g(y); for hm/hrv, x and y are (zeta, f) pairs."""
    ctx = spec.ctx
    if kind in VECTOR_KINDS:
        zeta, f = compose_vector_args(spec, kind, x, y)
        gx, gy = ElemGen(kind, i, 0, zeta=x[0], f=x[1]), ElemGen(kind, i, 0, zeta=y[0], f=y[1])
        gs = ElemGen(kind, i, 0, zeta=zeta, f=f)
    else:
        gx, gy = ElemGen(kind, i, j, int(x)), ElemGen(kind, i, j, int(y))
        gs = ElemGen(kind, i, j, int(ctx.add[x, y]))
    lhs = gen_matrix(spec, gs)
    rhs = linalg.mat_mul(ctx, gen_matrix(spec, gx), gen_matrix(spec, gy))
    return bool((lhs == rhs).all())


def interleave_rewrite(ctx, pairs: Sequence[Tuple[np.ndarray, np.ndarray]]) -> Tuple[List[np.ndarray], np.ndarray]:
    """Π a_i b_i = (Π r_i b_i r_i^{-1})·Π a_i with r_i = a_1⋯a_i."""
    if not pairs:
        return [], None
    k = np.asarray(pairs[0][0]).shape[0]
    r = linalg.identity(ctx, k)
    conj = []
    for a, b in pairs:
        r = linalg.mat_mul(ctx, r, a)
        conj.append(linalg.mat_mul(ctx, linalg.mat_mul(ctx, r, b), linalg.inverse(ctx, r)))
    return conj, r


# --- congruence normal form -------------------------------------------------------


@dataclass(frozen=True)
class CongruenceFactor:
    conjugator: PolyElemWord
    core: PolyGen


def split_gen(spec: FormSpec, g: PolyGen, var: int = X) -> Tuple[Optional[PolyGen], Optional[PolyGen]]:
    """g = g0·g1 with g0 free of ``var`` and g1 ≡ I mod ``var``."""
    if not g.is_vector:
        a0, a1 = g.arg.split(var)
        parts = (replace(g, arg=a0), replace(g, arg=a1))
    else:
        ops = _PolyOps(spec)
        pieces = [z.split(var) for z in g.zeta]
        z0 = tuple(p[0] for p in pieces)
        z1 = tuple(p[1] for p in pieces)
        f0 = g.f.split(var)[0]
        # f = f0 + f1 + cross(z0, z1)
        _, cross_total = compose_vector_args(spec, g.kind, (z0, ops.zero), (z1, ops.zero), ops)
        f1 = g.f - f0 - cross_total
        parts = (replace(g, zeta=z0, f=f0), replace(g, zeta=z1, f=f1))
    return tuple(None if is_trivial_gen(p) else p for p in parts)


def congruence_normal_form(w: PolyElemWord, var: int = X) -> List[CongruenceFactor]:
    spec = w.spec
    total = poly_word_eval(w)
    if not total.evaluate(var, 0).is_identity():
        raise NotCongruentToIdentity(f"word does not evaluate to I at {('X', 'T', 'U')[var]}=0")
    prefix: List[PolyGen] = []
    out: List[CongruenceFactor] = []
    for g in w.gens:
        g0, g1 = split_gen(spec, g, var)
        if g0 is not None:
            prefix.append(g0)
        if g1 is not None:
            out.append(CongruenceFactor(PolyElemWord(spec, tuple(prefix)), g1))
    check = PolyMat.identity(spec.ctx, spec.size)
    for fac in out:
        check = check * poly_word_eval(fac.conjugator + PolyElemWord(spec, (fac.core,)) + word_inverse(fac.conjugator))
    if check != total:
        raise CertificationFailure("congruence normal form does not reproduce the word", entry=check.first_difference(total))
    return out


# --- transvections as words -------------------------------------------------------


@dataclass
class Key5Result:
    word: Union[ElemWord, PolyElemWord]
    correction: object


def _poly_transvection_frame(spec: FormSpec, w: Sequence[Poly], c: Poly) -> PolyMat:
    """I + M(e_ρn, w) + c·e_ρn·ẽ_ρn over R[X,...]."""
    ctx, n = spec.ctx, spec.n
    psi = spec.psi
    entries = []
    pn, xn = spec.rho(n), spec.row(n)
    for col in range(spec.size):
        wt = Poly(ctx)
        for l in range(spec.size):
            if psi[l, col]:
                wt = wt + w[l].conj() * int(psi[l, col])
        entries.append(((pn, col), wt))
    for row in range(spec.size):
        entries.append(((row, xn), -(w[row] * ctx.lam_bar)))
    entries.append(((pn, xn), c))
    return PolyMat.from_entries(ctx, spec.size, entries, base=PolyMat.identity(ctx, spec.size))


def key5_poly(spec: FormSpec, eps: PolyElemWord, w: Sequence[Poly], c=None, allow_correction: bool = False) -> Key5Result:
    """Word for E·(I + M(e_ρn, w1) + c e_ρn ẽ_ρn)·E^{-1} with w1 = E^{-1}w, E = eval(eps)."""
    ctx, n, r = spec.ctx, spec.n, spec.r
    E = poly_word_eval(eps)
    Einv = poly_word_eval(word_inverse(eps))
    w1 = _poly_mat_vec(Einv, w)
    c = Poly.lift(ctx, 0 if c is None else c)
    if not w1[spec.row(n)].is_zero():
        raise NotOrthogonal("<v, w> is not zero", value=str(w1[spec.row(n)]))
    x, y = w1[:n], w1[n:]
    lb = ctx.lam_bar
    gens: List[PolyGen] = []
    if spec.kind == "quadratic":
        gens += [PolyGen("ql", k, n, arg=-(y[k - 1] * lb)) for k in range(1, n)]
        gens += [PolyGen("qe", k, n, arg=-(x[k - 1] * lb)) for k in range(1, n)]
    else:
        for k in range(1, n):
            a = -(y[k - 1] * lb)
            if k <= r:
                a = a - x[k - 1] * int(ctx.mul[lb, ctx.bar[spec.a[k - 1]]])
            gens.append(PolyGen("hl", k, n, arg=a))
        gens += [PolyGen("he", k, n, arg=-(x[k - 1] * lb)) for k in range(r + 1, n)]
        gens.append(poly_vector_gen(spec, "hm", n, [-(x[k] * lb) for k in range(r)]))
    gens = [g for g in gens if not is_trivial_gen(g)]
    target = _poly_transvection_frame(spec, w1, c)
    P0 = poly_word_eval(PolyElemWord(spec, tuple(gens)))
    pn, xn = spec.rho(n), spec.row(n)
    b = target.entry(pn, xn) - P0.entry(pn, xn)
    correction = c
    if not b.is_zero():
        if spec.kind == "quadratic":
            ok = all(spec.in_lambda_bar(v) for v in b.coefficients())
            if ok:
                gens.append(PolyGen("ql", n, n, arg=b))
        else:
            # hm_n(ζ, f)·hm_n(0, δ) = hm_n(ζ, f + δ) adds δ̄ at (ρn, n)
            delta = b.conj()
            ok = (delta + delta.conj() * ctx.lam).is_zero()
            if ok:
                at = next((k for k, g in enumerate(gens) if g.kind == "hm"), None)
                if at is None:
                    gens.append(PolyGen("hm", n, 0, zeta=tuple(Poly(ctx) for _ in range(r)), f=delta))
                else:
                    gens[at] = replace(gens[at], f=gens[at].f + delta)
        if not ok:
            if not allow_correction:
                raise ClosingArgNotInLambda(f"closing argument {b} violates the Lambda constraint", value=str(b))
            correction = c - b
            target = _poly_transvection_frame(spec, w1, correction)
    P = PolyElemWord(spec, tuple(gens))
    check = poly_word_eval(P)
    diff = check.first_difference(target)
    if diff is not None:
        raise CertificationFailure("key5 product differs from the transvection", entry=diff)
    if not gens:
        return Key5Result(PolyElemWord(spec), correction)
    word = eps + P + word_inverse(eps)
    if poly_word_eval(word) != E * target * Einv:
        raise CertificationFailure("conjugated key5 word does not evaluate to the transvection")
    return Key5Result(word, correction)


def _poly_mat_vec(M: PolyMat, v: Sequence[Poly]) -> List[Poly]:
    ctx = M.ctx
    out = [Poly(ctx) for _ in range(M.size)]
    for e, A in M.terms.items():
        for row in range(M.size):
            for col in range(M.size):
                if A[row, col] and not v[col].is_zero():
                    out[row] = out[row] + v[col].times_exp(e) * int(A[row, col])
    return out


def key5_with_correction(spec: FormSpec, eps: ElemWord, w: np.ndarray, c: int = 0, allow_correction: bool = True) -> Key5Result:
    ctx = spec.ctx
    res = key5_poly(spec, lift_word(eps), [Poly.const(ctx, x) for x in w], Poly.const(ctx, c), allow_correction)
    word = res.word.as_elem_word()
    corr = res.correction.constant_term()
    v = linalg.mat_vec(ctx, word_eval(eps), spec.basis(spec.rho(spec.n)))
    expected = transvection(spec, v, w, corr)
    if not (word_eval(word) == expected).all():
        raise CertificationFailure("key5 word does not evaluate to the transvection")
    return Key5Result(word, corr)


def key5_decompose(spec: FormSpec, eps: ElemWord, w: np.ndarray, c: int = 0) -> ElemWord:
    """Elementary word for I + M(v,w) + c·v·ṽ with v = eval(eps)·e_2n."""
    return key5_with_correction(spec, eps, w, c, allow_correction=False).word
