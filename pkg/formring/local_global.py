"""Local data, dilation, patching and the commutator constructions.

Over a finite ring the localization R -> R_s is the quotient by (0 : s^∞),
so a word over R_s lifts coefficientwise to R and is wrong only by elements
killed by a power of s. Dilation uses exactly that: after lifting, a
substitution X ↦ s^m X (or U ↦ s^m on the helper variable) erases the error.
Every word produced here is re-evaluated over R before it is returned.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import linalg
from .config import Config
from .errors import (
    CertificationFailure,
    ConfigError,
    CoverageGap,
    DimensionMismatch,
    FormRingError,
    InsufficientCongruenceLevel,
    InsufficientDegree,
    InsufficientDivisibility,
    LevelTooLow,
    MembershipFailure,
    NilpotentElement,
    NonCommutativeBase,
    NotComaximal,
    NotCongruentToIdentity,
    PresentationInvalid,
    RuleGap,
    TelescopeMismatch,
    UnsupportedSize,
)
from .forms import (
    FormSpec,
    group_inverse,
    is_member,
    is_member_poly,
    is_special_member,
    localize_spec,
    transvection,
)
from .log import append_progress, get_logger
from .poly import T, U, X, Poly, PolyMat
from .reduction import (
    diagonal_reduce,
    elementary_membership_semilocal,
    is_diagonal,
    reduce_unimodular_isotropic,
)
from .relations import conjugate_absorb, count_root_factors
from .rings import (
    Ideal,
    Localization,
    RingCtx,
    annihilating_power,
    ideal_generated,
    is_unit_ideal,
    jacobson_radical,
    localize_at,
    maximal_ideals,
)
from .sampling import make_rng, random_gen, random_poly_word, random_special_member
from .words import (
    ElemGen,
    ElemWord,
    PolyElemWord,
    PolyGen,
    congruence_normal_form,
    gen_matrix,
    is_trivial_gen,
    key5_decompose,
    key5_poly,
    lift_word,
    poly_gen_matrix,
    poly_word_eval,
    word_eval,
    word_inverse,
)

logger = get_logger(__name__)

METHODS = ("absorb", "lift")

Datum = Union["LocalDatum", Tuple[int, PolyElemWord]]


def _require_commutative(ctx: RingCtx) -> None:
    if not ctx.is_commutative:
        raise NonCommutativeBase(f"{ctx.presentation} is not commutative")


def _require_scalable_lambda(spec: FormSpec) -> None:
    # patch rescales arguments by elements of the fixed subring
    ctx, lam = spec.ctx, spec.Lambda.elements
    for c in ctx.fixed.tolist():
        stray = [x for x in lam if int(ctx.mul[c, x]) not in lam]
        if stray:
            raise ConfigError(
                f"Lambda is not closed under multiplication by {ctx.label(c)} (sends {ctx.label(stray[0])} outside)",
                key="Lambda",
            )


def _require_trivial_involution(spec: FormSpec) -> None:
    _require_commutative(spec.ctx)
    ctx = spec.ctx
    if not (ctx.bar == np.arange(ctx.order)).all():
        raise PresentationInvalid("commutator constructions need the trivial involution")


# --- word maps --------------------------------------------------------------------


def map_gen(g: PolyGen, fn: Callable[[Poly], Poly]) -> PolyGen:
    if g.is_vector:
        return replace(g, zeta=tuple(fn(z) for z in g.zeta), f=fn(g.f))
    return replace(g, arg=fn(g.arg))


def map_word(word: PolyElemWord, fn: Callable[[Poly], Poly], spec: Optional[FormSpec] = None) -> PolyElemWord:
    """Apply a coefficient ring map to every argument; trivial generators are dropped."""
    gens = tuple(map_gen(g, fn) for g in word.gens)
    return PolyElemWord(spec or word.spec, tuple(g for g in gens if not is_trivial_gen(g)))


def localize_word(word: PolyElemWord, loc: Localization, spec_s: Optional[FormSpec] = None) -> PolyElemWord:
    spec_s = spec_s or localize_spec(word.spec, loc)
    return map_word(word, lambda p: p.map_coeffs(loc.proj, loc.ring), spec_s)


def scale_word_by_var(word: PolyElemWord, var: int = X) -> PolyElemWord:
    """Arguments times ``var``; the f of a vector generator picks up var^2."""
    ctx = word.spec.ctx
    v = Poly.var(ctx, var)
    gens = []
    for g in word.gens:
        if g.is_vector:
            gens.append(replace(g, zeta=tuple(z * v for z in g.zeta), f=g.f * v * v))
        else:
            gens.append(replace(g, arg=g.arg * v))
    return PolyElemWord(word.spec, tuple(gens))


def _lift_coeff(loc: Localization, target: int, ok: Optional[Callable[[int], bool]] = None) -> int:
    if ok is None:
        return int(loc.section[int(target)])
    for x in np.nonzero(loc.proj == int(target))[0]:
        if ok(int(x)):
            return int(x)
    raise CertificationFailure(f"no admissible preimage of {loc.ring.label(int(target))} in {loc.source.presentation}")


def _lift_poly(p: Poly, loc: Localization, ok: Optional[Callable[[int], bool]] = None) -> Poly:
    return Poly(loc.source, {e: _lift_coeff(loc, c, ok) for e, c in p.terms.items()})


def lift_gen_along(spec: FormSpec, loc: Localization, g: PolyGen) -> PolyGen:
    """A generator over R mapping onto ``g`` over R_s, still a valid generator over R."""
    ctx = spec.ctx
    if not g.is_vector:
        ok = None
        if g.i == g.j and g.kind in ("qr", "hr"):
            ok = spec.in_lambda
        elif g.i == g.j and g.kind in ("ql", "hl"):
            ok = spec.in_lambda_bar
        return replace(g, arg=_lift_poly(g.arg, loc, ok))
    zeta = tuple(_lift_poly(z, loc) for z in g.zeta)
    h = Poly(ctx)
    for z, a in zip(zeta, spec.a):
        h = h + z.conj() * z * a
    # f is chosen monomial by monomial so that f + λf̄ = Σ ζ̄ a ζ holds over R
    terms = {}
    for e in set(g.f.terms) | set(h.terms):
        want = h.terms.get(e, 0)
        terms[e] = _lift_coeff(
            loc,
            g.f.terms.get(e, 0),
            lambda x, want=want: int(ctx.add[x, ctx.mul[ctx.lam, ctx.bar[x]]]) == want,
        )
    return replace(g, zeta=zeta, f=Poly(ctx, terms))


def lift_word_along(spec: FormSpec, loc: Localization, word: PolyElemWord) -> PolyElemWord:
    return PolyElemWord(spec, tuple(lift_gen_along(spec, loc, g) for g in word.gens))


# --- local data -------------------------------------------------------------------


@dataclass
class LocalDatum:
    """A word over R_s certifying the image of α there."""

    s: int
    loc: Localization
    spec: FormSpec
    word: PolyElemWord
    ideal: Optional[Ideal] = None


def local_datum(spec: FormSpec, s: int, word: Optional[PolyElemWord] = None, ideal: Optional[Ideal] = None) -> LocalDatum:
    loc = localize_at(spec.ctx, s)
    spec_s = localize_spec(spec, loc)
    if word is None:
        word = PolyElemWord(spec_s)
    return LocalDatum(int(s), loc, word.spec, word, ideal)


def local_data_from_word(word: PolyElemWord) -> List[LocalDatum]:
    """One datum per maximal ideal, localizing a global word at its idempotent."""
    spec = word.spec
    out = []
    for m in maximal_ideals(spec.ctx):
        loc = localize_at(spec.ctx, m.idempotent)
        spec_s = localize_spec(spec, loc)
        out.append(LocalDatum(m.idempotent, loc, spec_s, localize_word(word, loc, spec_s), m))
    return out


@dataclass
class LocalReport:
    entries: List[Tuple[str, str, bool]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.entries)

    def lines(self) -> List[str]:
        return [f"{'PASS' if ok else 'FAIL'} {ideal} via s={s}" for ideal, s, ok in self.entries]


def _check_alpha(spec: FormSpec, alpha: PolyMat, var: int = X) -> None:
    res = is_member_poly(spec, alpha)
    if not res:
        raise MembershipFailure(f"α is not a member over R[X]: {res.reason}", block=res.block)
    if not alpha.evaluate(var, 0).is_identity():
        raise NotCongruentToIdentity("α(0) is not the identity")


def _uncovered(ctx: RingCtx, ss: Sequence[int]) -> Optional[Ideal]:
    for m in maximal_ideals(ctx):
        if all(int(s) in m for s in ss):
            return m
    return None


def check_local(spec: FormSpec, alpha: PolyMat, data: Sequence[LocalDatum]) -> LocalReport:
    ctx = spec.ctx
    _check_alpha(spec, alpha)
    report = LocalReport()
    for m in maximal_ideals(ctx):
        covering = [d for d in data if d.s not in m]
        if not covering:
            raise CoverageGap(f"no local datum covers {m.describe(ctx)}", ideal=m.describe(ctx))
        for d in covering:
            expected = alpha.map_coeffs(d.loc.proj, d.loc.ring)
            report.entries.append((m.describe(ctx), ctx.label(d.s), poly_word_eval(d.word) == expected))
    logger.debug("checked %d local entries over %s", len(report.entries), ctx.presentation)
    return report


# --- dilation ---------------------------------------------------------------------


def dilation_step1(spec: FormSpec, eps: ElemWord, w: np.ndarray, d: int) -> PolyElemWord:
    """Word for I + X^d·M(v,w), v = eval(eps)·e_2n, with every argument divisible by X."""
    ctx = spec.ctx
    w = np.asarray(w, dtype=np.int64)
    if not w.any():
        return PolyElemWord(spec)
    peps = lift_word(eps)
    c = count_root_factors(spec, peps) if len(eps) else 0
    if d < 2**c:
        raise InsufficientDegree(f"d = {d} is below 2^{c} for a conjugator with {c} root factors", required=2**c)
    E = word_eval(eps)
    w1 = linalg.mat_vec(ctx, group_inverse(spec, E), w)
    xd = Poly.var(ctx, X, power=d)
    frame = key5_poly(spec, PolyElemWord(spec), [xd * int(x) for x in w1]).word
    out = PolyElemWord(spec)
    for g in frame.gens:
        out = out + conjugate_absorb(spec, peps, g, m=1, var=X)
    v = linalg.mat_vec(ctx, E, spec.basis(spec.rho(spec.n)))
    M = linalg.mat_sub(ctx, transvection(spec, v, w), linalg.identity(ctx, spec.size))
    expected = PolyMat.identity(ctx, spec.size) + PolyMat.from_matrix(ctx, M).times_poly(xd)
    got = poly_word_eval(out)
    if got != expected:
        raise CertificationFailure("dilated transvection word is wrong", entry=got.first_difference(expected))
    return out


@dataclass
class DilationResult:
    """eval(word) = α(b·X) with b = s^power."""

    b: int
    power: int
    word: PolyElemWord
    method: str
    trace: List[str] = field(default_factory=list)


def _dilate_lift(spec: FormSpec, loc: Localization, factors, m: int, var: int) -> Tuple[int, PolyElemWord]:
    word = PolyElemWord(spec)
    for fac in factors:
        E = lift_word_along(spec, loc, fac.conjugator)
        core = lift_gen_along(spec, loc, fac.core)
        word = word + E + PolyElemWord(spec, (core,)) + word_inverse(E)
    b = spec.ctx.power(loc.s, m)
    return m, map_word(word, lambda p: p.scale_var(var, b))


def _dilate_absorb(
    spec: FormSpec, spec_s: FormSpec, loc: Localization, factors, m: int, var: int, cap: int
) -> Tuple[int, PolyElemWord]:
    c = max((count_root_factors(spec_s, f.conjugator) for f in factors if f.conjugator.gens), default=0)
    d = 2**c
    if d > cap:
        raise InsufficientDegree(f"absorption needs exponent {d}, above the cap {cap}", required=d)
    ring = spec_s.ctx
    stretch = Poly.var(ring, var) * Poly.var(ring, U, power=d)
    local = PolyElemWord(spec_s)
    for fac in factors:
        core = map_gen(fac.core, lambda p: p.substitute(var, stretch))
        local = local + conjugate_absorb(spec_s, fac.conjugator, core, m=1, var=U)
    sm = spec.ctx.power(loc.s, m)
    lifted = lift_word_along(spec, loc, local)
    return m * d, map_word(lifted, lambda p: p.evaluate(U, sm))


def dilate(
    spec: FormSpec,
    alpha: PolyMat,
    s: int,
    local_word: PolyElemWord,
    method: str = "absorb",
    var: int = X,
    cfg: Optional[Config] = None,
) -> DilationResult:
    """Word over R for α(bX), b a power of s, from a word for α over R_s.

    ``absorb`` pushes every conjugator into the core through the relation
    table on a helper variable; when the table has no rule or the exponent
    passes the degree cap it falls back to ``lift``, which keeps the
    conjugators and lifts them with their exact inverses.
    """
    if method not in METHODS:
        raise PresentationInvalid(f"unknown dilation method {method!r}; expected one of {METHODS}")
    cfg = cfg or Config.from_env()
    ctx = spec.ctx
    _require_commutative(ctx)
    s = int(s)
    if int(ctx.bar[s]) != s:
        raise PresentationInvalid(f"localize at an involution-fixed element, {ctx.label(s)} is not")
    if not alpha.evaluate(var, 0).is_identity():
        raise NotCongruentToIdentity("α(0) is not the identity")
    loc = localize_at(ctx, s)
    spec_s = local_word.spec
    if spec_s.ctx.order != loc.ring.order or spec_s.size != spec.size:
        raise DimensionMismatch("local word does not live over the localization at s")
    if poly_word_eval(local_word) != alpha.map_coeffs(loc.proj, loc.ring):
        raise CertificationFailure("local word does not evaluate to the localized matrix")
    m = annihilating_power(ctx, s, loc.kernel.elements)
    factors = congruence_normal_form(local_word, var) if local_word.gens else []
    trace = [f"s={ctx.label(s)} kernel={len(loc.kernel.elements)} m={m} factors={len(factors)}"]
    used = method
    if method == "absorb":
        try:
            power, word = _dilate_absorb(spec, spec_s, loc, factors, m, var, cfg.degree_cap)
        except (RuleGap, InsufficientDegree, InsufficientDivisibility) as exc:
            logger.info("absorption unavailable at s=%s (%s); lifting conjugators instead", ctx.label(s), exc)
            trace.append(f"absorb unavailable: {exc}")
            used = "lift"
    if used == "lift":
        power, word = _dilate_lift(spec, loc, factors, m, var)
    b = ctx.power(s, power)
    got = poly_word_eval(word)
    expected = alpha.scale_var(var, b)
    if got != expected:
        raise CertificationFailure("dilated word does not reproduce α(bX)", entry=got.first_difference(expected))
    trace.append(f"method={used} b={ctx.label(b)} length={len(word)}")
    return DilationResult(b, power, word, used, trace)


# --- patching -----------------------------------------------------------------------


def _unit_combination(ctx: RingCtx, gens: Sequence[int], pool: np.ndarray) -> Optional[List[int]]:
    """Coefficients c_i from ``pool`` with Σ c_i·g_i = 1, or None."""
    pool = np.asarray(pool, dtype=np.int64)
    vals = np.array([0], dtype=np.int64)
    history = []
    for g in gens:
        grid = ctx.add[vals[:, None], ctx.mul[pool, int(g)][None, :]]
        uniq, first = np.unique(grid.ravel(), return_index=True)
        history.append((vals, uniq, first))
        vals = uniq
    if ctx.one not in vals:
        return None
    target, coeffs = ctx.one, []
    for prev, uniq, first in reversed(history):
        pos = int(first[np.searchsorted(uniq, target)])
        row, col = divmod(pos, len(pool))
        coeffs.append(int(pool[col]))
        target = int(prev[row])
    return coeffs[::-1]


def partition_of_unity(ctx: RingCtx, pairs: Sequence[Tuple[int, int]], pool: Optional[np.ndarray] = None) -> List[int]:
    """b_i in (s_i^{l_i}) with Σ b_i = 1."""
    gens = [ctx.power(int(s), int(l)) for s, l in pairs]
    if not is_unit_ideal(ctx, gens):
        raise NotComaximal("the elements do not generate the unit ideal", elements=[ctx.label(s) for s, _ in pairs])
    coeffs = _unit_combination(ctx, gens, np.arange(ctx.order) if pool is None else pool)
    if coeffs is None:
        raise NotComaximal("no combination with coefficients in the requested subring")
    out = [int(ctx.mul[c, g]) for c, g in zip(coeffs, gens)]
    assert ctx.total(out) == ctx.one
    return out


@dataclass
class PatchCertificate:
    partition: List[Tuple[int, int, int]]
    dilated: List[PolyElemWord]
    schedule: List[str]
    word: PolyElemWord
    methods: List[str] = field(default_factory=list)

    def lines(self, ctx: RingCtx) -> List[str]:
        out = []
        for (s, l, b), sched, meth in zip(self.partition, self.schedule, self.methods):
            out.append(f"s={ctx.label(s)} l={l} b={ctx.label(b)} {sched} method={meth}")
        out.append(f"word length {len(self.word)}")
        return out


def _theta_matrix(spec: FormSpec, alpha: PolyMat) -> PolyMat:
    """θ(X,T) = α(X+T)·α(T)^{-1}."""
    ctx = spec.ctx
    shifted = alpha.substitute(X, Poly.var(ctx, X) + Poly.var(ctx, T))
    at_t = alpha.substitute(X, Poly.var(ctx, T))
    return shifted * group_inverse(spec, at_t)


def _theta_word(word: PolyElemWord) -> PolyElemWord:
    ctx = word.spec.ctx
    if any(p.degree(T) or p.degree(U) for g in word.gens for p in g.values()):
        raise PresentationInvalid("local words may only involve X")
    shifted = map_word(word, lambda p: p.substitute(X, Poly.var(ctx, X) + Poly.var(ctx, T)))
    at_t = map_word(word, lambda p: p.substitute(X, Poly.var(ctx, T)))
    return shifted + word_inverse(at_t)


def verify_telescope(spec: FormSpec, alpha: PolyMat, bs: Sequence[int]) -> bool:
    """Π_i θ(b_iX, T)|_{T = (b_{i+1}+…+b_r)X} == α(X), checked exactly."""
    ctx = spec.ctx
    theta = _theta_matrix(spec, alpha)
    out = PolyMat.identity(ctx, spec.size)
    for i, b in enumerate(bs):
        tail = ctx.total(bs[i + 1 :])
        out = out * theta.scale_var(X, b).substitute(T, Poly.var(ctx, X, coef=tail))
    return out == alpha


def _normalize(data: Sequence[Datum]) -> List[Tuple[int, PolyElemWord]]:
    return [(d.s, d.word) if isinstance(d, LocalDatum) else (int(d[0]), d[1]) for d in data]


def patch(
    spec: FormSpec,
    alpha: PolyMat,
    data: Sequence[Datum],
    method: str = "absorb",
    cfg: Optional[Config] = None,
) -> PatchCertificate:
    """Glue local words for α into one word over R[X]."""
    ctx = spec.ctx
    _require_commutative(ctx)
    _require_scalable_lambda(spec)
    _check_alpha(spec, alpha)
    if alpha.is_identity():
        return PatchCertificate([], [], [], PolyElemWord(spec))
    pairs = _normalize(data)
    gap = _uncovered(ctx, [s for s, _ in pairs])
    if gap is not None:
        raise CoverageGap(f"no local datum covers {gap.describe(ctx)}", ideal=gap.describe(ctx))
    theta = _theta_matrix(spec, alpha)
    results: List[DilationResult] = []
    for s, word in pairs:
        res = dilate(spec, theta, s, _theta_word(word), method=method, cfg=cfg)
        logger.debug("dilated θ at s=%s: %s", ctx.label(s), "; ".join(res.trace))
        results.append(res)
    coeffs = _unit_combination(ctx, [r.b for r in results], ctx.fixed)
    if coeffs is None:
        raise NotComaximal("dilation multipliers do not generate the unit ideal over the fixed subring")
    bs = [int(ctx.mul[c, r.b]) for c, r in zip(coeffs, results)]
    if not verify_telescope(spec, alpha, bs):
        raise TelescopeMismatch("telescoping product of θ does not reproduce α")
    final = PolyElemWord(spec)
    schedule = []
    for i, (c, res) in enumerate(zip(coeffs, results)):
        tail = ctx.total(bs[i + 1 :])
        schedule.append(f"T={ctx.label(tail)}X")
        piece = map_word(res.word, lambda p, c=c: p.scale_var(X, c))
        final = final + map_word(piece, lambda p, tail=tail: p.substitute(T, Poly.var(ctx, X, coef=tail)))
    got = poly_word_eval(final)
    if got != alpha:
        raise TelescopeMismatch("patched word does not evaluate to α", entry=got.first_difference(alpha))
    partition = [(s, r.power, b) for (s, _), r, b in zip(pairs, results, bs)]
    append_progress({"event": "patch", "ring": ctx.presentation, "pieces": len(pairs), "length": len(final)})
    return PatchCertificate(partition, [r.word for r in results], schedule, final, [r.method for r in results])


# --- conjugation by diagonal matrices and normality ---------------------------------


def _primary_position(spec: FormSpec, g: PolyGen) -> Tuple[int, int]:
    I, P = spec.row, spec.rho
    if g.kind in ("qe", "he"):
        return I(g.i), I(g.j)
    if g.kind in ("qr", "hr"):
        return I(g.i), P(g.j)
    return P(g.i), I(g.j)


def conj_by_diagonal(spec: FormSpec, g: PolyGen, D: np.ndarray) -> PolyGen:
    """The generator D·g·D^{-1}, for D a diagonal member."""
    ctx = spec.ctx
    d = [int(x) for x in np.diag(D)]
    inv = ctx.inverse
    I, P = spec.row, spec.rho
    if not g.is_vector:
        p, q = _primary_position(spec, g)
        out = replace(g, arg=g.arg * int(ctx.mul[d[p], inv(d[q])]))
    else:
        col = I(g.i) if g.kind == "hm" else P(g.i)
        zeta = tuple(z * int(ctx.mul[d[I(k)], inv(d[col])]) for k, z in enumerate(g.zeta, start=1))
        if g.kind == "hm":
            f = (g.f.conj() * int(ctx.mul[d[P(g.i)], inv(d[I(g.i)])])).conj()
        else:
            f = g.f * int(ctx.mul[d[I(g.i)], inv(d[P(g.i)])])
        out = replace(g, zeta=zeta, f=f)
    Dm = PolyMat.from_matrix(ctx, D)
    expected = Dm * poly_gen_matrix(spec, g) * group_inverse(spec, Dm)
    try:
        got = poly_gen_matrix(spec, out)
    except FormRingError as exc:
        raise RuleGap(f"{g.kind} does not stay a single generator under this diagonal: {exc}") from exc
    if got != expected:
        raise RuleGap(f"{g.kind}_{g.i} does not stay a single generator under this diagonal")
    return out


def conj_word_by_diagonal(spec: FormSpec, word: PolyElemWord, D: np.ndarray) -> PolyElemWord:
    return PolyElemWord(spec, tuple(conj_by_diagonal(spec, g, D) for g in word.gens))


def transvection_data(spec: FormSpec, g: ElemGen) -> Tuple[np.ndarray, np.ndarray, int]:
    """(v, w, c) with gen_matrix(g) = I + M(v,w) + c·v·ṽ."""
    ctx = spec.ctx
    I, P = spec.row, spec.rho
    lam, lb = ctx.lam, ctx.lam_bar
    v = np.zeros(spec.size, dtype=np.int64)
    w = np.zeros(spec.size, dtype=np.int64)
    c = 0
    if g.kind in ("qe", "he"):
        v[I(g.i)] = ctx.one
        w[P(g.j)] = ctx.bar[g.arg]
    elif g.kind in ("qr", "hr"):
        v[I(g.i)] = ctx.one
        if g.i == g.j:
            c = int(ctx.mul[lb, g.arg])
        else:
            w[I(g.j)] = ctx.mul[lam, ctx.bar[g.arg]]
    elif g.kind in ("ql", "hl"):
        v[P(g.i)] = ctx.one
        if g.i == g.j:
            c = g.arg
        else:
            w[P(g.j)] = ctx.bar[g.arg]
    else:
        hm = g.kind == "hm"
        v[P(g.i) if hm else I(g.i)] = ctx.one
        for k, (z, a) in enumerate(zip(g.zeta, spec.a), start=1):
            w[I(k)] = ctx.neg[ctx.mul[lam, z]] if hm else ctx.neg[z]
            w[P(k)] = ctx.mul[ctx.mul[lam, ctx.bar[a]], z] if hm else ctx.mul[ctx.bar[a], z]
        c = int(ctx.bar[g.f]) if hm else int(ctx.mul[lb, g.f])
    if not (transvection(spec, v, w, c) == gen_matrix(spec, g)).all():
        raise CertificationFailure(f"{g.kind}_{g.i},{g.j} is not the transvection it should be")
    return v, w, int(c)


def conjugate_generator(spec: FormSpec, sigma: np.ndarray, g: ElemGen) -> ElemWord:
    """Elementary word for σ·g·σ^{-1}: the transvection of (σv, σw, c) through key5."""
    ctx = spec.ctx
    v, w, c = transvection_data(spec, g)
    sv, sw = linalg.mat_vec(ctx, sigma, v), linalg.mat_vec(ctx, sigma, w)
    cert = reduce_unimodular_isotropic(spec, sv)
    eps = word_inverse(cert.word)
    word = key5_decompose(spec, eps, sw, c)
    expected = linalg.mat_mul(ctx, linalg.mat_mul(ctx, sigma, gen_matrix(spec, g)), group_inverse(spec, sigma))
    if not (word_eval(word) == expected).all():
        raise CertificationFailure("conjugate word does not evaluate to σgσ^{-1}")
    return word


# --- commutator constructions -------------------------------------------------------


def _in_power_ideal(ctx: RingCtx, x: int, s: int, l: int) -> bool:
    return int(x) in ideal_generated(ctx, [ctx.power(s, l)])


def commutator_diag_in_E(
    spec: FormSpec, kind: str, i: int, j: int, a: int, D: np.ndarray, s: int, l: int
) -> PolyElemWord:
    """[g((a/s)X), D] as one generator over R, for D ≡ I mod s^l and l >= 2.

    The fraction a/s is given by its numerator ``a``; with d_p·d_q^{-1} = 1 + s^l·μ
    the commutator is g(−a·s^{l−1}·μ·X), which needs no denominator.
    """
    _require_trivial_involution(spec)
    ctx = spec.ctx
    if l < 2:
        raise InsufficientCongruenceLevel(f"need l >= 2, got {l}", level=l)
    D = np.asarray(D, dtype=np.int64)
    if not is_diagonal(D) or not is_member(spec, D):
        raise MembershipFailure("D must be a diagonal member")
    minus_one = ctx.neg[ctx.one]
    if not all(_in_power_ideal(ctx, ctx.add[x, minus_one], s, l) for x in np.diag(D)):
        raise NotCongruentToIdentity(f"D is not congruent to I modulo s^{l}")
    g = PolyGen(kind, i, j, arg=Poly.var(ctx, X, coef=int(a)))
    if g.is_vector:
        raise RuleGap(f"{kind} entries scale by different diagonal ratios")
    p, q = _primary_position(spec, g)
    kappa = int(ctx.mul[int(D[p, p]), ctx.inverse(int(D[q, q]))])
    if kappa == ctx.one or int(a) == 0:
        return PolyElemWord(spec)
    delta = int(ctx.add[kappa, minus_one])
    sl = ctx.power(s, l)
    mu = next((x for x in range(ctx.order) if int(ctx.mul[sl, x]) == delta), None)
    if mu is None:
        raise CertificationFailure("diagonal ratio is not congruent to 1 modulo s^l")
    coef = int(ctx.neg[ctx.mul[ctx.mul[int(a), ctx.power(s, l - 1)], mu]])
    word = PolyElemWord(spec, (PolyGen(kind, i, j, arg=Poly.var(ctx, X, coef=coef)),))
    poly_word_eval(word)  # validates the argument against Λ
    # s·(argument) = (1 − κ)·a·X over R
    if int(ctx.mul[s, coef]) != int(ctx.mul[ctx.add[ctx.one, ctx.neg[kappa]], int(a)]):
        raise CertificationFailure("commutator argument does not clear the denominator")
    if ctx.power(int(s), ctx.order) != 0:
        loc = localize_at(ctx, s)
        spec_s = localize_spec(spec, loc)
        ring = loc.ring
        frac = int(ring.mul[loc.proj[int(a)], ring.inverse(int(loc.proj[int(s)]))])
        G = poly_gen_matrix(spec_s, PolyGen(kind, i, j, arg=Poly.var(ring, X, coef=frac)))
        Ds = PolyMat.from_matrix(ring, loc.proj[D])
        expected = G * Ds * group_inverse(spec_s, G) * group_inverse(spec_s, Ds)
        if poly_word_eval(localize_word(word, loc, spec_s)) != expected:
            raise CertificationFailure("commutator word differs from [g, D] after localizing")
    return word


def congruence_level(ctx: RingCtx, beta: np.ndarray, s: int) -> int:
    """Largest l (capped at the ring order) with β ≡ I modulo s^l."""
    diff = linalg.mat_sub(ctx, beta, linalg.identity(ctx, beta.shape[0]))
    l = 0
    while l < ctx.order and all(_in_power_ideal(ctx, x, s, l + 1) for x in np.unique(diff)):
        l += 1
    return l


def _split_member(spec_l: FormSpec, beta: np.ndarray, level: Optional[int]) -> Tuple[ElemWord, Optional[np.ndarray]]:
    """β = eval(W)·D with D diagonal or None."""
    ctx = spec_l.ctx
    if linalg.is_identity(ctx, beta):
        return ElemWord(spec_l), None
    if level is not None:
        I = ideal_generated(ctx, [level])
        if I.elements <= jacobson_radical(ctx).elements:
            cert = diagonal_reduce(spec_l, beta, I)
            if cert.claim == "beta_theta_diagonal":
                # βθ = D, so β = (Dθ^{-1}D^{-1})·D
                D = cert.residual
                W = conj_word_by_diagonal(spec_l, lift_word(word_inverse(cert.word)), D)
                return W.as_elem_word(), D
    cert = elementary_membership_semilocal(spec_l, beta)
    if cert.claim == "sigma_decomposed":
        return cert.word, None
    if cert.residual is not None and is_diagonal(cert.residual):
        return cert.word, cert.residual
    raise CertificationFailure(f"β has a non-diagonal residual over {ctx.presentation}")


def _local_commutator_word(
    spec: FormSpec, loc: Localization, eps_x: PolyElemWord, beta: np.ndarray, level: Optional[int]
) -> PolyElemWord:
    spec_l = localize_spec(spec, loc)
    eps_l = localize_word(eps_x, loc, spec_l)
    lvl = None if level is None else int(loc.proj[level])
    W, D = _split_member(spec_l, loc.proj[beta], lvl)
    # [ε, W·D] = ε·W·(D ε^{-1} D^{-1})·W^{-1}
    inner = word_inverse(eps_l)
    if D is not None:
        inner = conj_word_by_diagonal(spec_l, inner, D)
    pw = lift_word(W)
    return eps_l + pw + inner + word_inverse(pw)


def commutator_level_absorb(
    spec: FormSpec,
    eps_s: ElemWord,
    beta: np.ndarray,
    s: int,
    l: int,
    method: str = "absorb",
    cfg: Optional[Config] = None,
) -> ElemWord:
    """Word over R for [ε, β] where ε lifts ``eps_s`` and β ≡ I modulo s^l.

    [ε(X), β] is elementary over R_s and over the localization where s lies
    in the radical; the two local words are patched and X is set to 1.
    """
    _require_trivial_involution(spec)
    ctx = spec.ctx
    if spec.hermitian and spec.n < spec.r + 3:
        raise UnsupportedSize(f"need n >= r+3, got n={spec.n} r={spec.r}", n=spec.n, r=spec.r)
    beta = np.asarray(beta, dtype=np.int64)
    if not is_special_member(spec, beta):
        raise MembershipFailure("β is not a special member")
    s = int(s)
    achieved = congruence_level(ctx, beta, s)
    if achieved < l:
        raise LevelTooLow(f"β is congruent to I only modulo s^{achieved}, not s^{l}", level=achieved, required=l)
    if not len(eps_s) or linalg.is_identity(ctx, beta):
        return ElemWord(spec)
    try:
        loc_s = localize_at(ctx, s)
    except NilpotentElement:
        # R_s is the zero ring, so ε lifts to I
        return ElemWord(spec)
    eps = lift_word_along(spec, loc_s, lift_word(eps_s))
    eps_x = scale_word_by_var(eps)
    data = [(s, _local_commutator_word(spec, loc_s, eps_x, beta, None))]
    e_b = ctx.total(e for t, e in enumerate(ctx.primitive_idempotents) if not ctx.unit_at[s, t])
    if e_b:
        loc_b = localize_at(ctx, e_b)
        data.append((e_b, _local_commutator_word(spec, loc_b, eps_x, beta, ctx.power(s, l))))
    E = poly_word_eval(eps_x)
    B = PolyMat.from_matrix(ctx, beta)
    alpha = E * B * group_inverse(spec, E) * group_inverse(spec, B)
    cert = patch(spec, alpha, data, method=method, cfg=cfg)
    word = map_word(cert.word, lambda p: p.evaluate(X, ctx.one)).as_elem_word()
    e1 = word_eval(eps.as_elem_word()) if eps.gens else linalg.identity(ctx, spec.size)
    expected = linalg.mat_mul(
        ctx,
        linalg.mat_mul(ctx, linalg.mat_mul(ctx, e1, beta), group_inverse(spec, e1)),
        group_inverse(spec, beta),
    )
    if not (word_eval(word) == expected).all():
        raise CertificationFailure("patched commutator word does not evaluate to [ε, β]")
    return word


# --- probes -------------------------------------------------------------------------


@dataclass
class ProbeReport:
    samples: int = 0
    certified: int = 0
    residuals: List[str] = field(default_factory=list)

    @property
    def fraction(self) -> float:
        return self.certified / self.samples if self.samples else 1.0

    @property
    def passed(self) -> bool:
        return self.certified == self.samples

    def lines(self) -> List[str]:
        out = [f"certified {self.certified}/{self.samples} ({self.fraction:.3f})"]
        out += [f"residual {r}" for r in self.residuals]
        return out


def commutator(spec: FormSpec, beta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    ctx = spec.ctx
    bg = linalg.mat_mul(ctx, beta, gamma)
    return linalg.mat_mul(ctx, bg, linalg.mat_mul(ctx, group_inverse(spec, beta), group_inverse(spec, gamma)))


def nilpotency_probe(spec: FormSpec, samples: int, seed: int, max_residuals: int = 5) -> ProbeReport:
    """Certify sampled commutators [β, γ] of special members as elementary."""
    ctx = spec.ctx
    _require_commutative(ctx)
    rng = make_rng(seed)
    report = ProbeReport()
    for k in range(samples):
        beta = random_special_member(spec, rng)
        gamma = random_special_member(spec, rng)
        cert = elementary_membership_semilocal(spec, commutator(spec, beta, gamma))
        report.samples += 1
        ok = cert.claim == "sigma_decomposed"
        if ok:
            report.certified += 1
        elif len(report.residuals) < max_residuals:
            report.residuals.append(f"#{k}: " + linalg.format_matrix(ctx, cert.residual).replace("\n", " | "))
        append_progress({"event": "probe", "sample": k, "certified": ok, "ring": ctx.presentation})
    logger.info("nilpotency probe on %s: %d/%d certified", spec.describe(), report.certified, report.samples)
    return report


@dataclass
class HarnessReport:
    conjugation_total: int = 0
    conjugation_passed: int = 0
    patch_total: int = 0
    patch_passed: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.conjugation_passed == self.conjugation_total and self.patch_passed == self.patch_total

    def lines(self) -> List[str]:
        return [
            f"conjugation {self.conjugation_passed}/{self.conjugation_total}",
            f"patch {self.patch_passed}/{self.patch_total}",
        ] + [f"failure {f}" for f in self.failures]


def normality_harness(
    spec: FormSpec, samples: int, seed: int, patch_samples: Optional[int] = None, cfg: Optional[Config] = None
) -> HarnessReport:
    """Both directions on one ring: conjugates of generators are certified
    elementary, and patching succeeds on locally elementary inputs."""
    ctx = spec.ctx
    _require_commutative(ctx)
    rng = make_rng(seed)
    report = HarnessReport()
    for k in range(samples):
        sigma = random_special_member(spec, rng)
        g = random_gen(spec, rng)
        report.conjugation_total += 1
        try:
            conjugate_generator(spec, sigma, g)
            report.conjugation_passed += 1
        except FormRingError as exc:
            report.failures.append(f"conjugation #{k} {g.kind}_{g.i},{g.j}: {exc}")
    for k in range(patch_samples if patch_samples is not None else max(1, samples // 10)):
        word = random_poly_word(spec, rng, length=2, degree=1)
        alpha = poly_word_eval(word)
        report.patch_total += 1
        try:
            cert = patch(spec, alpha, local_data_from_word(word), cfg=cfg)
            if poly_word_eval(cert.word) == alpha:
                report.patch_passed += 1
        except FormRingError as exc:
            report.failures.append(f"patch #{k}: {exc}")
    append_progress({"event": "normality", "ring": ctx.presentation, "passed": report.passed})
    return report
