"""Transitivity over finite (hence semilocal) rings.

Everything here works by left-multiplying a vector or matrix by elementary
generators and recording them; the recorded word is re-evaluated before any
certificate leaves the module.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .certificates import Certificate, format_gen
from .errors import (
    CertificationFailure,
    CosetNotUnimodular,
    DimensionMismatch,
    FormRingError,
    IdealNotInRadical,
    LengthTooShort,
    MembershipFailure,
    NonCommutativeBase,
    NotCongruentToIdentity,
    NotIsotropic,
    NotUnimodular,
    PresentationInvalid,
    UnsupportedSize,
)
from .forms import (
    FormSpec,
    group_inverse,
    is_isotropic,
    is_lambda_isotropic,
    is_special_member,
    is_unimodular,
)
from .log import get_logger
from .rings import Ideal, RingCtx, additive_closure, is_unit_ideal, jacobson_radical, semisimple_quotient
from .words import ElemGen, ElemWord, gen_matrix, word_eval, word_inverse

logger = get_logger(__name__)

CLAIMS = ("vector_to_e2n", "beta_theta_diagonal", "sigma_decomposed")


@dataclass
class ReductionCertificate:
    """A word plus the equation it witnesses.

    ``claim`` is None for a partial result: then ``eval(word)·residual``
    reproduces the input and the residual is what could not be decomposed.
    """

    word: ElemWord
    claim: Optional[str]
    residual: Optional[np.ndarray] = None
    trace: List[str] = field(default_factory=list)

    @property
    def spec(self) -> FormSpec:
        return self.word.spec

    def verify(self, subject: np.ndarray) -> bool:
        spec, ctx = self.spec, self.spec.ctx
        subject = np.asarray(subject, dtype=np.int64)
        E = word_eval(self.word)
        if self.claim == "vector_to_e2n":
            return bool((linalg.mat_vec(ctx, E, subject) == spec.basis(spec.rho(spec.n))).all())
        if self.claim == "beta_theta_diagonal":
            if self.residual is None or not is_diagonal(self.residual):
                return False
            return bool((linalg.mat_mul(ctx, subject, E) == self.residual).all())
        if self.claim == "sigma_decomposed":
            return bool((E == subject).all())
        if self.residual is None:
            return False
        return bool((linalg.mat_mul(ctx, E, self.residual) == subject).all())

    def to_certificate(self) -> Certificate:
        return Certificate(self.word, self.claim, self.residual, list(self.trace))


@dataclass(frozen=True)
class LinearMove:
    """Row operation ``row_i += a·row_j`` (1-based), the matrix I + a·E_ij."""

    i: int
    j: int
    a: int


def is_diagonal(M: np.ndarray) -> bool:
    M = np.asarray(M)
    return bool((M[~np.eye(M.shape[0], dtype=bool)] == 0).all())


def linear_matrix(ctx: RingCtx, moves: Sequence[LinearMove], k: int) -> np.ndarray:
    out = linalg.identity(ctx, k)
    for m in moves:
        step = linalg.identity(ctx, k)
        step[m.i - 1, m.j - 1] = ctx.add[step[m.i - 1, m.j - 1], m.a]
        out = linalg.mat_mul(ctx, out, step)
    return out


def whitehead_moves(ctx: RingCtx, i: int, j: int, u: int) -> List[LinearMove]:
    """diag(u at i, u^{-1} at j) as w(u)·w(−1), w(u) = e_ij(u)e_ji(−u^{-1})e_ij(u)."""
    one, minus_one = ctx.one, int(ctx.neg[ctx.one])
    u_inv = ctx.inverse(u)
    return [
        LinearMove(i, j, u),
        LinearMove(j, i, int(ctx.neg[u_inv])),
        LinearMove(i, j, u),
        LinearMove(i, j, minus_one),
        LinearMove(j, i, one),
        LinearMove(i, j, minus_one),
    ]


def _require_commutative(ctx: RingCtx) -> None:
    if not ctx.is_commutative:
        raise NonCommutativeBase(f"reduction needs a commutative ring, {ctx.presentation} is not")


def _unit_factors(ctx: RingCtx, x) -> FrozenSet[int]:
    return frozenset(t for t in range(len(ctx.primitive_idempotents)) if ctx.unit_at[int(x), t])


def _support(ctx: RingCtx, x: int) -> int:
    """The idempotent e with Rx = Re (semisimple rings only)."""
    return ctx.total(e for t, e in enumerate(ctx.primitive_idempotents) if ctx.unit_at[int(x), t])


# --- unit lifting and column reduction -------------------------------------------


def unit_in_coset(ctx: RingCtx, a: int, I: Ideal) -> int:
    """A unit u with u − a ∈ I, corrected one local factor at a time."""
    a = int(a)
    members = sorted(I.elements)
    if not is_unit_ideal(ctx, [a] + members):
        raise CosetNotUnimodular(f"R{ctx.label(a)} + {I.describe(ctx)} is not the unit ideal", a=ctx.label(a))
    u = a
    for t, e in enumerate(ctx.primitive_idempotents):
        if ctx.unit_at[a, t]:
            continue
        hit = next((i for i in members if ctx.unit_at[ctx.add[a, i], t]), None)
        if hit is None:
            raise CosetNotUnimodular(f"no element of {ctx.label(a)} + I is a unit at factor {t}", a=ctx.label(a))
        u = int(ctx.add[u, ctx.mul[e, hit]])
    assert ctx.is_unit(u) and int(ctx.minus(u, a)) in I, "coset correction left the coset"
    return u


def idempotent_column_reduce(ctx: RingCtx, col: Sequence[int]) -> Tuple[List[LinearMove], int]:
    """Moves ε (product order) with ε·col = (0,…,0,e), e idempotent, Re = Σ R·col_i."""
    if int(ctx.nil_mask.sum()) != 1:
        raise PresentationInvalid(f"{ctx.presentation} is not semisimple; reduce modulo the radical first")
    col = [int(x) for x in col]
    k = len(col)
    if k < 2:
        raise LengthTooShort(f"column reduction needs length >= 2, got {k}", length=k)
    applied: List[LinearMove] = []

    def move(i: int, j: int, a: int) -> None:
        step = int(ctx.mul[a, col[j - 1]])
        if a == 0 or step == 0:
            return
        applied.append(LinearMove(i, j, int(a)))
        col[i - 1] = int(ctx.add[col[i - 1], step])

    one = ctx.one
    # gather the whole ideal into the last entry
    for j in range(1, k):
        move(k, j, int(ctx.minus(one, _support(ctx, col[-1]))))
    e = _support(ctx, col[-1])
    u = int(ctx.add[col[-1], ctx.minus(one, e)])
    u_inv = ctx.inverse(u)
    for j in range(1, k):
        move(j, k, int(ctx.neg[ctx.mul[col[j - 1], u_inv]]))
    if u != one:
        for m in reversed(whitehead_moves(ctx, k - 1, k, u)):
            move(m.i, m.j, m.a)
    assert all(x == 0 for x in col[:-1]) and col[-1] == e, "column reduction did not reach (0,...,0,e)"
    return list(reversed(applied)), e


# --- the move recorder ---------------------------------------------------------


class _Mover:
    """Realises abstract moves e/r/l(i,j,a) as generators and applies them on the left.

    e(i,j,a): x_i += a·x_j, y_j −= ā·y_i
    r(i,j,a): x_i += a·y_j, x_j −= λā·y_i
    l(i,j,a): y_i += a·x_j, y_j −= λ̄ā·x_i
    Hermitian moves touching the first r indices go through hm/hrv, which
    carry extra terms; callers only rely on the coordinates listed above.
    """

    def __init__(
        self,
        spec: FormSpec,
        state: np.ndarray,
        level: Optional[Ideal] = None,
        check_isotropy: bool = False,
    ) -> None:
        self.spec = spec
        self.ctx = spec.ctx
        self.state = np.array(state, dtype=np.int64)
        self.level = level
        self.check_isotropy = check_isotropy
        self.applied: List[ElemGen] = []
        self.trace: List[str] = []
        self.stage = ""

    # --- generator construction ---------------------------------------------
    def _vector(self, kind: str, i: int, zeta: Sequence[int], f: Optional[int] = None) -> ElemGen:
        ctx = self.ctx
        if f is None:
            # Σ ζ̄_k c_k ζ_k stays inside any ideal that holds ζ
            f = ctx.total(ctx.mul[ctx.mul[ctx.bar[z], c], z] for z, c in zip(zeta, self.spec.a_halves))
        return ElemGen(kind, i, 0, zeta=tuple(int(z) for z in zeta), f=int(f))

    def _zeta(self, k: int, a: int) -> Tuple[int, ...]:
        out = [0] * self.spec.r
        out[k - 1] = int(a)
        return tuple(out)

    def build(self, move: str, i: int, j: int, a: int) -> Optional[ElemGen]:
        a = int(a)
        if a == 0:
            return None
        spec, ctx = self.spec, self.ctx
        if not spec.hermitian:
            return ElemGen({"e": "qe", "r": "qr", "l": "ql"}[move], i, j, a)
        r = spec.r
        if move == "e":
            if i > r:
                return ElemGen("he", i, j, a)
            if j > r:
                return self._vector("hm", j, self._zeta(i, a))
        elif move == "r":
            if i == j:
                if i > r and spec.in_lambda(a):
                    return ElemGen("hr", i, i, a)
                if i > r:
                    return self._vector("hrv", i, (0,) * r, f=a)
            elif i > r and j > r:
                return ElemGen("hr", i, j, a)
            elif i <= r < j:
                return self._vector("hrv", j, self._zeta(i, a))
            elif j <= r < i:
                return self._vector("hrv", i, self._zeta(j, ctx.neg[ctx.mul[ctx.lam, ctx.bar[a]]]))
        else:
            if i != j or spec.in_lambda_bar(a) or i <= r:
                return ElemGen("hl", i, j, a)
            return self._vector("hm", i, (0,) * r, f=ctx.bar[a])
        raise UnsupportedSize(f"move {move}({i},{j}) has both indices among the first r={r}", i=i, j=j)

    # --- application ----------------------------------------------------------
    def apply(self, g: Optional[ElemGen]) -> None:
        if g is None:
            return
        spec, ctx = self.spec, self.ctx
        M = gen_matrix(spec, g)
        if self.level is not None:
            step = linalg.mat_sub(ctx, M, linalg.identity(ctx, spec.size))
            if not self.level.mask(ctx.order)[step].all():
                raise CertificationFailure(f"factor {format_gen(spec, g)} leaves the congruence level", gen=g)
        if self.state.ndim == 1:
            self.state = linalg.mat_vec(ctx, M, self.state)
            if self.check_isotropy and not is_isotropic(spec, self.state):
                raise CertificationFailure(f"isotropy lost after {format_gen(spec, g)}", gen=g)
        else:
            self.state = linalg.mat_mul(ctx, M, self.state)
        self.applied.append(g)
        self.trace.append(f"{self.stage}: {format_gen(spec, g)}" if self.stage else format_gen(spec, g))

    def e(self, i: int, j: int, a) -> None:
        self.apply(self.build("e", i, j, a))

    def r(self, i: int, j: int, a) -> None:
        self.apply(self.build("r", i, j, a))

    def l(self, i: int, j: int, a) -> None:
        self.apply(self.build("l", i, j, a))

    def product(self, moves: Sequence[Tuple[str, int, int, int]]) -> None:
        """Left-multiply by the product of ``moves`` (validated before any is applied)."""
        gens = [self.build(*m) for m in moves]
        for g in gens:
            if g is not None:
                gen_matrix(self.spec, g)
        for g in reversed(gens):
            self.apply(g)

    def x(self, i: int) -> int:
        return int(self.state[self.spec.row(i)])

    def y(self, i: int) -> int:
        return int(self.state[self.spec.rho(i)])

    def word(self) -> ElemWord:
        # state = g_L ··· g_1 · input
        return ElemWord(self.spec, tuple(reversed(self.applied)))


def _prefer_hyperbolic(spec: FormSpec, idxs: Sequence[int]) -> Optional[int]:
    """Least index outside the first r, else least index, else None."""
    idxs = sorted(idxs)
    outside = [i for i in idxs if i > spec.r]
    if outside:
        return outside[0]
    return idxs[0] if idxs else None


def _partner(spec: FormSpec, k: int) -> int:
    return _prefer_hyperbolic(spec, [i for i in range(1, spec.n + 1) if i != k])


# --- pivot ------------------------------------------------------------------------


def _grow_pivot(mv: _Mover, t: int, good: FrozenSet[int]) -> None:
    """Make x_n a unit at factor t without losing the factors in ``good``."""
    spec, ctx = mv.spec, mv.ctx
    n = spec.n
    es = ctx.primitive_idempotents
    et = es[t]
    rest = range(1, n)
    hit = _prefer_hyperbolic(spec, [i for i in rest if ctx.unit_at[mv.x(i), t]])
    if hit is not None:
        mv.e(n, hit, et)
        return
    hit = _prefer_hyperbolic(spec, [i for i in rest if ctx.unit_at[mv.y(i), t]])
    if hit is not None:
        mv.r(n, hit, et)
        return
    # only y_n is a unit here: move it into some x_j first
    j = _partner(spec, n)
    tb = es.index(int(ctx.bar[et]))
    if tb != t and tb in good:
        shifted = ctx.minus(mv.x(n), ctx.mul[ctx.lam, mv.y(j)])
        if not ctx.unit_at[shifted, tb]:
            eb = es[tb]
            u = int(ctx.add[ctx.mul[eb, mv.x(n)], ctx.minus(ctx.one, eb)])
            mv.l(j, n, ctx.neg[ctx.mul[ctx.mul[eb, ctx.inverse(u)], mv.y(j)]])
    mv.r(j, n, et)
    mv.e(n, j, et)


def _pivot(mv: _Mover) -> None:
    spec, ctx = mv.spec, mv.ctx
    n = spec.n
    if ctx.is_unit(mv.x(n)):
        return
    mv.stage = "column"
    quot, proj, section = semisimple_quotient(ctx)
    moves, e = idempotent_column_reduce(quot, proj[mv.state[:n]])
    for m in reversed(moves):
        mv.e(m.i, m.j, section[m.a])
    logger.debug("top half reduced to idempotent %s", quot.label(e))

    mv.stage = "pivot"
    factors = frozenset(range(len(ctx.primitive_idempotents)))
    good = _unit_factors(ctx, mv.x(n))
    while good != factors:
        t = min(factors - good)
        _grow_pivot(mv, t, good)
        grown = _unit_factors(ctx, mv.x(n))
        if not (good < grown and t in grown):
            raise CertificationFailure(f"pivot ideal did not grow at factor {t}", factor=t)
        good = grown


def make_pivot_unit(spec: FormSpec, v: np.ndarray) -> ElemWord:
    """Word ε with coordinate n of eval(ε)·v a unit."""
    _require_commutative(spec.ctx)
    if spec.n < 2:
        raise UnsupportedSize(f"pivoting needs 2n >= 4, got 2n={spec.size}", n=spec.n)
    v = _check_vector(spec, v)
    mv = _Mover(spec, v)
    _pivot(mv)
    return mv.word()


def _check_vector(spec: FormSpec, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (spec.size,):
        raise DimensionMismatch(f"expected a vector of length {spec.size}, got {v.shape}", shape=v.shape)
    if not is_unimodular(spec, v):
        raise NotUnimodular("vector entries do not generate the unit ideal")
    return v


# --- transitivity ----------------------------------------------------------------


def _finish(mv: _Mover) -> None:
    """From a unit pivot x_n down to e_2n."""
    spec, ctx = mv.spec, mv.ctx
    n = spec.n
    one, minus_one = ctx.one, int(ctx.neg[ctx.one])
    u = mv.x(n)
    mv.stage = "normalize"
    if u != one:
        j = _partner(spec, n)
        mv.product([("e", m.i, m.j, m.a) for m in whitehead_moves(ctx, j, n, u)])
    assert mv.x(n) == one, "pivot was not normalised to 1"

    mv.stage = "clear"
    for i in range(1, n):
        mv.e(i, n, ctx.neg[mv.x(i)])
    for i in range(1, n):
        mv.l(i, n, ctx.neg[mv.y(i)])
    # isotropy: ȳ_n + λy_n = 0
    assert ctx.add[ctx.bar[mv.y(n)], ctx.mul[ctx.lam, mv.y(n)]] == 0, "isotropy violated before the last clear"
    mv.l(n, n, ctx.neg[mv.y(n)])

    mv.stage = "swap"
    j = _partner(spec, n)
    mv.l(j, n, one)
    mv.r(n, j, minus_one)
    mv.e(j, n, minus_one)
    mv.e(n, j, one)


def reduce_unimodular_isotropic(spec: FormSpec, v: np.ndarray) -> ReductionCertificate:
    """Certificate ε with eval(ε)·v = e_2n for unimodular isotropic v."""
    ctx = spec.ctx
    _require_commutative(ctx)
    if spec.n < 2:
        raise UnsupportedSize(f"transitivity needs 2n >= 4, got 2n={spec.size}", n=spec.n)
    v = _check_vector(spec, v)
    isotropic = is_isotropic(spec, v) if spec.hermitian else is_lambda_isotropic(spec, v)
    if not isotropic:
        raise NotIsotropic("vector is not (Lambda-)isotropic")
    target = spec.basis(spec.rho(spec.n))
    if (v == target).all():
        return ReductionCertificate(ElemWord(spec), "vector_to_e2n", trace=["already e_2n"])
    mv = _Mover(spec, v, check_isotropy=True)
    _pivot(mv)
    _finish(mv)
    word = mv.word()
    if not (linalg.mat_vec(ctx, word_eval(word), v) == target).all():
        raise CertificationFailure("reduction word does not send v to e_2n")
    logger.debug("reduced vector with %d generators over %s", len(word), ctx.presentation)
    return ReductionCertificate(word, "vector_to_e2n", trace=mv.trace)


# --- diagonal sweeps -------------------------------------------------------------


def _clear_pair(mv: _Mover, k: int) -> None:
    """Row operations making rows and columns ι_k, ρ_k of the state diagonal.

    Needs a unit at (ι_k, ι_k); the ρ_k row and the ι_k row then follow from
    the form equation, which is re-checked at the end.
    """
    spec, ctx = mv.spec, mv.ctx
    pi, pr = spec.row(k), spec.rho(k)

    def X(row: int, col: int) -> int:
        return int(mv.state[row, col])

    d = X(pi, pi)
    d_inv = ctx.inverse(d)
    others = [i for i in range(1, spec.n + 1) if i != k]
    for i in others:
        mv.e(i, k, ctx.neg[ctx.mul[X(spec.row(i), pi), d_inv]])
    for i in others:
        mv.l(i, k, ctx.neg[ctx.mul[X(spec.rho(i), pi), d_inv]])
    mv.l(k, k, ctx.neg[ctx.mul[X(pr, pi), d_inv]])
    dbar = int(ctx.bar[d])
    for i in others:
        mv.r(i, k, ctx.neg[ctx.mul[X(spec.row(i), pr), dbar]])
    for i in others:
        mv.e(k, i, ctx.mul[ctx.bar[X(spec.rho(i), pr)], d])
    mv.r(k, k, ctx.neg[ctx.mul[X(pi, pr), dbar]])

    lines = np.zeros(spec.size, dtype=bool)
    lines[[pi, pr]] = True
    off = mv.state.copy()
    off[pi, pi] = off[pr, pr] = 0
    if off[lines, :].any() or off[:, lines].any():
        raise CertificationFailure(f"pair {k} did not split off", index=k)


def diagonal_reduce(spec: FormSpec, beta: np.ndarray, I: Ideal) -> ReductionCertificate:
    """θ with β·eval(θ) diagonal, every factor of θ congruent to I mod ``I``.

    Works on β^{-1} by row operations ε·β^{-1} = D and returns θ = ε^{-1}.
    Hermitian forms keep the first r indices as a block when the long root
    there is unavailable; the result is then partial.
    """
    ctx = spec.ctx
    beta = np.asarray(beta, dtype=np.int64)
    J = jacobson_radical(ctx)
    if not I.elements <= J.elements:
        raise IdealNotInRadical(f"{I.describe(ctx)} is not inside the Jacobson radical of {ctx.presentation}")
    if not is_special_member(spec, beta):
        raise MembershipFailure("beta is not in the special group", block="det")
    diff = linalg.mat_sub(ctx, beta, linalg.identity(ctx, spec.size))
    if not I.mask(ctx.order)[diff].all():
        raise NotCongruentToIdentity(f"beta is not congruent to I modulo {I.describe(ctx)}")

    mv = _Mover(spec, group_inverse(spec, beta), level=I)
    for k in range(spec.n, 0, -1):
        mv.stage = f"sweep {k}"
        if spec.hermitian and k <= spec.r:
            try:
                _clear_pair(mv, k)
            except FormRingError as exc:
                logger.debug("hermitian block at %d left as residual: %s", k, exc)
                break
        else:
            _clear_pair(mv, k)
    theta = word_inverse(mv.word())
    D = linalg.mat_mul(ctx, beta, word_eval(theta))
    if not (D == group_inverse(spec, mv.state)).all():
        raise CertificationFailure("diagonal sweep does not re-evaluate")
    if not is_diagonal(D):
        return ReductionCertificate(theta, None, residual=D, trace=mv.trace)
    ones = linalg.mat_sub(ctx, np.diag(D), np.full(spec.size, ctx.one))
    if not I.mask(ctx.order)[ones].all():
        raise CertificationFailure("diagonal entries are not congruent to 1")
    return ReductionCertificate(theta, "beta_theta_diagonal", residual=D, trace=mv.trace)


# --- membership ------------------------------------------------------------------


def _peel(mv: _Mover, k: int) -> None:
    """Split off index k: send column ρ_k to e_ρk, then clear the pair."""
    spec = mv.spec
    sub = replace(spec, n=k, blanket=False)
    idx = [spec.row(i) for i in range(1, k + 1)] + [spec.rho(i) for i in range(1, k + 1)]
    v = mv.state[idx, spec.rho(k)]
    cert = reduce_unimodular_isotropic(sub, v)
    mv.stage = f"peel {k}"
    for g in reversed(cert.word.gens):
        mv.apply(g)
    _clear_pair(mv, k)


Block = Tuple[int, int, int, int]

# Largest pair group enumerated before falling back to the direct sweep.
PAIR_GROUP_CAP = 60000


def _pair_block(spec: FormSpec, M: np.ndarray, p: int) -> Block:
    pi, pr = spec.row(p), spec.rho(p)
    return (int(M[pi, pi]), int(M[pi, pr]), int(M[pr, pi]), int(M[pr, pr]))


def _block_mul(ctx: RingCtx, A: Block, B: Block) -> Block:
    a, b, c, d = A
    e, f, g, h = B
    add, mul = ctx.add, ctx.mul
    return (
        int(add[mul[a, e], mul[b, g]]),
        int(add[mul[a, f], mul[b, h]]),
        int(add[mul[c, e], mul[d, g]]),
        int(add[mul[c, f], mul[d, h]]),
    )


def _block_inverse(ctx: RingCtx, B: Block) -> Optional[Block]:
    a, b, c, d = B
    det = int(ctx.minus(ctx.mul[a, d], ctx.mul[b, c]))
    if not ctx.is_unit(det):
        return None
    k = ctx.inverse(det)
    return (int(ctx.mul[k, d]), int(ctx.mul[k, ctx.neg[b]]), int(ctx.mul[k, ctx.neg[c]]), int(ctx.mul[k, a]))


def _transfer_moves(ctx: RingCtx, p: int, q: int, v: int) -> List[Tuple[str, int, int, int]]:
    """Moves whose product is h_p(v·v̄): a short-root Whitehead on (p, q) then a linear one on (q, p)."""
    lb = ctx.lam_bar
    one, minus_one = ctx.one, int(ctx.neg[ctx.one])
    vb_inv = ctx.inverse(ctx.bar[v])
    short = [
        ("r", p, q, v),
        ("l", p, q, int(ctx.mul[lb, vb_inv])),
        ("r", p, q, v),
        ("r", p, q, minus_one),
        ("l", p, q, int(ctx.neg[ctx.mul[lb, one]])),
        ("r", p, q, minus_one),
    ]
    linear = [("e", m.i, m.j, m.a) for m in whitehead_moves(ctx, q, p, vb_inv)]
    return linear + short


def _pair_generators(spec: FormSpec, p: int, q: Optional[int]) -> List[Tuple[Tuple[ElemGen, ...], Block]]:
    """Certified elementary products that differ from I only on the pair (ι_p, ρ_p).

    Each entry is (generators in application order, its 2x2 block).
    """
    ctx = spec.ctx
    ident = linalg.identity(ctx, spec.size)
    keep = np.ones(spec.size, dtype=bool)
    keep[[spec.row(p), spec.rho(p)]] = False

    def realise(moves) -> Optional[Tuple[Tuple[ElemGen, ...], Block]]:
        mv = _Mover(spec, ident)
        try:
            mv.product(moves)
        except FormRingError:
            return None
        if not mv.applied:
            return None
        off = mv.state != ident
        if off[keep, :].any() or off[:, keep].any():
            return None
        return tuple(mv.applied), _pair_block(spec, mv.state, p)

    out: List[Tuple[Tuple[ElemGen, ...], Block]] = []
    for move in ("r", "l"):
        # a root subgroup is additive in its argument: keep a generating set
        span: set = {0}
        for a in range(1, ctx.order):
            if a in span:
                continue
            got = realise([(move, p, p, a)])
            if got is None:
                continue
            out.append(got)
            span = set(additive_closure(ctx, list(span) + [a]).tolist())
    if q is not None:
        seen = {(ctx.one, 0, 0, ctx.one)}
        for v in range(ctx.order):
            if not ctx.is_unit(v) or v == ctx.one:
                continue
            got = realise(_transfer_moves(ctx, p, q, v))
            if got is not None and got[1] not in seen:
                seen.add(got[1])
                out.append(got)
    return out


@lru_cache(maxsize=32)
def _pair_group(spec: FormSpec, p: int, q: Optional[int]):
    """Breadth-first closure of the pair generators, or None past PAIR_GROUP_CAP.

    Returns (generators, parents) where parents maps a block to the block it
    was reached from and the generator index used.
    """
    ctx = spec.ctx
    gens = _pair_generators(spec, p, q)
    ident = (ctx.one, 0, 0, ctx.one)
    parents = {ident: (None, -1)}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for k, (_, G) in enumerate(gens):
                h = _block_mul(ctx, G, g)
                if h in parents:
                    continue
                parents[h] = (g, k)
                nxt.append(h)
        if len(parents) > PAIR_GROUP_CAP:
            logger.info("pair group at %d over %s exceeds %d elements", p, ctx.presentation, PAIR_GROUP_CAP)
            return None
        frontier = nxt
    logger.debug("pair group at %d over %s has %d elements from %d generators", p, ctx.presentation, len(parents), len(gens))
    return gens, parents


def _pair_path(parents, target: Block) -> List[int]:
    """Generator indices, in application order, whose product is ``target``."""
    path = []
    node = target
    while True:
        prev, k = parents[node]
        if prev is None:
            return list(reversed(path))
        path.append(k)
        node = prev


def _settle_pair_direct(mv: _Mover, p: int) -> None:
    """Pivot, clear and Whitehead-normalise the pair without enumerating its group."""
    spec, ctx = mv.spec, mv.ctx
    pi, pr = spec.row(p), spec.rho(p)
    if not ctx.is_unit(mv.state[pi, pi]):
        gamma = int(mv.state[pr, pi])
        for c in range(1, ctx.order):
            if not ctx.is_unit(ctx.add[mv.state[pi, pi], ctx.mul[c, gamma]]):
                continue
            try:
                mv.product([("r", p, p, c)])
                break
            except FormRingError:
                continue
        else:
            return
    _clear_pair(mv, p)
    alpha = int(mv.state[pi, pi])
    if alpha == ctx.one or alpha != int(ctx.bar[alpha]):
        return
    u = ctx.inverse(alpha)
    moves = [("r" if m.i == 1 else "l", p, p, m.a) for m in whitehead_moves(ctx, 1, 2, u)]
    try:
        mv.product(moves)
    except FormRingError as exc:
        logger.debug("diagonal %s at pair %d kept as residual: %s", ctx.label(alpha), p, exc)


def _settle_pair(mv: _Mover, p: int, q: Optional[int] = None) -> None:
    """Reduce a state that differs from I only on the pair (ι_p, ρ_p).

    The pair block is looked up in the group generated by long roots at p and
    by norm transfers through the helper index ``q``; a block outside that
    group stays as the residual.
    """
    spec, ctx = mv.spec, mv.ctx
    mv.stage = f"pair {p}"
    if linalg.is_identity(ctx, mv.state):
        return
    group = _pair_group(spec, p, q)
    if group is None:
        _settle_pair_direct(mv, p)
        return
    gens, parents = group
    inv = _block_inverse(ctx, _pair_block(spec, mv.state, p))
    if inv is None or inv not in parents:
        logger.debug("pair %d block is outside its elementary pair group", p)
        return
    for k in _pair_path(parents, inv):
        for g in gens[k][0]:
            mv.apply(g)
    if not linalg.is_identity(ctx, mv.state):
        raise CertificationFailure(f"pair {p} did not settle to the identity", index=p)


def _helper_index(spec: FormSpec, p: int) -> Optional[int]:
    """Least hyperbolic index other than p, used for norm transfers."""
    return next((i for i in range(spec.r + 1, spec.n + 1) if i != p), None)


def _swap_word(spec: FormSpec) -> ElemWord:
    """Elementary Weyl element exchanging the index pairs 1 and r+1."""
    mv = _Mover(spec, linalg.identity(spec.ctx, spec.size))
    one, minus_one = spec.ctx.one, int(spec.ctx.neg[spec.ctx.one])
    q = spec.r + 1
    mv.product([("e", 1, q, one), ("e", q, 1, minus_one), ("e", 1, q, one)])
    return mv.word()


def elementary_membership_semilocal(spec: FormSpec, sigma: np.ndarray) -> ReductionCertificate:
    """Factor σ into elementary generators by peeling one index pair at a time.

    A complete factorization has claim ``sigma_decomposed``; otherwise the
    certificate carries a residual R with eval(word)·R = σ.
    """
    ctx = spec.ctx
    _require_commutative(ctx)
    sigma = np.asarray(sigma, dtype=np.int64)
    if not is_special_member(spec, sigma):
        raise MembershipFailure("sigma is not in the special group", block="det")
    mv = _Mover(spec, sigma)
    floor = spec.r + 1 if spec.hermitian else 2
    for k in range(spec.n, floor - 1, -1):
        _peel(mv, k)
    head = word_inverse(mv.word())
    tail = ElemWord(spec)
    residual = mv.state
    if spec.hermitian and spec.r == 1 and not linalg.is_identity(ctx, residual):
        # the long root at index 1 is not a generator: work at index 2 instead
        W = _swap_word(spec)
        Wm = word_eval(W)
        conj = _Mover(spec, linalg.mat_mul(ctx, linalg.mat_mul(ctx, Wm, residual), group_inverse(spec, Wm)))
        _settle_pair(conj, 2, _helper_index(spec, 2))
        tail = word_inverse(W) + word_inverse(conj.word()) + W
        residual = linalg.mat_mul(ctx, linalg.mat_mul(ctx, group_inverse(spec, Wm), conj.state), Wm)
        mv.trace += conj.trace
    elif not spec.hermitian:
        _settle_pair(mv, 1, _helper_index(spec, 1))
        head = word_inverse(mv.word())
        residual = mv.state
    word = head + tail
    done = linalg.is_identity(ctx, residual)
    cert = ReductionCertificate(word, "sigma_decomposed" if done else None, None if done else residual, mv.trace)
    if not cert.verify(sigma):
        raise CertificationFailure("membership certificate does not re-evaluate to sigma")
    if not done:
        logger.info("membership left a residual block over %s", ctx.presentation)
    return cert
