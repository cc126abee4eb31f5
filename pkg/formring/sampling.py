"""Seeded samplers: ring elements, generators, words, members and isotropic vectors.

Every sampler takes a ``numpy.random.Generator`` so suites are reproducible
from a single seed.
"""

import itertools
from typing import Iterator, List, Optional, Sequence

import numpy as np

from . import linalg
from .errors import FormRingError
from .forms import (
    FormSpec,
    hyperbolic_unit,
    inner,
    is_isotropic,
    is_lambda_isotropic,
    is_special_member,
    is_unimodular,
)
from .poly import X, Poly
from .rings import Ideal
from .words import (
    HERMITIAN_KINDS,
    QUADRATIC_KINDS,
    VECTOR_KINDS,
    ElemGen,
    ElemWord,
    PolyElemWord,
    PolyGen,
    gen_matrix,
    poly_vector_gen,
    word_eval,
    word_inverse,
)

MAX_TRIES = 200


def make_rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(seed)


def _pick(rng: np.random.Generator, pool: Sequence[int]) -> int:
    return int(pool[int(rng.integers(len(pool)))])


def random_element(spec_or_ctx, rng: np.random.Generator, pool: Optional[Sequence[int]] = None) -> int:
    ctx = getattr(spec_or_ctx, "ctx", spec_or_ctx)
    if pool is None:
        return int(rng.integers(ctx.order))
    return _pick(rng, list(pool))


def _pools(spec: FormSpec, level: Optional[Ideal]):
    ctx = spec.ctx
    base = sorted(level.elements) if level is not None else list(range(ctx.order))
    lam = [x for x in base if spec.in_lambda(x)]
    lam_bar = [x for x in base if spec.in_lambda_bar(x)]
    # δ with δ + λδ̄ = 0, added to the canonical f of vector generators
    skew = [x for x in base if ctx.add[x, ctx.mul[ctx.lam, ctx.bar[x]]] == 0]
    return base, lam, lam_bar, skew


def _canonical_f(spec: FormSpec, zeta: Sequence[int]) -> int:
    ctx = spec.ctx
    return ctx.total(ctx.mul[ctx.mul[ctx.bar[z], c], z] for z, c in zip(zeta, spec.a_halves))


def random_gen(spec: FormSpec, rng: np.random.Generator, level: Optional[Ideal] = None) -> ElemGen:
    """A valid generator; with ``level`` every argument lies in that ideal."""
    ctx = spec.ctx
    n, r = spec.n, spec.r
    base, lam, lam_bar, skew = _pools(spec, level)
    kinds = QUADRATIC_KINDS if not spec.hermitian else HERMITIAN_KINDS
    for _ in range(MAX_TRIES):
        kind = kinds[int(rng.integers(len(kinds)))]
        lo = r + 1 if kind in ("he", "hr", "hm", "hrv") else 1
        i = int(rng.integers(lo, n + 1))
        if kind in ("hm", "hrv"):
            zeta = tuple(_pick(rng, base) for _ in range(r))
            f = int(ctx.add[_canonical_f(spec, zeta), _pick(rng, skew)])
            g = ElemGen(kind, i, 0, zeta=zeta, f=f)
        else:
            j = int(rng.integers(r + 1 if kind == "hr" else 1, n + 1))
            if kind in ("qe", "he") and i == j:
                continue
            pool = base
            if i == j:
                pool = lam if kind in ("qr", "hr") else lam_bar
            g = ElemGen(kind, i, j, _pick(rng, pool))
        try:
            gen_matrix(spec, g)
        except FormRingError:
            continue
        return g
    raise RuntimeError(f"could not sample a generator for {spec.describe()}")


def random_word(spec: FormSpec, rng: np.random.Generator, length: int, level: Optional[Ideal] = None) -> ElemWord:
    return ElemWord(spec, tuple(random_gen(spec, rng, level) for _ in range(length)))


def random_special_member(spec: FormSpec, rng: np.random.Generator, length: int = 4) -> np.ndarray:
    """An elementary word times a hyperbolic unit, when that stays special."""
    ctx = spec.ctx
    sigma = word_eval(random_word(spec, rng, length))
    units = [x for x in range(ctx.order) if ctx.is_unit(x)]
    i = int(rng.integers(1, spec.n + 1))
    H = hyperbolic_unit(spec, i, _pick(rng, units))
    candidate = linalg.mat_mul(ctx, sigma, H)
    return candidate if is_special_member(spec, candidate) else sigma


def random_unimodular_isotropic(spec: FormSpec, rng: np.random.Generator) -> np.ndarray:
    """Rejection sampling on ⟨v,v⟩ = 0, falling back to the orbit of e_2n."""
    ctx = spec.ctx
    check = is_isotropic if spec.hermitian else is_lambda_isotropic
    for _ in range(MAX_TRIES):
        v = rng.integers(ctx.order, size=spec.size).astype(np.int64)
        if is_unimodular(spec, v) and check(spec, v):
            return v
    w = random_word(spec, rng, 4)
    return linalg.mat_vec(ctx, word_eval(w), spec.basis(spec.rho(spec.n)))


def random_orthogonal(spec: FormSpec, rng: np.random.Generator, v: np.ndarray) -> np.ndarray:
    ctx = spec.ctx
    for _ in range(MAX_TRIES):
        w = rng.integers(ctx.order, size=spec.size).astype(np.int64)
        if inner(spec, v, w) == 0:
            return w
    return np.zeros(spec.size, dtype=np.int64)


def _random_poly(spec: FormSpec, rng: np.random.Generator, const: int, degree: int, pool: Sequence[int]) -> Poly:
    ctx = spec.ctx
    out = Poly.const(ctx, const)
    for k in range(1, degree + 1):
        out = out + Poly.var(ctx, X, coef=_pick(rng, pool), power=k)
    return out


def random_poly_word(spec: FormSpec, rng: np.random.Generator, length: int, degree: int = 2) -> PolyElemWord:
    """w(X)·w(0)^{-1} for a random word w over R[X], so the result is I at X = 0."""
    ctx = spec.ctx
    base, lam, lam_bar, _ = _pools(spec, None)
    gens: List[PolyGen] = []
    for _ in range(length):
        g = random_gen(spec, rng)
        if g.is_vector:
            zeta = [_random_poly(spec, rng, z, degree, base) for z in g.zeta]
            gens.append(poly_vector_gen(spec, g.kind, g.i, zeta))
        else:
            pool = base
            if g.i == g.j and g.kind in ("qr", "hr"):
                pool = lam
            elif g.i == g.j:
                pool = lam_bar
            gens.append(PolyGen(g.kind, g.i, g.j, arg=_random_poly(spec, rng, g.arg, degree, pool)))
    word = PolyElemWord(spec, tuple(gens))
    at_zero = PolyElemWord(spec, tuple(_evaluate_gen(g, 0) for g in gens))
    return word + word_inverse(at_zero)


def _evaluate_gen(g: PolyGen, c: int) -> PolyGen:
    if g.is_vector:
        return PolyGen(g.kind, g.i, 0, zeta=tuple(z.evaluate(X, c) for z in g.zeta), f=g.f.evaluate(X, c))
    return PolyGen(g.kind, g.i, g.j, arg=g.arg.evaluate(X, c))


def enumerate_gens(spec: FormSpec) -> Iterator[ElemGen]:
    """Every generator with admissible indices and arguments; small rings only."""
    ctx = spec.ctx
    n, r = spec.n, spec.r
    base, lam, lam_bar, skew = _pools(spec, None)
    kinds = QUADRATIC_KINDS if not spec.hermitian else HERMITIAN_KINDS
    for kind in kinds:
        if kind in VECTOR_KINDS:
            for i in range(r + 1, n + 1):
                for zeta in itertools.product(base, repeat=r):
                    f0 = _canonical_f(spec, zeta)
                    for d in skew:
                        yield ElemGen(kind, i, 0, zeta=zeta, f=int(ctx.add[f0, d]))
            continue
        lo_i = r + 1 if kind in ("he", "hr") else 1
        lo_j = r + 1 if kind == "hr" else 1
        for i in range(lo_i, n + 1):
            for j in range(lo_j, n + 1):
                if kind in ("qe", "he") and i == j:
                    continue
                pool = base
                if i == j:
                    pool = lam if kind in ("qr", "hr") else lam_bar
                for a in pool:
                    yield ElemGen(kind, i, j, a)
