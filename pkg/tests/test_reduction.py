import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formring import linalg
from formring.errors import (
    CosetNotUnimodular,
    IdealNotInRadical,
    LengthTooShort,
    NotCongruentToIdentity,
    NotIsotropic,
    NotUnimodular,
)
from formring.forms import FormSpec, hyperbolic_unit, is_special_member
from formring.reduction import (
    diagonal_reduce,
    elementary_membership_semilocal,
    idempotent_column_reduce,
    is_diagonal,
    linear_matrix,
    make_pivot_unit,
    reduce_unimodular_isotropic,
    unit_in_coset,
)
from formring.rings import ideal_generated, jacobson_radical, zmod
from formring.sampling import make_rng, random_unimodular_isotropic, random_word
from formring.words import word_eval

seeds = st.integers(0, 2**32 - 1)


def test_unit_in_coset_z6():
    ctx = zmod(6)
    u = unit_in_coset(ctx, ctx.parse(3), ideal_generated(ctx, [ctx.parse(2)]))
    assert ctx.label(u) == "5"


def test_unit_in_coset_needs_unimodular():
    ctx = zmod(4)
    with pytest.raises(CosetNotUnimodular):
        unit_in_coset(ctx, ctx.parse(2), ideal_generated(ctx, [ctx.parse(2)]))


@pytest.mark.parametrize("col,expected", [((2, 3), "1"), ((2, 4), "4"), ((0, 3, 0), "3")])
def test_idempotent_column_reduce(col, expected):
    ctx = zmod(6)
    vec = [ctx.parse(x) for x in col]
    moves, e = idempotent_column_reduce(ctx, vec)
    assert ctx.label(e) == expected
    out = linalg.mat_vec(ctx, linear_matrix(ctx, moves, len(vec)), np.array(vec))
    assert list(out[:-1]) == [0] * (len(vec) - 1)
    assert out[-1] == e


def test_column_reduce_too_short():
    ctx = zmod(6)
    with pytest.raises(LengthTooShort):
        idempotent_column_reduce(ctx, [ctx.one])


def test_reduce_e2n_is_empty(z4):
    cert = reduce_unimodular_isotropic(z4, z4.basis(z4.rho(z4.n)))
    assert cert.claim == "vector_to_e2n"
    assert len(cert.word) == 0


def test_reduce_rejects_bad_vectors(z4):
    with pytest.raises(NotUnimodular):
        reduce_unimodular_isotropic(z4, np.zeros(z4.size, dtype=np.int64))
    v = z4.basis(z4.row(1)) + z4.basis(z4.rho(1))
    # ⟨v, v⟩ = 1 + λ = 0 but the quadratic value 1 is outside Λ
    with pytest.raises(NotIsotropic):
        reduce_unimodular_isotropic(z4, v)


@settings(deadline=None, derandomize=True, max_examples=40)
@given(seeds, st.sampled_from(["Z/4", "Z/6", "Z/8"]))
def test_reduce_random_vectors(quadratic, seed, ring):
    spec = quadratic(ring)
    v = random_unimodular_isotropic(spec, make_rng(seed))
    cert = reduce_unimodular_isotropic(spec, v)
    assert cert.verify(v)


@settings(deadline=None, derandomize=True, max_examples=20)
@given(seeds)
def test_reduce_small_rank(quadratic, seed):
    base = quadratic("Z/6")
    spec = FormSpec.create(base.ctx, "quadratic", 2, Lambda=base.Lambda, blanket=False)
    v = random_unimodular_isotropic(spec, make_rng(seed))
    assert reduce_unimodular_isotropic(spec, v).verify(v)


def test_pivot_unit(z6):
    rng = make_rng(5)
    v = random_unimodular_isotropic(z6, rng)
    eps = make_pivot_unit(z6, v)
    moved = linalg.mat_vec(z6.ctx, word_eval(eps), v)
    assert z6.ctx.is_unit(moved[z6.row(z6.n)])


@settings(deadline=None, derandomize=True, max_examples=30)
@given(seeds, st.sampled_from(["Z/4", "Z/8"]))
def test_diagonal_reduce(quadratic, seed, ring):
    spec = quadratic(ring)
    ctx = spec.ctx
    J = jacobson_radical(ctx)
    rng = make_rng(seed)
    beta = word_eval(random_word(spec, rng, 4, level=J))
    beta = linalg.mat_mul(ctx, beta, hyperbolic_unit(spec, 1, ctx.parse(3)))
    cert = diagonal_reduce(spec, beta, J)
    assert cert.claim == "beta_theta_diagonal"
    assert cert.verify(beta)
    assert is_diagonal(cert.residual)
    assert all(int(ctx.minus(d, ctx.one)) in J for d in np.diag(cert.residual))


def test_diagonal_reduce_preconditions(z6, z8):
    ctx = z6.ctx
    with pytest.raises(IdealNotInRadical):
        diagonal_reduce(z6, linalg.identity(ctx, z6.size), ideal_generated(ctx, [ctx.parse(2)]))
    ctx = z8.ctx
    H = hyperbolic_unit(z8, 1, ctx.parse(3))
    with pytest.raises(NotCongruentToIdentity):
        diagonal_reduce(z8, H, ideal_generated(ctx, [ctx.parse(4)]))


@settings(deadline=None, derandomize=True, max_examples=40)
@given(seeds, st.sampled_from(["Z/4", "Z/6", "Z/9"]))
def test_membership_decomposes_words(quadratic, seed, ring):
    spec = quadratic(ring, lam="1" if ring == "Z/9" else "-1")
    sigma = word_eval(random_word(spec, make_rng(seed), 6))
    assert is_special_member(spec, sigma)
    cert = elementary_membership_semilocal(spec, sigma)
    assert cert.claim == "sigma_decomposed"
    assert cert.verify(sigma)


@pytest.mark.parametrize("seed", [1, 6, 17, 40])
@pytest.mark.parametrize("ring", ["Z/6", "Z/9"])
def test_membership_settles_last_pair(quadratic, ring, seed):
    spec = quadratic(ring, lam="1" if ring == "Z/9" else "-1")
    sigma = word_eval(random_word(spec, make_rng(seed), 6))
    cert = elementary_membership_semilocal(spec, sigma)
    assert cert.claim == "sigma_decomposed", cert.residual
    assert cert.verify(sigma)


@pytest.mark.parametrize("ring, lam, u", [("Z/6", "-1", "5"), ("Z/9", "1", "7"), ("Z/9", "1", "4")])
def test_membership_hyperbolic_units(quadratic, ring, lam, u):
    spec = quadratic(ring, lam=lam)
    H = hyperbolic_unit(spec, 1, spec.ctx.parse(u))
    cert = elementary_membership_semilocal(spec, H)
    assert cert.claim == "sigma_decomposed"
    assert cert.verify(H)


def test_membership_keeps_nonsquare_residual(z9):
    # over Z/9 with λ = 1 and Λ = 0 only square units reach the last pair
    H = hyperbolic_unit(z9, 1, z9.ctx.parse(2))
    cert = elementary_membership_semilocal(z9, H)
    assert cert.claim is None
    assert cert.verify(H)
    assert not linalg.is_identity(z9.ctx, cert.residual)
