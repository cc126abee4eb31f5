from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formring import linalg
from formring.certificates import Certificate, format_certificate, parse_certificate, parse_word
from formring.errors import ArgNotInLambda, IndexOutOfRange, PresentationInvalid
from formring.forms import FormSpec, group_inverse, hyperbolic_unit, inner, is_member, is_special_member, transvection
from formring.rings import close_form_parameter, parse_ring
from formring.sampling import enumerate_gens, make_rng, random_orthogonal, random_special_member, random_word
from formring.words import (
    HERMITIAN_KINDS,
    QUADRATIC_KINDS,
    ElemGen,
    ElemWord,
    check_splitting,
    gen_matrix,
    key5_decompose,
    key5_with_correction,
    word_eval,
    word_inverse,
)

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("name", ["z4", "z9", "herm_z4"])
def test_every_generator_is_special(request, name):
    spec = request.getfixturevalue(name)
    count = 0
    for g in enumerate_gens(spec):
        assert is_special_member(spec, gen_matrix(spec, g)), g
        count += 1
    assert count > 0


@pytest.mark.parametrize("name", ["z4", "z9", "herm_z4"])
def test_splitting_enumerated(request, name):
    spec = request.getfixturevalue(name)
    by_position = defaultdict(list)
    for g in enumerate_gens(spec):
        by_position[(g.kind, g.i, g.j)].append(g)
    kinds = {kind for kind, _, _ in by_position}
    assert kinds == set(HERMITIAN_KINDS if spec.hermitian else QUADRATIC_KINDS)
    for (kind, i, j), gens in by_position.items():
        for g in gens:
            for h in gens:
                x, y = ((g.zeta, g.f), (h.zeta, h.f)) if g.is_vector else (g.arg, h.arg)
                assert check_splitting(spec, kind, i, j, x, y), (g, h)


def test_diagonal_argument_outside_lambda(z4):
    # Λ_min over Z/4 with λ = −1 is {0, 2}
    with pytest.raises(ArgNotInLambda):
        gen_matrix(z4, ElemGen("qr", 1, 1, z4.ctx.parse(1)))


def test_bad_indices(z4, herm_z4):
    with pytest.raises(IndexOutOfRange):
        gen_matrix(z4, ElemGen("qe", 2, 2, 1))
    with pytest.raises(IndexOutOfRange):
        gen_matrix(z4, ElemGen("qe", 1, 4, 1))
    with pytest.raises(IndexOutOfRange):
        gen_matrix(herm_z4, ElemGen("he", 1, 2, 1))


@settings(deadline=None, derandomize=True, max_examples=30)
@given(seeds)
def test_word_inverse(quadratic, seed):
    spec = quadratic("Z/6")
    w = random_word(spec, make_rng(seed), 5)
    assert linalg.is_identity(spec.ctx, word_eval(w + word_inverse(w)))


@settings(deadline=None, derandomize=True, max_examples=30)
@given(seeds)
def test_group_inverse(hermitian, seed):
    spec = hermitian("Z/4")
    sigma = random_special_member(spec, make_rng(seed))
    assert linalg.is_identity(spec.ctx, linalg.mat_mul(spec.ctx, group_inverse(spec, sigma), sigma))


def test_hyperbolic_unit(z8):
    H = hyperbolic_unit(z8, 2, z8.ctx.parse(3))
    assert is_special_member(z8, H)
    assert np.count_nonzero(H - np.eye(z8.size, dtype=np.int64)) == 2


@settings(deadline=None, derandomize=True, max_examples=40)
@given(seeds, st.sampled_from(["Z/4", "Z/6", "Z/8"]))
def test_key5_transvection(quadratic, seed, ring):
    spec = quadratic(ring)
    ctx = spec.ctx
    rng = make_rng(seed)
    eps = random_word(spec, rng, int(rng.integers(0, 4)))
    v = linalg.mat_vec(ctx, word_eval(eps), spec.basis(spec.rho(spec.n)))
    w = random_orthogonal(spec, rng, v)
    assert inner(spec, v, w) == 0
    res = key5_with_correction(spec, eps, w)
    T = transvection(spec, v, w, res.correction)
    assert (word_eval(res.word) == T).all()
    assert is_member(spec, T)


def test_key5_trivial_eps(z4):
    ctx = z4.ctx
    v = z4.basis(z4.rho(z4.n))
    w = z4.basis(z4.row(1))
    word = key5_decompose(z4, ElemWord(z4), w)
    assert (word_eval(word) == transvection(z4, v, w)).all()


def test_certificate_round_trip(herm_z4):
    rng = make_rng(11)
    word = random_word(herm_z4, rng, 6)
    text = format_certificate(Certificate(word, comments=["sampled"]))
    cert = parse_certificate(text)
    assert cert.word.gens == word.gens
    assert cert.comments == ["sampled"]
    assert (word_eval(parse_word(text)) == word_eval(word)).all()


def test_hermitian_block_vanishes_past_parameters(herm_z4):
    spec, ctx, n = herm_z4, herm_z4.ctx, herm_z4.n
    assert np.count_nonzero(spec.psi[:n, :n]) == 0
    he = gen_matrix(spec, ElemGen("he", 2, 3, ctx.one))
    assert is_member(spec, he)
    # an identity block on the free coordinates would exclude he_23
    psi = spec.psi.copy()
    for k in range(spec.r, n):
        psi[k, k] = ctx.one
    F = linalg.mat_mul(ctx, linalg.mat_mul(ctx, linalg.conj_transpose(ctx, he), psi), he)
    assert F[2, 1] == ctx.one
    assert psi[2, 1] == 0


def test_hermitian_parameters_need_a_half():
    ctx = parse_ring("Z/4", lam="-1")
    two = ctx.parse(2)
    # 2 = 1 - λ·1 lies in min^λ, but f + λf̄ = f - f vanishes, so no ζ_f exists for it
    assert two in close_form_parameter(ctx, ()).elements
    assert two not in ctx.half_table
    with pytest.raises(PresentationInvalid):
        FormSpec.create(ctx, "hermitian", 5, r=2, a=[0, two])
    spec = FormSpec.create(ctx, "hermitian", 5, r=2, a=[0, 0])
    assert spec.a_halves == (0, 0)
