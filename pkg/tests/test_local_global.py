import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formring import linalg
from formring.errors import (
    ConfigError,
    CoverageGap,
    InsufficientCongruenceLevel,
    InsufficientDegree,
    LevelTooLow,
    NotComaximal,
    NotCongruentToIdentity,
    RuleGap,
)
from formring.forms import FormSpec, group_inverse, hyperbolic_unit, transvection
from formring.local_global import (
    check_local,
    commutator_diag_in_E,
    commutator_level_absorb,
    conjugate_generator,
    congruence_level,
    dilate,
    dilation_step1,
    local_data_from_word,
    local_datum,
    localize_word,
    nilpotency_probe,
    normality_harness,
    partition_of_unity,
    patch,
    transvection_data,
    verify_telescope,
)
from formring.poly import X, Poly, PolyMat
from formring.relations import conjugate_absorb
from formring.rings import FormParameter, parse_ring, zmod
from formring.sampling import enumerate_gens, make_rng, random_gen, random_poly_word, random_special_member
from formring.words import ElemGen, ElemWord, PolyElemWord, PolyGen, gen_matrix, poly_word_eval, word_eval

seeds = st.integers(0, 2**32 - 1)


def test_partition_z6():
    ctx = zmod(6)
    out = partition_of_unity(ctx, [(ctx.parse(2), 2), (ctx.parse(3), 2)])
    assert [ctx.label(b) for b in out] == ["4", "3"]


def test_partition_single_unit():
    ctx = zmod(6)
    assert partition_of_unity(ctx, [(ctx.one, 3)]) == [ctx.one]


def test_partition_nilpotent():
    ctx = zmod(4)
    with pytest.raises(NotComaximal):
        partition_of_unity(ctx, [(ctx.parse(2), 1)])


def test_transvection_data_covers_generators(herm_z4, z4):
    for spec in (z4, herm_z4):
        for g in enumerate_gens(spec):
            v, w, c = transvection_data(spec, g)
            assert v.any()


@settings(deadline=None, derandomize=True, max_examples=25)
@given(seeds, st.sampled_from(["Z/4", "Z/6"]))
def test_conjugate_generator(quadratic, seed, ring):
    spec = quadratic(ring)
    ctx = spec.ctx
    rng = make_rng(seed)
    sigma = random_special_member(spec, rng)
    g = random_gen(spec, rng)
    word = conjugate_generator(spec, sigma, g)
    expected = linalg.mat_mul(ctx, linalg.mat_mul(ctx, sigma, gen_matrix(spec, g)), group_inverse(spec, sigma))
    assert (word_eval(word) == expected).all()


def test_dilation_step1_empty_conjugator(z6):
    w = z6.basis(z6.row(1))
    word = dilation_step1(z6, ElemWord(z6), w, 1)
    alpha = poly_word_eval(word)
    v = z6.basis(z6.rho(z6.n))
    assert alpha.evaluate(X, 0).is_identity()
    assert alpha.evaluate(X, z6.ctx.one) == PolyMat.from_matrix(z6.ctx, transvection(z6, v, w))


def test_dilation_step1_degree_bound(z6):
    eps = ElemWord(z6, (ElemGen("qe", 1, 2, 1),))
    w = z6.basis(z6.row(1))
    with pytest.raises(InsufficientDegree):
        dilation_step1(z6, eps, w, 1)


@pytest.mark.parametrize("method", ["absorb", "lift"])
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_dilate_z6(z6, method, seed):
    ctx = z6.ctx
    word = random_poly_word(z6, make_rng(seed), length=2, degree=1)
    alpha = poly_word_eval(word)
    s = ctx.parse(3)
    datum = local_datum(z6, s)
    local = localize_word(word, datum.loc, datum.spec)
    res = dilate(z6, alpha, s, local, method=method)
    assert poly_word_eval(res.word) == alpha.scale_var(X, res.b)
    assert res.b == ctx.power(s, res.power)


def test_dilate_rejects_alpha_not_identity_at_zero(z6):
    ctx = z6.ctx
    alpha = PolyMat.from_matrix(ctx, gen_matrix(z6, ElemGen("qe", 1, 2, 1)))
    datum = local_datum(z6, ctx.parse(3))
    with pytest.raises(NotCongruentToIdentity):
        dilate(z6, alpha, ctx.parse(3), datum.word)


def _fixed_word(spec, case: int) -> PolyElemWord:
    ctx = spec.ctx

    def p(*coefs):
        out = Poly(ctx)
        for k, c in enumerate(coefs, start=1):
            out = out + Poly.var(ctx, X, coef=ctx.parse(c), power=k)
        return out

    gens = {
        0: [PolyGen("qe", 1, 2, arg=p(1))],
        1: [PolyGen("qe", 1, 2, arg=p(1)), PolyGen("ql", 2, 3, arg=p(0, 2))],
        2: [PolyGen("qr", 1, 3, arg=p(1, 1)), PolyGen("qe", 2, 1, arg=p(3))],
    }[case]
    return PolyElemWord(spec, tuple(gens))


@pytest.mark.parametrize("case", [0, 1, 2])
def test_check_local_and_patch(z6, case):
    word = _fixed_word(z6, case)
    alpha = poly_word_eval(word)
    data = local_data_from_word(word)
    report = check_local(z6, alpha, data)
    assert report.passed
    cert = patch(z6, alpha, data)
    assert poly_word_eval(cert.word) == alpha
    assert z6.ctx.total(b for _, _, b in cert.partition) == z6.ctx.one
    assert verify_telescope(z6, alpha, [b for _, _, b in cert.partition])


def test_patch_identity_is_empty(z6):
    cert = patch(z6, PolyMat.identity(z6.ctx, z6.size), [])
    assert len(cert.word) == 0


def test_patch_coverage_gap(z6):
    word = _fixed_word(z6, 1)
    alpha = poly_word_eval(word)
    data = local_data_from_word(word)[:1]
    with pytest.raises(CoverageGap):
        patch(z6, alpha, data)
    with pytest.raises(CoverageGap):
        check_local(z6, alpha, data)


def test_commutator_diag_z8(z8):
    ctx = z8.ctx
    D = hyperbolic_unit(z8, 1, ctx.parse(5))
    assert [ctx.label(x) for x in np.diag(D)] == ["5", "1", "1", "5", "1", "1"]
    word = commutator_diag_in_E(z8, "qe", 1, 2, ctx.one, D, ctx.parse(2), 2)
    assert len(word) == 1
    # argument −2a for a = 1
    assert word.gens[0].arg == Poly.var(ctx, X, coef=ctx.parse(-2))


def test_commutator_diag_trivial_ratio(z8):
    ctx = z8.ctx
    D = hyperbolic_unit(z8, 1, ctx.parse(5))
    # positions 2 and 3 both carry 1
    assert len(commutator_diag_in_E(z8, "qe", 2, 3, ctx.one, D, ctx.parse(2), 2)) == 0


def test_commutator_diag_level(z8):
    ctx = z8.ctx
    D = hyperbolic_unit(z8, 1, ctx.parse(5))
    with pytest.raises(InsufficientCongruenceLevel):
        commutator_diag_in_E(z8, "qe", 1, 2, ctx.one, D, ctx.parse(2), 1)
    H = hyperbolic_unit(z8, 1, ctx.parse(3))
    with pytest.raises(NotCongruentToIdentity):
        commutator_diag_in_E(z8, "qe", 1, 2, ctx.one, H, ctx.parse(2), 2)


def test_commutator_diag_vector_kind(herm_z4):
    ctx = herm_z4.ctx
    D = linalg.identity(ctx, herm_z4.size)
    with pytest.raises(RuleGap):
        commutator_diag_in_E(herm_z4, "hm", 2, 0, ctx.one, D, ctx.parse(2), 2)


def test_congruence_level_z8(z8):
    ctx = z8.ctx
    assert congruence_level(ctx, hyperbolic_unit(z8, 1, ctx.parse(5)), ctx.parse(2)) == 2
    assert congruence_level(ctx, hyperbolic_unit(z8, 1, ctx.parse(3)), ctx.parse(2)) == 1


def test_commutator_level_too_low(z8):
    ctx = z8.ctx
    beta = hyperbolic_unit(z8, 1, ctx.parse(3))
    with pytest.raises(LevelTooLow) as exc:
        commutator_level_absorb(z8, ElemWord(z8), beta, ctx.parse(2), 2)
    assert exc.value.details["level"] == 1


def test_commutator_level_nilpotent_s(z8):
    ctx = z8.ctx
    beta = hyperbolic_unit(z8, 1, ctx.parse(5))
    eps = ElemWord(z8, (ElemGen("qe", 1, 2, 1),))
    assert len(commutator_level_absorb(z8, eps, beta, ctx.parse(2), 2)) == 0


def test_commutator_level_z6(z6):
    ctx = z6.ctx
    s = ctx.parse(3)
    beta = word_eval(ElemWord(z6, (ElemGen("qe", 2, 3, 3), ElemGen("ql", 1, 2, 3))))
    spec_s = local_datum(z6, s).spec
    eps_s = ElemWord(spec_s, (ElemGen("qe", 1, 2, spec_s.ctx.one),))
    word = commutator_level_absorb(z6, eps_s, beta, s, 1)
    # ε lifts to qe_12(1) since 1 is its own least preimage
    E = gen_matrix(z6, ElemGen("qe", 1, 2, ctx.one))
    expected = linalg.mat_mul(
        ctx, linalg.mat_mul(ctx, linalg.mat_mul(ctx, E, beta), group_inverse(z6, E)), group_inverse(z6, beta)
    )
    assert (word_eval(word) == expected).all()


@pytest.mark.parametrize("Lambda", ["max", "min"])
@pytest.mark.parametrize("ring", ["Z/4", "Z/6"])
def test_nilpotency_certifies_hermitian(hermitian, ring, Lambda):
    report = nilpotency_probe(hermitian(ring, Lambda=Lambda), samples=40, seed=5)
    assert report.samples == 40
    assert not report.residuals
    assert report.fraction == 1.0


def test_normality_harness_small(z4):
    report = normality_harness(z4, samples=5, seed=2, patch_samples=1)
    assert report.passed, report.lines()


def test_conjugate_absorb_needs_single_hermitian_parameter():
    ctx = parse_ring("Z/4", lam="-1")
    spec = FormSpec.create(ctx, "hermitian", 5, r=2, a=[0, 0], Lambda_gens=range(ctx.order))
    conj = ElemWord(spec, (ElemGen("he", 3, 4, ctx.one),))
    target = PolyGen("he", 3, 5, arg=Poly.var(ctx, X, power=4))
    with pytest.raises(RuleGap):
        conjugate_absorb(spec, conj, target, 1)


def test_patch_rejects_unscalable_lambda():
    ctx = zmod(6)
    # {0, 1} is not even additive; 2·1 leaves it
    spec = FormSpec.create(ctx, "quadratic", 3, Lambda=FormParameter(frozenset({0, 1}), ctx.lam))
    with pytest.raises(ConfigError) as info:
        patch(spec, PolyMat.identity(ctx, spec.size), [])
    assert info.value.key == "Lambda"
