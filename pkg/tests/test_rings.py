import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formring.errors import GeneratorOutOfBounds, NilpotentElement, PresentationInvalid
from formring.rings import (
    annihilating_power,
    close_form_parameter,
    ideal_generated,
    jacobson_radical,
    localize_at,
    localize_at_maximal,
    maximal_ideals,
    max_lambda,
    min_lambda,
    parse_ring,
    validate_ctx,
    zmod,
)


@pytest.mark.parametrize("presentation", ["Z/2", "Z/4", "Z/6", "Z/9", "Z/2xZ/3", "Z/3[t]/(t^2+1)"])
def test_validate_shipped_rings(presentation):
    assert validate_ctx(parse_ring(presentation, lam="-1")).passed


def test_validate_z4_lambda_three():
    ctx = parse_ring("Z/4", lam="3")
    report = validate_ctx(ctx)
    assert report.passed
    assert all(line.startswith("PASS") for line in report.lines())


def test_lambda_must_be_a_unit():
    report = validate_ctx(parse_ring("Z/4", lam="2"))
    assert not report.passed


def test_bad_presentation():
    with pytest.raises(PresentationInvalid):
        parse_ring("Q/5")


def test_radical_of_z8():
    ctx = zmod(8)
    J = jacobson_radical(ctx)
    assert sorted(ctx.label(x) for x in J.elements) == ["0", "2", "4", "6"]


def test_maximal_ideals_of_z6():
    ctx = zmod(6)
    ms = maximal_ideals(ctx)
    assert len(ms) == 2
    assert {ctx.label(m.idempotent) for m in ms} == {"3", "4"}
    for m in ms:
        loc = localize_at_maximal(ctx, m)
        assert len(maximal_ideals(loc.ring)) == 1


def test_localize_z6_at_three():
    ctx = zmod(6)
    loc = localize_at(ctx, ctx.parse(3))
    assert loc.ring.order == 2
    assert loc.ring.is_unit(loc.proj[ctx.parse(3)])
    assert sorted(ctx.label(x) for x in loc.kernel.elements) == ["0", "2", "4"]


def test_localize_at_nilpotent():
    ctx = zmod(4)
    with pytest.raises(NilpotentElement):
        localize_at(ctx, ctx.parse(2))


def test_annihilating_power():
    ctx = zmod(12)
    s = ctx.parse(2)
    kernel = localize_at(ctx, s).kernel
    m = annihilating_power(ctx, s, kernel.elements)
    assert m == 2
    assert all(ctx.mul[ctx.power(s, m), x] == 0 for x in kernel.elements)


def test_form_parameter_bounds():
    ctx = zmod(4, lam="1")
    assert min_lambda(ctx) <= max_lambda(ctx)
    with pytest.raises(GeneratorOutOfBounds):
        close_form_parameter(ctx, [ctx.parse(1)])
    Lam = close_form_parameter(ctx, [ctx.parse(2)])
    assert ctx.parse(2) in Lam


def test_ideal_generated_z6():
    ctx = zmod(6)
    I = ideal_generated(ctx, [ctx.parse(2)])
    assert sorted(ctx.label(x) for x in I.elements) == ["0", "2", "4"]


@settings(deadline=None, derandomize=True, max_examples=50)
@given(st.integers(0, 8), st.integers(0, 8), st.integers(0, 8))
def test_z9_arithmetic_matches_integers(a, b, c):
    ctx = zmod(9)
    x, y, z = ctx.parse(a), ctx.parse(b), ctx.parse(c)
    assert ctx.label(ctx.mul[ctx.add[x, y], z]) == str(((a + b) * c) % 9)
    assert ctx.bar[x] == x


def test_product_ring_components():
    ctx = parse_ring("Z/2xZ/3")
    assert ctx.order == 6
    assert len(ctx.primitive_idempotents) == 2
    assert np.count_nonzero(ctx.nil_mask) == 1
