from functools import lru_cache

import pytest

from formring.forms import FormSpec
from formring.rings import parse_ring


@lru_cache(maxsize=None)
def _quadratic(ring: str, lam: str = "-1", n: int = 3, Lambda_gens=()) -> FormSpec:
    ctx = parse_ring(ring, lam=lam)
    return FormSpec.create(ctx, "quadratic", n, Lambda_gens=[ctx.parse(g) for g in Lambda_gens])


@lru_cache(maxsize=None)
def _hermitian(ring: str, n: int = 4, Lambda: str = "max") -> FormSpec:
    # λ = −1, trivial involution: "max" is Λ = R, "min" is Λ = {x − λx̄} = 2R
    ctx = parse_ring(ring, lam="-1")
    gens = range(ctx.order) if Lambda == "max" else ()
    return FormSpec.create(ctx, "hermitian", n, r=1, a=[0], Lambda_gens=gens)


@pytest.fixture(scope="session")
def quadratic():
    """Builder for quadratic specs; equal arguments give the same spec object."""
    return _quadratic


@pytest.fixture(scope="session")
def hermitian():
    """Builder for hermitian specs with r = 1, a = (0)."""
    return _hermitian


@pytest.fixture(scope="session")
def z4():
    return _quadratic("Z/4")


@pytest.fixture(scope="session")
def z6():
    return _quadratic("Z/6")


@pytest.fixture(scope="session")
def z8():
    return _quadratic("Z/8")


@pytest.fixture(scope="session")
def z9():
    return _quadratic("Z/9", lam="1")


@pytest.fixture(scope="session")
def herm_z4():
    return _hermitian("Z/4")


@pytest.fixture(scope="session", params=["Z/4", "Z/6", "Z/8"])
def small_spec(request):
    return _quadratic(request.param)
