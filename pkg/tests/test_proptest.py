import pytest

from formring.proptest import SUITES, run_suite
from formring.reduction import ReductionCertificate
from formring.words import ElemWord

# (ring, λ, extra Λ generators): Λ_min for λ = ±1, and Λ = R
QUADRATIC_VARIANTS = [
    ("Z/4", "-1", ()),
    ("Z/4", "-1", ("1",)),
    ("Z/4", "1", ()),
    ("Z/6", "-1", ()),
    ("Z/6", "1", ()),
]


@pytest.mark.parametrize("suite", ["generators", "splitting", "key5", "swan"])
def test_quick_suites_z4(quadratic, suite):
    report = run_suite(suite, quadratic("Z/4"), samples=20, seed=7)
    assert report.ok, report.lines()
    assert report.total > 0


def test_diag_suite_z8(quadratic):
    report = run_suite("diag", quadratic("Z/8"), samples=10, seed=1)
    assert report.ok, report.lines()


def test_diag_partial_counts_as_failure(quadratic, monkeypatch):
    def leave_residual(spec, beta, ideal):
        return ReductionCertificate(ElemWord(spec), None, residual=beta)

    monkeypatch.setattr("formring.proptest.diagonal_reduce", leave_residual)
    report = run_suite("diag", quadratic("Z/8"), samples=5, seed=1)
    assert report.total == 5
    assert report.passed == 0
    assert not report.ok


def test_unknown_suite(quadratic):
    with pytest.raises(KeyError):
        run_suite("everything", quadratic("Z/4"), samples=1, seed=0)


def test_generators_full_enumeration_note(quadratic):
    report = run_suite("generators", quadratic("Z/9", lam="1"), samples=0, seed=0)
    assert "full enumeration" in report.lines()


@pytest.mark.parametrize("name", ["z9", "herm_z4"])
def test_splitting_full_enumeration(request, name):
    report = run_suite("splitting", request.getfixturevalue(name), samples=0, seed=0)
    assert "full enumeration" in report.lines()
    assert report.ok, report.lines()
    assert report.total > 0


def test_nilpotency_suite_small_lambda(hermitian):
    report = run_suite("nilpotency", hermitian("Z/6", Lambda="min"), samples=20, seed=5)
    assert report.ok, report.lines()


@pytest.mark.slow
@pytest.mark.parametrize("ring", ["Z/4", "Z/6", "Z/8", "Z/2xZ/3"])
@pytest.mark.parametrize("suite", sorted(set(SUITES) - {"nilpotency"}))
def test_suites_quadratic(quadratic, ring, suite):
    report = run_suite(suite, quadratic(ring), samples=100, seed=11)
    assert report.ok, report.lines()


@pytest.mark.slow
@pytest.mark.parametrize("ring, lam, gens", QUADRATIC_VARIANTS)
@pytest.mark.parametrize("suite", ["key5", "swan"])
def test_transitivity_suites_at_scale(quadratic, suite, ring, lam, gens):
    report = run_suite(suite, quadratic(ring, lam=lam, Lambda_gens=gens), samples=500, seed=17)
    assert report.ok, report.lines()
    assert report.total == 500


@pytest.mark.slow
@pytest.mark.parametrize("ring, lam, gens", [v for v in QUADRATIC_VARIANTS if v[0] == "Z/6"])
def test_patch_suite_at_scale(quadratic, ring, lam, gens):
    report = run_suite("patch", quadratic(ring, lam=lam, Lambda_gens=gens), samples=50, seed=23)
    assert report.ok, report.lines()
    assert report.total == 50


@pytest.mark.slow
@pytest.mark.parametrize("ring, lam, gens", QUADRATIC_VARIANTS)
def test_normality_suite_at_scale(quadratic, ring, lam, gens):
    report = run_suite("normality", quadratic(ring, lam=lam, Lambda_gens=gens), samples=100, seed=29)
    assert report.ok, report.lines()


@pytest.mark.slow
@pytest.mark.parametrize("ring", ["Z/4", "Z/8"])
def test_diag_suite_at_scale(quadratic, ring):
    report = run_suite("diag", quadratic(ring), samples=200, seed=31)
    assert report.ok, report.lines()


@pytest.mark.slow
@pytest.mark.parametrize("Lambda", ["max", "min"])
@pytest.mark.parametrize("ring", ["Z/4", "Z/6"])
def test_nilpotency_suite(hermitian, ring, Lambda):
    report = run_suite("nilpotency", hermitian(ring, Lambda=Lambda), samples=100, seed=5)
    assert report.ok, report.lines()
    assert report.total == 100
