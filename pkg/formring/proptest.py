"""Seeded property suites run by ``prop-test <suite>``.

Each suite returns a SuiteReport; a suite passes only with zero failures.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import linalg
from .config import Config
from .errors import FormRingError, IndexOutOfRange
from .forms import FormSpec, hyperbolic_unit, is_special_member, transvection
from .local_global import local_data_from_word, nilpotency_probe, normality_harness, patch
from .log import append_progress, get_logger
from .reduction import diagonal_reduce, reduce_unimodular_isotropic
from .rings import jacobson_radical
from .sampling import (
    MAX_TRIES,
    enumerate_gens,
    make_rng,
    random_gen,
    random_orthogonal,
    random_poly_word,
    random_unimodular_isotropic,
    random_word,
)
from .words import (
    ElemGen,
    check_splitting,
    gen_matrix,
    key5_with_correction,
    poly_word_eval,
    word_eval,
)

logger = get_logger(__name__)

ENUMERATION_ORDER = 9


@dataclass
class SuiteReport:
    suite: str
    total: int = 0
    passed: int = 0
    failures: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def record(self, ok: bool, detail: str = "") -> None:
        self.total += 1
        if ok:
            self.passed += 1
        elif len(self.failures) < 20:
            self.failures.append(detail)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def lines(self) -> List[str]:
        out = [f"suite {self.suite}: {self.passed}/{self.total}"]
        out += self.notes
        out += [f"failure {f}" for f in self.failures]
        return out


def _attempt(report: SuiteReport, label: str, check: Callable[[], bool]) -> None:
    try:
        report.record(bool(check()), label)
    except FormRingError as exc:
        report.record(False, f"{label}: {exc}")


def suite_generators(spec: FormSpec, samples: int, seed: int, cfg: Config) -> SuiteReport:
    report = SuiteReport("generators")
    if spec.ctx.order <= ENUMERATION_ORDER:
        report.notes.append("full enumeration")
        gens = enumerate_gens(spec)
    else:
        rng = make_rng(seed)
        gens = (random_gen(spec, rng) for _ in range(samples))
    for g in gens:
        try:
            gen_matrix(spec, g)
            report.record(True)
        except IndexOutOfRange:
            continue
        except FormRingError as exc:
            report.record(False, f"{g.kind}_{g.i},{g.j}: {exc}")
    return report


def _companion(spec: FormSpec, rng: np.random.Generator, g: ElemGen) -> ElemGen:
    """Another generator of the same kind and position as ``g``."""
    for _ in range(MAX_TRIES):
        h = random_gen(spec, rng)
        if (h.kind, h.i, h.j) == (g.kind, g.i, g.j):
            return h
    return g


def _split_args(g: ElemGen):
    return (g.zeta, g.f) if g.is_vector else g.arg


def suite_splitting(spec: FormSpec, samples: int, seed: int, cfg: Config) -> SuiteReport:
    report = SuiteReport("splitting")
    if spec.ctx.order <= ENUMERATION_ORDER:
        report.notes.append("full enumeration")
        by_position: Dict[tuple, List[ElemGen]] = defaultdict(list)
        for g in enumerate_gens(spec):
            by_position[(g.kind, g.i, g.j)].append(g)
        pairs = ((g, h) for gens in by_position.values() for g in gens for h in gens)
    else:
        rng = make_rng(seed)
        pairs = ((g, _companion(spec, rng, g)) for g in (random_gen(spec, rng) for _ in range(samples)))
    for g, h in pairs:
        x, y = _split_args(g), _split_args(h)
        _attempt(report, f"{g.kind}_{g.i},{g.j}", lambda: check_splitting(spec, g.kind, g.i, g.j, x, y))
    return report


def suite_key5(spec: FormSpec, samples: int, seed: int, cfg: Config) -> SuiteReport:
    report = SuiteReport("key5")
    rng = make_rng(seed)
    ctx = spec.ctx
    for k in range(samples):
        eps = random_word(spec, rng, int(rng.integers(0, 4)))
        v = linalg.mat_vec(ctx, word_eval(eps), spec.basis(spec.rho(spec.n)))
        w = random_orthogonal(spec, rng, v)

        def check() -> bool:
            res = key5_with_correction(spec, eps, w)
            return bool((word_eval(res.word) == transvection(spec, v, w, res.correction)).all())

        _attempt(report, f"sample {k}", check)
    return report


def suite_swan(spec: FormSpec, samples: int, seed: int, cfg: Config) -> SuiteReport:
    report = SuiteReport("swan")
    rng = make_rng(seed)
    for k in range(samples):
        v = random_unimodular_isotropic(spec, rng)
        _attempt(report, f"v={v.tolist()}", lambda: reduce_unimodular_isotropic(spec, v).verify(v))
    return report


def suite_diag(spec: FormSpec, samples: int, seed: int, cfg: Config) -> SuiteReport:
    report = SuiteReport("diag")
    rng = make_rng(seed)
    ctx = spec.ctx
    J = jacobson_radical(ctx)
    minus_one = ctx.neg[ctx.one]
    congruent_units = [u for u in range(ctx.order) if ctx.is_unit(u) and int(ctx.add[u, minus_one]) in J]
    for k in range(samples):
        beta = word_eval(random_word(spec, rng, 4, level=J))
        u = congruent_units[int(rng.integers(len(congruent_units)))]
        candidate = linalg.mat_mul(ctx, beta, hyperbolic_unit(spec, int(rng.integers(1, spec.n + 1)), u))
        if is_special_member(spec, candidate):
            beta = candidate

        def check() -> bool:
            cert = diagonal_reduce(spec, beta, J)
            if not cert.verify(beta):
                return False
            if cert.claim != "beta_theta_diagonal":
                return False
            return all(int(ctx.add[d, minus_one]) in J for d in np.diag(cert.residual))

        _attempt(report, f"sample {k}", check)
    return report


def suite_patch(spec: FormSpec, samples: int, seed: int, cfg: Config) -> SuiteReport:
    report = SuiteReport("patch")
    rng = make_rng(seed)
    for k in range(samples):
        word = random_poly_word(spec, rng, length=int(rng.integers(1, 5)), degree=int(rng.integers(1, 3)))
        alpha = poly_word_eval(word)
        _attempt(
            report,
            f"sample {k}",
            lambda: poly_word_eval(patch(spec, alpha, local_data_from_word(word), cfg=cfg).word) == alpha,
        )
    return report


def suite_normality(spec: FormSpec, samples: int, seed: int, cfg: Config) -> SuiteReport:
    report = SuiteReport("normality")
    res = normality_harness(spec, samples, seed, cfg=cfg)
    report.total = res.conjugation_total + res.patch_total
    report.passed = res.conjugation_passed + res.patch_passed
    report.failures = res.failures[:20]
    report.notes = res.lines()[:2]
    return report


def suite_nilpotency(spec: FormSpec, samples: int, seed: int, cfg: Config) -> SuiteReport:
    report = SuiteReport("nilpotency")
    res = nilpotency_probe(spec, samples, seed)
    report.total, report.passed = res.samples, res.certified
    report.failures = res.residuals
    report.notes = res.lines()[:1]
    return report


SUITES: Dict[str, Callable[[FormSpec, int, int, Config], SuiteReport]] = {
    "generators": suite_generators,
    "splitting": suite_splitting,
    "key5": suite_key5,
    "swan": suite_swan,
    "diag": suite_diag,
    "patch": suite_patch,
    "normality": suite_normality,
    "nilpotency": suite_nilpotency,
}


def run_suite(name: str, spec: FormSpec, samples: int, seed: int, cfg: Optional[Config] = None) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(name)
    cfg = cfg or Config.from_env()
    logger.info("running suite %s on %s (%d samples, seed %d)", name, spec.describe(), samples, seed)
    report = SUITES[name](spec, samples, seed, cfg)
    append_progress({"event": "suite", "suite": name, "passed": report.passed, "total": report.total})
    return report
