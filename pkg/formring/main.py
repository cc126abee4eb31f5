import argparse
import os
import sys
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Tuple

from .certificates import Certificate, format_certificate, parse_certificate, parse_gen
from .config import Config, JobConfig
from .errors import ConfigError, FormRingError, PresentationInvalid
from .forms import is_member, is_member_poly, is_special_member
from .linalg import format_matrix, parse_matrix
from .local_global import (
    METHODS,
    check_local,
    dilate,
    local_data_from_word,
    local_datum,
    localize_word,
    nilpotency_probe,
    patch,
)
from .log import get_logger, setup_logging
from .poly import PolyMat
from .proptest import SUITES, run_suite
from .reduction import diagonal_reduce, elementary_membership_semilocal, reduce_unimodular_isotropic
from .rings import ideal_generated, jacobson_radical, validate_ctx
from .words import PolyElemWord, gen_matrix, poly_word_eval, word_eval

logger = get_logger(__name__)

COMMANDS = (
    "validate-ring",
    "gen",
    "eval-word",
    "check-membership",
    "reduce-vector",
    "decompose",
    "diag-reduce",
    "dilate",
    "patch",
    "check-local",
    "probe-nilpotency",
    "prop-test",
)

Outcome = Tuple[bool, List[str]]


def _read_input(job: JobConfig) -> str:
    if not job.in_path:
        raise ConfigError(f"{job.command} needs --in FILE", key="in")
    if not os.path.exists(job.in_path):
        raise ConfigError(f"input file {job.in_path} does not exist", key="in")
    with open(job.in_path, "r", encoding="utf-8") as f:
        return f.read()


def _require_seed(job: JobConfig) -> int:
    if job.seed is None:
        raise ConfigError(f"{job.command} samples at random and needs --seed", key="seed")
    return job.seed


def _format_poly_matrix(M: PolyMat) -> str:
    return "\n".join(" ".join(str(M.entry(r, c)) for c in range(M.size)) for r in range(M.size))


def _emit_certificate(job: JobConfig, cert: Certificate) -> List[str]:
    text = format_certificate(cert)
    if job.out_path:
        with open(job.out_path, "w", encoding="utf-8") as f:
            f.write(text)
        return [f"certificate written to {job.out_path} ({len(cert.word)} generators)"]
    return ["certificate:"] + text.rstrip("\n").splitlines()


def _poly_word_input(job: JobConfig) -> PolyElemWord:
    word = parse_certificate(_read_input(job)).word
    if not isinstance(word, PolyElemWord):
        raise ConfigError("expected a certificate with args=poly", key="in")
    return word


# --- commands -----------------------------------------------------------------------


def cmd_validate_ring(job: JobConfig, cfg: Config) -> Outcome:
    ctx = job.build_ring()
    report = validate_ctx(ctx, cfg, seed=job.seed or 0)
    return report.passed, [f"ring {ctx.presentation} order={ctx.order}"] + report.lines()


def cmd_gen(job: JobConfig, cfg: Config) -> Outcome:
    spec = job.build_spec()
    if not job.gen:
        raise ConfigError("gen needs --gen '<kind> <i> <j> <arg>'", key="gen")
    g = parse_gen(spec, job.gen)
    M = gen_matrix(spec, g)
    res = is_member(spec, M)
    lines = [spec.describe(), format_matrix(spec.ctx, M)]
    if not res:
        lines.append(f"not a member: {res.reason}")
    return bool(res), lines


def cmd_eval_word(job: JobConfig, cfg: Config) -> Outcome:
    cert = parse_certificate(_read_input(job))
    spec = cert.spec
    if isinstance(cert.word, PolyElemWord):
        M = poly_word_eval(cert.word)
        res = is_member_poly(spec, M)
        body = _format_poly_matrix(M)
    else:
        M = word_eval(cert.word)
        res = is_member(spec, M)
        body = format_matrix(spec.ctx, M)
    lines = [spec.describe(), f"{len(cert.word)} generators", body]
    if not res:
        lines.append(f"not a member: {res.reason}")
    return bool(res), lines


def cmd_check_membership(job: JobConfig, cfg: Config) -> Outcome:
    spec = job.build_spec()
    sigma = parse_matrix(spec.ctx, _read_input(job))
    res = is_member(spec, sigma)
    lines = [spec.describe(), f"member: {'yes' if res else 'no'}"]
    if not res:
        lines.append(f"failed block {res.block}: {res.reason}")
        return False, lines
    lines.append(f"special: {'yes' if is_special_member(spec, sigma) else 'no'}")
    return True, lines


def cmd_reduce_vector(job: JobConfig, cfg: Config) -> Outcome:
    spec = job.build_spec()
    text = job.vector if job.vector else _read_input(job)
    v = parse_matrix(spec.ctx, text, size=spec.size)
    cert = reduce_unimodular_isotropic(spec, v)
    ok = cert.verify(v)
    return ok, [spec.describe(), f"vector {' '.join(spec.ctx.label(x) for x in v)}"] + _emit_certificate(
        job, cert.to_certificate()
    )


def cmd_decompose(job: JobConfig, cfg: Config) -> Outcome:
    spec = job.build_spec()
    sigma = parse_matrix(spec.ctx, _read_input(job))
    cert = elementary_membership_semilocal(spec, sigma)
    ok = cert.claim == "sigma_decomposed" and cert.verify(sigma)
    lines = [spec.describe(), f"claim {cert.claim or 'partial'}"]
    return ok, lines + _emit_certificate(job, cert.to_certificate())


def cmd_diag_reduce(job: JobConfig, cfg: Config) -> Outcome:
    spec = job.build_spec()
    ctx = spec.ctx
    beta = parse_matrix(ctx, _read_input(job))
    ideal = ideal_generated(ctx, [ctx.parse(x) for x in job.ideal]) if job.ideal else jacobson_radical(ctx)
    cert = diagonal_reduce(spec, beta, ideal)
    ok = cert.verify(beta)
    lines = [spec.describe(), f"ideal {ideal.describe(ctx)}", f"claim {cert.claim or 'partial'}"]
    return ok, lines + _emit_certificate(job, cert.to_certificate())


def cmd_dilate(job: JobConfig, cfg: Config) -> Outcome:
    word = _poly_word_input(job)
    spec, ctx = word.spec, word.spec.ctx
    if job.s is None:
        raise ConfigError("dilate needs --s", key="s")
    s = ctx.parse(job.s)
    datum = local_datum(spec, s)
    local = localize_word(word, datum.loc, datum.spec)
    res = dilate(spec, poly_word_eval(word), s, local, method=job.method, cfg=cfg)
    lines = [spec.describe(), f"b={ctx.label(res.b)} power={res.power} method={res.method}"] + res.trace
    return True, lines + _emit_certificate(job, Certificate(res.word, "alpha_of_bX", comments=[f"b={ctx.label(res.b)}"]))


def cmd_patch(job: JobConfig, cfg: Config) -> Outcome:
    word = _poly_word_input(job)
    spec = word.spec
    alpha = poly_word_eval(word)
    cert = patch(spec, alpha, local_data_from_word(word), method=job.method, cfg=cfg)
    ok = poly_word_eval(cert.word) == alpha
    lines = [spec.describe()] + cert.lines(spec.ctx)
    return ok, lines + _emit_certificate(job, Certificate(cert.word, "alpha_patched"))


def cmd_check_local(job: JobConfig, cfg: Config) -> Outcome:
    word = _poly_word_input(job)
    spec = word.spec
    report = check_local(spec, poly_word_eval(word), local_data_from_word(word))
    return report.passed, [spec.describe()] + report.lines()


def cmd_probe_nilpotency(job: JobConfig, cfg: Config) -> Outcome:
    spec = job.build_spec()
    report = nilpotency_probe(spec, job.samples, _require_seed(job))
    return report.passed, [spec.describe()] + report.lines()


def cmd_prop_test(job: JobConfig, cfg: Config) -> Outcome:
    if job.suite not in SUITES:
        raise ConfigError(f"unknown suite {job.suite!r}; expected one of {tuple(SUITES)}", key="suite")
    spec = job.build_spec()
    report = run_suite(job.suite, spec, job.samples, _require_seed(job), cfg)
    return report.ok, [spec.describe()] + report.lines()


HANDLERS: Dict[str, Callable[[JobConfig, Config], Outcome]] = {
    "validate-ring": cmd_validate_ring,
    "gen": cmd_gen,
    "eval-word": cmd_eval_word,
    "check-membership": cmd_check_membership,
    "reduce-vector": cmd_reduce_vector,
    "decompose": cmd_decompose,
    "diag-reduce": cmd_diag_reduce,
    "dilate": cmd_dilate,
    "patch": cmd_patch,
    "check-local": cmd_check_local,
    "probe-nilpotency": cmd_probe_nilpotency,
    "prop-test": cmd_prop_test,
}


def run(job: JobConfig, cfg: Optional[Config] = None) -> Tuple[int, List[str]]:
    """Run one command; returns (exit status, report lines ending in the RESULT trailer)."""
    cfg = cfg or Config.from_env()
    if job.degree_cap is not None:
        cfg = replace(cfg, degree_cap=job.degree_cap)
    try:
        if job.command not in HANDLERS:
            raise ConfigError(f"unknown command {job.command!r}", key="command")
        if job.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}", key="method")
        ok, lines = HANDLERS[job.command](job, cfg)
    except (ConfigError, PresentationInvalid) as e:
        logger.error("%s", e)
        return 2, [f"error: {e}", "RESULT FAIL"]
    except FormRingError as e:
        logger.warning("%s failed: %s", job.command, e)
        return 1, [f"{type(e).__name__}: {e}", "RESULT FAIL"]
    return (0 if ok else 1), lines + [f"RESULT {'PASS' if ok else 'FAIL'}"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formring", description="Exact form ring computations with certificates")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("suite", nargs="?", help="suite name for prop-test")
    parser.add_argument("--config", help="dotenv-style job file; explicit flags win over it")
    parser.add_argument("--ring")
    parser.add_argument("--involution")
    parser.add_argument("--lambda", dest="lam")
    parser.add_argument("--Lambda-gens", dest="Lambda_gens", help="';'-separated generators of the form parameter")
    parser.add_argument("--kind", choices=("quadratic", "hermitian"))
    parser.add_argument("--n", type=int)
    parser.add_argument("--r", type=int)
    parser.add_argument("--a", help="';'-separated hermitian parameters")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--degree-cap", dest="degree_cap", type=int)
    parser.add_argument("--in", dest="in_path")
    parser.add_argument("--out", dest="out_path")
    parser.add_argument("--gen", help="generator line, e.g. 'qe 1 2 3'")
    parser.add_argument("--vector", help="whitespace-separated vector entries")
    parser.add_argument("--s", help="element to localize at (dilate)")
    parser.add_argument("--ideal", help="';'-separated ideal generators (diag-reduce)")
    parser.add_argument("--method", choices=METHODS)
    return parser


def job_from_args(args: argparse.Namespace) -> JobConfig:
    job = JobConfig()
    if args.config:
        job = job.with_overrides(**JobConfig.from_file(args.config))
    lists = {
        key: [p.strip() for p in getattr(args, key).split(";") if p.strip()]
        for key in ("Lambda_gens", "a", "ideal")
        if getattr(args, key) is not None
    }
    flags = {
        key: getattr(args, key)
        for key in (
            "ring",
            "involution",
            "lam",
            "kind",
            "n",
            "r",
            "seed",
            "samples",
            "degree_cap",
            "in_path",
            "out_path",
            "gen",
            "vector",
            "s",
            "method",
        )
    }
    return job.with_overrides(command=args.command, suite=args.suite, **flags, **lists)


def main(argv: Optional[List[str]] = None) -> None:
    args = build_parser().parse_args(argv)
    cfg = Config.from_env()
    setup_logging(cfg)
    try:
        job = job_from_args(args)
    except ConfigError as e:
        print(f"error: {e}\nRESULT FAIL")
        raise SystemExit(2)
    status, lines = run(job, cfg)
    print("\n".join(lines))
    sys.stdout.flush()
    raise SystemExit(status)


if __name__ == "__main__":
    main()
