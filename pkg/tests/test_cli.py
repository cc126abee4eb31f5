import pytest

from formring.certificates import Certificate, format_certificate, parse_certificate
from formring.config import JobConfig
from formring.main import build_parser, job_from_args, main, run
from formring.poly import X, Poly
from formring.words import PolyElemWord, PolyGen


def _job(**kw) -> JobConfig:
    return JobConfig().with_overrides(**kw)


def test_validate_ring_pass():
    status, lines = run(_job(command="validate-ring", ring="Z/4", lam="3"))
    assert status == 0
    assert lines[-1] == "RESULT PASS"


def test_validate_ring_bad_lambda():
    status, lines = run(_job(command="validate-ring", ring="Z/4", lam="2"))
    assert status == 1
    assert lines[-1] == "RESULT FAIL"


def test_bad_presentation_exit_two():
    status, lines = run(_job(command="validate-ring", ring="Q/4"))
    assert status == 2
    assert lines[-1] == "RESULT FAIL"


def test_reduce_vector_e2n():
    status, lines = run(_job(command="reduce-vector", ring="Z/4", vector="0 0 0 0 0 1"))
    assert status == 0
    assert "claim vector_to_e2n" in lines
    header = next(i for i, line in enumerate(lines) if line.startswith("spec "))
    assert lines[header + 1] == "claim vector_to_e2n"


def test_gen_command():
    status, lines = run(_job(command="gen", ring="Z/6", gen="qe 1 2 5"))
    assert status == 0
    assert lines[-1] == "RESULT PASS"


def test_sampling_needs_seed():
    status, lines = run(_job(command="probe-nilpotency", ring="Z/4"))
    assert status == 2


def test_unknown_suite():
    status, _ = run(_job(command="prop-test", suite="everything", seed=1))
    assert status == 2


def test_prop_test_splitting():
    status, lines = run(_job(command="prop-test", suite="splitting", ring="Z/9", lam="1", samples=50, seed=7))
    assert status == 0, lines
    assert "full enumeration" in lines
    passed, total = next(line for line in lines if line.startswith("suite splitting:")).split(": ")[1].split("/")
    assert passed == total


def test_patch_round_trip(quadratic, tmp_path):
    spec = quadratic("Z/6")
    ctx = spec.ctx
    word = PolyElemWord(spec, (PolyGen("qe", 1, 2, arg=Poly.var(ctx, X)), PolyGen("ql", 3, 1, arg=Poly.var(ctx, X, power=2))))
    src = tmp_path / "alpha.cert"
    src.write_text(format_certificate(Certificate(word)), encoding="utf-8")
    out = tmp_path / "patched.cert"
    status, lines = run(_job(command="patch", in_path=str(src), out_path=str(out)))
    assert status == 0, lines
    cert = parse_certificate(out.read_text(encoding="utf-8"))
    assert cert.claim == "alpha_patched"
    assert len(cert.word) > 0

    status, lines = run(_job(command="check-local", in_path=str(src)))
    assert status == 0
    assert lines[-1] == "RESULT PASS"


def test_missing_input_file(tmp_path):
    status, _ = run(_job(command="decompose", in_path=str(tmp_path / "nothing.txt")))
    assert status == 2


def test_flags_override_job_file(tmp_path):
    path = tmp_path / "job.env"
    path.write_text("RING=Z/8\nN=4\nSEED=3\n", encoding="utf-8")
    args = build_parser().parse_args(["validate-ring", "--config", str(path), "--ring", "Z/6"])
    job = job_from_args(args)
    assert job.ring == "Z/6"
    assert job.n == 4
    assert job.seed == 3


def test_main_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["validate-ring", "--ring", "Z/4", "--lambda", "3"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip().endswith("RESULT PASS")
