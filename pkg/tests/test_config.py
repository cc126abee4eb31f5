import pytest

from formring.config import Config, JobConfig
from formring.errors import ConfigError


def test_config_from_env_defaults(monkeypatch):
    for key in ("FORMRING_DEGREE_CAP", "FORMRING_LOG_LEVEL", "PROGRESS_LOG_PATH"):
        monkeypatch.delenv(key, raising=False)
    cfg = Config.from_env()
    assert cfg.degree_cap == 256
    assert cfg.log_level == "INFO"
    assert cfg.progress_log_path is None


def test_config_from_env_reads_values(monkeypatch):
    monkeypatch.setenv("FORMRING_DEGREE_CAP", "64")
    monkeypatch.setenv("FORMRING_LOG_LEVEL", "debug")
    cfg = Config.from_env()
    assert cfg.degree_cap == 64
    assert cfg.log_level == "DEBUG"


def test_config_rejects_non_integer(monkeypatch):
    monkeypatch.setenv("FORMRING_MAX_ORDER", "lots")
    with pytest.raises(RuntimeError, match="FORMRING_MAX_ORDER"):
        Config.from_env()


def test_job_file_overrides(tmp_path):
    path = tmp_path / "job.env"
    path.write_text("RING=Z/6\nLAMBDA=1\nN=4\nLAMBDA_GENS=0;2\nSEED=7\nIN=word.txt\n", encoding="utf-8")
    job = JobConfig().with_overrides(**JobConfig.from_file(str(path)))
    assert job.ring == "Z/6"
    assert job.lam == "1"
    assert job.n == 4
    assert job.Lambda_gens == ["0", "2"]
    assert job.seed == 7
    assert job.in_path == "word.txt"


def test_job_file_unknown_key(tmp_path):
    path = tmp_path / "job.env"
    path.write_text("COLOUR=blue\n", encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        JobConfig.from_file(str(path))
    assert exc.value.key == "colour"


def test_job_file_bad_integer(tmp_path):
    path = tmp_path / "job.env"
    path.write_text("N=three\n", encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        JobConfig.from_file(str(path))
    assert exc.value.key == "n"


def test_missing_job_file(tmp_path):
    with pytest.raises(ConfigError):
        JobConfig.from_file(str(tmp_path / "absent.env"))


def test_with_overrides_skips_none():
    job = JobConfig(ring="Z/8").with_overrides(ring=None, n=5)
    assert job.ring == "Z/8"
    assert job.n == 5


def test_build_spec_bad_kind():
    with pytest.raises(ConfigError) as exc:
        JobConfig(kind="symplectic").build_spec()
    assert exc.value.key == "kind"


def test_build_spec_too_small():
    with pytest.raises(ConfigError):
        JobConfig(n=2).build_spec()


def test_build_ring_invalid_presentation():
    with pytest.raises(ConfigError) as exc:
        JobConfig(ring="Q/7").build_ring()
    assert exc.value.key == "ring"
