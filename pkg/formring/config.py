import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

from dotenv import dotenv_values, load_dotenv

from .errors import ConfigError, FormRingError


load_dotenv()


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}")


@dataclass(frozen=True)
class Config:
    full_check_order: int = 4096
    sample_triples: int = 10_000
    max_order: int = 2048
    degree_cap: int = 256
    log_level: str = "INFO"
    log_file: Optional[str] = None
    progress_log_path: Optional[str] = None

    @staticmethod
    def from_env() -> "Config":
        return Config(
            full_check_order=_env_int("FORMRING_FULL_CHECK_ORDER", 4096),
            sample_triples=_env_int("FORMRING_SAMPLE_TRIPLES", 10_000),
            max_order=_env_int("FORMRING_MAX_ORDER", 2048),
            degree_cap=_env_int("FORMRING_DEGREE_CAP", 256),
            log_level=os.getenv("FORMRING_LOG_LEVEL", "INFO").upper(),
            log_file=os.getenv("FORMRING_LOG_FILE") or None,
            progress_log_path=os.getenv("PROGRESS_LOG_PATH") or None,
        )


def _split_list(raw: str) -> List[str]:
    # ';' separates items because product-ring labels contain commas
    raw = raw.strip()
    if raw.startswith("[") and raw.endswith("]"):
        raw = raw[1:-1]
    return [p.strip().strip('"') for p in raw.split(";") if p.strip()]


@dataclass(frozen=True)
class JobConfig:
    """Everything one CLI run needs: ring, form, command parameters."""

    ring: str = "Z/4"
    involution: str = "trivial"
    lam: str = "-1"
    Lambda_gens: List[str] = field(default_factory=list)
    kind: str = "quadratic"
    n: int = 3
    r: int = 0
    a: List[str] = field(default_factory=list)
    command: Optional[str] = None
    suite: Optional[str] = None
    seed: Optional[int] = None
    samples: int = 100
    degree_cap: Optional[int] = None
    in_path: Optional[str] = None
    out_path: Optional[str] = None
    gen: Optional[str] = None
    vector: Optional[str] = None
    s: Optional[str] = None
    ideal: List[str] = field(default_factory=list)
    method: str = "absorb"

    @staticmethod
    def from_file(path: str) -> Dict[str, object]:
        """Read a dotenv-style job file into JobConfig field overrides."""
        if not os.path.exists(path):
            raise ConfigError(f"job file {path} does not exist", key="config")
        raw = {k.lower() if k.lower() != "lambda_gens" else "Lambda_gens": v for k, v in dotenv_values(path).items()}
        out: Dict[str, object] = {}
        for key, val in raw.items():
            if val is None:
                raise ConfigError("missing value", key=key)
            val = val.strip().strip('"')
            if key in ("ring", "involution", "kind", "gen", "vector", "s", "method", "command", "suite"):
                out[key] = val
            elif key == "lambda":
                out["lam"] = val
            elif key in ("lambda_gens", "Lambda_gens"):
                out["Lambda_gens"] = _split_list(val)
            elif key in ("a", "ideal"):
                out[key] = _split_list(val)
            elif key in ("n", "r", "seed", "samples", "degree_cap"):
                try:
                    out[key] = int(val)
                except ValueError:
                    raise ConfigError(f"expected an integer, got {val!r}", key=key)
            elif key in ("in", "out"):
                out[f"{key}_path"] = val
            else:
                raise ConfigError("unknown key", key=key)
        return out

    def with_overrides(self, **values: object) -> "JobConfig":
        return replace(self, **{k: v for k, v in values.items() if v is not None})

    def build_ring(self):
        from .rings import parse_ring

        try:
            return parse_ring(self.ring, involution=self.involution, lam=self.lam)
        except FormRingError as exc:
            raise ConfigError(str(exc), key="ring") from exc

    def build_spec(self, ctx=None):
        from .forms import FormSpec

        ctx = ctx if ctx is not None else self.build_ring()
        if self.kind not in ("quadratic", "hermitian"):
            raise ConfigError(f"kind must be quadratic or hermitian, got {self.kind!r}", key="kind")
        try:
            gens = [ctx.parse(g) for g in self.Lambda_gens]
        except FormRingError as exc:
            raise ConfigError(str(exc), key="Lambda_gens") from exc
        try:
            a = [ctx.parse(x) for x in self.a] if self.a else None
        except FormRingError as exc:
            raise ConfigError(str(exc), key="a") from exc
        try:
            return FormSpec.create(ctx, self.kind, self.n, r=self.r, a=a, Lambda_gens=gens)
        except FormRingError as exc:
            raise ConfigError(str(exc), key="kind/n/r") from exc
