"""Line-oriented certificate text: a ``spec`` header, one generator per line,
then optional ``claim`` and ``residual`` sections. ``#`` starts a comment."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from . import linalg
from .errors import PresentationInvalid
from .forms import FormSpec
from .poly import Poly
from .rings import RingCtx, close_form_parameter, parse_ring
from .words import KINDS, VECTOR_KINDS, ElemGen, ElemWord, PolyElemWord, PolyGen

Word = Union[ElemWord, PolyElemWord]


@dataclass
class Certificate:
    word: Word
    claim: Optional[str] = None
    residual: Optional[np.ndarray] = None
    comments: List[str] = field(default_factory=list)

    @property
    def spec(self) -> FormSpec:
        return self.word.spec


def spec_header(spec: FormSpec, poly: bool = False) -> str:
    ctx = spec.ctx
    parts = [
        "spec",
        spec.kind,
        f"n={spec.n}",
        f"r={spec.r}",
        f"ring={ctx.presentation}",
        f"lambda={ctx.label(ctx.lam)}",
    ]
    if any(p not in ("", "trivial") for p in ctx.involution.split(";")):
        parts.append(f"involution={ctx.involution}")
    parts.append("Lambda=" + ";".join(ctx.label(x) for x in sorted(spec.Lambda.elements)))
    if spec.a:
        parts.append("a=" + ";".join(ctx.label(x) for x in spec.a))
    if not spec.blanket:
        parts.append("blanket=0")
    if poly:
        parts.append("args=poly")
    return " ".join(parts)


def parse_spec_header(line: str, ctx: Optional[RingCtx] = None) -> Tuple[FormSpec, bool]:
    tokens = line.split()
    if len(tokens) < 2 or tokens[0] != "spec":
        raise PresentationInvalid(f"certificate must start with a spec header, got {line!r}")
    kind = tokens[1]
    fields: Dict[str, str] = {}
    for tok in tokens[2:]:
        if "=" not in tok:
            raise PresentationInvalid(f"malformed header field {tok!r}")
        key, val = tok.split("=", 1)
        fields[key] = val
    for key in ("n", "r", "ring", "lambda"):
        if key not in fields:
            raise PresentationInvalid(f"spec header lacks {key}=")
    if ctx is None:
        ctx = parse_ring(fields["ring"], involution=fields.get("involution", "trivial"), lam=fields["lambda"])
    Lambda = None
    if "Lambda" in fields:
        elems = [ctx.parse(x) for x in fields["Lambda"].split(";") if x]
        Lambda = close_form_parameter(ctx, elems)
    a = [ctx.parse(x) for x in fields["a"].split(";")] if "a" in fields else None
    spec = FormSpec.create(
        ctx, kind, int(fields["n"]), r=int(fields["r"]), a=a, Lambda=Lambda, blanket=fields.get("blanket", "1") != "0"
    )
    return spec, fields.get("args") == "poly"


def format_gen(spec: FormSpec, g: Union[ElemGen, PolyGen]) -> str:
    label = (lambda v: str(v)) if isinstance(g, PolyGen) else spec.ctx.label
    if g.kind in VECTOR_KINDS:
        return " ".join([g.kind, str(g.i)] + [label(z) for z in g.zeta] + [label(g.f)])
    return f"{g.kind} {g.i} {g.j} {label(g.arg)}"


def parse_gen(spec: FormSpec, line: str, poly: bool = False) -> Union[ElemGen, PolyGen]:
    tokens = line.split()
    if not tokens or tokens[0] not in KINDS:
        raise PresentationInvalid(f"unknown generator line {line!r}")
    kind = tokens[0]
    ctx = spec.ctx
    value = (lambda t: Poly.parse(ctx, t)) if poly else ctx.parse
    try:
        if kind in VECTOR_KINDS:
            if len(tokens) != 3 + spec.r:
                raise PresentationInvalid(f"{kind} needs {spec.r} zeta entries and f: {line!r}")
            zeta = tuple(value(t) for t in tokens[2:-1])
            f = value(tokens[-1])
            cls = PolyGen if poly else ElemGen
            return cls(kind, int(tokens[1]), 0, zeta=zeta, f=f)
        if len(tokens) != 4:
            raise PresentationInvalid(f"expected '<kind> <i> <j> <arg>': {line!r}")
        if poly:
            return PolyGen(kind, int(tokens[1]), int(tokens[2]), arg=value(tokens[3]))
        return ElemGen(kind, int(tokens[1]), int(tokens[2]), value(tokens[3]))
    except ValueError as exc:
        raise PresentationInvalid(f"cannot parse generator line {line!r}: {exc}") from exc


def format_word(word: Word) -> str:
    poly = isinstance(word, PolyElemWord)
    lines = [spec_header(word.spec, poly)]
    lines += [format_gen(word.spec, g) for g in word.gens]
    return "\n".join(lines) + "\n"


def format_certificate(cert: Certificate) -> str:
    spec = cert.spec
    out = [f"# {c}" for c in cert.comments]
    out.append(format_word(cert.word).rstrip("\n"))
    if cert.claim:
        out.append(f"claim {cert.claim}")
    if cert.residual is not None:
        out.append("residual")
        out.append(linalg.format_matrix(spec.ctx, cert.residual))
    return "\n".join(out) + "\n"


def parse_certificate(text: str, ctx: Optional[RingCtx] = None) -> Certificate:
    lines = [ln.strip() for ln in text.splitlines()]
    comments = [ln[1:].strip() for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        raise PresentationInvalid("empty certificate")
    spec, poly = parse_spec_header(body[0], ctx)
    gens, claim, residual_rows = [], None, None
    for ln in body[1:]:
        if residual_rows is not None:
            residual_rows.append(ln)
        elif ln.startswith("claim"):
            claim = ln.split(None, 1)[1] if " " in ln else ""
        elif ln == "residual":
            residual_rows = []
        else:
            gens.append(parse_gen(spec, ln, poly))
    word = PolyElemWord(spec, tuple(gens)) if poly else ElemWord(spec, tuple(gens))
    residual = None
    if residual_rows:
        residual = np.array([[spec.ctx.parse(t) for t in row.split()] for row in residual_rows], dtype=np.int64)
    return Certificate(word, claim, residual, comments)


def parse_word(text: str, ctx: Optional[RingCtx] = None) -> Word:
    return parse_certificate(text, ctx).word
