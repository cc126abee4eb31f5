"""Finite commutative rings with involution, stored as Cayley tables.

Elements are integer indices ``0..order-1`` with 0 the zero element; every
operation is a table lookup, so numpy fancy indexing vectorises arithmetic
over whole vectors and matrices of elements.
"""

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .errors import GeneratorOutOfBounds, NilpotentElement, NotMaximal, PresentationInvalid
from .log import get_logger

logger = get_logger(__name__)

_TERM = re.compile(r"^(\d+)?\*?(t(?:\^(\d+))?)?$")
_COMPONENT = re.compile(r"^Z/(?P<n>\d+)(?:\[t\]/\((?P<f>[^()]+)\))?$")
_LOCALIZED = re.compile(r"^(?P<base>.+)\[1/(?P<s>[^\[\]]+)\]$")


def _parse_terms(text: str) -> List[Tuple[int, int]]:
    """Split ``2+t^2-3t`` into (coefficient, degree) pairs."""
    s = text.replace(" ", "")
    if not s:
        raise PresentationInvalid("empty expression")
    terms = []
    for chunk in re.findall(r"[+-]?[^+-]+|[+-]$", s):
        sign = -1 if chunk.startswith("-") else 1
        body = chunk.lstrip("+-")
        m = _TERM.match(body)
        if not body or not m or (m.group(1) is None and m.group(2) is None):
            raise PresentationInvalid(f"cannot parse term {chunk!r} in {text!r}")
        coef = int(m.group(1)) if m.group(1) else 1
        deg = (int(m.group(3)) if m.group(3) else 1) if m.group(2) else 0
        terms.append((sign * coef, deg))
    return terms


def _split_top(text: str, seps: Sequence[str]) -> List[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if depth == 0 and ch in seps:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p.strip() for p in parts]


@dataclass(frozen=True, eq=False)
class RingCtx:
    """A finite ring with involution and symmetry ``lam`` (λ)."""

    presentation: str
    involution: str
    labels: Tuple[str, ...]
    add: np.ndarray
    mul: np.ndarray
    bar: np.ndarray
    lam: int
    parse_fn: Callable[[str], int] = field(repr=False)

    # --- derived tables ---------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.labels)

    @cached_property
    def one(self) -> int:
        idx = np.arange(self.order)
        hits = np.nonzero((self.mul == idx[None, :]).all(axis=1))[0]
        if len(hits) == 0:
            raise PresentationInvalid(f"{self.presentation} has no identity")
        return int(hits[0])

    @cached_property
    def neg(self) -> np.ndarray:
        return np.argmax(self.add == 0, axis=1)

    @cached_property
    def inv(self) -> np.ndarray:
        """inv[x] is the two-sided inverse of x, or -1 when x is not a unit."""
        hit = (self.mul == self.one) & (self.mul.T == self.one)
        out = np.argmax(hit, axis=1)
        out[~hit.any(axis=1)] = -1
        return out

    @cached_property
    def ints(self) -> np.ndarray:
        # k·1 for k = 0..char-1
        vals = [0]
        while True:
            nxt = int(self.add[vals[-1], self.one])
            if nxt == 0:
                break
            vals.append(nxt)
        return np.array(vals)

    @cached_property
    def is_commutative(self) -> bool:
        return bool((self.mul == self.mul.T).all())

    @cached_property
    def nil_mask(self) -> np.ndarray:
        p = np.arange(self.order)
        k = 1
        while k < self.order:
            p = self.mul[p, p]
            k *= 2
        return p == 0

    @cached_property
    def fixed(self) -> np.ndarray:
        return np.nonzero(self.bar == np.arange(self.order))[0]

    @cached_property
    def primitive_idempotents(self) -> Tuple[int, ...]:
        x = np.arange(self.order)
        idem = [int(e) for e in x[self.mul[x, x] == x] if e != 0]
        prim = []
        for e in idem:
            if all(int(self.mul[e, f]) in (0, e) for f in idem):
                prim.append(e)
        return tuple(sorted(prim))

    @cached_property
    def local_masks(self) -> np.ndarray:
        """local_masks[t, x] is True when x lies in the t-th maximal ideal."""
        es = self.primitive_idempotents
        return np.stack([self.nil_mask[self.mul[:, e]] for e in es])

    @cached_property
    def unit_at(self) -> np.ndarray:
        """unit_at[x, t]: the image of x in the t-th local factor is a unit."""
        return ~self.local_masks.T

    @cached_property
    def half_table(self) -> Dict[int, int]:
        # least f with f + λf̄ = h, keyed by h
        x = np.arange(self.order)
        h = self.add[x, self.mul[self.lam, self.bar[x]]]
        out: Dict[int, int] = {}
        for f, hv in zip(x.tolist(), h.tolist()):
            out.setdefault(hv, f)
        return out

    # --- scalar arithmetic --------------------------------------------------
    def plus(self, x, y):
        return self.add[x, y]

    def minus(self, x, y):
        return self.add[x, self.neg[y]]

    def times(self, x, y):
        return self.mul[x, y]

    def negate(self, x):
        return self.neg[x]

    def conj(self, x):
        return self.bar[x]

    def is_unit(self, x) -> bool:
        return bool(self.inv[int(x)] >= 0)

    def inverse(self, x) -> int:
        v = int(self.inv[int(x)])
        if v < 0:
            raise ValueError(f"{self.label(x)} is not a unit in {self.presentation}")
        return v

    def from_int(self, k: int) -> int:
        return int(self.ints[k % len(self.ints)])

    def power(self, x: int, k: int) -> int:
        out, base = self.one, int(x)
        while k > 0:
            if k & 1:
                out = int(self.mul[out, base])
            base = int(self.mul[base, base])
            k >>= 1
        return out

    def total(self, xs: Iterable[int]) -> int:
        acc = 0
        for x in xs:
            acc = int(self.add[acc, int(x)])
        return acc

    @property
    def lam_bar(self) -> int:
        return int(self.bar[self.lam])

    # --- text ---------------------------------------------------------------
    def label(self, x) -> str:
        return self.labels[int(x)]

    def parse(self, text) -> int:
        if isinstance(text, (int, np.integer)):
            return self.from_int(int(text))
        return int(self.parse_fn(str(text).strip()))

    def __repr__(self) -> str:
        return f"RingCtx({self.presentation}, involution={self.involution}, lambda={self.label(self.lam)})"


@dataclass(frozen=True)
class FormParameter:
    elements: FrozenSet[int]
    lam: int

    def __contains__(self, x) -> bool:
        return int(x) in self.elements

    def conjugate(self, ctx: RingCtx) -> FrozenSet[int]:
        return frozenset(int(ctx.bar[x]) for x in self.elements)


@dataclass(frozen=True)
class Ideal:
    generators: Tuple[int, ...]
    elements: FrozenSet[int]
    idempotent: Optional[int] = None

    def __contains__(self, x) -> bool:
        return int(x) in self.elements

    def mask(self, order: int) -> np.ndarray:
        m = np.zeros(order, dtype=bool)
        m[list(self.elements)] = True
        return m

    def describe(self, ctx: RingCtx) -> str:
        return "(" + ",".join(ctx.label(g) for g in self.generators) + ")"


@dataclass(frozen=True)
class Localization:
    """R_s realised as the quotient R/(0 : s^∞) with its canonical maps."""

    source: RingCtx
    ring: RingCtx
    s: int
    proj: np.ndarray
    section: np.ndarray
    kernel: Ideal

    def __iter__(self):
        # unpacks as (ring, quotient map)
        yield self.ring
        yield self.proj


# --- construction -------------------------------------------------------------


def _component(modulus: int, fpoly: Optional[str], involution: str, cfg: Config) -> RingCtx:
    if modulus < 2:
        raise PresentationInvalid(f"modulus must be at least 2, got {modulus}")
    has_t = fpoly is not None
    if has_t:
        terms = _parse_terms(fpoly)
        deg = max(d for _, d in terms)
        coeffs = [0] * (deg + 1)
        for c, d in terms:
            coeffs[d] = (coeffs[d] + c) % modulus
        if deg < 1 or coeffs[deg] % modulus != 1:
            raise PresentationInvalid(f"polynomial modulus {fpoly!r} is not monic of positive degree")
    else:
        deg, coeffs = 1, [0, 1]
    order = modulus**deg
    if order > cfg.max_order:
        raise PresentationInvalid(f"ring of order {order} exceeds FORMRING_MAX_ORDER={cfg.max_order}")

    radix = modulus ** np.arange(deg)
    digits = (np.arange(order)[:, None] // radix[None, :]) % modulus

    add = ((digits[:, None, :] + digits[None, :, :]) % modulus) @ radix
    prod = np.zeros((order, order, 2 * deg - 1), dtype=np.int64)
    for i in range(deg):
        for j in range(deg):
            prod[:, :, i + j] += digits[:, None, i] * digits[None, :, j]
    for k in range(2 * deg - 2, deg - 1, -1):
        top = prod[:, :, k] % modulus
        for i in range(deg):
            prod[:, :, k - deg + i] -= top * coeffs[i]
        prod[:, :, k] = 0
    mul = (prod[:, :, :deg] % modulus) @ radix

    def from_digits(ds: Sequence[int]) -> int:
        return int(sum((d % modulus) * int(r) for d, r in zip(ds, radix)))

    def t_power(k: int) -> int:
        out = from_digits([1])
        t = from_digits([0, 1]) if deg > 1 else from_digits([-coeffs[0]])
        for _ in range(k):
            out = int(mul[out, t])
        return out

    def parse_local(text: str) -> int:
        acc = 0
        for c, d in _parse_terms(text):
            if d > 0 and not has_t:
                raise PresentationInvalid(f"Z/{modulus} has no generator t: {text!r}")
            term = int(mul[from_digits([c]), t_power(d)])
            acc = int(add[acc, term])
        return acc

    inv_spec = involution.replace(" ", "")
    if inv_spec in ("", "trivial") or not has_t:
        bar = np.arange(order)
    else:
        if not inv_spec.startswith("t->"):
            raise PresentationInvalid(f"cannot parse involution {involution!r}")
        image = parse_local(inv_spec[3:])
        powers = [from_digits([1])]
        for _ in range(1, deg):
            powers.append(int(mul[powers[-1], image]))
        pdigits = digits[powers]  # (deg, deg)
        bar = ((digits @ pdigits) % modulus) @ radix

    labels = []
    for row in digits.tolist():
        if not has_t:
            labels.append(str(row[0]))
            continue
        parts = []
        for k, c in enumerate(row):
            if c == 0:
                continue
            parts.append(str(c) if k == 0 else (f"{c}t" if k == 1 else f"{c}t^{k}"))
        labels.append("+".join(parts) if parts else "0")

    pres = f"Z/{modulus}" + (f"[t]/({fpoly.replace(' ', '')})" if has_t else "")
    return RingCtx(
        presentation=pres,
        involution="trivial" if (bar == np.arange(order)).all() else inv_spec,
        labels=tuple(labels),
        add=add.astype(np.int64),
        mul=mul.astype(np.int64),
        bar=np.asarray(bar, dtype=np.int64),
        lam=0,
        parse_fn=parse_local,
    )


def _with_lambda(ctx: RingCtx, lam: int) -> RingCtx:
    return RingCtx(ctx.presentation, ctx.involution, ctx.labels, ctx.add, ctx.mul, ctx.bar, int(lam), ctx.parse_fn)


def product_ring(parts: Sequence[RingCtx]) -> RingCtx:
    """Cartesian product of component rings with componentwise operations."""
    if len(parts) == 1:
        return parts[0]
    orders = [p.order for p in parts]
    radix = np.cumprod([1] + orders[:-1])
    total = int(np.prod(orders))
    idx = np.arange(total)
    comp = [(idx // int(r)) % o for r, o in zip(radix, orders)]
    add = sum(p.add[c[:, None], c[None, :]] * int(r) for p, c, r in zip(parts, comp, radix))
    mul = sum(p.mul[c[:, None], c[None, :]] * int(r) for p, c, r in zip(parts, comp, radix))
    bar = sum(p.bar[c] * int(r) for p, c, r in zip(parts, comp, radix))
    labels = tuple("(" + ",".join(p.labels[int(c[x])] for p, c in zip(parts, comp)) + ")" for x in range(total))

    def parse_product(text: str) -> int:
        text = text.strip()
        if text.startswith("(") and text.endswith(")"):
            items = _split_top(text[1:-1], ",")
            if len(items) != len(parts):
                raise PresentationInvalid(f"expected {len(parts)} components in {text!r}")
            return int(sum(p.parse(it) * int(r) for p, it, r in zip(parts, items, radix)))
        acc = 0
        for c, d in _parse_terms(text):
            if d:
                raise PresentationInvalid(f"use component notation (a,b,...) for {text!r}")
            acc = int(add[acc, int(sum(p.from_int(c) * int(r) for p, r in zip(parts, radix)))])
        return acc

    return RingCtx(
        presentation="x".join(p.presentation for p in parts),
        involution=";".join(p.involution for p in parts),
        labels=labels,
        add=add,
        mul=mul,
        bar=bar,
        lam=0,
        parse_fn=parse_product,
    )


def quotient_ring(ctx: RingCtx, ideal: Ideal, presentation: str) -> Tuple[RingCtx, np.ndarray, np.ndarray]:
    """R/I with least-representative labels; returns (ring, proj, section)."""
    members = np.array(sorted(ideal.elements))
    # least representative of x + I
    rep = ctx.add[np.arange(ctx.order)[:, None], members[None, :]].min(axis=1)
    section = np.unique(rep)
    pos = np.full(ctx.order, -1)
    pos[section] = np.arange(len(section))
    proj = pos[rep]
    if (proj[ctx.bar[members]] != 0).any():
        raise PresentationInvalid(f"ideal {ideal.describe(ctx)} is not stable under the involution")
    sub = np.ix_(section, section)

    def parse_quotient(text: str) -> int:
        return int(proj[ctx.parse(text)])

    ring = RingCtx(
        presentation=presentation,
        involution=ctx.involution,
        labels=tuple(ctx.labels[int(s)] for s in section),
        add=proj[ctx.add[sub]],
        mul=proj[ctx.mul[sub]],
        bar=proj[ctx.bar[section]],
        lam=int(proj[ctx.lam]),
        parse_fn=parse_quotient,
    )
    return ring, proj, section


def parse_ring(presentation: str, involution: str = "trivial", lam="1", cfg: Optional[Config] = None) -> RingCtx:
    """Build a RingCtx from the presentation grammar.

    ``Z/4``, ``Z/3[t]/(t^2+1)``, ``Z/2xZ/3``, optionally followed by a
    localization suffix ``[1/<element>]``.
    """
    cfg = cfg or Config.from_env()
    text = presentation.replace(" ", "").replace("×", "x").replace("*", "x")
    loc = _LOCALIZED.match(text)
    if loc and not text.endswith("[t]"):
        base = parse_ring(loc.group("base"), involution=involution, lam=lam, cfg=cfg)
        return localize_at(base, base.parse(loc.group("s"))).ring
    pieces = _split_top(text, "x")
    invs = involution.split(";") if ";" in involution else [involution] * len(pieces)
    if len(invs) != len(pieces):
        raise PresentationInvalid(f"involution {involution!r} does not match {len(pieces)} components")
    comps = []
    for piece, inv in zip(pieces, invs):
        m = _COMPONENT.match(piece)
        if not m:
            raise PresentationInvalid(f"cannot parse ring component {piece!r}")
        comps.append(_component(int(m.group("n")), m.group("f"), inv, cfg))
    ctx = product_ring(comps)
    return _with_lambda(ctx, ctx.parse(lam))


def zmod(n: int, lam="1") -> RingCtx:
    return parse_ring(f"Z/{n}", lam=lam)


# --- ideals ---------------------------------------------------------------------


def additive_closure(ctx: RingCtx, elems: Iterable[int]) -> np.ndarray:
    cur = np.unique(np.append(np.fromiter((int(e) for e in elems), dtype=np.int64), 0))
    while True:
        nxt = np.unique(ctx.add[cur[:, None], cur[None, :]])
        if len(nxt) == len(cur):
            return nxt
        cur = nxt


def ideal_generated(ctx: RingCtx, gens: Iterable[int]) -> Ideal:
    gens = tuple(int(g) for g in gens)
    multiples = [ctx.mul[:, g] for g in gens] or [np.array([0])]
    elems = additive_closure(ctx, np.concatenate(multiples))
    return Ideal(generators=gens, elements=frozenset(elems.tolist()))


def ideal_from_elements(ctx: RingCtx, elements: Iterable[int], idempotent: Optional[int] = None) -> Ideal:
    """Wrap a known ideal, greedily choosing a short generating set."""
    elements = sorted(set(int(e) for e in elements))
    gens: List[int] = []
    cur = {0}
    for x in elements:
        if x not in cur:
            gens.append(x)
            cur = set(ideal_generated(ctx, gens).elements)
    return Ideal(generators=tuple(gens) or (0,), elements=frozenset(elements), idempotent=idempotent)


def is_unit_ideal(ctx: RingCtx, gens: Iterable[int]) -> bool:
    return ctx.one in ideal_generated(ctx, gens)


def _is_subgroup(ctx: RingCtx, elems: np.ndarray) -> bool:
    sums = np.unique(ctx.add[elems[:, None], elems[None, :]])
    return 0 in set(elems.tolist()) and set(sums.tolist()) <= set(elems.tolist())


# --- operations -------------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    presentation: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> List[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f" ({c.detail})" if c.detail else "") for c in self.checks]


def validate_ctx(ctx: RingCtx, cfg: Optional[Config] = None, seed: int = 0) -> ValidationReport:
    """Check ring, involution and symmetry axioms; full enumeration for small orders."""
    cfg = cfg or Config.from_env()
    report = ValidationReport(ctx.presentation)
    N = ctx.order
    add, mul, bar, neg = ctx.add, ctx.mul, ctx.bar, ctx.neg

    if N**3 <= cfg.sample_triples:
        a, b, c = (g.ravel() for g in np.meshgrid(np.arange(N), np.arange(N), np.arange(N), indexing="ij"))
        how = "full"
    else:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, N, size=(3, cfg.sample_triples))
        how = f"{cfg.sample_triples} sampled triples"

    def chk(name: str, ok, detail: str = "") -> None:
        report.checks.append(Check(name, bool(np.all(ok)), detail))

    chk("additive associativity", add[add[a, b], c] == add[a, add[b, c]], how)
    chk("additive commutativity", add[a, b] == add[b, a], how)
    chk("multiplicative associativity", mul[mul[a, b], c] == mul[a, mul[b, c]], how)
    chk("left distributivity", mul[a, add[b, c]] == add[mul[a, b], mul[a, c]], how)
    chk("right distributivity", mul[add[a, b], c] == add[mul[a, c], mul[b, c]], how)
    x = np.arange(N)
    chk("identity", (mul[ctx.one, x] == x) & (mul[x, ctx.one] == x))

    if N <= cfg.full_check_order:
        p, q = (g.ravel() for g in np.meshgrid(x, x, indexing="ij"))
        pair_how = "full"
    else:
        rng = np.random.default_rng(seed + 1)
        p, q = rng.integers(0, N, size=(2, cfg.sample_triples))
        pair_how = "sampled"
    chk("involution additive", bar[add[p, neg[q]]] == add[bar[p], neg[bar[q]]], pair_how)
    chk("involution anti-multiplicative", bar[mul[p, q]] == mul[bar[q], bar[p]], pair_how)
    chk("involution of order two", bar[bar[x]] == x)
    lam, lb = ctx.lam, ctx.lam_bar
    chk("lambda*lambdabar = 1", mul[lam, lb] == ctx.one, f"lambda={ctx.label(lam)}")
    chk("lambdabar*lambda = 1", mul[lb, lam] == ctx.one)
    chk("lambda a lambdabar = a double bar", mul[mul[lam, x], lb] == bar[bar[x]])
    if not report.passed:
        logger.info("validation failed for %s: %s", ctx.presentation, [c.name for c in report.checks if not c.passed])
    return report


def min_lambda(ctx: RingCtx) -> FrozenSet[int]:
    x = np.arange(ctx.order)
    vals = np.unique(ctx.add[x, ctx.neg[ctx.mul[ctx.lam, ctx.bar[x]]]])
    assert _is_subgroup(ctx, vals), "min^lambda is not an additive subgroup"
    return frozenset(vals.tolist())


def max_lambda(ctx: RingCtx) -> FrozenSet[int]:
    x = np.arange(ctx.order)
    vals = x[ctx.neg[ctx.mul[ctx.lam, ctx.bar[x]]] == x]
    out = frozenset(vals.tolist())
    assert min_lambda(ctx) <= out, "min^lambda is not contained in max^lambda"
    return out


def close_form_parameter(ctx: RingCtx, gens: Iterable[int] = ()) -> FormParameter:
    """Smallest form parameter containing min^λ and ``gens``."""
    gens = [int(g) for g in gens]
    upper = max_lambda(ctx)
    bad = [ctx.label(g) for g in gens if g not in upper]
    if bad:
        raise GeneratorOutOfBounds(f"generators {bad} are not in max^lambda", generators=bad)
    x = np.arange(ctx.order)
    cur = additive_closure(ctx, list(min_lambda(ctx)) + gens)
    while True:
        # x̄ a x for every x in R and a in the current set
        conj = ctx.mul[ctx.mul[ctx.bar[x][:, None], cur[None, :]], x[:, None]]
        nxt = additive_closure(ctx, np.concatenate([cur, conj.ravel()]))
        if len(nxt) == len(cur):
            break
        cur = nxt
    out = frozenset(cur.tolist())
    assert out <= upper
    return FormParameter(elements=out, lam=ctx.lam)


def jacobson_radical(ctx: RingCtx) -> Ideal:
    elems = np.nonzero(ctx.nil_mask)[0]
    assert ctx.nil_mask[ctx.bar[elems]].all(), "radical is not stable under the involution"
    return ideal_from_elements(ctx, elems.tolist())


def maximal_ideals(ctx: RingCtx) -> List[Ideal]:
    """Maximal ideals, one per primitive idempotent of R, tagged with it."""
    out = []
    for e, mask in zip(ctx.primitive_idempotents, ctx.local_masks):
        out.append(ideal_from_elements(ctx, np.nonzero(mask)[0].tolist(), idempotent=e))
    return sorted(out, key=lambda m: sorted(m.elements))


def semisimple_quotient(ctx: RingCtx) -> Tuple[RingCtx, np.ndarray, np.ndarray]:
    return quotient_ring(ctx, jacobson_radical(ctx), f"{ctx.presentation}/J")


def saturation(ctx: RingCtx, s: int) -> Ideal:
    """(0 : s^∞) = {x : s^k x = 0 for some k}."""
    sn = ctx.power(s, ctx.order)
    return ideal_from_elements(ctx, np.nonzero(ctx.mul[sn] == 0)[0].tolist())


def localize_at(ctx: RingCtx, s: int) -> Localization:
    s = int(s)
    if ctx.power(s, ctx.order) == 0:
        raise NilpotentElement(f"{ctx.label(s)} is nilpotent in {ctx.presentation}", element=ctx.label(s))
    kernel = saturation(ctx, s)
    ring, proj, section = quotient_ring(ctx, kernel, f"{ctx.presentation}[1/{ctx.label(s)}]")
    assert ring.is_unit(proj[s]), "image of s is not a unit"
    logger.debug("localized %s at %s: order %d -> %d", ctx.presentation, ctx.label(s), ctx.order, ring.order)
    return Localization(source=ctx, ring=ring, s=s, proj=proj, section=section, kernel=kernel)


def localize_at_maximal(ctx: RingCtx, m: Ideal) -> Localization:
    for cand in maximal_ideals(ctx):
        if cand.elements == m.elements:
            loc = localize_at(ctx, cand.idempotent)
            assert len(maximal_ideals(loc.ring)) == 1, "localization at a maximal ideal is not local"
            return loc
    raise NotMaximal(f"{m.describe(ctx)} is not a maximal ideal of {ctx.presentation}")


def annihilating_power(ctx: RingCtx, s: int, elements: Iterable[int]) -> int:
    """Least m with s^m·x = 0 for every x in ``elements``."""
    elems = np.array(sorted(set(int(e) for e in elements)) or [0])
    m, p = 0, ctx.one
    while (ctx.mul[p, elems] != 0).any():
        m += 1
        p = int(ctx.mul[p, s])
        if m > ctx.order:
            raise NilpotentElement("no power of s annihilates the given elements")
    return m


def least_preimage(loc: Localization, target: int, allowed: Optional[Iterable[int]] = None) -> int:
    """Least element of R (optionally inside ``allowed``) mapping to ``target``."""
    if allowed is None:
        return int(loc.section[int(target)])
    for x in sorted(int(a) for a in allowed):
        if int(loc.proj[x]) == int(target):
            return x
    return int(loc.section[int(target)])
