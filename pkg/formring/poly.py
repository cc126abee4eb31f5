"""Sparse polynomials and polynomial matrices over a RingCtx.

Polynomials live in R[X, T, U]: exponents are 3-tuples indexed by ``X``,
``T`` and ``U``. Dilation needs the second variable and patching the third;
everything else works in X alone.
"""

import re
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from .errors import PresentationInvalid
from .linalg import identity as _identity
from .linalg import mat_mul
from .rings import RingCtx, _split_top

VARS = ("X", "T", "U")
X, T, U = 0, 1, 2
Exp = Tuple[int, int, int]
ZERO: Exp = (0, 0, 0)

_MONO = re.compile(r"([XTU])(?:\^(\d+))?")
_TERM = re.compile(r"^(?P<coef>\(.*\)|[0-9a-z^]+)?\*?(?P<mono>(?:[XTU](?:\^\d+)?)*)$")


def _eadd(a: Exp, b: Exp) -> Exp:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _unit(var: int, k: int = 1) -> Exp:
    e = [0, 0, 0]
    e[var] = k
    return tuple(e)


def _drop(e: Exp, var: int) -> Exp:
    e = list(e)
    e[var] = 0
    return tuple(e)


def _mono_str(e: Exp) -> str:
    return "".join(v if k == 1 else f"{v}^{k}" for v, k in zip(VARS, e) if k)


class Poly:
    """Immutable by convention; ``terms`` maps exponent tuples to nonzero elements."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: RingCtx, terms: Optional[Dict[Exp, int]] = None) -> None:
        self.ctx = ctx
        self.terms: Dict[Exp, int] = {e: int(c) for e, c in (terms or {}).items() if int(c) != 0}

    # --- constructors -------------------------------------------------------
    @staticmethod
    def const(ctx: RingCtx, c: int) -> "Poly":
        return Poly(ctx, {ZERO: c})

    @staticmethod
    def var(ctx: RingCtx, var: int = X, coef: Optional[int] = None, power: int = 1) -> "Poly":
        return Poly(ctx, {_unit(var, power): ctx.one if coef is None else coef})

    @staticmethod
    def lift(ctx: RingCtx, value) -> "Poly":
        return value if isinstance(value, Poly) else Poly.const(ctx, int(value))

    # --- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        return Poly.lift(self.ctx, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = int(self.ctx.add[out.get(e, 0), c])
        return Poly(self.ctx, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.ctx, {e: int(self.ctx.neg[c]) for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(int(other))
        out: Dict[Exp, int] = {}
        add, mul = self.ctx.add, self.ctx.mul
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _eadd(e1, e2)
                out[e] = int(add[out.get(e, 0), mul[c1, c2]])
        return Poly(self.ctx, out)

    __rmul__ = __mul__

    def scale(self, c: int) -> "Poly":
        return Poly(self.ctx, {e: int(self.ctx.mul[c, v]) for e, v in self.terms.items()})

    def conj(self) -> "Poly":
        return Poly(self.ctx, {e: int(self.ctx.bar[c]) for e, c in self.terms.items()})

    def shift(self, var: int, k: int) -> "Poly":
        return Poly(self.ctx, {_eadd(e, _unit(var, k)): c for e, c in self.terms.items()})

    def times_exp(self, e: Exp) -> "Poly":
        return Poly(self.ctx, {_eadd(e2, e): c for e2, c in self.terms.items()})

    def divide(self, var: int, k: int) -> "Poly":
        assert self.divisible_by(var, k), f"{self} is not divisible by {VARS[var]}^{k}"
        return Poly(self.ctx, {_eadd(e, _unit(var, -k)): c for e, c in self.terms.items()})

    # --- queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(e == ZERO for e in self.terms)

    def constant_term(self) -> int:
        return self.terms.get(ZERO, 0)

    def degree(self, var: int = X) -> int:
        return max((e[var] for e in self.terms), default=0)

    def min_degree(self, var: int = X) -> Optional[int]:
        return min((e[var] for e in self.terms), default=None)

    def divisible_by(self, var: int, k: int) -> bool:
        return all(e[var] >= k for e in self.terms)

    def coefficients(self) -> List[int]:
        return [c for _, c in sorted(self.terms.items())]

    def split(self, var: int = X) -> Tuple["Poly", "Poly"]:
        """(part free of ``var``, part divisible by ``var``)."""
        free = {e: c for e, c in self.terms.items() if e[var] == 0}
        rest = {e: c for e, c in self.terms.items() if e[var] > 0}
        return Poly(self.ctx, free), Poly(self.ctx, rest)

    # --- substitutions ------------------------------------------------------
    def substitute(self, var: int, value: "Poly") -> "Poly":
        value = self._coerce(value)
        powers = [Poly.const(self.ctx, self.ctx.one)]
        out = Poly(self.ctx)
        for e, c in self.terms.items():
            while len(powers) <= e[var]:
                powers.append(powers[-1] * value)
            out = out + Poly(self.ctx, {_drop(e, var): c}) * powers[e[var]]
        return out

    def scale_var(self, var: int, b: int) -> "Poly":
        return Poly(self.ctx, {e: int(self.ctx.mul[c, self.ctx.power(b, e[var])]) for e, c in self.terms.items()})

    def power_var(self, var: int, k: int) -> "Poly":
        out: Dict[Exp, int] = {}
        for e, c in self.terms.items():
            e2 = list(e)
            e2[var] *= k
            out[tuple(e2)] = c
        return Poly(self.ctx, out)

    def evaluate(self, var: int, c: int) -> "Poly":
        return self.substitute(var, Poly.const(self.ctx, c))

    def map_coeffs(self, table: np.ndarray, ctx: RingCtx) -> "Poly":
        return Poly(ctx, {e: int(table[c]) for e, c in self.terms.items()})

    # --- comparisons and text -------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly.lift(self.ctx, other)
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            label = self.ctx.label(c)
            mono = _mono_str(e)
            if any(ch in label for ch in "+-") and not label.startswith("(") and (mono or len(self.terms) > 1):
                label = f"({label})"
            if mono and c == self.ctx.one:
                parts.append(mono)
            else:
                parts.append(label + mono)
        return "+".join(parts)

    __repr__ = __str__

    @staticmethod
    def parse(ctx: RingCtx, text: str) -> "Poly":
        text = text.replace(" ", "")
        out = Poly(ctx)
        for chunk in _split_top(text, "+"):
            if not chunk:
                raise PresentationInvalid(f"empty term in polynomial {text!r}")
            sign = 1
            while chunk.startswith("-"):
                sign, chunk = -sign, chunk[1:]
            m = _TERM.match(chunk)
            if not m:
                raise PresentationInvalid(f"cannot parse polynomial term {chunk!r}")
            coef_text = m.group("coef")
            if coef_text and coef_text.startswith("(") and "," not in coef_text:
                coef_text = coef_text[1:-1]
            coef = ctx.parse(coef_text) if coef_text else ctx.one
            if sign < 0:
                coef = int(ctx.neg[coef])
            e = [0, 0, 0]
            for v, k in _MONO.findall(m.group("mono")):
                e[VARS.index(v)] += int(k) if k else 1
            out = out + Poly(ctx, {tuple(e): coef})
        return out


class PolyMat:
    """Square matrix over R[X, T, U], stored as exponent -> coefficient matrix."""

    __slots__ = ("ctx", "size", "terms")

    def __init__(self, ctx: RingCtx, size: int, terms: Optional[Dict[Exp, np.ndarray]] = None) -> None:
        self.ctx = ctx
        self.size = size
        self.terms: Dict[Exp, np.ndarray] = {e: A for e, A in (terms or {}).items() if np.any(A)}

    @staticmethod
    def identity(ctx: RingCtx, k: int) -> "PolyMat":
        return PolyMat(ctx, k, {ZERO: _identity(ctx, k)})

    @staticmethod
    def from_matrix(ctx: RingCtx, A: np.ndarray) -> "PolyMat":
        A = np.asarray(A, dtype=np.int64)
        return PolyMat(ctx, A.shape[0], {ZERO: A.copy()})

    @staticmethod
    def from_entries(ctx: RingCtx, k: int, entries: Iterable[Tuple[Tuple[int, int], Poly]], base: Optional["PolyMat"] = None) -> "PolyMat":
        terms = {e: A.copy() for e, A in (base.terms.items() if base is not None else [])}
        for (r, c), p in entries:
            for e, v in p.terms.items():
                A = terms.setdefault(e, np.zeros((k, k), dtype=np.int64))
                A[r, c] = ctx.add[A[r, c], v]
        return PolyMat(ctx, k, terms)

    def _combine(self, other: "PolyMat", sign: bool) -> "PolyMat":
        out = dict(self.terms)
        for e, B in other.terms.items():
            B = self.ctx.neg[B] if sign else B
            out[e] = self.ctx.add[out[e], B] if e in out else B
        return PolyMat(self.ctx, self.size, out)

    def __add__(self, other: "PolyMat") -> "PolyMat":
        return self._combine(other, False)

    def __sub__(self, other: "PolyMat") -> "PolyMat":
        return self._combine(other, True)

    def __neg__(self) -> "PolyMat":
        return PolyMat(self.ctx, self.size, {e: self.ctx.neg[A] for e, A in self.terms.items()})

    def __mul__(self, other: "PolyMat") -> "PolyMat":
        out: Dict[Exp, np.ndarray] = {}
        for e1, A in self.terms.items():
            for e2, B in other.terms.items():
                e = _eadd(e1, e2)
                prod = mat_mul(self.ctx, A, B)
                out[e] = self.ctx.add[out[e], prod] if e in out else prod
        return PolyMat(self.ctx, self.size, out)

    def scale(self, c: int) -> "PolyMat":
        return PolyMat(self.ctx, self.size, {e: self.ctx.mul[c, A] for e, A in self.terms.items()})

    def times_poly(self, p: Poly) -> "PolyMat":
        out: Dict[Exp, np.ndarray] = {}
        for e1, A in self.terms.items():
            for e2, c in p.terms.items():
                e = _eadd(e1, e2)
                B = self.ctx.mul[c, A]
                out[e] = self.ctx.add[out[e], B] if e in out else B
        return PolyMat(self.ctx, self.size, out)

    def conj_transpose(self) -> "PolyMat":
        return PolyMat(self.ctx, self.size, {e: self.ctx.bar[A].T.copy() for e, A in self.terms.items()})

    def entry(self, r: int, c: int) -> Poly:
        return Poly(self.ctx, {e: int(A[r, c]) for e, A in self.terms.items()})

    def column(self, c: int) -> List[Poly]:
        return [self.entry(r, c) for r in range(self.size)]

    # --- substitutions ------------------------------------------------------
    def substitute(self, var: int, value: Poly) -> "PolyMat":
        powers = [Poly.const(self.ctx, self.ctx.one)]
        out = PolyMat(self.ctx, self.size)
        for e, A in self.terms.items():
            while len(powers) <= e[var]:
                powers.append(powers[-1] * value)
            out = out + PolyMat(self.ctx, self.size, {_drop(e, var): A}).times_poly(powers[e[var]])
        return out

    def scale_var(self, var: int, b: int) -> "PolyMat":
        return PolyMat(self.ctx, self.size, {e: self.ctx.mul[self.ctx.power(b, e[var]), A] for e, A in self.terms.items()})

    def evaluate(self, var: int, c: int) -> "PolyMat":
        return self.substitute(var, Poly.const(self.ctx, c))

    def map_coeffs(self, table: np.ndarray, ctx: RingCtx) -> "PolyMat":
        return PolyMat(ctx, self.size, {e: np.asarray(table)[A] for e, A in self.terms.items()})

    # --- queries ------------------------------------------------------------
    def is_constant(self) -> bool:
        return all(e == ZERO for e in self.terms)

    def constant_matrix(self) -> np.ndarray:
        return self.terms.get(ZERO, np.zeros((self.size, self.size), dtype=np.int64)).copy()

    def is_identity(self) -> bool:
        return self == PolyMat.identity(self.ctx, self.size)

    def degree(self, var: int = X) -> int:
        return max((e[var] for e in self.terms), default=0)

    def first_difference(self, other: "PolyMat") -> Optional[Tuple[Exp, int, int]]:
        """Where two matrices differ, as (exponent, row, col); None if equal."""
        for e in sorted(set(self.terms) | set(other.terms)):
            A = self.terms.get(e, 0)
            B = other.terms.get(e, 0)
            diff = np.argwhere(np.broadcast_to(np.asarray(A) != np.asarray(B), (self.size, self.size)))
            if len(diff):
                return e, int(diff[0][0]), int(diff[0][1])
        return None

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMat):
            return NotImplemented
        if set(self.terms) != set(other.terms):
            return False
        return all((self.terms[e] == other.terms[e]).all() for e in self.terms)

    __hash__ = None

    def __iter__(self) -> Iterator[Tuple[Exp, np.ndarray]]:
        return iter(sorted(self.terms.items()))

    def __repr__(self) -> str:
        return f"PolyMat(size={self.size}, terms={len(self.terms)}, deg_X={self.degree(X)})"
