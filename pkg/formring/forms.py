"""The forms ψ^q and ψ^h, membership in GQ/GH and the vector gadgets ṽ, ⟨,⟩, M(v,w)."""

from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Optional, Sequence, Tuple, Union

import numpy as np

from . import linalg
from .errors import DimensionMismatch, MembershipFailure, NonCommutativeBase, PresentationInvalid, UnsupportedSize
from .log import get_logger
from .poly import PolyMat
from .rings import FormParameter, Localization, RingCtx, close_form_parameter

logger = get_logger(__name__)

KINDS = ("quadratic", "hermitian")
Matrix = Union[np.ndarray, PolyMat]


@dataclass(frozen=True, eq=False)
class FormSpec:
    kind: str
    n: int
    r: int
    a: Tuple[int, ...]
    a_halves: Tuple[int, ...]
    ctx: RingCtx
    Lambda: FormParameter
    blanket: bool = True

    @staticmethod
    def create(
        ctx: RingCtx,
        kind: str,
        n: int,
        r: int = 0,
        a: Optional[Sequence[int]] = None,
        Lambda_gens: Sequence[int] = (),
        Lambda: Optional[FormParameter] = None,
        blanket: bool = True,
    ) -> "FormSpec":
        """Validate and build a spec.

        ``blanket=False`` admits the small sizes the reduction algorithms
        handle (quadratic n >= 2, hermitian n > r) below the usual n >= 3 and
        n >= r+3 bounds.
        """
        if kind not in KINDS:
            raise PresentationInvalid(f"kind must be one of {KINDS}, got {kind!r}")
        if kind == "quadratic":
            r, a = 0, ()
            low = 3 if blanket else 2
            if n < low:
                raise UnsupportedSize(f"quadratic forms need n >= {low}, got n={n}", n=n)
        else:
            if r < 1:
                raise UnsupportedSize(f"hermitian forms need r >= 1, got r={r}", r=r)
            low = r + 3 if blanket else r + 1
            if n < max(low, 3 if blanket else 2):
                raise UnsupportedSize(f"hermitian forms need n >= {low} for r={r}, got n={n}", n=n, r=r)
            a = tuple(int(x) for x in (a if a is not None else [0] * r))
            if len(a) != r:
                raise PresentationInvalid(f"expected {r} hermitian parameters, got {len(a)}")
            if a[0] != 0:
                raise PresentationInvalid("the first hermitian parameter must be 0")
        halves = []
        for x in a:
            if x not in ctx.half_table:
                raise PresentationInvalid(f"a = {ctx.label(x)} is not of the form c + lambda c̄")
            halves.append(ctx.half_table[x])
        if Lambda is None:
            Lambda = close_form_parameter(ctx, Lambda_gens)
        return FormSpec(kind, n, r, tuple(a), tuple(halves), ctx, Lambda, blanket)

    # --- indices (1-based in, 0-based out) ----------------------------------
    def row(self, i: int) -> int:
        return i - 1

    def rho(self, i: int) -> int:
        return self.n + i - 1

    @property
    def size(self) -> int:
        return 2 * self.n

    @property
    def hermitian(self) -> bool:
        return self.kind == "hermitian"

    @cached_property
    def Lambda_bar(self) -> FrozenSet[int]:
        return self.Lambda.conjugate(self.ctx)

    def in_lambda(self, x: int) -> bool:
        return int(x) in self.Lambda.elements

    def in_lambda_bar(self, x: int) -> bool:
        return int(x) in self.Lambda_bar

    def basis(self, p: int) -> np.ndarray:
        v = np.zeros(self.size, dtype=np.int64)
        v[p] = self.ctx.one
        return v

    @cached_property
    def psi(self) -> np.ndarray:
        ctx, n = self.ctx, self.n
        out = np.zeros((2 * n, 2 * n), dtype=np.int64)
        # A = diag(a) ⊥ 0; the free coordinates carry no diagonal term
        for k, ak in enumerate(self.a):
            out[k, k] = ak
        for i in range(n):
            out[i, n + i] = ctx.lam
            out[n + i, i] = ctx.one
        return out

    @cached_property
    def psi_inv(self) -> np.ndarray:
        ctx, n = self.ctx, self.n
        out = np.zeros((2 * n, 2 * n), dtype=np.int64)
        lb = ctx.lam_bar
        for i in range(n):
            out[i, n + i] = ctx.one
            out[n + i, i] = lb
        for k, ak in enumerate(self.a):
            out[n + k, n + k] = ctx.neg[ctx.mul[lb, ak]]
        return out

    def with_n(self, n: int) -> "FormSpec":
        return FormSpec(self.kind, n, self.r, self.a, self.a_halves, self.ctx, self.Lambda, self.blanket)

    def describe(self) -> str:
        return f"{self.kind} n={self.n} r={self.r} ring={self.ctx.presentation} lambda={self.ctx.label(self.ctx.lam)}"


@dataclass
class MembershipResult:
    ok: bool
    reason: str = ""
    block: Optional[str] = None
    entry: Optional[Tuple] = None

    def __bool__(self) -> bool:
        return self.ok


def build_form(spec: FormSpec) -> np.ndarray:
    out = spec.psi.copy()
    assert linalg.is_identity(spec.ctx, linalg.mat_mul(spec.ctx, out, spec.psi_inv)), "form is not invertible"
    return out


def conj_transpose(spec: FormSpec, M: Matrix) -> Matrix:
    if isinstance(M, PolyMat):
        return M.conj_transpose()
    return linalg.conj_transpose(spec.ctx, M)


def _check_shape(spec: FormSpec, M) -> None:
    shape = (M.size, M.size) if isinstance(M, PolyMat) else np.asarray(M).shape
    if shape != (spec.size, spec.size):
        raise DimensionMismatch(f"expected a {spec.size}x{spec.size} matrix, got {shape}", shape=shape)


def column_quadratic_values(spec: FormSpec, sigma: np.ndarray) -> np.ndarray:
    """Diagonal of γ̄α and δ̄β: Σ_l ȳ_l x_l for every column (x; y) of σ."""
    ctx, n = spec.ctx, spec.n
    prods = ctx.mul[ctx.bar[sigma[n:, :]], sigma[:n, :]]
    acc = np.zeros(sigma.shape[1], dtype=np.int64)
    for row in prods:
        acc = ctx.add[acc, row]
    return acc


def is_member(spec: FormSpec, sigma: np.ndarray) -> MembershipResult:
    _check_shape(spec, sigma)
    ctx = spec.ctx
    sigma = np.asarray(sigma, dtype=np.int64)
    if ctx.is_commutative and not ctx.is_unit(linalg.det(ctx, sigma)):
        return MembershipResult(False, "not invertible (determinant is not a unit)", "det")
    F = linalg.mat_mul(ctx, linalg.mat_mul(ctx, linalg.conj_transpose(ctx, sigma), spec.psi), sigma)
    bad = np.argwhere(F != spec.psi)
    if len(bad):
        r, c = (int(x) for x in bad[0])
        return MembershipResult(False, f"form equation fails at ({r + 1},{c + 1})", "form", (r + 1, c + 1))
    if spec.kind == "quadratic":
        q = column_quadratic_values(spec, sigma)
        for j, val in enumerate(q.tolist()):
            if not spec.in_lambda(val):
                block = "gamma-bar alpha" if j < spec.n else "delta-bar beta"
                return MembershipResult(False, f"diagonal entry {ctx.label(val)} of {block} not in Lambda", block, (j + 1,))
    return MembershipResult(True)


def is_member_poly(spec: FormSpec, P: PolyMat) -> MembershipResult:
    """Membership over R[X,...]: polynomial form identity and coefficientwise Λ."""
    _check_shape(spec, P)
    psi = PolyMat.from_matrix(spec.ctx, spec.psi)
    F = P.conj_transpose() * psi * P
    diff = F.first_difference(psi)
    if diff is not None:
        e, r, c = diff
        return MembershipResult(False, f"form identity fails at ({r + 1},{c + 1}) in degree {e}", "form", (r + 1, c + 1))
    if spec.kind == "quadratic":
        n = spec.n
        for j in range(2 * n):
            col = P.column(j)
            q = sum((col[n + l].conj() * col[l] for l in range(n)), col[0] * 0)
            bad = [c for c in q.coefficients() if not spec.in_lambda(c)]
            if bad:
                return MembershipResult(False, f"column {j + 1} quadratic value has coefficients outside Lambda", "lambda", (j + 1,))
    return MembershipResult(True)


def is_special_member(spec: FormSpec, sigma: np.ndarray) -> bool:
    if not spec.ctx.is_commutative:
        raise NonCommutativeBase(f"{spec.ctx.presentation} is not commutative")
    return bool(is_member(spec, sigma)) and linalg.det(spec.ctx, sigma) == spec.ctx.one


def det(spec: FormSpec, sigma: np.ndarray) -> int:
    return linalg.det(spec.ctx, sigma)


def group_inverse(spec: FormSpec, sigma: Matrix) -> Matrix:
    """σ^{-1} = ψ^{-1}σ̄ψ for members."""
    if isinstance(sigma, PolyMat):
        ctx = spec.ctx
        return PolyMat.from_matrix(ctx, spec.psi_inv) * sigma.conj_transpose() * PolyMat.from_matrix(ctx, spec.psi)
    ctx = spec.ctx
    return linalg.mat_mul(ctx, linalg.mat_mul(ctx, spec.psi_inv, linalg.conj_transpose(ctx, sigma)), spec.psi)


def stabilize(spec: FormSpec, sigma: np.ndarray) -> Tuple[FormSpec, np.ndarray]:
    res = is_member(spec, sigma)
    if not res:
        raise MembershipFailure(f"cannot stabilize a non-member: {res.reason}", block=res.block)
    n = spec.n
    big = spec.with_n(n + 1)
    # old positions 0..n-1 stay, old ρ positions shift by one
    pos = list(range(n)) + [n + 1 + i for i in range(n)]
    out = linalg.identity(spec.ctx, 2 * n + 2)
    out[np.ix_(pos, pos)] = sigma
    return big, out


def vtilde(spec: FormSpec, v: np.ndarray) -> np.ndarray:
    ctx = spec.ctx
    return linalg.mat_mul(ctx, ctx.bar[np.asarray(v)][None, :], spec.psi).ravel()


def inner(spec: FormSpec, v: np.ndarray, w: np.ndarray) -> int:
    return linalg.dot(spec.ctx, vtilde(spec, v), w)


def m_matrix(spec: FormSpec, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """M(v,w) = v·w̃ − λ̄·w·ṽ."""
    ctx = spec.ctx
    first = linalg.outer(ctx, v, vtilde(spec, w))
    second = ctx.mul[ctx.lam_bar, linalg.outer(ctx, w, vtilde(spec, v))]
    return linalg.mat_sub(ctx, first, second)


def transvection(spec: FormSpec, v: np.ndarray, w: np.ndarray, c: int = 0) -> np.ndarray:
    """I + M(v,w) + c·v·ṽ."""
    ctx = spec.ctx
    out = linalg.mat_add(ctx, linalg.identity(ctx, spec.size), m_matrix(spec, v, w))
    if c:
        out = linalg.mat_add(ctx, out, linalg.outer(ctx, ctx.mul[np.asarray(v), c], vtilde(spec, v)))
    return out


def transvection_correction(spec: FormSpec, w: np.ndarray) -> Optional[int]:
    """Least c with λc + c̄ = −⟨w,w⟩, or None when there is none."""
    ctx = spec.ctx
    h = int(ctx.neg[inner(spec, w, w)])
    if h not in ctx.half_table:
        return None
    return int(ctx.bar[ctx.half_table[h]])


def quadratic_value(spec: FormSpec, v: np.ndarray) -> int:
    ctx, n = spec.ctx, spec.n
    v = np.asarray(v)
    return ctx.total(ctx.mul[ctx.bar[v[n:]], v[:n]])


def is_unimodular(spec: FormSpec, v: np.ndarray) -> bool:
    return bool(spec.ctx.unit_at[np.asarray(v)].any(axis=0).all())


def is_isotropic(spec: FormSpec, v: np.ndarray) -> bool:
    return inner(spec, v, v) == 0


def is_lambda_isotropic(spec: FormSpec, v: np.ndarray) -> bool:
    if not is_isotropic(spec, v):
        return False
    return spec.kind == "hermitian" or spec.in_lambda(quadratic_value(spec, v))


def hyperbolic_unit(spec: FormSpec, i: int, u: int) -> np.ndarray:
    ctx = spec.ctx
    out = linalg.identity(ctx, spec.size)
    out[spec.row(i), spec.row(i)] = u
    out[spec.rho(i), spec.rho(i)] = ctx.inverse(ctx.bar[u])
    res = is_member(spec, out)
    if not res:
        raise MembershipFailure(f"hyperbolic unit at {i} is not a member: {res.reason}", block=res.block)
    return out


def localize_spec(spec: FormSpec, loc: Localization) -> FormSpec:
    """Transport a spec along R -> R_s."""
    ring, proj = loc.ring, loc.proj
    a = tuple(int(proj[x]) for x in spec.a)
    Lambda = FormParameter(frozenset(int(proj[x]) for x in spec.Lambda.elements), ring.lam)
    halves = tuple(int(proj[x]) for x in spec.a_halves)
    return FormSpec(spec.kind, spec.n, spec.r, a, halves, ring, Lambda, spec.blanket)

