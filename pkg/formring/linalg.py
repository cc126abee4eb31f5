"""Exact matrix arithmetic over a RingCtx (matrices are arrays of element indices)."""

from typing import List, Sequence

import numpy as np

from .rings import RingCtx


def identity(ctx: RingCtx, k: int) -> np.ndarray:
    out = np.zeros((k, k), dtype=np.int64)
    out[np.arange(k), np.arange(k)] = ctx.one
    return out


def zeros(k: int, m: int = None) -> np.ndarray:
    return np.zeros((k, k if m is None else m), dtype=np.int64)


def mat_add(ctx: RingCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return ctx.add[A, B]


def mat_sub(ctx: RingCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return ctx.add[A, ctx.neg[B]]


def mat_mul(ctx: RingCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for j in range(A.shape[1]):
        out = ctx.add[out, ctx.mul[A[:, j][:, None], B[j, :][None, :]]]
    return out


def mat_vec(ctx: RingCtx, A: np.ndarray, v: np.ndarray) -> np.ndarray:
    return mat_mul(ctx, A, np.asarray(v).reshape(-1, 1)).ravel()


def mat_prod(ctx: RingCtx, mats: Sequence[np.ndarray], k: int) -> np.ndarray:
    out = identity(ctx, k)
    for M in mats:
        out = mat_mul(ctx, out, M)
    return out


def outer(ctx: RingCtx, col: np.ndarray, row: np.ndarray) -> np.ndarray:
    return ctx.mul[np.asarray(col)[:, None], np.asarray(row)[None, :]]


def dot(ctx: RingCtx, row: np.ndarray, col: np.ndarray) -> int:
    return ctx.total(ctx.mul[np.asarray(row), np.asarray(col)])


def conj_transpose(ctx: RingCtx, A: np.ndarray) -> np.ndarray:
    return ctx.bar[np.asarray(A)].T


def charpoly(ctx: RingCtx, A: np.ndarray) -> List[int]:
    """Coefficients [1, c1, ..., cn] of det(xI - A), division free (Berkowitz)."""
    A = np.asarray(A)
    n = A.shape[0]
    if n == 0:
        return [ctx.one]
    vec = [ctx.one, int(ctx.neg[A[0, 0]])]
    for k in range(1, n):
        Ak, R, S = A[:k, :k], A[k, :k], A[:k, k]
        T = [ctx.one, int(ctx.neg[A[k, k]])]
        cur = S
        for _ in range(k):
            T.append(int(ctx.neg[dot(ctx, R, cur)]))
            cur = mat_vec(ctx, Ak, cur)
        new = []
        for i in range(k + 2):
            acc = 0
            for j in range(min(i, k) + 1):
                acc = int(ctx.add[acc, ctx.mul[T[i - j], vec[j]]])
            new.append(acc)
        vec = new
    return vec


def det(ctx: RingCtx, A: np.ndarray) -> int:
    c = charpoly(ctx, A)
    n = len(c) - 1
    return int(c[n]) if n % 2 == 0 else int(ctx.neg[c[n]])


def inverse(ctx: RingCtx, A: np.ndarray) -> np.ndarray:
    """Inverse through Cayley-Hamilton; raises ValueError for singular A."""
    A = np.asarray(A)
    n = A.shape[0]
    c = charpoly(ctx, A)
    if not ctx.is_unit(c[n]):
        raise ValueError("matrix is not invertible")
    B = identity(ctx, n)
    for i in range(1, n):
        B = mat_add(ctx, mat_mul(ctx, A, B), ctx.mul[c[i], identity(ctx, n)])
    scale = int(ctx.neg[ctx.inverse(c[n])])
    return ctx.mul[scale, B]


def is_identity(ctx: RingCtx, A: np.ndarray) -> bool:
    return bool((np.asarray(A) == identity(ctx, np.asarray(A).shape[0])).all())


def format_matrix(ctx: RingCtx, A: np.ndarray) -> str:
    A = np.atleast_2d(A)
    return "\n".join(" ".join(ctx.label(x) for x in row) for row in A)


def parse_matrix(ctx: RingCtx, text: str, size: int = None) -> np.ndarray:
    """Row-major element strings; a single line or one token per row is a vector."""
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    tokens = [ctx.parse(t) for row in rows for t in row]
    if size is not None and len(tokens) == size:
        return np.array(tokens, dtype=np.int64)
    if len(rows) > 1 and all(len(r) == len(rows) for r in rows):
        return np.array(tokens, dtype=np.int64).reshape(len(rows), len(rows))
    return np.array(tokens, dtype=np.int64)
