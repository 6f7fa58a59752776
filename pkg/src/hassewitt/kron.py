"""Fast exact powering of sparse exponent grids modulo p^K.

A Laurent polynomial with residue coefficients is laid out on a dense
integer grid (one axis per variable, plus one axis per parameter when the
coefficients are parameter polynomials).  Multiplication packs both grids
into single large integers by Kronecker substitution -- slot k of the
packed integer holds the coefficient of the k-th cell, with slots wide
enough that convolution never carries -- and multiplies them with GMP.
Residues are reduced after every multiplication, so slot widths stay
bounded by (p^K - 1)^2 times the overlap count.

Only non-negative residues are packed; exact signed arithmetic goes
through the ordinary dict-based path in :mod:`hassewitt.laurent`.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetExceededError

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover - gmpy2 is a hard dependency
    mpz = int


class SlotOverflow(Exception):
    """Accumulated convolution values would not fit any supported slot."""


class Grid:
    """Dense coefficient block: offsets give the exponent of cell (0,..,0)."""

    __slots__ = ("offs", "arr")

    def __init__(self, offs, arr):
        self.offs = tuple(offs)
        self.arr = arr

    def get(self, exp):
        idx = tuple(e - o for e, o in zip(exp, self.offs))
        if any(i < 0 or i >= s for i, s in zip(idx, self.arr.shape)):
            return 0
        return int(self.arr[idx])

    def nnz(self):
        return int(np.count_nonzero(self.arr))

    def cells(self):
        return int(self.arr.size)


def grid_from_terms(terms, naxes, nx, dtype=np.uint64):
    """Build a grid from a dict of exponent tuples -> canonical residues.

    Axes ``nx:`` are parameter axes and are pinned at offset zero so that a
    cell's parameter degree equals the sum of its parameter indices.
    """
    if not terms:
        return Grid((0,) * naxes, np.zeros((1,) * naxes, dtype=dtype))
    los = [min(e[i] for e in terms) for i in range(naxes)]
    his = [max(e[i] for e in terms) for i in range(naxes)]
    for i in range(nx, naxes):
        los[i] = 0
    shape = tuple(h - l + 1 for l, h in zip(los, his))
    arr = np.zeros(shape, dtype=dtype)
    for e, c in terms.items():
        arr[tuple(x - l for x, l in zip(e, los))] = c
    return Grid(tuple(los), arr)


def grid_to_terms(grid):
    arr = grid.arr
    offs = grid.offs
    out = {}
    for idx in np.argwhere(arr):
        key = tuple(int(i) + o for i, o in zip(idx, offs))
        out[key] = int(arr[tuple(idx)])
    return out


def _slot_bytes(pk, pairs):
    bound = (pk - 1) * (pk - 1) * max(pairs, 1)
    if bound < (1 << 32):
        return 4
    if bound < (1 << 64):
        return 8
    raise SlotOverflow(f"convolution bound {bound} exceeds 64-bit slots")


def _pack(arr, pad_shape, nbytes):
    dt = np.dtype(f"<u{nbytes}")
    buf = np.zeros((arr.shape[0],) + pad_shape, dtype=dt)
    buf[(slice(None),) + tuple(slice(0, s) for s in arr.shape[1:])] = arr
    return mpz(int.from_bytes(buf.tobytes(), "little"))


def _apply_param_trunc(arr, nx, trunc):
    """Slice parameter axes to degree <= trunc and zero what spills over."""
    if trunc is None or arr.ndim == nx:
        return arr
    sl = (slice(None),) * nx + tuple(
        slice(0, min(s, trunc + 1)) for s in arr.shape[nx:])
    arr = arr[sl]
    pshape = arr.shape[nx:]
    if len(pshape) >= 1:
        degs = np.indices(pshape).sum(axis=0)
        mask = degs > trunc
        if mask.any():
            arr = np.ascontiguousarray(arr)
            arr[(Ellipsis,) + np.nonzero(mask)] = 0
    return np.ascontiguousarray(arr)


def mul_grids(a, b, pk, nx, trunc=None, budget=None):
    """Exact product of two grids with residue reduction mod pk."""
    out_shape = tuple(sa + sb - 1 for sa, sb in zip(a.arr.shape, b.arr.shape))
    cells = 1
    for s in out_shape:
        cells *= s
    if budget is not None and cells > budget:
        raise BudgetExceededError(
            f"product needs {cells} cells, budget is {budget}")
    nbytes = _slot_bytes(pk, min(a.nnz(), b.nnz()))
    pa = _pack(a.arr.astype(np.dtype(f"<u{nbytes}")), out_shape[1:], nbytes)
    pb = _pack(b.arr.astype(np.dtype(f"<u{nbytes}")), out_shape[1:], nbytes)
    prod = int(pa * pb)
    raw = prod.to_bytes(cells * nbytes, "little")
    arr = np.frombuffer(raw, dtype=np.dtype(f"<u{nbytes}")).reshape(out_shape)
    arr = (arr % pk).astype(np.uint64)
    arr = _apply_param_trunc(arr, nx, trunc)
    offs = tuple(oa + ob for oa, ob in zip(a.offs, b.offs))
    return Grid(offs, arr)


class PowerEngine:
    """Binary powering with a shared square ladder and per-exponent cache.

    The ladder of repeated squares is reused across calls, so computing
    f^(p-1), f^(p^2-1), f^(p^3-1) costs little more than the largest one.
    """

    def __init__(self, terms, naxes, pk, nx=None, trunc=None, budget=None):
        self.naxes = naxes
        self.nx = naxes if nx is None else nx
        self.pk = pk
        self.trunc = trunc
        self.budget = budget
        base = grid_from_terms(terms, naxes, self.nx)
        self._squares = [base]
        self._cache = {1: base}

    def _square(self, k):
        while len(self._squares) <= k:
            s = self._squares[-1]
            self._squares.append(
                mul_grids(s, s, self.pk, self.nx, self.trunc, self.budget))
        return self._squares[k]

    def power(self, e):
        if e < 0:
            raise ValueError("negative exponent")
        if e == 0:
            one = np.ones((1,) * self.naxes, dtype=np.uint64)
            if self.pk == 1:
                one = np.zeros((1,) * self.naxes, dtype=np.uint64)
            return Grid((0,) * self.naxes, one)
        got = self._cache.get(e)
        if got is not None:
            return got
        acc = None
        k = 0
        ee = e
        while ee:
            if ee & 1:
                sq = self._square(k)
                acc = sq if acc is None else mul_grids(
                    acc, sq, self.pk, self.nx, self.trunc, self.budget)
            ee >>= 1
            k += 1
        self._cache[e] = acc
        return acc
