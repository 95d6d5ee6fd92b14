"""Bitmask kernels for DP state sets.

A state set is a C-contiguous ``uint64`` array of shape ``(S, W)``; bit
``j`` of a row lives in word ``j // 64`` at position ``j % 64``.  Every
kernel has a numba implementation and a pure numpy one.  Set
``MRSO_DISABLE_NUMBA=1`` to force numpy, or switch at runtime with
:func:`use_backend`.

Rows may be split across a thread pool; the numba kernels release the GIL.
Chunks are concatenated in row order, so the output never depends on the
number of workers.
"""

from __future__ import annotations

import os
import sys
from contextlib import contextmanager

import numpy as np

if sys.byteorder != "little":  # pragma: no cover
    raise ImportError("mrso bitmask kernels assume a little-endian host")

_DISABLED = os.environ.get("MRSO_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_backend = "numba" if HAVE_NUMBA and not _DISABLED else "numpy"

# Smallest row count worth handing to a separate worker.
MIN_CHUNK = 512


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    _backend = name


@contextmanager
def use_backend(name: str):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


# ---------------------------------------------------------------- numpy

def unpack_bits(masks: np.ndarray) -> np.ndarray:
    """(S, W) uint64 -> (S, 64*W) uint8 of 0/1."""
    masks = np.ascontiguousarray(masks)
    return np.unpackbits(masks.view(np.uint8), axis=1, bitorder="little")


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Inverse of :func:`unpack_bits`; the bit count must be a multiple of 64."""
    packed = np.packbits(bits.astype(np.uint8, copy=False), axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def _product_or_np(m1, m2):
    return (m1[:, None, :] | m2[None, :, :]).reshape(-1, m1.shape[1])


def _eta_keep_np(masks, a_off, b_off, ncodon, incompat):
    bits = unpack_bits(masks)
    side_a = bits[:, a_off:a_off + ncodon].astype(np.int32)
    side_b = bits[:, b_off:b_off + ncodon].astype(bool)
    reach = (side_a @ incompat.astype(np.int32)) > 0
    return ~np.any(reach & side_b, axis=1)


def _remap_np(masks, target, words_out):
    bits = unpack_bits(masks)[:, :target.shape[0]]
    out = np.zeros((masks.shape[0], 64 * words_out), dtype=np.uint8)
    if masks.shape[0] == 0:
        return pack_bits(out)
    order = np.argsort(target, kind="stable")
    uniq, starts = np.unique(target[order], return_index=True)
    out[:, uniq] = np.logical_or.reduceat(bits[:, order], starts, axis=1)
    return pack_bits(out)


# ---------------------------------------------------------------- numba

if HAVE_NUMBA:
    @njit(nogil=True, cache=True)
    def _product_or_nb(m1, m2):
        s1, w = m1.shape
        s2 = m2.shape[0]
        out = np.empty((s1 * s2, w), dtype=np.uint64)
        for i in range(s1):
            base = i * s2
            for j in range(s2):
                for k in range(w):
                    out[base + j, k] = m1[i, k] | m2[j, k]
        return out

    @njit(nogil=True, cache=True)
    def _eta_keep_nb(masks, a_off, b_off, ncodon, incompat):
        s = masks.shape[0]
        keep = np.ones(s, dtype=np.bool_)
        one = np.uint64(1)
        for r in range(s):
            ok = True
            for l1 in range(ncodon):
                bit = a_off + l1
                if not (masks[r, bit >> 6] >> np.uint64(bit & 63)) & one:
                    continue
                for l2 in range(ncodon):
                    if not incompat[l1, l2]:
                        continue
                    bit2 = b_off + l2
                    if (masks[r, bit2 >> 6] >> np.uint64(bit2 & 63)) & one:
                        ok = False
                        break
                if not ok:
                    break
            keep[r] = ok
        return keep

    @njit(nogil=True, cache=True)
    def _remap_nb(masks, target, words_out):
        s, w = masks.shape
        nbits = target.shape[0]
        out = np.zeros((s, words_out), dtype=np.uint64)
        one = np.uint64(1)
        for r in range(s):
            for k in range(w):
                word = masks[r, k]
                if word == 0:
                    continue
                for b in range(64):
                    if (word >> np.uint64(b)) & one:
                        src = k * 64 + b
                        if src < nbits:
                            dst = target[src]
                            out[r, dst >> 6] |= one << np.uint64(dst & 63)
        return out


# ---------------------------------------------------------------- dispatch

def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n // MIN_CHUNK))
    bounds = np.linspace(0, n, parts + 1).astype(np.int64)
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(parts)]


def _run(fn, masks, rest, pool, workers, combine):
    n = masks.shape[0]
    if pool is None or workers <= 1 or n < 2 * MIN_CHUNK:
        return fn(masks, *rest)
    spans = _chunks(n, workers)
    futures = [pool.submit(fn, masks[lo:hi], *rest) for lo, hi in spans]
    return combine([f.result() for f in futures])


def product_or(m1: np.ndarray, m2: np.ndarray, pool=None, workers: int = 1) -> np.ndarray:
    """Row (i * len(m2) + j) of the result is ``m1[i] | m2[j]``."""
    m1 = np.ascontiguousarray(m1)
    m2 = np.ascontiguousarray(m2)
    if m1.shape[0] == 0 or m2.shape[0] == 0:
        return np.zeros((0, m1.shape[1]), dtype=np.uint64)
    fn = _product_or_nb if _backend == "numba" else _product_or_np
    return _run(fn, m1, (m2,), pool, workers, np.concatenate)


def eta_keep(masks, a_off: int, b_off: int, ncodon: int, incompat, pool=None, workers: int = 1):
    """Rows where no set bit of block a is incompatible with a set bit of block b."""
    masks = np.ascontiguousarray(masks)
    if masks.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    incompat = np.ascontiguousarray(incompat, dtype=np.bool_)
    fn = _eta_keep_nb if _backend == "numba" else _eta_keep_np
    return _run(fn, masks, (int(a_off), int(b_off), int(ncodon), incompat), pool, workers, np.concatenate)


def remap(masks, target, words_out: int, pool=None, workers: int = 1):
    """Move every set bit ``j`` to ``target[j]`` (several sources may merge)."""
    masks = np.ascontiguousarray(masks)
    target = np.ascontiguousarray(target, dtype=np.int64)
    if masks.shape[0] == 0:
        return np.zeros((0, words_out), dtype=np.uint64)
    fn = _remap_nb if _backend == "numba" else _remap_np
    return _run(fn, masks, (target, int(words_out)), pool, workers, np.concatenate)
