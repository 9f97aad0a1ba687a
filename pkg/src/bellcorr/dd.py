"""Exact double description for pointed polyhedral cones with integer constraints.

The cone is ``{x : H x >= 0}``. Rays are primitive integer vectors; each ray
carries its zero set (indices of processed constraints it satisfies with
equality) as a packed bitmask. Adjacency of a (+, -) ray pair is decided
combinatorially: the common zero set must have at least ``d - 2`` elements and
must not be contained in the zero set of any third ray.

The pair scan is the hot loop and is compiled with numba. Ray arithmetic is
done in int64 when a cheap magnitude bound says it is safe, otherwise it
falls back to Python integers, so results are exact either way.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import numba as nb

from .exactlin import inverse

log = logging.getLogger(__name__)

_INT64_SAFE = float(2**62)


@nb.njit(cache=True, inline="always")
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@nb.njit(cache=True)
def _adjacent_pairs(Z, plus, minus, need):
    """Return (k, 2) array of (p, n) ray indices that are adjacent."""
    R, W = Z.shape
    out_p = []
    out_n = []
    common = np.empty(W, dtype=np.uint64)
    for a in range(plus.shape[0]):
        p = plus[a]
        for b in range(minus.shape[0]):
            n = minus[b]
            cnt = 0
            for w in range(W):
                c = Z[p, w] & Z[n, w]
                common[w] = c
                cnt += _popcount64(c)
            if cnt < need:
                continue
            adjacent = True
            for r in range(R):
                if r == p or r == n:
                    continue
                contained = True
                for w in range(W):
                    if (Z[r, w] & common[w]) != common[w]:
                        contained = False
                        break
                if contained:
                    adjacent = False
                    break
            if adjacent:
                out_p.append(p)
                out_n.append(n)
    res = np.empty((len(out_p), 2), dtype=np.int64)
    for i in range(len(out_p)):
        res[i, 0] = out_p[i]
        res[i, 1] = out_n[i]
    return res


@nb.njit(cache=True)
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@nb.njit(cache=True)
def _combine(rays, s, pairs):
    """New rays s_p * r_n - s_n * r_p, reduced to primitive form.

    Rows whose int64 evaluation could overflow are flagged for exact
    recomputation in Python.
    """
    k = pairs.shape[0]
    d = rays.shape[1]
    out = np.zeros((k, d), dtype=np.int64)
    bad = np.zeros(k, dtype=np.bool_)
    for i in range(k):
        p = pairs[i, 0]
        n = pairs[i, 1]
        a = s[p]
        b = -s[n]
        g = _gcd(a, b)
        a //= g
        b //= g
        mp = 0
        mn = 0
        for j in range(d):
            mp = max(mp, abs(rays[p, j]))
            mn = max(mn, abs(rays[n, j]))
        if float(a) * float(mn) + float(b) * float(mp) >= 4.0e18:
            bad[i] = True
            continue
        g = 0
        for j in range(d):
            v = a * rays[n, j] + b * rays[p, j]
            out[i, j] = v
            g = _gcd(g, v)
        if g > 1:
            for j in range(d):
                out[i, j] //= g
    return out, bad


def _primitive(v) -> list[int]:
    g = 0
    for x in v:
        g = math.gcd(g, int(x))
    g = g or 1
    return [int(x) // g for x in v]


@dataclass
class DDResult:
    rays: np.ndarray         # (R, d) int64 primitive extreme rays
    zero_sets: np.ndarray    # (R, W) uint64 packed incidence masks
    order: list[int]         # constraint insertion order used
    max_intermediate: int    # largest ray count seen during insertion

    def zero_indices(self, i: int) -> list[int]:
        out = []
        for w, word in enumerate(self.zero_sets[i]):
            word = int(word)
            while word:
                low = word & -word
                out.append(64 * w + low.bit_length() - 1)
                word ^= low
        return out


def _set_bit(Z, rows, k):
    w, b = divmod(k, 64)
    Z[rows, w] |= np.uint64(1) << np.uint64(b)


def double_description(H, order=None, progress=None) -> DDResult:
    """Extreme rays of the pointed cone ``{x : H x >= 0}``.

    ``H`` is an integer array (K, d) of full column rank. Constraints are
    inserted in ``order`` (default: index order); the first ``d`` linearly
    independent ones seed a simplicial cone.
    """
    H = np.asarray(H, dtype=np.int64)
    K, d = H.shape
    if order is None:
        order = list(range(K))
    W = (K + 63) // 64

    from .exactlin import bareiss_echelon

    seed: list[int] = []
    for k in order:
        trial = seed + [k]
        if len(bareiss_echelon(H[trial].tolist())[1]) == len(trial):
            seed = trial
            if len(seed) == d:
                break
    if len(seed) < d:
        raise ValueError("constraint matrix is not of full column rank")

    inv = inverse(H[seed].tolist())
    # column k of the inverse is a ray tight on every seed row except row k
    rays = np.array([_primitive([inv[i][k] * math.lcm(*(inv[t][k].denominator for t in range(d)))
                                 for i in range(d)]) for k in range(d)], dtype=np.int64)
    Z = np.zeros((d, W), dtype=np.uint64)
    for k, c in enumerate(seed):
        others = [r for r in range(d) if r != k]
        _set_bit(Z, others, c)

    rest = [k for k in order if k not in set(seed)]
    hsum = np.abs(H).sum(axis=1)
    max_seen = d
    for step, k in enumerate(rest):
        h = H[k]
        if float(np.abs(rays).max()) * float(hsum[k]) >= _INT64_SAFE:
            s = np.array([sum(int(a) * int(b) for a, b in zip(h, r)) for r in rays.tolist()], dtype=object)
            sign = np.sign(s.astype(float))
        else:
            s = rays @ h
            sign = np.sign(s)
        plus = np.flatnonzero(sign > 0)
        minus = np.flatnonzero(sign < 0)
        zero = np.flatnonzero(sign == 0)
        if minus.size == 0:
            _set_bit(Z, zero, k)
            continue
        pairs = _adjacent_pairs(Z, plus.astype(np.int64), minus.astype(np.int64), d - 2)
        if s.dtype == object:
            new_rays, bad = np.zeros((len(pairs), d), dtype=np.int64), np.ones(len(pairs), dtype=bool)
        else:
            new_rays, bad = _combine(rays, s.astype(np.int64), pairs)
        for i in np.flatnonzero(bad):
            p, n = pairs[i]
            a, b = int(s[p]), -int(s[n])
            v = _primitive([a * int(x) + b * int(y) for x, y in zip(rays[n].tolist(), rays[p].tolist())])
            if max(abs(x) for x in v) >= 2**62:
                raise OverflowError("ray entries exceed int64; constraint data too large")
            new_rays[i] = v
        new_Z = Z[pairs[:, 0]] & Z[pairs[:, 1]] if len(pairs) else np.zeros((0, W), dtype=np.uint64)
        keep = np.concatenate([plus, zero])
        rays = np.concatenate([rays[keep], new_rays])
        Z = np.concatenate([Z[keep], new_Z])
        _set_bit(Z, np.arange(plus.size, rays.shape[0]), k)
        max_seen = max(max_seen, rays.shape[0])
        if progress is not None:
            progress(step + 1, len(rest), rays.shape[0])
        log.debug("dd step %d/%d: +%d -%d 0:%d new:%d -> %d rays",
                  step + 1, len(rest), plus.size, minus.size, zero.size, len(pairs), rays.shape[0])
    return DDResult(rays=rays, zero_sets=Z, order=list(order), max_intermediate=max_seen)
