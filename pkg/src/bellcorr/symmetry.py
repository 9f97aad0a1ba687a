"""Symmetries of LC(m, n), canonical forms and facet classification.

The group is generated by row and column permutations, sign flips of single
rows or columns, and (for square shapes) the transpose that exchanges the
two parties.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numba as nb
import numpy as np

from .exactlin import RationalMatrix
from .polytope import Facet, Vertex, sort_facets, tight_indices, vertex_array, verify_hv_equivalence
from .presets import representatives_for

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupElement:
    row_perm: tuple[int, ...]
    col_perm: tuple[int, ...]
    row_signs: tuple[int, ...]
    col_signs: tuple[int, ...]
    transpose: bool = False

    def __post_init__(self):
        m, n = len(self.row_perm), len(self.col_perm)
        if sorted(self.row_perm) != list(range(m)) or sorted(self.col_perm) != list(range(n)):
            raise ValueError("row_perm / col_perm must be permutations")
        if len(self.row_signs) != m or len(self.col_signs) != n:
            raise ValueError("sign vectors have the wrong length")
        if any(s not in (1, -1) for s in self.row_signs + self.col_signs):
            raise ValueError("signs must be +-1")
        if self.transpose and m != n:
            raise ValueError("party exchange needs a square shape")

    @classmethod
    def identity(cls, m: int, n: int) -> "GroupElement":
        return cls(tuple(range(m)), tuple(range(n)), (1,) * m, (1,) * n)

    @classmethod
    def random(cls, m: int, n: int, rng: np.random.Generator) -> "GroupElement":
        return cls(tuple(int(x) for x in rng.permutation(m)), tuple(int(x) for x in rng.permutation(n)),
                   tuple(int(x) for x in rng.choice([-1, 1], m)), tuple(int(x) for x in rng.choice([-1, 1], n)),
                   bool(m == n and rng.random() < 0.5))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_perm), len(self.col_perm)


def _apply_array(g: GroupElement, A: np.ndarray) -> np.ndarray:
    if g.transpose:
        A = A.T
    B = A[np.ix_(g.row_perm, g.col_perm)]
    return B * np.array(g.row_signs)[:, None] * np.array(g.col_signs)[None, :]


def apply_symmetry(g: GroupElement, M: RationalMatrix) -> RationalMatrix:
    """``M'[i, j] = r_i c_j M[p(i), q(j)]``, transposing first if flagged."""
    if g.shape != M.shape:
        raise ValueError(f"group element of shape {g.shape} cannot act on {M.shape}")
    A = M.transpose() if g.transpose else M
    m, n = A.shape
    return RationalMatrix(m, n, [g.row_signs[i] * g.col_signs[j] * A[g.row_perm[i], g.col_perm[j]]
                                 for i in range(m) for j in range(n)])


def group_order(m: int, n: int) -> int:
    order = math.factorial(m) * 2**m * math.factorial(n) * 2**n
    return 2 * order if m == n else order


# -- canonical form ---------------------------------------------------------

@nb.njit(cache=True)
def _canonical_int(A, row_perms, col_perms, try_transpose):
    m, n = A.shape
    best = np.empty(m * n, dtype=np.int64)
    have_best = False
    cur = np.empty(m * n, dtype=np.int64)
    col_sign = np.empty(n, dtype=np.int64)
    for t in range(2 if try_transpose else 1):
        B = A.T.copy() if t == 1 else A
        for a in range(row_perms.shape[0]):
            for b in range(col_perms.shape[0]):
                for j in range(n):
                    col_sign[j] = 0
                state = 0  # 0: tied with best so far, -1: already smaller
                pruned = False
                pos = 0
                for ii in range(m):
                    i = row_perms[a, ii]
                    rs = 1
                    for jj in range(n):
                        v = B[i, col_perms[b, jj]]
                        if v != 0 and col_sign[jj] != 0:
                            rs = -1 if v * col_sign[jj] > 0 else 1
                            break
                    for jj in range(n):
                        v = B[i, col_perms[b, jj]] * rs
                        if v != 0 and col_sign[jj] == 0:
                            col_sign[jj] = -1 if v > 0 else 1
                        out = v * col_sign[jj] if col_sign[jj] != 0 else v
                        cur[pos] = out
                        if have_best and state == 0:
                            if out > best[pos]:
                                pruned = True
                                break
                            if out < best[pos]:
                                state = -1
                        pos += 1
                    if pruned:
                        break
                if pruned:
                    continue
                if not have_best or state == -1:
                    best[:] = cur
                    have_best = True
    return best


_PERM_CACHE: dict[int, np.ndarray] = {}


def _perms(k: int) -> np.ndarray:
    if k not in _PERM_CACHE:
        _PERM_CACHE[k] = np.array(list(itertools.permutations(range(k))), dtype=np.int64).reshape(-1, k)
    return _PERM_CACHE[k]


def _canonical_ints(q: int, A: np.ndarray) -> np.ndarray:
    m, n = A.shape
    return _canonical_int(np.ascontiguousarray(A, dtype=np.int64), _perms(m), _perms(n), m == n).reshape(m, n)


def canonical_form(M: RationalMatrix) -> RationalMatrix:
    """Lexicographically least matrix in the orbit of ``M``.

    Permutations are enumerated with pruning against the best prefix found
    so far; for each permutation the optimal signs are chosen greedily row
    by row, which is exact because a row sign only affects its own row.
    """
    q, ints = M.integer_entries()
    A = np.array(ints, dtype=np.int64).reshape(M.shape)
    C = _canonical_ints(q, A)
    return RationalMatrix(M.rows, M.cols, [Fraction(int(x), q) for x in C.ravel()])


def invariants(M: RationalMatrix, tight_count: int | None = None) -> tuple:
    """Cheap orbit invariants used to bucket facets before canonicalization."""
    absv = [abs(x) for x in M.entries]
    rows = sorted(sum(absv[i * M.cols:(i + 1) * M.cols]) for i in range(M.rows))
    cols = sorted(sum(absv[i * M.cols + j] for i in range(M.rows)) for j in range(M.cols))
    if M.rows == M.cols:
        rows, cols = sorted([tuple(rows), tuple(cols)])
    return (tuple(sorted(absv)), tuple(rows), tuple(cols), tight_count)


# -- the group --------------------------------------------------------------

class SymmetryGroup:
    """Symmetry group of LC(m, n) acting on m x n coefficient matrices."""

    def __init__(self, m: int, n: int, party_exchange: bool = True):
        self.m, self.n = m, n
        self.party_exchange = party_exchange and m == n
        ident = GroupElement.identity(m, n)
        gens = []

        def with_(**kw):
            d = dict(row_perm=ident.row_perm, col_perm=ident.col_perm, row_signs=ident.row_signs,
                     col_signs=ident.col_signs, transpose=False)
            d.update(kw)
            return GroupElement(**d)

        if m > 1:
            gens.append(with_(row_perm=(1, 0) + tuple(range(2, m))))
            if m > 2:
                gens.append(with_(row_perm=tuple(range(1, m)) + (0,)))
        if n > 1:
            gens.append(with_(col_perm=(1, 0) + tuple(range(2, n))))
            if n > 2:
                gens.append(with_(col_perm=tuple(range(1, n)) + (0,)))
        gens.append(with_(row_signs=(-1,) + (1,) * (m - 1)))
        gens.append(with_(col_signs=(-1,) + (1,) * (n - 1)))
        if self.party_exchange:
            gens.append(with_(transpose=True))
        self.generators: list[GroupElement] = gens

    @property
    def order(self) -> int:
        base = math.factorial(self.m) * 2**self.m * math.factorial(self.n) * 2**self.n
        return 2 * base if self.party_exchange else base

    def apply(self, g: GroupElement, M: RationalMatrix) -> RationalMatrix:
        return apply_symmetry(g, M)

    def _int_orbit(self, A: np.ndarray) -> dict[bytes, np.ndarray]:
        seen = {A.tobytes(): A}
        frontier = [A]
        while frontier:
            nxt = []
            for B in frontier:
                for g in self.generators:
                    C = np.ascontiguousarray(_apply_array(g, B))
                    key = C.tobytes()
                    if key not in seen:
                        seen[key] = C
                        nxt.append(C)
            frontier = nxt
        return seen

    def orbit(self, M: RationalMatrix) -> set[RationalMatrix]:
        """Full orbit of ``M`` (breadth-first search over the generators)."""
        if M.shape != (self.m, self.n):
            raise ValueError("shape mismatch")
        q, ints = M.integer_entries()
        A = np.array(ints, dtype=np.int64).reshape(M.shape)
        return {RationalMatrix(self.m, self.n, [Fraction(int(x), q) for x in B.ravel()])
                for B in self._int_orbit(A).values()}

    def flat_action(self, g: GroupElement) -> tuple[np.ndarray, np.ndarray]:
        """(index, sign) with ``apply(g, M).flat == sign * M.flat[index]``."""
        return _flat_index(g, self.m, self.n)

    def generator_maps(self, A: np.ndarray, qs: np.ndarray) -> list[np.ndarray] | None:
        """For integer-scaled matrices (rows of ``A`` over ``qs``), the index each
        generator sends each row to; None if the list is not closed."""
        keys = _row_keys(A, qs)
        index = {k: i for i, k in enumerate(keys)}
        maps = []
        for g in self.generators:
            idx, sign = self.flat_action(g)
            images = _row_keys(A[:, idx] * sign, qs)
            img = np.empty(len(keys), dtype=np.int64)
            for i, k in enumerate(images):
                j = index.get(k)
                if j is None:
                    return None
                img[i] = j
            maps.append(img)
        return maps

    def orbit_representatives(self, mats: Sequence[RationalMatrix]) -> list[int]:
        """Index of the first member of each orbit met in ``mats``.

        Orbits are traced inside the given list; members whose images fall
        outside it only link to what is present.
        """
        qs, A = _as_int_rows(mats)
        keys = _row_keys(A, qs)
        index = {k: i for i, k in enumerate(keys)}
        parent = list(range(len(mats)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in self.generators:
            idx, sign = self.flat_action(g)
            for i, k in enumerate(_row_keys(A[:, idx] * sign, qs)):
                j = index.get(k)
                if j is not None:
                    a, b = find(i), find(j)
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        return sorted({find(i) for i in range(len(mats))})


def _flat_index(g: GroupElement, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(m * n).reshape(m, n)
    if g.transpose:
        idx = idx.T
    idx = idx[np.ix_(g.row_perm, g.col_perm)]
    sign = np.outer(g.row_signs, g.col_signs)
    return idx.ravel(), sign.ravel()


def _as_int_rows(mats: Sequence[RationalMatrix]) -> tuple[np.ndarray, np.ndarray]:
    qs, rows = [], []
    for M in mats:
        q, ints = M.integer_entries()
        qs.append(q)
        rows.append(ints)
    return np.array(qs, dtype=np.int64), np.array(rows, dtype=np.int64)


def _row_keys(A: np.ndarray, qs: np.ndarray) -> list[bytes]:
    full = np.ascontiguousarray(np.hstack([qs[:, None], A]))
    return [r.tobytes() for r in full]


# -- classification ---------------------------------------------------------

@dataclass
class SymmetryClass:
    label: str
    representative: RationalMatrix
    orbit_size: int
    tight_count: int
    quantum_value: float | None = None
    quantum_upper: float | None = None

    def to_json(self) -> dict:
        d = {"label": self.label, "orbit_size": self.orbit_size, "tight_count": self.tight_count,
             "representative": self.representative.to_json()}
        if self.quantum_value is not None:
            d["quantum_value"] = format(self.quantum_value, ".17g")
        if self.quantum_upper is not None:
            d["quantum_upper"] = format(self.quantum_upper, ".17g")
        return d


_LABEL_ORDER = {"E": 0, "CHSH": 1, "F41": 2, "F42": 3}


def known_canonical_forms(m: int, n: int) -> dict[RationalMatrix, str]:
    return {canonical_form(M): label for label, M in representatives_for(m, n).items()}


def classify(facets: Sequence[Facet]) -> list[SymmetryClass]:
    """Partition facets by canonical form and label each class.

    Labels come from matching against the canonical forms of E11, CHSH, 4_1
    and 4_2; anything else is labelled ``"unknown"`` and logged. Facet
    ``class_label`` fields are filled in place.
    """
    if not facets:
        return []
    m, n = facets[0].normal.shape
    known = known_canonical_forms(m, n)
    buckets: dict[tuple, dict[RationalMatrix, list[int]]] = {}
    for i, f in enumerate(facets):
        key = invariants(f.normal, len(f.tight))
        canon = canonical_form(f.normal)
        buckets.setdefault(key, {}).setdefault(canon, []).append(i)
    classes = []
    for key, by_canon in buckets.items():
        for canon, members in by_canon.items():
            label = known.get(canon, "unknown")
            tc = {len(facets[i].tight) for i in members}
            if len(tc) != 1:
                raise ArithmeticError("tight counts differ inside one orbit")
            for i in members:
                facets[i].class_label = label
            if label == "unknown":
                log.warning("unclassified facet class with representative %r (%d facets)", canon, len(members))
            classes.append(SymmetryClass(label, canon, len(members), tc.pop()))
    classes.sort(key=lambda c: (_LABEL_ORDER.get(c.label, 99), c.representative.entries))
    return classes


def facets_by_orbits(vertices: Sequence[Vertex]) -> list[Facet]:
    """Facets as the union of orbits of the known representatives.

    Raises ``ValueError`` if the union is not a complete, consistent
    H-representation of conv(vertices).
    """
    m, n = len(vertices[0].xi), len(vertices[0].eta)
    G = SymmetryGroup(m, n)
    V = vertex_array(vertices)
    facets = []
    for label, M in representatives_for(m, n).items():
        q, ints = M.integer_entries()
        A = np.array(ints, dtype=np.int64).reshape(m, n)
        for B in G._int_orbit(A).values():
            flat = B.ravel()
            tight = tuple(int(i) for i in np.flatnonzero(V @ flat == q))
            facets.append(Facet(RationalMatrix(m, n, [Fraction(int(x), q) for x in flat]), tight, label))
    facets = sort_facets(facets)
    if not verify_hv_equivalence(vertices, facets, group=G):
        raise ValueError(f"orbit expansion is not a complete H-representation of LC({m},{n})")
    return facets


def report_json(m: int, n: int, classes: Sequence[SymmetryClass]) -> dict:
    return {"m": m, "n": n, "total": sum(c.orbit_size for c in classes),
            "classes": [c.to_json() for c in classes]}


_PRETTY = {"E": "E", "CHSH": "CHSH", "F41": "4_1", "F42": "4_2"}


def report_markdown(m: int, n: int, classes: Sequence[SymmetryClass], n_vertices: int | None = None) -> str:
    total = sum(c.orbit_size for c in classes)
    head = f"Facets of LC({m},{n})"
    if n_vertices is not None:
        head += f": {n_vertices} vertices, {total} facets"
    lines = [head, "", "| type | number of facets | vertices per facet | quantum value (lower) | quantum value (upper) |",
             "|---|---|---|---|---|"]
    for c in classes:
        lo = "" if c.quantum_value is None else f"{c.quantum_value:.12f}"
        hi = "" if c.quantum_upper is None else f"{c.quantum_upper:.12f}"
        lines.append(f"| {_PRETTY.get(c.label, c.label)} | {c.orbit_size} | {c.tight_count} | {lo} | {hi} |")
    return "\n".join(lines) + "\n"
