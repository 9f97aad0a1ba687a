"""Vertices and facets of the classical correlation polytope LC(m, n).

LC(m, n) is the convex hull of the rank-one sign matrices ``xi eta^T``. It
lives in R^(m*n), is centrally symmetric, and every facet can be written as
``<M, A> <= 1`` with the normal ``M`` scaled so its classical value is 1.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exactlin import RationalMatrix, bareiss_echelon, rank
from .dd import double_description

log = logging.getLogger(__name__)

MAX_DIM = 8
CLASS_LABELS = ("E", "CHSH", "F41", "F42")


@dataclass(frozen=True)
class Vertex:
    xi: tuple[int, ...]
    eta: tuple[int, ...]

    def __post_init__(self):
        if self.xi[0] != 1:
            raise ValueError("vertices are normalized with xi[0] = +1")
        if any(s not in (1, -1) for s in self.xi + self.eta):
            raise ValueError("sign vectors must have entries +-1")

    @property
    def matrix(self) -> RationalMatrix:
        return RationalMatrix(len(self.xi), len(self.eta), [a * b for a in self.xi for b in self.eta])

    @property
    def flat(self) -> tuple[int, ...]:
        return tuple(a * b for a in self.xi for b in self.eta)

    def to_json(self) -> dict:
        return {"xi": list(self.xi), "eta": list(self.eta)}

    @classmethod
    def from_json(cls, obj) -> "Vertex":
        return cls(tuple(obj["xi"]), tuple(obj["eta"]))


@dataclass
class Facet:
    normal: RationalMatrix
    tight: tuple[int, ...]
    class_label: str | None = None

    def to_json(self) -> dict:
        return {"normal": self.normal.to_json(), "tight": list(self.tight),
                "class": self.class_label or "unknown"}

    @classmethod
    def from_json(cls, obj) -> "Facet":
        label = obj.get("class")
        return cls(RationalMatrix.from_json(obj["normal"]), tuple(obj["tight"]),
                   None if label in (None, "unknown") else label)


@dataclass
class FacetCheck:
    valid: bool
    tight_count: int
    reason: str | None = None

    def __bool__(self):
        return self.valid


def _signs(k: int) -> Iterable[tuple[int, ...]]:
    # binary counting with bit 0 <-> +1, most significant position first
    return itertools.product((1, -1), repeat=k)


def generate_vertices(m: int, n: int) -> list[Vertex]:
    """All 2^(m+n-1) vertices of LC(m, n), xi[0] fixed to +1."""
    if not (1 <= m <= MAX_DIM and 1 <= n <= MAX_DIM):
        raise ValueError(f"dimensions must lie in 1..{MAX_DIM}, got ({m}, {n})")
    out = []
    for rest in _signs(m - 1):
        xi = (1,) + rest
        for eta in _signs(n):
            out.append(Vertex(xi, eta))
    return out


def vertex_array(vertices: Sequence[Vertex]) -> np.ndarray:
    return np.array([v.flat for v in vertices], dtype=np.int64)


def classical_value(M: RationalMatrix) -> Fraction:
    """max over sign vectors of sum_ij m_ij xi_i eta_j, exactly.

    For a fixed xi the best eta_j is the sign of column j's weighted sum, so
    only 2^(m-1) row patterns need to be visited.
    """
    if M.is_zero():
        raise ValueError("classical value of the zero matrix is not a normalization")
    m, n = M.shape
    cols = [[M[i, j] for i in range(m)] for j in range(n)]
    best = None
    for rest in _signs(m - 1):
        xi = (1,) + rest
        val = sum(abs(sum(x * c for x, c in zip(xi, col))) for col in cols)
        if best is None or val > best:
            best = val
    return Fraction(best)


def normalize(M: RationalMatrix) -> RationalMatrix:
    return M.scale(1 / classical_value(M))


def _int_normal(M: RationalMatrix) -> tuple[int, np.ndarray]:
    q, ints = M.integer_entries()
    return q, np.array(ints, dtype=np.int64)


def tight_indices(M: RationalMatrix, vertices: Sequence[Vertex], V: np.ndarray | None = None) -> tuple[int, ...]:
    V = vertex_array(vertices) if V is None else V
    q, a = _int_normal(M)
    return tuple(int(i) for i in np.flatnonzero(V @ a == q))


def verify_facet(M: RationalMatrix, vertices: Sequence[Vertex], V: np.ndarray | None = None) -> FacetCheck:
    """Check that ``<M, A> <= 1`` is facet-defining for conv(vertices)."""
    V = vertex_array(vertices) if V is None else V
    if V.shape[1] != M.rows * M.cols:
        return FacetCheck(False, 0, "shape mismatch")
    q, a = _int_normal(M)
    s = V @ a
    tight = np.flatnonzero(s == q)
    if (s > q).any() or tight.size == 0:
        return FacetCheck(False, int(tight.size), "not supporting")
    if rank(V[tight].tolist()) != V.shape[1]:
        return FacetCheck(False, int(tight.size), "tight set rank-deficient")
    return FacetCheck(True, int(tight.size))


def _check_full_dimensional(V: np.ndarray) -> None:
    if len(bareiss_echelon(V.tolist())[1]) != V.shape[1]:
        raise ValueError("vertices are not full-dimensional")


def facets_by_dd(vertices: Sequence[Vertex], progress=None) -> list[Facet]:
    """Exact facet list via double description on the polar cone.

    The cone is ``{(a, t) : t - <a, v> >= 0 for every vertex v}``; each extreme
    ray has t > 0 and gives the facet normal a / t.
    """
    V = vertex_array(vertices)
    _check_full_dimensional(V)
    H = np.hstack([-V, np.ones((V.shape[0], 1), dtype=np.int64)])
    res = double_description(H, progress=progress)
    m, n = len(vertices[0].xi), len(vertices[0].eta)
    facets = []
    for i, ray in enumerate(res.rays.tolist()):
        t = ray[-1]
        if t <= 0:
            raise ArithmeticError("polar cone has a ray with t <= 0; origin not interior")
        normal = RationalMatrix(m, n, [Fraction(x, t) for x in ray[:-1]])
        facets.append(Facet(normal, tuple(res.zero_indices(i))))
    log.info("dd: %d facets, peak %d intermediate rays", len(facets), res.max_intermediate)
    return sort_facets(facets)


def sort_facets(facets: Iterable[Facet]) -> list[Facet]:
    return sorted(facets, key=lambda f: f.normal.entries)


def enumerate_facets(vertices: Sequence[Vertex], method: str = "dd", progress=None) -> list[Facet]:
    """Complete, duplicate-free facet list of conv(vertices).

    ``method="dd"`` runs exact double description. ``method="orbit"`` expands
    the symmetry orbits of the known class representatives and certifies
    completeness with :func:`verify_hv_equivalence`; it raises
    ``ValueError`` when the expansion is not a complete H-representation.
    """
    if method == "dd":
        return facets_by_dd(vertices, progress=progress)
    if method == "orbit":
        from .symmetry import facets_by_orbits
        return facets_by_orbits(vertices)
    raise ValueError(f"unknown method {method!r}")


# -- completeness -----------------------------------------------------------

_P = 67_108_859  # prime below 2^26, so products of residues fit in int64


def _inv_mod_p(x: np.ndarray) -> np.ndarray:
    # Fermat inverse, vectorized square-and-multiply
    result = np.ones_like(x)
    base = x % _P
    e = _P - 2
    while e:
        if e & 1:
            result = (result * base) % _P
        base = (base * base) % _P
        e >>= 1
    return result


def _full_rank_mod_p(batch: np.ndarray) -> np.ndarray:
    """For a stack (B, r, c) of integer matrices, True where rank mod p is c.

    Rank over Q is at least the rank mod p, so True certifies full column
    rank exactly; False is inconclusive.
    """
    a = np.mod(batch.astype(np.int64), _P)
    B, r, c = a.shape
    if r < c:
        return np.zeros(B, dtype=bool)
    ok = np.ones(B, dtype=bool)
    idx = np.arange(B)
    for col in range(c):
        piv_rows = np.argmax(a[:, col:, col] != 0, axis=1) + col
        ok &= a[idx, piv_rows, col] != 0
        top = a[idx, col].copy()
        a[idx, col] = a[idx, piv_rows]
        a[idx, piv_rows] = top
        inv = _inv_mod_p(a[idx, col, col])
        a[:, col] = (a[:, col] * inv[:, None]) % _P
        f = a[:, col + 1:, col:col + 1]
        a[:, col + 1:] = (a[:, col + 1:] - f * a[:, col:col + 1, :]) % _P
    return ok


def full_rank_rows(mats: Sequence[np.ndarray], ncols: int) -> list[bool]:
    """Exact full-column-rank test for many integer matrices."""
    out = [False] * len(mats)
    by_shape: dict[int, list[int]] = {}
    for i, mat in enumerate(mats):
        by_shape.setdefault(mat.shape[0], []).append(i)
    for r, idx in by_shape.items():
        if r < ncols:
            continue
        ok = _full_rank_mod_p(np.stack([mats[i] for i in idx]))
        for i, good in zip(idx, ok):
            out[i] = bool(good) or rank(mats[i].tolist()) == ncols
    return out


def facet_neighbors(facet: Facet, V: np.ndarray) -> list[RationalMatrix]:
    """Facets sharing a ridge with ``facet``.

    Ridges of F correspond to extreme rays c of ``{c : <c, v> <= 0, v tight}``.
    Rotating the normal a to ``a + mu c`` until a new vertex becomes tight
    gives the neighbor across that ridge.
    """
    m, n = facet.normal.shape
    q, a = _int_normal(facet.normal)
    T = V[list(facet.tight)]
    res = double_description(-T)
    s = V @ a
    out = []
    for c in res.rays.tolist():
        c_arr = np.array(c, dtype=object)
        sc = V.astype(object) @ c_arr
        best = None
        for k in range(V.shape[0]):
            if sc[k] > 0:
                mu = Fraction(q - int(s[k]), q * int(sc[k]))
                if best is None or mu < best:
                    best = mu
        if best is None:
            raise ArithmeticError("unbounded rotation: vertex set not full-dimensional")
        out.append(RationalMatrix(m, n, [Fraction(int(x), q) + best * int(y) for x, y in zip(a, c)]))
    return out


def verify_hv_equivalence(vertices: Sequence[Vertex], facets: Sequence[Facet], group=None) -> bool:
    """Certify that ``facets`` is exactly the facet set of conv(vertices).

    Checks (a) every vertex satisfies all inequalities, lies on at least m*n
    of them, with full-rank active normals, (b) every facet passes
    :func:`verify_facet`, and (c) the listed facets are closed under ridge
    adjacency, which by connectivity of the facet graph means none are
    missing. With ``group`` (a :class:`~bellcorr.symmetry.SymmetryGroup`),
    (c) is checked on one facet per orbit after confirming the list is
    closed under the group generators.
    """
    if not facets:
        return False
    V = vertex_array(vertices)
    m, n = facets[0].normal.shape
    d = m * n
    if V.shape[1] != d:
        return False
    qs, A = [], []
    for f in facets:
        q, a = _int_normal(f.normal)
        qs.append(q)
        A.append(a)
    A = np.array(A, dtype=np.int64)
    qs = np.array(qs, dtype=np.int64)
    keys = {f.normal for f in facets}
    if len(keys) != len(facets):
        log.warning("duplicate facets in list")
        return False

    S = A @ V.T
    if (S > qs[:, None]).any():
        log.warning("some vertex violates a listed inequality")
        return False
    tight = S == qs[:, None]

    # (b) every facet is facet-defining
    mats = [V[np.flatnonzero(row)] for row in tight]
    for i, good in enumerate(full_rank_rows(mats, d)):
        if not good:
            log.warning("facet %d is not facet-defining", i)
            return False
    for f, row in zip(facets, tight):
        if tuple(int(i) for i in np.flatnonzero(row)) != tuple(f.tight):
            log.warning("stored tight set disagrees with recomputation")
            return False

    # (a) vertex side
    active = [A[np.flatnonzero(tight[:, k])] for k in range(V.shape[0])]
    for k, good in enumerate(full_rank_rows(active, d)):
        if not good:
            log.warning("vertex %d has rank-deficient active normals", k)
            return False

    # (c) ridge closure
    if group is None:
        reps = list(facets)
    else:
        if group.generator_maps(A, qs) is None:
            log.warning("facet list not closed under the symmetry group")
            return False
        reps = [facets[i] for i in group.orbit_representatives([f.normal for f in facets])]
    for f in reps:
        for nb_ in facet_neighbors(f, V):
            if nb_ not in keys:
                log.warning("missing neighbor facet %r", nb_)
                return False
    return True
