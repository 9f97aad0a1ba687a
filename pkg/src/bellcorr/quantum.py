"""Maximal quantum values of Bell correlation functionals.

The quantum value of ``M`` is the maximum of ``sum_ij m_ij <x_i, y_j>`` over
unit vectors. With the x_i fixed, the best y_j is the normalized column sum
``sum_i m_ij x_i``; alternating the two updates (see-saw) never decreases the
objective and yields a lower bound. At a stationary point the norms
``k_i = |sum_j m_ij y_j|`` and ``l_j = |sum_i m_ij x_i|`` build a diagonal
dual witness whose trace is an upper bound once positive semidefiniteness is
checked numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exactlin import RationalMatrix, rank

DEFAULT_STARTS = 64
DEFAULT_TOL = 1e-12
DEFAULT_MAX_SWEEPS = 10_000
CERT_TOL = 1e-9
MAX_REALIZE_DIM = 8


def _as_float(M) -> np.ndarray:
    if isinstance(M, RationalMatrix):
        return M.to_float()
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise ValueError("coefficient matrix must be 2-D")
    return A


def _check_support(A: np.ndarray) -> None:
    if not np.isfinite(A).all():
        raise ValueError("non-finite coefficients")
    if (np.abs(A).sum(axis=1) == 0).any():
        raise ValueError("coefficient matrix has a zero row")
    if (np.abs(A).sum(axis=0) == 0).any():
        raise ValueError("coefficient matrix has a zero column")


def support(M: RationalMatrix) -> RationalMatrix:
    """Drop zero rows and columns; they do not change the quantum value."""
    rows = [i for i in range(M.rows) if any(M.row(i))]
    cols = [j for j in range(M.cols) if any(M[i, j] for i in range(M.rows))]
    if not rows:
        raise ValueError("zero matrix")
    return RationalMatrix(len(rows), len(cols), [M[i, j] for i in rows for j in cols])


@dataclass
class UnitConfig:
    X: np.ndarray  # (m, d), rows are the x_i
    Y: np.ndarray  # (n, d)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if self.X.shape[1] != self.Y.shape[1]:
            raise ValueError("x and y vectors must live in the same dimension")

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def is_unit(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(np.linalg.norm(self.X, axis=1), 1, atol=atol, rtol=0)
                    and np.allclose(np.linalg.norm(self.Y, axis=1), 1, atol=atol, rtol=0))

    def gram(self) -> np.ndarray:
        """Correlation matrix ``<x_i, y_j>``."""
        return self.X @ self.Y.T

    def to_json(self) -> dict:
        return {"dim": self.dim, "X": _fmt(self.X), "Y": _fmt(self.Y)}

    @classmethod
    def from_json(cls, obj) -> "UnitConfig":
        return cls(np.array(obj["X"], dtype=float), np.array(obj["Y"], dtype=float))


@dataclass
class StationarityData:
    k: np.ndarray
    l: np.ndarray
    residual: float

    @property
    def balance(self) -> float:
        return abs(float(self.k.sum() - self.l.sum()))


@dataclass
class DualCertificate:
    d_diag: np.ndarray
    min_eig: float
    upper_bound: float  # +inf when the slack matrix is not PSD within tolerance

    @property
    def valid(self) -> bool:
        return math.isfinite(self.upper_bound)


@dataclass
class ViolationResult:
    value: float
    config: UnitConfig
    stationarity: StationarityData
    certificate: DualCertificate | None = None
    starts_used: int = 0
    iterations: int = 0
    seed: int | None = None
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def upper_bound(self) -> float:
        return self.certificate.upper_bound if self.certificate is not None else math.inf

    @property
    def gap(self) -> float:
        return self.upper_bound - self.value

    def to_json(self) -> dict:
        return {
            "value": _fmt(self.value),
            "upper_bound": _fmt(self.upper_bound),
            "k": _fmt(self.stationarity.k),
            "l": _fmt(self.stationarity.l),
            "config": self.config.to_json(),
            "residual": _fmt(self.stationarity.residual),
            "seed": self.seed,
        }


def _fmt(x):
    if isinstance(x, np.ndarray):
        return [_fmt(v) for v in x.tolist()]
    if isinstance(x, list):
        return [_fmt(v) for v in x]
    return format(float(x), ".17g")


def random_unit_vectors(k: int, d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((k, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def objective(M, cfg: UnitConfig) -> float:
    """``sum_ij m_ij <x_i, y_j>``."""
    A = _as_float(M)
    if A.shape != (cfg.X.shape[0], cfg.Y.shape[0]):
        raise ValueError(f"matrix shape {A.shape} does not match config ({cfg.X.shape[0]}, {cfg.Y.shape[0]})")
    return float(np.sum(A * cfg.gram()))


def _normalize_rows(S: np.ndarray, rng: np.random.Generator | None):
    norms = np.linalg.norm(S, axis=1)
    scale = max(1.0, float(norms.max(initial=0.0)))
    out = np.empty_like(S)
    degenerate = norms <= 1e-14 * scale
    ok = ~degenerate
    out[ok] = S[ok] / norms[ok, None]
    if degenerate.any():
        # zero weighted sum: the point is not extremal, so any direction will do
        rng = rng if rng is not None else np.random.default_rng(0)
        out[degenerate] = random_unit_vectors(int(degenerate.sum()), S.shape[1], rng)
    return out, float(norms.sum())


def half_step_y(M, X: np.ndarray, rng: np.random.Generator | None = None) -> tuple[np.ndarray, float]:
    """Best y's for fixed x's: ``y_j = s_j / |s_j|`` with ``s_j = sum_i m_ij x_i``.

    Returns the new Y and the objective value ``sum_j |s_j|``.
    """
    A = _as_float(M)
    if (np.abs(A).sum(axis=0) == 0).any():
        raise ValueError("coefficient matrix has a zero column")
    return _normalize_rows(A.T @ np.atleast_2d(X), rng)


def half_step_x(M, Y: np.ndarray, rng: np.random.Generator | None = None) -> tuple[np.ndarray, float]:
    """Best x's for fixed y's; mirror image of :func:`half_step_y`."""
    A = _as_float(M)
    if (np.abs(A).sum(axis=1) == 0).any():
        raise ValueError("coefficient matrix has a zero row")
    return _normalize_rows(A @ np.atleast_2d(Y), rng)


def stationarity_residuals(M, cfg: UnitConfig) -> StationarityData:
    A = _as_float(M)
    SY = A @ cfg.Y          # row i: sum_j m_ij y_j
    SX = A.T @ cfg.X        # row j: sum_i m_ij x_i
    k = np.linalg.norm(SY, axis=1)
    l = np.linalg.norm(SX, axis=1)
    res_x = np.linalg.norm(SY - k[:, None] * cfg.X, axis=1).max()
    res_y = np.linalg.norm(SX - l[:, None] * cfg.Y, axis=1).max()
    return StationarityData(k, l, float(max(res_x, res_y)))


def _single_run(A, X, rng, tol, max_sweeps):
    history = []
    prev = -math.inf
    sweeps = 0
    Y = None
    for sweeps in range(1, max_sweeps + 1):
        Y, vy = half_step_y(A, X, rng)
        X, vx = half_step_x(A, Y, rng)
        history.extend((vy, vx))
        if not (math.isfinite(vy) and math.isfinite(vx)):
            raise FloatingPointError("non-finite objective; rescale the input")
        if vx - prev <= tol:
            break
        prev = vx
    # finish with a y half-step so (X, Y) is a consistent pair
    Y, vy = half_step_y(A, X, rng)
    history.append(vy)
    return X, Y, vy, sweeps, history


def seesaw(M, dim: int | None = None, starts: int = DEFAULT_STARTS, tol: float = DEFAULT_TOL,
           seed: int = 0, max_sweeps: int = DEFAULT_MAX_SWEEPS, certify: bool = False) -> ViolationResult:
    """Multi-start see-saw lower bound on the quantum value of ``M``.

    ``dim`` defaults to min(m, n), which is always enough for the maximum.
    The best start wins; ties go to the earliest start.
    """
    A = _as_float(M)
    _check_support(A)
    m, n = A.shape
    d = min(m, n) if dim is None else int(dim)
    if d < 1:
        raise ValueError("dimension must be positive")
    rng = np.random.default_rng(seed)
    best = None
    total = 0
    for s in range(starts):
        X0 = random_unit_vectors(m, d, rng)
        X, Y, val, sweeps, hist = _single_run(A, X0, rng, tol, max_sweeps)
        total += sweeps
        if best is None or val > best[0]:
            best = (val, X, Y, hist)
    val, X, Y, hist = best
    # polish the winner: the value settles long before the vectors do
    hist = list(hist)
    st = stationarity_residuals(A, UnitConfig(X, Y))
    polish = 0
    target = 10 * tol * max(1.0, float(np.abs(A).max()))
    while st.residual > target and polish < max_sweeps:
        X, vx = half_step_x(A, Y, rng)
        Y, vy = half_step_y(A, X, rng)
        hist.extend((vx, vy))
        polish += 1
        st = stationarity_residuals(A, UnitConfig(X, Y))
    cfg = UnitConfig(X, Y)
    result = ViolationResult(value=objective(A, cfg), config=cfg, stationarity=st,
                             starts_used=starts, iterations=total + polish, seed=seed, history=hist)
    if certify:
        st = result.stationarity
        result.certificate = dual_certificate(A, st.k, st.l)
    return result


def slack_matrix(M, d_diag: np.ndarray) -> np.ndarray:
    A = _as_float(M)
    m, n = A.shape
    W = np.zeros((m + n, m + n))
    W[:m, m:] = A / 2
    W[m:, :m] = A.T / 2
    return np.diag(d_diag) - W


def dual_certificate(M, k, l, tol: float = CERT_TOL) -> DualCertificate:
    """Diagonal dual witness built from the stationarity norms.

    With ``D = diag(k, l) / 2`` and ``W = [[0, M], [M^T, 0]] / 2``, positive
    semidefiniteness of ``D - W`` gives ``sum m_ij <x_i, y_j> <= trace(D)`` for
    every unit configuration. A smallest eigenvalue down to ``-tol`` is
    accepted, with the bound inflated by ``(m + n) * tol``.
    """
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    if (k <= 0).any() or (l <= 0).any():
        raise ValueError("k and l must be strictly positive")
    d_diag = np.concatenate([k, l]) / 2
    min_eig = float(np.linalg.eigvalsh(slack_matrix(M, d_diag))[0])
    if min_eig >= -tol:
        upper = float(d_diag.sum()) + d_diag.size * tol
    else:
        upper = math.inf
    return DualCertificate(d_diag, min_eig, upper)


def quantum_value_certified(M, starts: int = DEFAULT_STARTS, seed: int = 0, tol: float = DEFAULT_TOL,
                            dim: int | None = None) -> tuple[float, float]:
    """(lower, upper) bounds on the quantum value; upper is inf if uncertified."""
    res = seesaw(M, dim=dim, starts=starts, tol=tol, seed=seed, certify=True)
    return res.value, res.upper_bound


@dataclass
class LuckyResult:
    k: np.ndarray
    l: np.ndarray
    residual: float
    iterations: int


def lucky_solve(M, init=None, alpha: float = 0.5, tol: float = 1e-8,
                max_iter: int = 200_000) -> LuckyResult | None:
    """Look for positive diagonals K, L with ``M L^-1 M^T = K``.

    Damped fixed-point iteration: ``K = diag(M L^-1 M^T)``, target
    ``L* = diag(M^T K^-1 M)``, ``L <- L + alpha (L* - L)``. The result is
    rescaled so ``sum k = sum l``. Returns None (not applicable) unless the
    relative off-diagonal residual of ``M L^-1 M^T`` drops below ``tol``.
    """
    if isinstance(M, RationalMatrix):
        if M.rows != M.cols:
            raise ValueError("lucky_solve needs a square matrix")
        if rank(M) < M.rows:
            raise ValueError("matrix is singular")
    A = _as_float(M)
    m, n = A.shape
    if m != n:
        raise ValueError("lucky_solve needs a square matrix")
    if np.linalg.matrix_rank(A) < n:
        raise ValueError("matrix is singular")
    l = np.ones(n) if init is None else np.array(init, dtype=float)
    if (l <= 0).any():
        raise ValueError("initial l must be positive")
    off = ~np.eye(n, dtype=bool)
    resid = math.inf
    for it in range(1, max_iter + 1):
        T = (A / l) @ A.T
        k = np.diag(T).copy()
        if (k <= 0).any():
            return None
        prev, resid = resid, float(np.abs(T[off]).max() / np.abs(k).max())
        # keep iterating past tol until the residual stops improving
        if resid < tol and (resid < 1e-15 or resid >= prev):
            break
        target = np.diag((A.T / k) @ A)
        l = np.maximum(l + alpha * (target - l), 1e-300)
        l /= l.sum()  # fix the scale freedom; rescaled at the end
    if resid >= tol:
        return None
    c = math.sqrt(k.sum() / l.sum())
    return LuckyResult(k / c, l * c, resid, it)


_ANALYTIC = {
    "E": 1.0,
    "CHSH": math.sqrt(2.0),
    "F41": 5.0 / 3.0 * math.sqrt(2.0 / 3.0),
    "F42": 0.4 * math.sqrt(10.0 + math.sqrt(2.0)),
}


def analytic_value(label: str) -> float:
    try:
        return _ANALYTIC[label]
    except KeyError:
        raise KeyError(f"no analytic value for class {label!r}") from None


def kg_constant(m: int, n: int, classes: Sequence, starts: int = DEFAULT_STARTS, seed: int = 0) -> float:
    """Largest quantum value over the facet classes of LC(m, n).

    Each class gets ``quantum_value`` / ``quantum_upper`` filled in; the
    maximum of the uppers is a certified upper bound on the constant.
    """
    if not classes:
        raise ValueError("no facet classes given")
    bad = [c for c in classes if c.label == "unknown"]
    if bad:
        raise ValueError(f"classification incomplete: {len(bad)} unknown class(es)")
    for c in classes:
        if c.representative.shape != (m, n):
            raise ValueError("class representative has the wrong shape")
        lo, hi = quantum_value_certified(support(c.representative), starts=starts, seed=seed)
        c.quantum_value, c.quantum_upper = lo, hi
    return max(c.quantum_value for c in classes)


# -- operator realization ---------------------------------------------------

@dataclass
class Realization:
    local_dim_A: int
    local_dim_B: int
    ops_A: list[np.ndarray]
    ops_B: list[np.ndarray]
    state: np.ndarray

    def correlations(self) -> np.ndarray:
        psi = self.state
        out = np.empty((len(self.ops_A), len(self.ops_B)))
        for i, Xa in enumerate(self.ops_A):
            for j, Yb in enumerate(self.ops_B):
                val = np.vdot(psi, np.kron(Xa, Yb) @ psi)
                out[i, j] = val.real
        return out

    def to_json(self) -> dict:
        def cmat(a):
            return {"re": _fmt(a.real), "im": _fmt(a.imag)}
        return {"local_dim_A": self.local_dim_A, "local_dim_B": self.local_dim_B,
                "ops_A": [cmat(a) for a in self.ops_A], "ops_B": [cmat(b) for b in self.ops_B],
                "state": cmat(self.state)}


_PX = np.array([[0, 1], [1, 0]], dtype=complex)
_PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PZ = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


def clifford_generators(d: int) -> list[np.ndarray]:
    """d pairwise anticommuting Hermitian unitaries on 2^(d//2) dimensions.

    Jordan-Wigner ladder: qubit p carries X or Y with Z strings to its left.
    An odd d takes the trailing all-Z product as its last generator.
    """
    if d < 1:
        raise ValueError("need at least one generator")
    q = d // 2
    if q == 0:
        return [np.ones((1, 1), dtype=complex)]
    gens = []
    for p in range(q):
        for P in (_PX, _PY):
            factors = [_PZ] * p + [P] + [_I2] * (q - p - 1)
            g = factors[0]
            for f in factors[1:]:
                g = np.kron(g, f)
            gens.append(g)
    if d % 2:
        g = _PZ
        for _ in range(q - 1):
            g = np.kron(g, _PZ)
        gens.append(g)
    return gens


def tsirelson_realize(cfg: UnitConfig) -> Realization:
    """Observables and a maximally entangled state reproducing ``<x_i, y_j>``.

    ``X_i = sum_t x_it C_t`` and ``Y_j = sum_t y_jt conj(C_t)`` for
    anticommuting generators ``C_t``; for unit vectors these square to the
    identity, and ``<psi| X_i (x) Y_j |psi> = tr(X_i Y_j^T) / D = <x_i, y_j>``.
    """
    d = cfg.dim
    if d > MAX_REALIZE_DIM:
        raise ValueError(f"realization dimension {d} exceeds cap {MAX_REALIZE_DIM}")
    C = clifford_generators(d)
    D = C[0].shape[0]
    ops_A = [sum(float(x[t]) * C[t] for t in range(d)) for x in cfg.X]
    ops_B = [sum(float(y[t]) * C[t].conj() for t in range(d)) for y in cfg.Y]
    psi = np.zeros(D * D, dtype=complex)
    psi[[i * D + i for i in range(D)]] = 1 / math.sqrt(D)
    return Realization(D, D, ops_A, ops_B, psi)
