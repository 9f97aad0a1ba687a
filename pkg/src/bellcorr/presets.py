"""Named Bell functionals, with the exact rational prefactors."""
from __future__ import annotations

from .exactlin import RationalMatrix

E11 = RationalMatrix.from_rows([[1]])

CHSH = RationalMatrix.from_rows([[1, 1],
                                 [1, -1]], scale="1/2")

F41 = RationalMatrix.from_rows([[2, 1, -1, 0],
                                [1, -1, 1, 1],
                                [-1, 1, -1, 1],
                                [0, 1, 1, 0]], scale="1/6")

F42 = RationalMatrix.from_rows([[1, 1, 2, 2],
                                [1, 2, 1, -2],
                                [2, 1, -2, 1],
                                [2, -2, 1, -1]], scale="1/10")

REPRESENTATIVES = {"E": E11, "CHSH": CHSH, "F41": F41, "F42": F42}

PRESET_ALIASES = {"e11": "E", "e": "E", "chsh": "CHSH", "41": "F41", "f41": "F41",
                  "42": "F42", "f42": "F42"}


def embed(M: RationalMatrix, m: int, n: int) -> RationalMatrix:
    """Pad ``M`` with zeros into the top-left corner of an m x n matrix."""
    if M.rows > m or M.cols > n:
        raise ValueError(f"{M.shape} does not fit into ({m}, {n})")
    entries = [0] * (m * n)
    for i in range(M.rows):
        for j in range(M.cols):
            entries[i * n + j] = M[i, j]
    return RationalMatrix(m, n, entries)


def representatives_for(m: int, n: int) -> dict[str, RationalMatrix]:
    """The known class representatives that fit in m x n, zero-padded."""
    return {label: embed(M, m, n) for label, M in REPRESENTATIVES.items()
            if M.rows <= m and M.cols <= n}


def preset(name: str, m: int | None = None, n: int | None = None) -> RationalMatrix:
    label = PRESET_ALIASES.get(name.lower())
    if label is None:
        raise KeyError(f"unknown preset {name!r}; choose from chsh, 41, 42, e11")
    M = REPRESENTATIVES[label]
    if m is not None or n is not None:
        M = embed(M, m or M.rows, n or M.cols)
    return M
