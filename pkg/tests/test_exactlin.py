from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bellcorr.exactlin import RationalMatrix, as_rational, lex_compare, nullspace_vector, rank, solve
from bellcorr.polytope import generate_vertices, vertex_array
from bellcorr.presets import CHSH, embed

fractions = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 1000)


@given(fractions, fractions)
def test_rational_add_sub_roundtrip(a, b):
    assert (a + b) - b == a


def test_rational_serialization():
    assert str(Fraction(-3, 6)) == "-1/2"
    assert str(Fraction(4, 2)) == "2"
    assert as_rational("6/4") == Fraction(3, 2)
    assert Fraction(0, 7).denominator == 1
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_matrix_json_roundtrip():
    M = RationalMatrix.from_rows([[1, "-1/3"], [0, "5/2"]])
    obj = M.to_json()
    assert obj == {"rows": 2, "cols": 2, "entries": [["1", "-1/3"], ["0", "5/2"]]}
    assert RationalMatrix.from_json(obj) == M


def test_matrix_shape_invariants():
    with pytest.raises(ValueError):
        RationalMatrix(2, 2, [1, 2, 3])
    with pytest.raises(ValueError):
        RationalMatrix(0, 1, [])


def test_rank_identity():
    I3 = RationalMatrix.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert rank(I3) == 3


def test_rank_vertex_matrices_are_one():
    for v in generate_vertices(3, 4):
        assert rank(v.matrix) == 1


def test_rank_chsh_tight_set_in_4x4():
    # oracle: float SVD rank on the brute-force tight set
    V = vertex_array(generate_vertices(4, 4))
    q, ints = embed(CHSH, 4, 4).integer_entries()
    tight = V[V @ np.array(ints) == q]
    assert tight.shape == (64, 16)
    assert np.linalg.matrix_rank(tight.astype(float)) == 16
    assert rank(tight.T.tolist()) == 16  # 16 x 64, vertices as columns


def test_rank_transpose_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        m, n = rng.integers(1, 6, size=2)
        rows = [[Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))) for _ in range(n)] for _ in range(m)]
        if rng.random() < 0.3 and m > 1:
            rows[-1] = [a + b for a, b in zip(rows[0], rows[1 % m])]
        M = RationalMatrix.from_rows(rows)
        assert rank(M) == rank(M.transpose())
        assert rank(M) == np.linalg.matrix_rank(M.to_float())


def test_lex_compare():
    A = RationalMatrix.from_rows([[0, 1]])
    B = RationalMatrix.from_rows([[1, 0]])
    assert lex_compare(A, A) == 0
    assert lex_compare(A, B) == -1
    E = RationalMatrix.from_rows([[1, 0], [0, 0]])
    assert lex_compare(E, CHSH) == 1
    with pytest.raises(ValueError):
        lex_compare(A, CHSH)


def test_lex_compare_total_order():
    rng = np.random.default_rng(11)
    mats = [RationalMatrix(2, 2, [int(x) for x in rng.integers(-2, 3, 4)]) for _ in range(60)]
    for a in mats[:20]:
        for b in mats[20:40]:
            assert lex_compare(a, b) == -lex_compare(b, a)
            for c in mats[40:]:
                if lex_compare(a, b) <= 0 and lex_compare(b, c) <= 0:
                    assert lex_compare(a, c) <= 0


def test_solve_and_nullspace():
    A = [[2, 1], [1, 3]]
    assert solve(A, [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    assert solve([[1, 2], [2, 4]], [1, 1]) is None
    v = nullspace_vector([[1, 1, 0], [0, 1, 1]], 3)
    assert v in ([1, -1, 1], [-1, 1, -1])
