import itertools
from fractions import Fraction

import numpy as np

import pytest
from hypothesis import given, settings, strategies as st

from xorrep.abelian import (FiniteAbelianGroup, count_solutions_mod_q, determinant, factorize,
                            integer_kernel, invariant_factors, matmul, matrix_rank, smith_diagonal,
                            smith_normal_form, solve_mod_q, subgroup_generated)

small_ints = st.integers(-6, 6)


@st.composite
def matrices(draw, max_rows=4, max_cols=4, entries=small_ints):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return [[draw(entries) for _ in range(c)] for _ in range(r)]


@given(matrices(8, 8, st.integers(-20, 20)))
def test_snf_factorization(M):
    U, S, V = smith_normal_form(M)
    assert matmul(matmul(U, M), V) == S
    assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1
    diag = smith_diagonal(S)
    assert all(S[i][j] == 0 for i in range(len(S)) for j in range(len(S[0])) if i != j)
    assert all(d >= 0 for d in diag)
    nz = [d for d in diag if d]
    assert diag[: len(nz)] == nz
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


def test_snf_small_example():
    assert smith_normal_form([[2, 4], [6, 8]])[1] == [[2, 0], [0, 4]]


@given(matrices(3, 3), st.integers(2, 6))
def test_solve_mod_q_matches_brute(M, q):
    c = len(M[0])
    b = [sum(M[i][j] for j in range(c)) % q for i in range(len(M))]  # all-ones is a solution
    brute = sorted(v for v in itertools.product(range(q), repeat=c)
                   if all(sum(r[j] * v[j] for j in range(c)) % q == bi for r, bi in zip(M, b)))
    got = sorted(solve_mod_q(M, b, q))
    assert got == brute
    assert len(set(got)) == len(got)
    assert count_solutions_mod_q(M, b, q) == len(brute)


def test_solve_mod_q_inconsistent():
    assert list(solve_mod_q([[2]], [1], 4)) == []
    assert sorted(solve_mod_q([[2]], [2], 4)) == [(1,), (3,)]


def _box_kernel(M, c, bound=3):
    vals = np.arange(-bound, bound + 1)
    grid = np.stack(np.meshgrid(*([vals] * c), indexing="ij"), axis=-1).reshape(-1, c)
    A = np.array(M, dtype=np.int64)
    return grid[np.all(grid @ A.T == 0, axis=1)]


@settings(max_examples=40)
@given(matrices(6, 7, st.integers(-3, 3)))
def test_integer_kernel_complete_on_box(M):
    K = integer_kernel(M)
    c = len(M[0])
    for v in K:
        assert all(sum(r[j] * v[j] for j in range(c)) == 0 for r in M)
    assert len(K) == c - matrix_rank(M)
    assert K == sorted(K)
    for v in _box_kernel(M, c):
        assert matrix_rank([list(k) for k in K] + [v.tolist()]) == len(K)
        if K:
            # membership in the lattice, not only the span
            assert next(solve_integer_combination(K, v.tolist()), None) is not None


def solve_integer_combination(K, v):
    """Integer coefficients with sum_i w_i K_i = v, or nothing.

    ``K`` is linearly independent, so the rational coordinates of ``v`` in its
    span are unique; exact elimination finds them and we keep them only if integral.
    """
    rows = [[Fraction(K[i][j]) for i in range(len(K))] + [Fraction(v[j])] for j in range(len(v))]
    n = len(K)
    for col in range(n):
        piv = next((r for r in range(col, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            return
        rows[col], rows[piv] = rows[piv], rows[col]
        lead = rows[col][col]
        rows[col] = [x / lead for x in rows[col]]
        for r in range(len(rows)):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    if any(row[-1] != 0 for row in rows[n:]):
        return
    w = [rows[i][-1] for i in range(n)]
    if all(x.denominator == 1 for x in w):
        yield tuple(int(x) for x in w)


def test_factorize():
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert factorize(1) == {}


def _brute_invariants(G, elems):
    # structure via counts of elements of each order, compared against a product of cyclic groups
    def order_profile(group_elems, grp):
        prof = {}
        for e in group_elems:
            o = grp.element_order(e)
            prof[o] = prof.get(o, 0) + 1
        return prof
    return order_profile(elems, G)


@given(st.lists(st.integers(2, 6), min_size=1, max_size=3), st.data())
def test_subgroup_invariants_match_order_profile(factors, data):
    G = FiniteAbelianGroup(tuple(factors))
    gens = data.draw(st.lists(st.tuples(*(st.integers(0, f - 1) for f in factors)), min_size=0, max_size=3))
    H = subgroup_generated(G, gens)
    for a in H.elements:
        for b in H.elements:
            assert G.add(a, b) in H.elements
    inv = H.invariants
    assert all(b % a == 0 for a, b in zip(inv, inv[1:]))
    prod = 1
    for d in inv:
        prod *= d
    assert prod == H.order
    model = FiniteAbelianGroup(inv) if inv else None
    if model is not None:
        assert _brute_invariants(G, H.elements) == _brute_invariants(model, list(model.elements()))


def test_invariant_factors_examples():
    G = FiniteAbelianGroup((4, 2))
    assert invariant_factors(G, list(G.elements())) == (2, 4)
    assert subgroup_generated(FiniteAbelianGroup((4,)), [(2,)]).describe() == "Z_2"
    with pytest.raises(ValueError):
        subgroup_generated(G, [(5, 0)])


def test_snf_examples():
    assert smith_normal_form([[1, 0], [0, 1]])[1] == [[1, 0], [0, 1]]
    assert smith_normal_form([[0]])[1] == [[0]]


def test_kernel_examples():
    assert integer_kernel([[1, 1]]) == [(1, -1)]
    assert integer_kernel([[0, 0]]) == [(0, 1), (1, 0)]
    from xorrep.embed import constraint_matrix
    from xorrep.game import ghz
    K = integer_kernel(constraint_matrix(ghz().dist))
    assert len(K) == 2
    for v in K:
        assert v[0] == v[1] and v[2] == v[3] and v[4] == v[5]


def test_ghz_mod_two_system_has_two_normalized_solutions():
    from xorrep.embed import constraint_matrix
    from xorrep.game import ghz
    M = constraint_matrix(ghz().dist)
    pinned = [[r[1], r[3], r[5]] for r in M]
    assert sorted(solve_mod_q(pinned, [0] * 4, 2)) == [(0, 0, 0), (1, 1, 1)]


def test_solver_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        list(solve_mod_q([[1, 2]], [1, 2], 3))


def test_subgroup_examples():
    Z2Z4 = FiniteAbelianGroup((2, 4))
    assert subgroup_generated(Z2Z4, [(1, 2)]).elements == {(0, 0), (1, 2)}
    Z2Z2 = FiniteAbelianGroup((2, 2))
    assert subgroup_generated(Z2Z2, [(1, 0), (0, 1)]).elements == set(Z2Z2.elements())


@given(st.lists(st.integers(2, 6), min_size=1, max_size=3), st.data())
def test_subgroup_generation_idempotent(factors, data):
    G = FiniteAbelianGroup(tuple(factors))
    gens = data.draw(st.lists(st.tuples(*(st.integers(0, f - 1) for f in factors)), max_size=3))
    H = subgroup_generated(G, gens)
    assert subgroup_generated(G, H.elements).elements == H.elements
    assert G.zero in H.elements
    assert all(G.neg(a) in H.elements for a in H.elements)
