"""Exact integer linear algebra and finite abelian groups.

Everything here works on Python integers, so results are exact.  Matrices
are plain lists of lists of ints.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd, prod
from typing import Iterable, Iterator, Sequence

IntegerMatrix = list[list[int]]

# entries beyond this many bits are treated as a runaway computation
MAX_ENTRY_BITS = 4096


class CapacityError(ArithmeticError):
    """Raised when intermediate integers outgrow ``MAX_ENTRY_BITS``."""


def as_matrix(M: Sequence[Sequence[int]], cols: int | None = None) -> IntegerMatrix:
    rows = [list(r) for r in M]
    width = len(rows[0]) if rows else (cols or 0)
    for r in rows:
        if len(r) != width:
            raise ValueError("ragged matrix")
        for v in r:
            if not isinstance(v, int) or isinstance(v, bool):
                raise TypeError(f"matrix entries must be int, got {type(v).__name__}")
    return rows


def identity(n: int) -> IntegerMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A: IntegerMatrix, B: IntegerMatrix) -> IntegerMatrix:
    if not A:
        return []
    inner = len(B)
    width = len(B[0]) if B else 0
    return [[sum(A[i][k] * B[k][j] for k in range(inner)) for j in range(width)] for i in range(len(A))]


def determinant(A: IntegerMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [row[:] for row in A]
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def _check_capacity(row: list[int]) -> None:
    for v in row:
        if v.bit_length() > MAX_ENTRY_BITS:
            raise CapacityError(f"integer entry exceeded {MAX_ENTRY_BITS} bits")


def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple[IntegerMatrix, IntegerMatrix, IntegerMatrix]:
    """Return ``(U, S, V)`` with ``U @ M @ V == S`` and ``U``, ``V`` unimodular.

    ``S`` is diagonal with non-negative entries ``d1 | d2 | ...``.  The pivot
    is always the nonzero entry of smallest absolute value in the active
    block, earliest in row-major order on ties.

    Examples
    ========

    >>> smith_normal_form([[2, 4], [6, 8]])[1]
    [[2, 0], [0, 4]]
    """
    A = as_matrix(M)
    r = len(A)
    c = len(A[0]) if A else 0
    U = identity(r)
    V = identity(c)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    for t in range(min(r, c)):
        while True:
            best = None
            for i in range(t, r):
                row = A[i]
                for j in range(t, c):
                    v = row[j]
                    if v and (best is None or abs(v) < best[0]):
                        best = (abs(v), i, j)
            if best is None:
                break
            _, pi, pj = best
            if pi != t:
                swap_rows(t, pi)
            if pj != t:
                swap_cols(t, pj)
            p = A[t][t]
            clean = True
            for i in range(t + 1, r):
                q = A[i][t] // p
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[t])]
                    _check_capacity(A[i])
                if A[i][t]:
                    clean = False
            for j in range(t + 1, c):
                q = A[t][j] // p
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                    for row in V:
                        row[j] -= q * row[t]
                if A[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, r) for j in range(t + 1, c) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            # pull the offending row up so the next pass finds a smaller pivot
            A[t] = [a + b for a, b in zip(A[t], A[bad])]
            U[t] = [a + b for a, b in zip(U[t], U[bad])]
        if best is None:
            break
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
    for row in V:
        _check_capacity(row)
    return U, A, V


def smith_diagonal(S: IntegerMatrix) -> list[int]:
    return [S[i][i] for i in range(min(len(S), len(S[0]) if S else 0))]


def matrix_rank(M: Sequence[Sequence[int]]) -> int:
    _, S, _ = smith_normal_form(M)
    return sum(1 for d in smith_diagonal(S) if d)


def hermite_rows(B: Sequence[Sequence[int]]) -> IntegerMatrix:
    """Row-style Hermite normal form of the lattice spanned by the rows of ``B``.

    Zero rows are dropped; pivots are positive and entries above each pivot
    are reduced into ``[0, pivot)``.
    """
    rows = [list(b) for b in B if any(b)]
    if not rows:
        return []
    k, c = len(rows), len(rows[0])
    top = 0
    for col in range(c):
        if top == k:
            break
        while True:
            nz = [i for i in range(top, k) if rows[i][col]]
            if not nz:
                break
            i0 = min(nz, key=lambda i: (abs(rows[i][col]), i))
            rows[top], rows[i0] = rows[i0], rows[top]
            p = rows[top][col]
            for i in range(top + 1, k):
                q = rows[i][col] // p
                if q:
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[top])]
            if all(rows[i][col] == 0 for i in range(top + 1, k)):
                break
        if rows[top][col] == 0:
            continue
        if rows[top][col] < 0:
            rows[top] = [-a for a in rows[top]]
        p = rows[top][col]
        for i in range(top):
            q = rows[i][col] // p
            if q:
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[top])]
        top += 1
    return rows[:top]


def integer_kernel(M: Sequence[Sequence[int]], cols: int | None = None) -> list[tuple[int, ...]]:
    """Lattice basis of ``{v in Z^cols : M v = 0}``.

    The basis is Hermite-reduced and sorted lexicographically.  ``cols`` is
    only needed when ``M`` has no rows.
    """
    A = as_matrix(M)
    c = len(A[0]) if A else (cols or 0)
    if not A:
        return [tuple(int(i == j) for j in range(c)) for i in range(c)]
    _, S, V = smith_normal_form(A)
    rank = sum(1 for d in smith_diagonal(S) if d)
    basis = [[V[i][j] for i in range(c)] for j in range(rank, c)]
    return sorted(tuple(v) for v in hermite_rows(basis))


def _diagonal_solutions(d: int, rhs: int, q: int) -> list[int]:
    """All ``w`` in ``Z_q`` with ``d w = rhs (mod q)``."""
    d %= q
    rhs %= q
    g = gcd(d, q)
    if rhs % g:
        return []
    step = q // g
    if step == 1:
        w0 = 0
    else:
        w0 = (rhs // g) * pow(d // g, -1, step) % step
    return [w0 + k * step for k in range(g)]


class ModularSolver:
    """Solves ``M v = b (mod q)`` for many ``b`` and ``q`` from one SNF of ``M``."""

    def __init__(self, M: Sequence[Sequence[int]], cols: int | None = None):
        A = as_matrix(M)
        self.rows = len(A)
        self.cols = len(A[0]) if A else (cols if cols is not None else 0)
        if A:
            self.U, self.S, self.V = smith_normal_form(A)
        else:
            self.U, self.S, self.V = [], [], identity(self.cols)
        self.diagonal = [self.S[i][i] for i in range(min(self.rows, self.cols))]

    def _choices(self, b: Sequence[int], q: int) -> list[list[int]] | None:
        if len(b) != self.rows:
            raise ValueError(f"dimension mismatch: matrix has {self.rows} rows, right-hand side has {len(b)}")
        if q < 1:
            raise ValueError("modulus must be positive")
        rhs = [sum(u * bi for u, bi in zip(row, b)) for row in self.U]
        for i in range(self.cols, self.rows):
            if rhs[i] % q:
                return None
        choices = []
        for i in range(self.cols):
            if i < self.rows:
                ch = _diagonal_solutions(self.diagonal[i], rhs[i], q)
                if not ch:
                    return None
                choices.append(ch)
            else:
                choices.append(list(range(q)))
        return choices

    def count(self, b: Sequence[int], q: int) -> int:
        choices = self._choices(b, q)
        return 0 if choices is None else prod(len(ch) for ch in choices)

    def solve(self, b: Sequence[int], q: int) -> Iterator[tuple[int, ...]]:
        choices = self._choices(b, q)
        if choices is None:
            return
        V, c = self.V, self.cols
        for w in itertools.product(*choices):
            yield tuple(sum(V[i][j] * w[j] for j in range(c)) % q for i in range(c))


def solve_mod_q(M: Sequence[Sequence[int]], b: Sequence[int], q: int, cols: int | None = None) -> Iterator[tuple[int, ...]]:
    """Enumerate every ``v`` in ``(Z_q)^cols`` with ``M v = b (mod q)``.

    Solutions are produced lazily in a fixed order.

    >>> sorted(solve_mod_q([[2]], [2], 4))
    [(1,), (3,)]
    """
    return ModularSolver(M, cols).solve(b, q)


def count_solutions_mod_q(M: Sequence[Sequence[int]], b: Sequence[int], q: int, cols: int | None = None) -> int:
    return ModularSolver(M, cols).count(b, q)


# ---------------------------------------------------------------- factoring

def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division (inputs here are small)."""
    if n < 1:
        raise ValueError("factorize needs a positive integer")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_power(q: int) -> tuple[int, int] | None:
    """``(p, k)`` with ``q == p**k`` and ``k >= 1``, or None."""
    if q < 2:
        return None
    f = factorize(q)
    if len(f) != 1:
        return None
    (p, k), = f.items()
    return p, k


def prime_powers_upto(r: int) -> list[int]:
    return [q for q in range(2, r + 1) if prime_power(q) is not None]


# ---------------------------------------------------------------- groups

@dataclass(frozen=True)
class CyclicGroup:
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("cyclic group modulus must be >= 1")

    def as_group(self) -> FiniteAbelianGroup:
        return FiniteAbelianGroup(() if self.modulus == 1 else (self.modulus,))


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Product of cyclic groups ``Z_q1 x ... x Z_qL``; ``()`` is the trivial group."""

    factors: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(int(q) for q in self.factors))
        for q in self.factors:
            if q < 2:
                raise ValueError(f"group factors must be >= 2, got {q}")

    @property
    def order(self) -> int:
        return prod(self.factors)

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self.factors)

    def reduce(self, coords: Iterable[int]) -> tuple[int, ...]:
        coords = tuple(coords)
        if len(coords) != len(self.factors):
            raise ValueError(f"element arity {len(coords)} does not match group arity {len(self.factors)}")
        return tuple(c % q for c, q in zip(coords, self.factors))

    def element(self, coords: Iterable[int]) -> GroupElement:
        return GroupElement(self, self.reduce(coords))

    def add(self, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
        return tuple((x + y) % q for x, y, q in zip(a, b, self.factors))

    def neg(self, a: Sequence[int]) -> tuple[int, ...]:
        return tuple((-x) % q for x, q in zip(a, self.factors))

    def contains(self, coords: Sequence[int]) -> bool:
        return len(coords) == len(self.factors) and all(0 <= c < q for c, q in zip(coords, self.factors))

    def elements(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(q) for q in self.factors))

    def element_order(self, a: Sequence[int]) -> int:
        o = 1
        for x, q in zip(a, self.factors):
            k = q // gcd(x, q)
            o = o * k // gcd(o, k)
        return o

    def __str__(self) -> str:
        if not self.factors:
            return "trivial"
        return " x ".join(f"Z_{q}" for q in self.factors)


@dataclass(frozen=True)
class GroupElement:
    group: FiniteAbelianGroup
    coords: tuple[int, ...]

    def __post_init__(self):
        if not self.group.contains(self.coords):
            raise ValueError(f"{self.coords} is not a reduced element of {self.group}")

    def __add__(self, other: GroupElement) -> GroupElement:
        if other.group != self.group:
            raise ValueError("elements belong to different groups")
        return GroupElement(self.group, self.group.add(self.coords, other.coords))

    def __neg__(self) -> GroupElement:
        return GroupElement(self.group, self.group.neg(self.coords))


@dataclass(frozen=True)
class Subgroup:
    group: FiniteAbelianGroup
    elements: frozenset
    invariants: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def describe(self) -> str:
        if not self.invariants:
            return "trivial"
        return " x ".join(f"Z_{d}" for d in self.invariants)


def invariant_factors(group: FiniteAbelianGroup, elements: Iterable[Sequence[int]]) -> tuple[int, ...]:
    """Invariant factors ``d1 | d2 | ...`` of a finite subgroup given by its elements.

    For each prime the p-primary exponents are read off from how many
    elements have order dividing ``p**j``.
    """
    elems = list(elements)
    order = len(elems)
    if order == 1:
        return ()
    orders = [group.element_order(e) for e in elems]
    primary: dict[int, list[int]] = {}
    for p, top in factorize(order).items():
        logs = [0]
        j = 1
        while logs[-1] < top:
            cnt = sum(1 for o in orders if (p ** j) % o == 0)
            e = 0
            while cnt > 1:
                cnt //= p
                e += 1
            logs.append(e)
            j += 1
        # number of cyclic p-factors with exponent >= j is logs[j] - logs[j-1]
        at_least = [logs[i] - logs[i - 1] for i in range(1, len(logs))]
        exps = []
        for j in range(len(at_least)):
            nxt = at_least[j + 1] if j + 1 < len(at_least) else 0
            exps.extend([j + 1] * (at_least[j] - nxt))
        primary[p] = sorted(exps, reverse=True)
    width = max(len(v) for v in primary.values())
    factors = []
    for k in range(width):
        d = 1
        for p, exps in primary.items():
            if k < len(exps):
                d *= p ** exps[k]
        factors.append(d)
    return tuple(sorted(factors, key=lambda d: d))


def subgroup_generated(G: FiniteAbelianGroup, gens: Iterable[GroupElement | Sequence[int]]) -> Subgroup:
    """Smallest subgroup of ``G`` containing ``gens``.

    >>> sorted(subgroup_generated(FiniteAbelianGroup((4,)), [(2,)]).elements)
    [(0,), (2,)]
    """
    coords = []
    for g in gens:
        if isinstance(g, GroupElement):
            if g.group != G:
                raise ValueError("generator belongs to a different group")
            c = g.coords
        else:
            c = tuple(g)
            if not G.contains(c):
                raise ValueError(f"{c} is not an element of {G}")
        coords.append(c)
    gens_ = sorted(set(coords))
    seen = {G.zero}
    frontier = [G.zero]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens_:
                s = G.add(e, g)
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        frontier = nxt
    return Subgroup(G, frozenset(seen), invariant_factors(G, seen))
