"""Exact checkers for additive structure on small abelian groups."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .abelian import FiniteAbelianGroup, prime_power, solve_mod_q
from .config import BudgetExceeded

FREIMAN_BUDGET = 10**8


@dataclass(frozen=True)
class FunctionOnGroupBox:
    """A map from a subset of a finite abelian group into ``Z_q``."""

    group: FiniteAbelianGroup
    values: Mapping[tuple, int]
    q: int

    def __post_init__(self):
        vals = {}
        for x, v in dict(self.values).items():
            x = tuple(x)
            if not self.group.contains(x):
                raise ValueError(f"{x} is not an element of {self.group}")
            vals[x] = int(v) % self.q
        object.__setattr__(self, "values", vals)

    @property
    def subset(self) -> list[tuple]:
        return sorted(self.values)


def freiman_check(f: FunctionOnGroupBox, s: int, budget: int = FREIMAN_BUDGET):
    """Is ``f`` a Freiman homomorphism of order ``s``?

    Returns ``(True, None)`` or ``(False, (u, v))`` where ``u`` and ``v`` are
    ``s``-tuples with the same element sum but different image sums.

    Sum classes are grown one summand at a time.  This is exact because a
    failure at order ``k`` persists at every higher order (pad both tuples
    with a common element).
    """
    if s < 1:
        raise ValueError("order must be >= 1")
    A = f.subset
    half = -(-s // 2)
    if len(A) ** (2 * half) > budget:
        raise BudgetExceeded(f"|A'|^{2 * half} = {len(A) ** (2 * half)} exceeds the budget of {budget}")
    G, q = f.group, f.q
    classes: dict[tuple, tuple[int, tuple]] = {G.zero: (0, ())}
    for level in range(1, s + 1):
        nxt: dict[tuple, tuple[int, tuple]] = {}
        for sigma in sorted(classes):
            img, rep = classes[sigma]
            for a in A:
                tau = G.add(sigma, a)
                val = (img + f.values[a]) % q
                tup = rep + (a,)
                seen = nxt.get(tau)
                if seen is None:
                    nxt[tau] = (val, tup)
                elif seen[0] != val:
                    pad = (A[0],) * (s - level)
                    return False, (seen[1] + pad, tup + pad)
        classes = nxt
    return True, None


@dataclass(frozen=True)
class AffineForm:
    """``x -> constant + sum(coeffs[i] * x[i]) (mod p)``.

    ``czero_required[i]`` says whether coefficient ``i`` is forced to vanish
    (factor of a different prime, or too small a power of ``p``);
    ``czero_ok`` says whether all forced coefficients are zero.
    """

    constant: int
    coeffs: tuple[int, ...]
    p: int
    czero_required: tuple[bool, ...] | None = None
    czero_ok: bool | None = None

    def __call__(self, x: Sequence[int]) -> int:
        return (self.constant + sum(c * v for c, v in zip(self.coeffs, x))) % self.p


def czero_flags(group: FiniteAbelianGroup, p: int, k: int, j: int) -> tuple[bool, ...]:
    flags = []
    for q in group.factors:
        pp = prime_power(q)
        flags.append(pp is None or pp[0] != p or pp[1] < k + j)
    return tuple(flags)


def affine_form_extract(values: Mapping[tuple, int], group: FiniteAbelianGroup, p: int,
                        k: int | None = None, j: int | None = None) -> AffineForm | None:
    """Affine form mod ``p`` agreeing with ``values`` on its domain, or None.

    Coordinates enter as their integer representatives in ``[0, q_i)``.
    When ``k`` and ``j`` are given the vanishing flags are filled in.
    """
    dom = sorted(tuple(x) for x in values)
    rows = [[1, *x] for x in dom]
    rhs = [int(values[x]) % p for x in dom]
    sol = next(iter(solve_mod_q(rows, rhs, p, cols=1 + len(group.factors))), None)
    if sol is None:
        return None
    form = AffineForm(sol[0], tuple(sol[1:]), p)
    if k is not None and j is not None:
        req = czero_flags(group, p, k, j)
        ok = all(not r or c == 0 for r, c in zip(req, form.coeffs))
        form = AffineForm(form.constant, form.coeffs, p, req, ok)
    return form


def coefficient_matching_check(fa: AffineForm | None, fb: AffineForm | None, fc: AffineForm | None, p: int) -> bool:
    """Constants sum to zero mod ``p`` and the three coefficient vectors agree."""
    if fa is None or fb is None or fc is None:
        raise ValueError("coefficient matching needs three affine forms")
    if (fa.constant + fb.constant + fc.constant) % p:
        return False
    return all(x % p == y % p == z % p for x, y, z in zip(fa.coeffs, fb.coeffs, fc.coeffs))
