"""Three-player XOR games: data model, exact and heuristic values, structure.

Question triples live in ``Sigma x Gamma x Phi``; answers live in ``Z_m``.
In the ``n``-fold repetition every player answers a vector in ``Z_m^n`` and
the players win when every coordinate satisfies the target congruence.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from ._util import UnionFind, common_denominator
from .abelian import factorize
from .config import BudgetExceeded, default_budget

Alphabet = tuple  # ordered, distinct symbol labels
Triple = tuple[int, int, int]
AXES = ("x", "y", "z")


class GameValidationError(ValueError):
    pass


class ExactInfeasible(BudgetExceeded):
    pass


@dataclass(frozen=True)
class TripartiteDistribution:
    """Exact distribution over ``sigma x gamma x phi``.

    ``support`` holds index triples into the three alphabets; ``probs`` the
    matching probabilities.  Atoms are kept in sorted order.
    """

    sigma: Alphabet
    gamma: Alphabet
    phi: Alphabet
    support: tuple[Triple, ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(self.sigma))
        object.__setattr__(self, "gamma", tuple(self.gamma))
        object.__setattr__(self, "phi", tuple(self.phi))
        pairs = sorted(zip((tuple(int(i) for i in t) for t in self.support), (Fraction(p) for p in self.probs)))
        object.__setattr__(self, "support", tuple(t for t, _ in pairs))
        object.__setattr__(self, "probs", tuple(p for _, p in pairs))

    @classmethod
    def from_atoms(cls, sigma, gamma, phi, atoms: Mapping[tuple, Fraction] | Iterable[tuple]) -> TripartiteDistribution:
        """Build from label triples.  ``atoms`` maps ``(x, y, z)`` labels to probabilities."""
        sigma, gamma, phi = tuple(sigma), tuple(gamma), tuple(phi)
        ix = {s: i for i, s in enumerate(sigma)}
        iy = {s: i for i, s in enumerate(gamma)}
        iz = {s: i for i, s in enumerate(phi)}
        items = atoms.items() if isinstance(atoms, Mapping) else atoms
        sup, pr = [], []
        for (x, y, z), p in items:
            sup.append((ix[x], iy[y], iz[z]))
            pr.append(Fraction(p))
        return cls(sigma, gamma, phi, tuple(sup), tuple(pr))

    @classmethod
    def uniform(cls, sigma, gamma, phi, triples: Iterable[tuple]) -> TripartiteDistribution:
        triples = list(triples)
        w = Fraction(1, len(triples))
        return cls.from_atoms(sigma, gamma, phi, {t: w for t in triples})

    @property
    def alphabets(self) -> tuple[Alphabet, Alphabet, Alphabet]:
        return (self.sigma, self.gamma, self.phi)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (len(self.sigma), len(self.gamma), len(self.phi))

    def atoms(self) -> Iterable[tuple[Triple, Fraction]]:
        return zip(self.support, self.probs)

    def prob(self) -> dict[Triple, Fraction]:
        return dict(zip(self.support, self.probs))

    def label(self, t: Triple) -> tuple:
        return (self.sigma[t[0]], self.gamma[t[1]], self.phi[t[2]])

    def label_atoms(self) -> dict[tuple, Fraction]:
        return {self.label(t): p for t, p in self.atoms()}

    def marginal(self, axis: int) -> list[Fraction]:
        out = [Fraction(0)] * self.sizes[axis]
        for t, p in self.atoms():
            out[t[axis]] += p
        return out

    def pair_marginal(self, a: int, b: int) -> dict[tuple[int, int], Fraction]:
        out: dict[tuple[int, int], Fraction] = {}
        for t, p in self.atoms():
            key = (t[a], t[b])
            out[key] = out.get(key, Fraction(0)) + p
        return out

    def permuted(self, order: Sequence[int]) -> TripartiteDistribution:
        """Reorder the three coordinates: new axis ``i`` is old axis ``order[i]``."""
        al = self.alphabets
        return TripartiteDistribution(
            al[order[0]], al[order[1]], al[order[2]],
            tuple((t[order[0]], t[order[1]], t[order[2]]) for t in self.support),
            self.probs,
        )

    def pruned(self) -> tuple[TripartiteDistribution, tuple[list[int], list[int], list[int]]]:
        """Drop symbols that never occur; also return the kept old indices per axis."""
        keep = [sorted({t[a] for t in self.support}) for a in range(3)]
        remap = [{old: new for new, old in enumerate(k)} for k in keep]
        al = self.alphabets
        dist = TripartiteDistribution(
            *(tuple(al[a][i] for i in keep[a]) for a in range(3)),
            tuple(tuple(remap[a][t[a]] for a in range(3)) for t in self.support),
            self.probs,
        )
        return dist, (keep[0], keep[1], keep[2])

    def problems(self) -> list[str]:
        """All invariant violations, in a fixed order."""
        out = []
        for name, al in zip(("sigma", "gamma", "phi"), self.alphabets):
            if not al:
                out.append(f"alphabet {name} is empty")
            if len(set(al)) != len(al):
                out.append(f"alphabet {name} has repeated labels")
        if len(set(self.support)) != len(self.support):
            dup = next(t for t in self.support if self.support.count(t) > 1)
            out.append(f"duplicate support triple {self.label(dup)}")
        for t, p in self.atoms():
            if any(not 0 <= t[a] < self.sizes[a] for a in range(3)):
                out.append(f"support triple {t} out of alphabet range")
                continue
            if p <= 0:
                out.append(f"non-positive probability {p} at {self.label(t)}")
        total = sum(self.probs, Fraction(0))
        if total != 1:
            out.append(f"probability mass sums to {total}, expected 1")
        for a, name in enumerate(("sigma", "gamma", "phi")):
            used = {t[a] for t in self.support}
            for i, s in enumerate(self.alphabets[a]):
                if i not in used:
                    out.append(f"unused symbol {s!r} in {name}")
        return out


@dataclass(frozen=True)
class XorGame:
    dist: TripartiteDistribution
    modulus: int
    target: Mapping[Triple, int]

    def __post_init__(self):
        object.__setattr__(self, "target", {tuple(k): int(v) for k, v in dict(self.target).items()})

    def t(self, triple: Triple) -> int:
        return self.target[triple] % self.modulus

    def label_target(self) -> dict[tuple, int]:
        return {self.dist.label(k): v % self.modulus for k, v in self.target.items()}

    def with_target(self, target: Mapping[Triple, int], modulus: int | None = None) -> XorGame:
        return XorGame(self.dist, self.modulus if modulus is None else modulus, target)

    def __hash__(self):
        return hash((self.dist, self.modulus, tuple(sorted(self.target.items()))))


def validate(game: XorGame) -> XorGame:
    """Check every invariant; raise ``GameValidationError`` on the first violation."""
    issues = game.dist.problems()
    if game.modulus < 2:
        issues.insert(0, f"modulus must be >= 2, got {game.modulus}")
    sup = set(game.dist.support)
    for k in sorted(game.target):
        if k not in sup:
            issues.append(f"target defined on non-support triple {k}")
            break
    for k in game.dist.support:
        if k not in game.target:
            issues.append(f"target missing on support triple {game.dist.label(k)}")
            break
    if issues:
        raise GameValidationError(issues[0])
    return XorGame(game.dist, game.modulus, {k: v % game.modulus for k, v in game.target.items()})


def ghz() -> XorGame:
    """Uniform on even-parity bit triples; the target is the OR of the bits."""
    bits = ("0", "1")
    triples = [(x, y, z) for x in bits for y in bits for z in bits if (int(x) + int(y) + int(z)) % 2 == 0]
    dist = TripartiteDistribution.uniform(bits, bits, bits, triples)
    target = {t: int(any(int(c) for c in dist.label(t))) for t in dist.support}
    return XorGame(dist, 2, target)


def and_game() -> XorGame:
    """Uniform on all bit triples; the target is the AND of the bits."""
    bits = ("0", "1")
    triples = [(x, y, z) for x in bits for y in bits for z in bits]
    dist = TripartiteDistribution.uniform(bits, bits, bits, triples)
    target = {t: int(all(int(c) for c in dist.label(t))) for t in dist.support}
    return XorGame(dist, 2, target)


# ---------------------------------------------------------------- strategies

@dataclass
class Strategy:
    """Dense answer tables for the ``n``-fold game.

    Row ``i`` of ``f`` is the answer vector for the question tuple whose
    row-major flat index (first coordinate most significant) is ``i``.
    """

    n: int
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    modulus: int = 2

    def __post_init__(self):
        for name in ("f", "g", "h"):
            arr = np.asarray(getattr(self, name), dtype=np.int64) % self.modulus
            if arr.ndim != 2 or arr.shape[1] != self.n:
                raise ValueError(f"table {name} must have shape (alphabet**n, n)")
            setattr(self, name, arr)

    @classmethod
    def constant(cls, game: XorGame, n: int, value: int = 0) -> Strategy:
        a, b, c = game.dist.sizes
        m = game.modulus
        return cls(n, np.full((a**n, n), value), np.full((b**n, n), value), np.full((c**n, n), value), m)

    def tables(self):
        return (self.f, self.g, self.h)

    def product(self, other: Strategy) -> Strategy:
        """Strategy for ``n + other.n`` coordinates playing both independently."""
        if other.modulus != self.modulus:
            raise ValueError("modulus mismatch")

        def combine(A, B):
            rows = [np.concatenate([A[i], B[j]]) for i in range(len(A)) for j in range(len(B))]
            return np.array(rows, dtype=np.int64).reshape(len(A) * len(B), self.n + other.n)

        return Strategy(self.n + other.n, combine(self.f, other.f), combine(self.g, other.g), combine(self.h, other.h), self.modulus)

    def check_shape(self, game: XorGame) -> None:
        sizes = game.dist.sizes
        for name, tab, s in zip("fgh", self.tables(), sizes):
            if tab.shape != (s**self.n, self.n):
                raise ValueError(f"table {name} has shape {tab.shape}, expected {(s**self.n, self.n)}")
        if self.modulus != game.modulus:
            raise ValueError("strategy modulus does not match the game")


@dataclass
class ValueReport:
    value: Fraction | float
    witness: Strategy | None
    mode: str
    n: int = 1
    exact: Fraction | None = None  # rational value of the witness
    stats: dict = field(default_factory=dict)


class PowerSupport:
    """Support of the ``n``-fold product distribution, flattened for scoring.

    ``X``, ``Y``, ``Z`` are flat question indices, ``T`` the per-coordinate
    target vectors and ``W`` integer weights over ``denominator``.
    """

    def __init__(self, game: XorGame, n: int, budget: int | None = None):
        budget = default_budget() if budget is None else budget
        dist = game.dist
        size = len(dist.support) ** n
        if size > budget:
            raise BudgetExceeded(f"{size} support tuples exceed the budget of {budget}")
        D = common_denominator(dist.probs)
        base_w = [int(p * D) for p in dist.probs]
        sizes = dist.sizes
        m = game.modulus
        S = len(dist.support)
        sup = np.array(dist.support, dtype=np.int64).reshape(S, 3)
        tv = np.array([game.target[t] % m for t in dist.support], dtype=np.int64)
        idx = np.array(list(itertools.product(range(S), repeat=n)), dtype=np.int64).reshape(size, n)
        self.n = n
        self.modulus = m
        self.denominator = D**n
        flat = []
        for a in range(3):
            coords = sup[idx, a]
            mult = sizes[a] ** np.arange(n - 1, -1, -1, dtype=np.int64)
            flat.append(coords @ mult if n else np.zeros(size, np.int64))
        self.X, self.Y, self.Z = flat
        self.T = tv[idx]
        weights = [prod(base_w[i] for i in row) for row in idx.tolist()]
        if self.denominator < 2**62:
            self.W = np.array(weights, dtype=np.int64)
        else:
            self.W = np.array(weights, dtype=object)
        self.size = size

    def encode(self, vecs: np.ndarray) -> np.ndarray:
        """Answer vectors to integer codes, first coordinate most significant."""
        m, n = self.modulus, self.n
        mult = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
        return np.asarray(vecs, dtype=np.int64) @ mult

    def decode(self, codes) -> np.ndarray:
        m, n = self.modulus, self.n
        codes = np.asarray(codes, dtype=np.int64)
        return (codes[..., None] // m ** np.arange(n - 1, -1, -1, dtype=np.int64)) % m


def _win_numerator(ps: PowerSupport, strategy: Strategy) -> int:
    m = ps.modulus
    total = (strategy.f[ps.X] + strategy.g[ps.Y] + strategy.h[ps.Z] - ps.T) % m
    win = ~total.any(axis=1)
    return int(ps.W[win].sum()) if win.any() else 0


def win_probability(game: XorGame, strategy: Strategy, budget: int | None = None) -> Fraction:
    """Exact winning probability of ``strategy`` in the ``strategy.n``-fold game."""
    strategy.check_shape(game)
    ps = PowerSupport(game, strategy.n, budget)
    return Fraction(_win_numerator(ps, strategy), ps.denominator)


# ---------------------------------------------------------------- exact value

def _subtraction_table(m: int, n: int) -> np.ndarray:
    K = m**n
    codes = np.arange(K, dtype=np.int64)
    digits = (codes[:, None] // m ** np.arange(n - 1, -1, -1)) % m
    diff = (digits[:, None, :] - digits[None, :, :]) % m
    return diff @ (m ** np.arange(n - 1, -1, -1, dtype=np.int64))


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    step, extra = divmod(total, parts)
    out, lo = [], 0
    for i in range(parts):
        hi = lo + step + (1 if i < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def best_response_h(ps: PowerSupport, fc: np.ndarray, gc: np.ndarray, nhz: int, K: int, sub: np.ndarray) -> np.ndarray:
    """Optimal third-player codes given first/second-player codes.

    Each question tuple of the third player takes the answer with the largest
    total weight of compatible questions; ties go to the smallest code.
    """
    st = ps.encode(ps.T)
    v = sub[sub[st, fc[ps.X]], gc[ps.Y]]
    votes: dict[tuple[int, int], int] = {}
    for z, code, w in zip(ps.Z.tolist(), v.tolist(), ps.W.tolist()):
        votes[(z, code)] = votes.get((z, code), 0) + w
    h = np.zeros(nhz, dtype=np.int64)
    best: dict[int, tuple[int, int]] = {}
    for (z, code), w in sorted(votes.items()):
        if z not in best or w > best[z][0]:
            best[z] = (w, code)
    for z, (_, code) in best.items():
        h[z] = code
    return h


def exact_event_count(game: XorGame, n: int) -> int:
    a, b, _ = game.dist.sizes
    K = game.modulus**n
    return K ** (a**n) * K ** (b**n) * len(game.dist.support) ** n


def value_exact(game: XorGame, n: int = 1, budget: int | None = None, workers: int = 1,
                chunks: int | None = None, backend: str | None = None) -> ValueReport:
    """Exact value of the ``n``-fold game with an optimal strategy.

    All first- and second-player tables are enumerated; the third player
    best-responds question by question.  The table space is cut into
    contiguous chunks that may run on ``workers`` threads; the result does
    not depend on the chunking.
    """
    budget = default_budget() if budget is None else budget
    events = exact_event_count(game, n)
    if events > budget:
        raise ExactInfeasible(
            f"exact infeasible, use value_search: {events} scored events exceed the budget of {budget}"
        )
    ps = PowerSupport(game, n, budget)
    m = game.modulus
    a, b, c = game.dist.sizes
    K = m**n
    nfx, ngy, nhz = a**n, b**n, c**n
    sub = _subtraction_table(m, n)
    st = ps.encode(ps.T)
    nf = K**nfx
    parts = chunks if chunks is not None else workers
    spans = _chunks(nf, parts)

    def run(span):
        return kernels.best_pair(span[0], span[1], K, nfx, ngy, nhz, ps.X, ps.Y, ps.Z, st, ps.W, sub, backend=backend)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, spans))
    else:
        results = [run(s) for s in spans]
    best_score, best_f, best_g = max(results, key=lambda r: (r[0], -r[1], -r[2]))

    def digits(index, length):
        return np.array([(index // K**j) % K for j in range(length)], dtype=np.int64)

    fc = digits(best_f, nfx)
    gc = digits(best_g, ngy)
    hc = best_response_h(ps, fc, gc, nhz, K, sub)
    witness = Strategy(n, ps.decode(fc), ps.decode(gc), ps.decode(hc), m)
    value = Fraction(int(best_score), ps.denominator)
    check = Fraction(_win_numerator(ps, witness), ps.denominator)
    if check != value:  # pragma: no cover - would indicate a kernel bug
        raise RuntimeError(f"witness scores {check}, kernel reported {value}")
    return ValueReport(value, witness, "exact", n, value, {"events": events, "chunks": len(spans), "backend": backend or kernels.BACKEND})


# ---------------------------------------------------------------- search

def value_search(game: XorGame, n: int = 1, seed: int = 0, iterations: int = 2000,
                 initial: Strategy | None = None, budget: int | None = None) -> ValueReport:
    """Restarted hill climbing over single table-entry changes.

    Randomness comes from ``numpy.random.default_rng(seed)``, so a given seed
    always reproduces the same run.  Each iteration evaluates one neighbour;
    the neighbourhood is scanned in a shuffled order and a full scan without
    improvement triggers a restart from a fresh random strategy.
    """
    ps = PowerSupport(game, n, budget)
    m = game.modulus
    K = m**n
    sizes = [s**n for s in game.dist.sizes]
    sub = _subtraction_table(m, n)
    st = ps.encode(ps.T)
    rng = np.random.default_rng(seed)

    def score(state):
        v = sub[sub[st, state[0][ps.X]], state[1][ps.Y]]
        win = v == state[2][ps.Z]
        return int(ps.W[win].sum()) if win.any() else 0

    def fresh():
        return [rng.integers(0, K, size=s, dtype=np.int64) for s in sizes]

    if initial is not None:
        initial.check_shape(game)
        state = [ps.encode(t) for t in initial.tables()]
    else:
        state = fresh()
    cur = score(state)
    best = (cur, [t.copy() for t in state])
    offsets = [(p, e) for p in range(3) for e in range(sizes[p])]
    N = len(offsets) * (K - 1)
    restarts = 0
    if N > 0:
        order = rng.permutation(N)
        pos = 0
        stale = 0
        for _ in range(iterations):
            if stale >= N:
                state = fresh()
                cur = score(state)
                restarts += 1
                if cur > best[0]:
                    best = (cur, [t.copy() for t in state])
                order = rng.permutation(N)
                pos = stale = 0
            k = int(order[pos])
            pos = (pos + 1) % N
            (p, e), off = offsets[k // (K - 1)], k % (K - 1) + 1
            old = state[p][e]
            state[p][e] = (old + off) % K
            s = score(state)
            if s > cur:
                cur = s
                stale = 0
                if s > best[0]:
                    best = (s, [t.copy() for t in state])
            else:
                state[p][e] = old
                stale += 1
    tabs = [ps.decode(t) for t in best[1]]
    witness = Strategy(n, tabs[0], tabs[1], tabs[2], m)
    exact = Fraction(best[0], ps.denominator)
    return ValueReport(float(exact), witness, "search", n, exact, {"restarts": restarts, "iterations": iterations, "seed": seed})


# ---------------------------------------------------------------- structure

PAIRS = (("x", "y", 0, 1), ("y", "z", 1, 2), ("x", "z", 0, 2))


def is_pairwise_connected(dist: TripartiteDistribution) -> tuple[bool, dict[str, list[tuple[tuple, tuple]]]]:
    """Connectivity of the three bipartite question-pair graphs.

    Returns the verdict and, per pair (``"xy"``, ``"yz"``, ``"xz"``), the
    components as ``(left labels, right labels)``.
    """
    ok = True
    comps: dict[str, list[tuple[tuple, tuple]]] = {}
    for la, lb, a, b in PAIRS:
        na, nb = dist.sizes[a], dist.sizes[b]
        uf = UnionFind(na + nb)
        for t in dist.support:
            uf.union(t[a], na + t[b])
        parts = []
        for cls in uf.classes():
            left = tuple(dist.alphabets[a][i] for i in cls if i < na)
            right = tuple(dist.alphabets[b][i - na] for i in cls if i >= na)
            parts.append((left, right))
        comps[la + lb] = parts
        if len(parts) != 1:
            ok = False
    return ok, comps


def crt_decompose(game: XorGame) -> list[XorGame]:
    """Split a game modulo ``m`` into games modulo the prime-power factors of ``m``."""
    out = []
    for p, k in sorted(factorize(game.modulus).items()):
        q = p**k
        out.append(XorGame(game.dist, q, {t: v % q for t, v in game.target.items()}))
    return out


def crt_combine(residues: Sequence[int], moduli: Sequence[int]) -> int:
    """The unique ``t`` modulo ``prod(moduli)`` with the given residues."""
    M = prod(moduli)
    t = 0
    for r, q in zip(residues, moduli):
        Mi = M // q
        t += r * Mi * pow(Mi, -1, q)
    return t % M
