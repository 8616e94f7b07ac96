"""Abelian embeddings of question distributions and of targets.

An embedding into a group sends the three alphabets into the group so that
the three images of every supported question triple sum to zero.  All
computations reduce to linear systems over the integers or over ``Z_q``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

from .abelian import (
    FiniteAbelianGroup,
    ModularSolver,
    Subgroup,
    integer_kernel,
    prime_power,
    prime_powers_upto,
    subgroup_generated,
)
from .additive import affine_form_extract, czero_flags
from .game import TripartiteDistribution, XorGame, is_pairwise_connected

Z = 0  # modulus marker for integer-valued embeddings


class NotReducible(ValueError):
    """A reduction precondition failed; ``lemma`` names which one."""

    def __init__(self, lemma: str, detail: str):
        super().__init__(f"not reducible ({lemma}): {detail}")
        self.lemma = lemma


def constraint_matrix(dist: TripartiteDistribution) -> list[list[int]]:
    """One row per support triple over the unknowns ``alpha | beta | gamma``."""
    a, b, c = dist.sizes
    rows = []
    for x, y, z in dist.support:
        row = [0] * (a + b + c)
        row[x] = 1
        row[a + y] = 1
        row[a + b + z] = 1
        rows.append(row)
    return rows


def _split(dist: TripartiteDistribution, vec: Sequence[int]):
    a, b, _ = dist.sizes
    return tuple(vec[:a]), tuple(vec[a:a + b]), tuple(vec[a + b:])


@dataclass(frozen=True)
class Embedding:
    """Maps ``alpha, beta, gamma`` into ``Z_q`` (or into the integers when ``modulus == 0``).

    The defining congruence is checked when the object is built.
    """

    dist: TripartiteDistribution = field(repr=False, compare=False)
    modulus: int
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    gamma: tuple[int, ...]

    def __post_init__(self):
        q = self.modulus
        red = (lambda v: v % q) if q else (lambda v: v)
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, tuple(red(int(v)) for v in getattr(self, name)))
        if tuple(map(len, (self.alpha, self.beta, self.gamma))) != self.dist.sizes:
            raise ValueError("embedding maps do not match the alphabet sizes")
        for x, y, z in self.dist.support:
            s = self.alpha[x] + self.beta[y] + self.gamma[z]
            if (s % q if q else s) != 0:
                raise ValueError(f"not an embedding: triple {self.dist.label((x, y, z))} sums to {s}")

    @property
    def group(self):
        if self.modulus == Z:
            return "Z"
        return FiniteAbelianGroup(() if self.modulus == 1 else (self.modulus,))

    @property
    def normalized(self) -> bool:
        return self.alpha[0] == 0 and self.beta[0] == 0 and self.gamma[0] == 0

    @property
    def trivial(self) -> bool:
        return all(len(set(m)) <= 1 for m in (self.alpha, self.beta, self.gamma))

    def vector(self) -> tuple[int, ...]:
        return self.alpha + self.beta + self.gamma


@lru_cache(maxsize=256)
def _normalized_solver(dist: TripartiteDistribution) -> ModularSolver:
    a, b, _ = dist.sizes
    drop = {0, a, a + b}
    rows = [[v for i, v in enumerate(r) if i not in drop] for r in constraint_matrix(dist)]
    return ModularSolver(rows, cols=sum(dist.sizes) - 3)


def _lift_normalized(dist: TripartiteDistribution, free: Sequence[int]) -> tuple[int, ...]:
    a, b, c = dist.sizes
    it = iter(free)
    return tuple(0 if i in (0, a, a + b) else next(it) for i in range(a + b + c))


def enumerate_embeddings(dist: TripartiteDistribution, q: int) -> list[Embedding]:
    """All normalized embeddings into ``Z_q``, sorted by their value vectors."""
    if q < 1:
        raise ValueError("q must be positive")
    if q == 1:
        return [Embedding(dist, 1, *_split(dist, (0,) * sum(dist.sizes)))]
    solver = _normalized_solver(dist)
    vecs = sorted(_lift_normalized(dist, s) for s in solver.solve([0] * len(dist.support), q))
    return [Embedding(dist, q, *_split(dist, v)) for v in vecs]


def _is_shift(dist: TripartiteDistribution, vec: Sequence[int]) -> bool:
    return all(len(set(m)) <= 1 for m in _split(dist, vec))


def _split_witness_pair(dist: TripartiteDistribution):
    """Plus/minus one embedding built from a disconnected pair graph, if any."""
    _, comps = is_pairwise_connected(dist)
    axes = {"xy": (0, 1), "yz": (1, 2), "xz": (0, 2)}
    for key in ("xy", "yz", "xz"):
        if len(comps[key]) < 2:
            continue
        a, b = axes[key]
        left, right = comps[key][0]
        maps = [[0] * s for s in dist.sizes]
        for i, sym in enumerate(dist.alphabets[a]):
            maps[a][i] = 1 if sym in left else -1
        for i, sym in enumerate(dist.alphabets[b]):
            maps[b][i] = -1 if sym in right else 1
        return maps
    return None


def _shift_normalize(maps):
    """Shift so the first symbols of the first two axes map to zero."""
    sa, sb = maps[0][0], maps[1][0]
    return (
        tuple(v - sa for v in maps[0]),
        tuple(v - sb for v in maps[1]),
        tuple(v + sa + sb for v in maps[2]),
    )


def has_nontrivial_z_embedding(dist: TripartiteDistribution) -> tuple[bool, Embedding | None]:
    """Decide whether some integer embedding is not a constant shift.

    The integer kernel of the constraint matrix always contains the shifts;
    the answer is yes exactly when it contains anything else.  When a pair
    graph is disconnected the witness is the plus/minus one map on its
    components; otherwise it is a kernel vector.  Witnesses send the first
    symbols of the first two axes to zero, and also the first symbol of the
    third axis whenever such a nontrivial kernel vector exists.
    """
    M = constraint_matrix(dist)
    basis = integer_kernel(M, cols=sum(dist.sizes))
    extra = [v for v in basis if not _is_shift(dist, v)]
    if not extra:
        return False, None
    split = _split_witness_pair(dist)
    if split is not None:
        return True, Embedding(dist, Z, *_shift_normalize(split))
    a, b, _ = dist.sizes
    pins = []
    for col in (0, a, a + b):
        row = [0] * sum(dist.sizes)
        row[col] = 1
        pins.append(row)
    fully = [v for v in integer_kernel(M + pins) if not _is_shift(dist, v)]
    vec = fully[0] if fully else extra[0]
    return True, Embedding(dist, Z, *_shift_normalize(_split(dist, vec)))


def default_order_bound(dist: TripartiteDistribution) -> int:
    a, b, c = dist.sizes
    return 2 * (a * b * c) ** 2


@dataclass(frozen=True)
class MasterEmbedding:
    r: int
    embeddings: tuple[Embedding, ...]
    alpha_master: tuple[tuple[int, ...], ...]
    beta_master: tuple[tuple[int, ...], ...]
    gamma_master: tuple[tuple[int, ...], ...]
    ambient: FiniteAbelianGroup
    master_group: Subgroup
    partitions: dict = field(compare=False)

    def images(self):
        return (set(self.alpha_master), set(self.beta_master), set(self.gamma_master))

    def maps(self):
        return (self.alpha_master, self.beta_master, self.gamma_master)


def _partition(labels, keys) -> list[list]:
    groups: dict = {}
    for lab, k in zip(labels, keys):
        groups.setdefault(k, []).append(lab)
    return sorted(groups.values(), key=lambda g: [labels.index(s) for s in g])


def assemble_master(dist: TripartiteDistribution, r: int, embs: Sequence[Embedding]) -> MasterEmbedding:
    embs = tuple(embs)
    ambient = FiniteAbelianGroup(tuple(e.modulus for e in embs if e.modulus > 1))
    kept = [e for e in embs if e.modulus > 1]
    maps = []
    for axis in range(3):
        size = dist.sizes[axis]
        maps.append(tuple(tuple((e.alpha, e.beta, e.gamma)[axis][i] for e in kept) for i in range(size)))
    group = subgroup_generated(ambient, set(maps[0]))
    parts = {}
    for axis, name in enumerate("xyz"):
        labels = list(dist.alphabets[axis])
        parts[name] = _partition(labels, maps[axis])
    return MasterEmbedding(r, embs, maps[0], maps[1], maps[2], ambient, group, parts)


def master_embedding(dist: TripartiteDistribution, r: int | None = None) -> MasterEmbedding:
    """Collect every normalized embedding into ``Z_q`` for prime powers ``q <= r``.

    The master maps list each symbol's value under every embedding; the
    master group is generated by the first-axis master values.  Emits a
    ``UserWarning`` if the distribution has a nontrivial integer embedding.
    """
    r = default_order_bound(dist) if r is None else r
    z, _ = has_nontrivial_z_embedding(dist)
    if z:
        warnings.warn("distribution has a nontrivial integer embedding; master-embedding guarantees do not apply")
    embs = []
    for q in prime_powers_upto(r):
        embs.extend(enumerate_embeddings(dist, q))
    return assemble_master(dist, r, embs)


# ---------------------------------------------------------------- target embeddings

@dataclass(frozen=True)
class TargetEmbedding:
    """Maps with ``a(x) + b(y) + c(z) = N * t(x, y, z) (mod p^k N)`` on the support.

    ``target`` is the target these maps embed.  Normalizing the maps into
    ``[0, N)`` can change the target by ``shift``, a sum of per-player maps
    into ``Z_{p^k}``, so the shifted game is equivalent to the original.
    """

    game: XorGame = field(repr=False, compare=False)
    p: int
    k: int
    N: int
    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...]
    target: Mapping = field(default=None, compare=False)
    shift: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.target is None:
            object.__setattr__(self, "target", dict(self.game.target))
        Q = self.modulus
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, tuple(int(v) % Q for v in getattr(self, name)))
        bad = self.violations()
        if bad:
            raise ValueError(f"not a target embedding at N={self.N}: triple {bad[0]}")

    @property
    def modulus(self) -> int:
        return self.p**self.k * self.N

    def violations(self) -> list:
        Q = self.modulus
        out = []
        for t in self.game.dist.support:
            x, y, z = t
            if (self.a[x] + self.b[y] + self.c[z] - self.N * self.target[t]) % Q:
                out.append(self.game.dist.label(t))
        return out

    @property
    def is_normalized(self) -> bool:
        return all(0 <= v < self.N for m in (self.a, self.b, self.c) for v in m)

    def normalized(self) -> TargetEmbedding:
        N, pk = self.N, self.p**self.k
        maps = [tuple(v % N for v in m) for m in (self.a, self.b, self.c)]
        shift = tuple(tuple((v - w) // N % pk for v, w in zip(m, r)) for m, r in zip((self.a, self.b, self.c), maps))
        target = {}
        for t in self.game.dist.support:
            x, y, z = t
            s = maps[0][x] + maps[1][y] + maps[2][z]
            target[t] = (s // N) % pk
        return TargetEmbedding(self.game, self.p, self.k, N, *maps, target=target, shift=shift)


def _target_solver(dist: TripartiteDistribution) -> ModularSolver:
    a, b, _ = dist.sizes
    drop = {0, a}
    rows = [[v for i, v in enumerate(r) if i not in drop] for r in constraint_matrix(dist)]
    return ModularSolver(rows, cols=sum(dist.sizes) - 2)


def _lift_ab(dist: TripartiteDistribution, free: Sequence[int]) -> tuple[int, ...]:
    a, b, c = dist.sizes
    it = iter(free)
    return tuple(0 if i in (0, a) else next(it) for i in range(a + b + c))


def minimal_N(game: XorGame, j_max: int = 6, candidates: int = 4096) -> TargetEmbedding | None:
    """Least ``N = p^j`` (``j <= j_max``) admitting a target embedding, normalized.

    The first symbols of the first two axes are pinned to zero, which loses
    nothing because shifts move freely between the three maps.  Among the
    first ``candidates`` solutions the one with the smallest normalized
    value vector is returned.
    """
    pk = prime_power(game.modulus)
    if pk is None:
        raise ValueError(f"modulus {game.modulus} is not a prime power; split it with crt_decompose first")
    p, k = pk
    dist = game.dist
    solver = _target_solver(dist)
    for j in range(j_max + 1):
        N = p**j
        Q = p**k * N
        rhs = [N * game.target[t] for t in dist.support]
        best = None
        for i, sol in enumerate(solver.solve(rhs, Q)):
            if i >= candidates:
                break
            vec = _lift_ab(dist, sol)
            key = (tuple(v % N for v in vec), vec)
            if best is None or key < best:
                best = key
        if best is None:
            continue
        te = TargetEmbedding(game, p, k, N, *_split(dist, best[1]))
        return te.normalized()
    return None


def certify_minimal(te: TargetEmbedding) -> bool:
    """True when the solver finds no target embedding at ``N / p``."""
    if te.N == 1:
        return True
    dist = te.game.dist
    N = te.N // te.p
    rhs = [N * te.target[t] for t in dist.support]
    return _target_solver(dist).count(rhs, te.p**te.k * N) == 0


def _element_of(label, group: FiniteAbelianGroup) -> tuple[int, ...]:
    if isinstance(label, tuple):
        coords = tuple(int(v) for v in label)
    else:
        text = str(label).strip().strip("()")
        coords = tuple(int(v) for v in text.split(",") if v.strip())
    return group.reduce(coords)


def infer_cyclic_group(dist: TripartiteDistribution) -> FiniteAbelianGroup:
    """``Z_q`` read off integer labels, taking ``q`` as one more than the largest label."""
    values = []
    for al in dist.alphabets:
        for s in al:
            try:
                values.append(int(s))
            except (TypeError, ValueError):
                raise ValueError(f"label {s!r} is not an integer; pass the group explicitly") from None
    q = max(values) + 1
    return FiniteAbelianGroup((max(q, 2),))


def reduce_embedding_N(te: TargetEmbedding, p: int | None = None, group: FiniteAbelianGroup | None = None) -> TargetEmbedding:
    """Divide ``N`` by ``p`` when the mod-``p`` parts of the maps are matching affine forms.

    Symbols are read as elements of ``group`` (inferred as a cyclic group
    from integer labels when omitted).  Raises ``NotReducible`` naming the
    failing step: ``ahom`` (a map is not affine), ``coef`` (no matching
    coefficients), ``czero`` (a coefficient that must vanish does not) or
    ``reduceN`` (the reduced maps fail the congruence).
    """
    p = te.p if p is None else p
    if p != te.p:
        raise NotReducible("reduceN", f"prime {p} does not match the embedding prime {te.p}")
    if te.N % p or te.N == 1:
        raise NotReducible("reduceN", f"N={te.N} is not divisible by {p}")
    dist = te.game.dist
    group = infer_cyclic_group(dist) if group is None else group
    j = 0
    while p ** (j + 1) <= te.N:
        j += 1
    pts = [[_element_of(s, group) for s in al] for al in dist.alphabets]
    maps = (te.a, te.b, te.c)
    for name, m, dom in zip("abc", maps, pts):
        vals = {}
        for x, v in zip(dom, m):
            vals[x] = v % p
        if affine_form_extract(vals, group, p) is None:
            raise NotReducible("ahom", f"map {name} mod {p} is not affine")
    L = len(group.factors)
    req = czero_flags(group, p, te.k, j)

    def joint(with_czero: bool):
        # unknowns: c, d, e, w_1..w_L
        rows, rhs = [], []
        for slot, (m, dom) in enumerate(zip(maps, pts)):
            for x, v in zip(dom, m):
                row = [0, 0, 0] + list(x)
                row[slot] = 1
                rows.append(row)
                rhs.append(v % p)
        rows.append([1, 1, 1] + [0] * L)
        rhs.append(0)
        if with_czero:
            for i, r in enumerate(req):
                if r:
                    row = [0] * (3 + L)
                    row[3 + i] = 1
                    rows.append(row)
                    rhs.append(0)
        return next(iter(ModularSolver(rows, cols=3 + L).solve(rhs, p)), None)

    if joint(False) is None:
        raise NotReducible("coef", "no matching coefficients with constants summing to 0 mod p")
    sol = joint(True)
    if sol is None:
        raise NotReducible("czero", "a coefficient forced to vanish is nonzero")
    c0, d0 = sol[0], sol[1]
    e0 = -c0 - d0
    w = sol[3:]
    newQ = te.modulus // p
    out = []
    for const, m, dom in zip((c0, d0, e0), maps, pts):
        vals = []
        for x, v in zip(dom, m):
            num = v - const - sum(wi * xi for wi, xi in zip(w, x))
            if num % p:  # pragma: no cover - guaranteed by the affine solve
                raise NotReducible("ahom", "affine part does not cancel mod p")
            vals.append((num // p) % newQ)
        out.append(tuple(vals))
    try:
        return TargetEmbedding(te.game, p, te.k, te.N // p, *out, target=te.target)
    except ValueError as exc:
        raise NotReducible("reduceN", str(exc)) from None
