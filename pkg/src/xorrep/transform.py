"""Distribution surgeries: path tricks, symbol merging, random-restriction
splits, saturation of master images, the relaxed base-case pipeline and
projection onto the master group.

All probabilities stay exact ``Fraction`` values.  A path trick replaces
one coordinate by an alternating walk; every transform that carries a
target or a phase tensor transports it along.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ._util import UnionFind
from .config import BudgetExceeded
from .embed import Embedding, MasterEmbedding, assemble_master, default_order_bound, enumerate_embeddings, \
    has_nontrivial_z_embedding
from .abelian import prime_powers_upto
from .game import TripartiteDistribution, XorGame, is_pairwise_connected

AXES = {"x": 0, "y": 1, "z": 2}
# the tricked axis goes first, the other two keep their relative order
_FORWARD = {0: (0, 1, 2), 1: (1, 0, 2), 2: (2, 0, 1)}
_BACKWARD = {0: (0, 1, 2), 1: (1, 0, 2), 2: (1, 2, 0)}
STATE_BUDGET = 2_000_000


class AmbiguousTarget(ValueError):
    """Two walks with the same endpoints demand different transported targets."""


class PipelineError(ValueError):
    pass


def _axis(axis) -> int:
    return AXES[axis] if isinstance(axis, str) else int(axis)


def _permute_triple(t, order):
    return (t[order[0]], t[order[1]], t[order[2]])


def pair_support_full(dist: TripartiteDistribution, a: int, b: int) -> bool:
    return len(dist.pair_marginal(a, b)) == dist.sizes[a] * dist.sizes[b]


def maintain_threshold(dist: TripartiteDistribution, axis) -> int:
    """Least ``r`` with ``2^(r-1) >= min`` of the two other alphabet sizes."""
    a = _axis(axis)
    others = [dist.sizes[i] for i in range(3) if i != a]
    return 1 + max(0, math.ceil(math.log2(min(others))))


# ---------------------------------------------------------------- path trick

@dataclass
class PathTrickResult:
    """Outcome of a path trick on one axis.

    ``decode[s]`` is the walk sequence ``(x_1, x_1', ..., x_L)`` (old
    indices) behind new symbol ``s``; ``diagonal[x]`` is the new index of
    ``(x, ..., x)``.  ``target`` and ``tensor`` are present when the caller
    supplied them.
    """

    source: TripartiteDistribution
    dist: TripartiteDistribution
    axis: int
    r: int
    decode: tuple[tuple[int, ...], ...]
    diagonal: tuple[int, ...]
    target: dict | None = None
    modulus: int | None = None
    tensor: np.ndarray | None = None
    source_target: dict | None = None

    @property
    def segments(self) -> int:
        return 2 ** (self.r - 1)

    @property
    def game(self) -> XorGame:
        if self.target is None:
            raise ValueError("no target was transported")
        return XorGame(self.dist, self.modulus, self.target)

    def other_pair_full(self) -> bool:
        a, b = (i for i in range(3) if i != self.axis)
        return pair_support_full(self.dist, a, b)


def _walk(dist, L, target, modulus, tensor, budget):
    """Exact law of (sequence, first start symbol, last end symbol) for an axis-0 trick."""
    my = dist.marginal(1)
    mz = dist.marginal(2)
    from_y: dict[int, list] = {}
    from_z: dict[int, list] = {}
    for (x, y, z), p in dist.atoms():
        from_y.setdefault(y, []).append((x, z, p / my[y], (x, y, z)))
        from_z.setdefault(z, []).append((x, y, p / mz[z], (x, y, z)))
    track_t = target is not None
    track_T = tensor is not None
    # state: (seq, y1, current end) -> [prob, t-sum set, tensor accumulator]
    states: dict = {}
    for y, p in enumerate(my):
        if p:
            states[((), y, y)] = [p, {0} if track_t else None, complex(p)]
    for step in range(2 * L - 1):
        forward = step % 2 == 0
        nxt: dict = {}
        for (seq, y1, cur), (p, ts, acc) in states.items():
            for sym, other, w, triple in (from_y if forward else from_z)[cur]:
                key = (seq + (sym,), y1, other)
                q = p * w
                if track_T:
                    phase = tensor[triple] if forward else np.conj(tensor[triple])
                    contrib = acc * float(w) * phase
                else:
                    contrib = 0j
                if track_t:
                    tv = target[triple] if forward else -target[triple]
                    new_ts = {(s + tv) % modulus for s in ts}
                slot = nxt.get(key)
                if slot is None:
                    nxt[key] = [q, new_ts if track_t else None, contrib]
                else:
                    slot[0] += q
                    if track_t:
                        slot[1] |= new_ts
                    slot[2] += contrib
        if len(nxt) > budget:
            raise BudgetExceeded(f"path trick walk has {len(nxt)} states, budget {budget}")
        states = nxt
    return states


def path_trick(dist: TripartiteDistribution, axis, r: int, target: Mapping | None = None,
               modulus: int | None = None, tensor=None, budget: int = STATE_BUDGET) -> PathTrickResult:
    """Apply an ``r``-step path trick on ``axis`` (0/1/2 or "x"/"y"/"z").

    The tricked coordinate becomes the walk sequence of length
    ``2^r - 1``; the output law is computed exactly by summing over every
    generating walk.  ``target`` (index triple -> residue mod ``modulus``)
    is transported by alternating sums and must agree across all walks with
    the same endpoints; ``tensor`` (complex array indexed like the support)
    is transported by conditional expectation.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if target is not None and modulus is None:
        raise ValueError("target transport needs the modulus")
    a = _axis(axis)
    fwd, back = _FORWARD[a], _BACKWARD[a]
    work = dist.permuted(fwd)
    wt = None if target is None else {_permute_triple(t, fwd): int(v) for t, v in target.items()}
    wT = None if tensor is None else np.transpose(np.asarray(tensor), fwd)
    L = 2 ** (r - 1)
    states = _walk(work, L, wt, modulus, wT, budget)
    seqs = sorted({seq for seq, _, _ in states})
    index = {s: i for i, s in enumerate(seqs)}
    labels = tuple(tuple(work.sigma[i] for i in s) for s in seqs)
    atoms, tgt = {}, {}
    Tplus = np.zeros((len(seqs), len(work.gamma), len(work.phi)), dtype=complex) if wT is not None else None
    for (seq, y1, z), (p, ts, acc) in states.items():
        key = (index[seq], y1, z)
        atoms[key] = p
        if wt is not None:
            if len(ts) != 1:
                raise AmbiguousTarget(f"walks ending at {labels[index[seq]]}, {work.gamma[y1]}, {work.phi[z]} "
                                      f"give targets {sorted(ts)}")
            tgt[key] = next(iter(ts))
        if Tplus is not None:
            Tplus[key] = acc / float(p)
    plus = TripartiteDistribution(labels, work.gamma, work.phi, tuple(atoms), tuple(atoms.values()))
    diagonal = tuple(index[(x,) * (2 * L - 1)] for x in range(len(work.sigma)))
    result = PathTrickResult(
        source=dist,
        dist=plus.permuted(back),
        axis=a,
        r=r,
        decode=tuple(seqs),
        diagonal=diagonal,
        target=None if wt is None else {_permute_triple(t, back): v for t, v in tgt.items()},
        modulus=modulus,
        tensor=None if Tplus is None else np.transpose(Tplus, back),
        source_target=None if target is None else {tuple(t): int(v) % modulus for t, v in target.items()},
    )
    _check_path_trick(result)
    return result


def _check_path_trick(res: PathTrickResult) -> None:
    a = res.axis
    src, out = res.source, res.dist
    if sum(out.probs) != 1:
        raise AssertionError("path trick output does not sum to one")
    if is_pairwise_connected(src)[0] and not is_pairwise_connected(out)[0]:
        raise AssertionError("path trick broke pairwise connectivity")
    b, c = (i for i in range(3) if i != a)
    src_bc_connected = len(is_pairwise_connected(src)[1][_pair_key(b, c)]) == 1
    if src_bc_connected and 2 ** (res.r - 1) >= min(src.sizes[b], src.sizes[c]) and not res.other_pair_full():
        raise AssertionError("pair support not full above the maintain threshold")
    support = set(out.support)
    for t in src.support:
        lifted = list(t)
        lifted[a] = res.diagonal[t[a]]
        lifted = tuple(lifted)
        if lifted not in support:
            raise AssertionError("diagonal symbol missing from the path-trick support")
        if res.target is not None and res.target[lifted] != res.source_target[t]:
            raise AssertionError("diagonal target mismatch")


def _pair_key(a: int, b: int) -> str:
    return {(0, 1): "xy", (1, 2): "yz", (0, 2): "xz"}[(min(a, b), max(a, b))]


def transport_embedding(e: Embedding, ptr: PathTrickResult) -> Embedding:
    """Alternating-sum image of an embedding of the source distribution."""
    q = e.modulus
    maps = [list(e.alpha), list(e.beta), list(e.gamma)]
    old = maps[ptr.axis]
    new = []
    for seq in ptr.decode:
        v = sum(old[s] if i % 2 == 0 else -old[s] for i, s in enumerate(seq))
        new.append(v % q if q else v)
    maps[ptr.axis] = new
    return Embedding(ptr.dist, q, *maps)


def transport_master(me: MasterEmbedding, dist: TripartiteDistribution, step) -> MasterEmbedding:
    """Carry every component embedding through a path trick or a merge."""
    if isinstance(step, PathTrickResult):
        embs = [transport_embedding(e, step) for e in me.embeddings]
    else:
        embs = [merge_embedding(e, step) for e in me.embeddings]
    return assemble_master(dist, me.r, embs)


# ---------------------------------------------------------------- merging

@dataclass
class MergeResult:
    """``rep[x]`` is the new index of the class of old symbol ``x``;
    ``representative[x]`` is the old index chosen for that class."""

    source: TripartiteDistribution
    dist: TripartiteDistribution
    axis: int
    rep: tuple[int, ...]
    representative: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]
    target: dict | None = None
    modulus: int | None = None
    conflicts: list = field(default_factory=list)

    @property
    def game(self) -> XorGame:
        if self.target is None:
            raise ValueError("no target was transported")
        return XorGame(self.dist, self.modulus, self.target)


def merge_symbols(dist: TripartiteDistribution, axis=0, target: Mapping | None = None,
                  modulus: int | None = None) -> MergeResult:
    """Identify symbols of ``axis`` that share a question pair on the other two axes.

    The merged law is the pushforward of ``dist``.  A merged triple that
    would need two different targets is kept with the value coming from the
    representative itself (else from the smallest symbol) and listed in
    ``conflicts``.
    """
    a = _axis(axis)
    b, c = (i for i in range(3) if i != a)
    uf = UnionFind(dist.sizes[a])
    seen: dict[tuple[int, int], int] = {}
    for t in dist.support:
        key = (t[b], t[c])
        if key in seen:
            uf.union(seen[key], t[a])
        else:
            seen[key] = t[a]
    roots = sorted({uf.find(x) for x in range(dist.sizes[a])})
    new_index = {root: i for i, root in enumerate(roots)}
    rep = tuple(new_index[uf.find(x)] for x in range(dist.sizes[a]))
    representative = tuple(uf.find(x) for x in range(dist.sizes[a]))
    components = tuple(tuple(x for x in range(dist.sizes[a]) if uf.find(x) == root) for root in roots)
    atoms: dict[tuple, Fraction] = {}
    chosen: dict[tuple, tuple[int, int]] = {}
    conflicts = []
    for t, p in dist.atoms():
        nt = list(t)
        nt[a] = rep[t[a]]
        nt = tuple(nt)
        atoms[nt] = atoms.get(nt, Fraction(0)) + p
        if target is None:
            continue
        val = int(target[t]) % modulus
        # priority: the representative itself, then the smallest symbol
        prio = (0 if representative[t[a]] == t[a] else 1, t[a])
        prev = chosen.get(nt)
        if prev is not None and prev[1] != val:
            conflicts.append((nt, sorted({prev[1], val})))
        if prev is None or prio < prev[0]:
            chosen[nt] = (prio, val)
    alphabets = list(dist.alphabets)
    alphabets[a] = tuple(dist.alphabets[a][root] for root in roots)
    merged = TripartiteDistribution(*alphabets, tuple(atoms), tuple(atoms.values()))
    tgt = None if target is None else {k: v for k, (_, v) in chosen.items()}
    return MergeResult(dist, merged, a, rep, representative, components, tgt, modulus, conflicts)


def merge_embedding(e: Embedding, mr: MergeResult) -> Embedding:
    """Embeddings are constant on merge classes, so they pass to the merged alphabet."""
    maps = [list(e.alpha), list(e.beta), list(e.gamma)]
    old = maps[mr.axis]
    maps[mr.axis] = [old[comp[0]] for comp in mr.components]
    return Embedding(mr.dist, e.modulus, *maps)


# ---------------------------------------------------------------- random restriction

@dataclass
class RestrictionSplit:
    """``mu = delta * restricted + (1 - delta) * rest`` atom by atom."""

    delta: Fraction
    restricted: TripartiteDistribution
    rest: TripartiteDistribution | None

    def reconstruct(self) -> dict[tuple, Fraction]:
        out: dict[tuple, Fraction] = {}
        for t, p in self.restricted.atoms():
            out[t] = out.get(t, Fraction(0)) + self.delta * p
        if self.rest is not None:
            for t, p in self.rest.atoms():
                out[t] = out.get(t, Fraction(0)) + (1 - self.delta) * p
        return {t: p for t, p in out.items() if p}


def restriction_split(dist: TripartiteDistribution, support: Sequence[tuple], uniform: bool = False) -> RestrictionSplit:
    """Largest ``delta`` with ``dist >= delta * restricted`` for the requested support.

    ``restricted`` is ``dist`` conditioned on the requested triples, or the
    uniform law on them when ``uniform`` is set.
    """
    prob = dist.prob()
    req = sorted({tuple(int(v) for v in t) for t in support})
    if not req:
        raise ValueError("requested support is empty")
    missing = [dist.label(t) for t in req if t not in prob]
    if missing:
        raise ValueError(f"requested triples outside the support: {missing}")
    if uniform:
        sub = {t: Fraction(1, len(req)) for t in req}
    else:
        mass = sum(prob[t] for t in req)
        sub = {t: prob[t] / mass for t in req}
    delta = min(prob[t] / sub[t] for t in req)
    restricted = TripartiteDistribution(*dist.alphabets, tuple(sub), tuple(sub.values()))
    if delta == 1:
        return RestrictionSplit(delta, restricted, None)
    rest = {t: (p - delta * sub.get(t, 0)) / (1 - delta) for t, p in prob.items()}
    rest = {t: p for t, p in rest.items() if p}
    return RestrictionSplit(delta, restricted, TripartiteDistribution(*dist.alphabets, tuple(rest), tuple(rest.values())))


# ---------------------------------------------------------------- saturation

def _image_closed(image: set, modulus_tuple: tuple[int, ...]) -> bool:
    for u in image:
        for v in image:
            if tuple((a + b) % q for a, b, q in zip(u, v, modulus_tuple)) not in image:
                return False
    return True


def _ambient_moduli(me: MasterEmbedding) -> tuple[int, ...]:
    return tuple(e.modulus for e in me.embeddings if e.modulus > 1)


def is_saturated(dist: TripartiteDistribution, me: MasterEmbedding) -> bool:
    ia, ib, ic = me.images()
    mods = _ambient_moduli(me)
    return ia == ib == ic and _image_closed(ia, mods) and pair_support_full(dist, 1, 2)


@dataclass
class Carrier:
    """A distribution together with its transported target and master embedding."""

    dist: TripartiteDistribution
    target: dict | None
    modulus: int | None
    master: MasterEmbedding

    def trick(self, axis, r: int, budget: int = STATE_BUDGET) -> tuple["Carrier", PathTrickResult]:
        res = path_trick(self.dist, axis, r, self.target, self.modulus, budget=budget)
        return Carrier(res.dist, res.target, self.modulus, transport_master(self.master, res.dist, res)), res

    def full_trick(self, axis, r_min: int, budget: int = STATE_BUDGET):
        """Smallest ``r >= r_min`` whose path trick fills the other pair support."""
        r = r_min
        limit = max(r_min, maintain_threshold(self.dist, axis))
        while True:
            nxt, res = self.trick(axis, r, budget)
            if res.other_pair_full() or r >= limit:
                return nxt, res
            r += 1


@dataclass
class SaturationResult:
    dist: TripartiteDistribution
    target: dict | None
    modulus: int | None
    master: MasterEmbedding
    rounds: int
    trace: list[dict]

    @property
    def group_elements(self) -> set:
        return self.master.images()[0]


def _image_sizes(me: MasterEmbedding) -> tuple[int, int, int]:
    return tuple(len(s) for s in me.images())


def saturate(dist: TripartiteDistribution, target: Mapping | None = None, modulus: int | None = None,
             r: int | None = None, max_rounds: int = 32, budget: int = STATE_BUDGET) -> SaturationResult:
    """Grow the master images with path-trick triples until they are one subgroup.

    Each round augments every axis whose image is not yet closed: two path
    tricks on the other axes (each with the least ``r`` above ``log2`` of the
    original largest alphabet that fills the needed pair support) and an
    ``r = 2`` trick on the axis itself.  A final trick on the first axis
    fills the last pair support if needed.  ``r`` is the order bound for the
    master embedding.
    """
    if has_nontrivial_z_embedding(dist)[0]:
        raise ValueError("distribution has a nontrivial integer embedding")
    order_bound = default_order_bound(dist) if r is None else r
    embs = []
    for q in prime_powers_upto(order_bound):
        embs.extend(enumerate_embeddings(dist, q))
    cur = Carrier(dist, None if target is None else dict(target), modulus, assemble_master(dist, order_bound, embs))
    r_min = math.floor(math.log2(max(dist.sizes))) + 1
    mods = _ambient_moduli(cur.master)
    trace = [{"round": 0, "step": "start", "sizes": list(dist.sizes), "images": list(_image_sizes(cur.master))}]

    def done(c: Carrier) -> bool:
        ia, ib, ic = c.master.images()
        return ia == ib == ic and _image_closed(ia, mods)

    rounds = 0
    while not done(cur):
        if rounds >= max_rounds:
            raise RuntimeError(f"saturation did not close within {max_rounds} rounds; trace: {trace}")
        rounds += 1
        for axis in range(3):
            img = cur.master.images()[axis]
            if _image_closed(img, mods) and done(cur):
                break
            if _image_closed(img, mods):
                continue
            first, second = [(2, 1), (0, 2), (1, 0)][axis]
            cur, _ = cur.full_trick(first, r_min, budget)
            cur, _ = cur.full_trick(second, r_min, budget)
            cur, _ = cur.trick(axis, 2, budget)
            trace.append({"round": rounds, "step": f"augment {'xyz'[axis]}", "sizes": list(cur.dist.sizes),
                          "images": list(_image_sizes(cur.master))})
        if all(_image_closed(s, mods) for s in cur.master.images()) and not done(cur):
            # closed but unequal images: fill a pair support so they must coincide
            cur, _ = cur.full_trick(2, r_min, budget)
            trace.append({"round": rounds, "step": "fill xy", "sizes": list(cur.dist.sizes),
                          "images": list(_image_sizes(cur.master))})
    if not pair_support_full(cur.dist, 1, 2):
        cur, _ = cur.full_trick(0, r_min, budget)
        trace.append({"round": rounds, "step": "fill yz", "sizes": list(cur.dist.sizes),
                      "images": list(_image_sizes(cur.master))})
    return SaturationResult(cur.dist, cur.target, modulus, cur.master, rounds, trace)


# ---------------------------------------------------------------- relaxed base case

@dataclass
class BaseCaseResult:
    dist: TripartiteDistribution
    sigma_prime: tuple[int, ...]
    target: dict | None
    modulus: int | None
    tensor: np.ndarray | None
    master: MasterEmbedding | None
    steps: list
    checks: dict[str, bool]


def _yz_product(dist: TripartiteDistribution) -> bool:
    my, mz = dist.marginal(1), dist.marginal(2)
    joint = dist.pair_marginal(1, 2)
    return all(joint.get((y, z), Fraction(0)) == my[y] * mz[z]
               for y in range(len(my)) for z in range(len(mz)))


def _yz_determines_x(dist: TripartiteDistribution) -> bool:
    seen = {}
    for x, y, z in dist.support:
        if seen.setdefault((y, z), x) != x:
            return False
    return True


def build_relaxed_base_case(dist: TripartiteDistribution, target: Mapping | None = None, modulus: int | None = None,
                            tensor=None, mode: str = "effective", r_y: int | None = None, r_x: int | None = None,
                            order_bound: int | None = None, budget: int = STATE_BUDGET) -> BaseCaseResult:
    """y path trick, x path trick, merge on the first axis, uniform restriction on (y, z).

    ``mode="master"`` also carries the master embedding of the input
    through every step.  Raises ``PipelineError`` if a requested ``r`` is
    too small to fill the needed pair support.
    """
    if mode not in ("effective", "master"):
        raise ValueError(f"unknown mode {mode!r}")
    if not is_pairwise_connected(dist)[0]:
        raise ValueError("input must be pairwise connected")
    steps = []
    master = None
    if mode == "master":
        ob = default_order_bound(dist) if order_bound is None else order_bound
        embs = [e for q in prime_powers_upto(ob) for e in enumerate_embeddings(dist, q)]
        master = assemble_master(dist, ob, embs)

    r_y = maintain_threshold(dist, 1) if r_y is None else r_y
    s1 = path_trick(dist, 1, r_y, target, modulus, tensor, budget)
    if not pair_support_full(s1.dist, 0, 2):
        raise PipelineError(f"y path trick with r={r_y} leaves (x, z) support incomplete; "
                            f"required r = {maintain_threshold(dist, 1)}")
    steps.append(s1)
    r_x = maintain_threshold(s1.dist, 0) if r_x is None else r_x
    s2 = path_trick(s1.dist, 0, r_x, s1.target, modulus, s1.tensor, budget)
    if not pair_support_full(s2.dist, 1, 2):
        raise PipelineError(f"x path trick with r={r_x} leaves (y, z) support incomplete; "
                            f"required r = {maintain_threshold(s1.dist, 0)}")
    steps.append(s2)
    support = set(s2.dist.support)
    for x in range(dist.sizes[0]):
        for z in range(dist.sizes[2]):
            if not any((s2.diagonal[x], y, z) in support for y in range(s2.dist.sizes[1])):
                raise AssertionError("diagonal symbol lost a partner on the third axis")
    s3 = merge_symbols(s2.dist, 0, s2.target, modulus)
    steps.append(s3)
    tensor3 = None
    if s2.tensor is not None:
        # merged triples keep the tensor value of the representative walk
        tensor3 = np.zeros(s3.dist.sizes, dtype=complex)
        for x, y, z in s2.dist.support:
            if s3.representative[x] == x or tensor3[s3.rep[x], y, z] == 0:
                tensor3[s3.rep[x], y, z] = s2.tensor[x, y, z]
    split = restriction_split(s3.dist, s3.dist.support, uniform=True)
    steps.append(split)
    out = split.restricted
    sigma_prime = tuple(sorted({s3.rep[s2.diagonal[x]] for x in range(dist.sizes[0])}))
    if master is not None:
        master = transport_master(master, s1.dist, s1)
        master = transport_master(master, s2.dist, s2)
        master = transport_master(master, s3.dist, s3)
        master = assemble_master(out, master.r, [Embedding(out, e.modulus, e.alpha, e.beta, e.gamma)
                                                 for e in master.embeddings])
    checks = {"yz product": _yz_product(out), "yz determines x": _yz_determines_x(out)}
    if not all(checks.values()):
        raise AssertionError(f"relaxed base case structure violated: {checks}")
    target_out = None if s3.target is None else {t: s3.target[t] for t in out.support}
    return BaseCaseResult(out, sigma_prime, target_out, modulus, tensor3, master, steps, checks)


# ---------------------------------------------------------------- projection

def project_to_master(dist: TripartiteDistribution, me: MasterEmbedding) -> TripartiteDistribution:
    """Law of ``(-beta_master(y) - gamma_master(z), y, z)`` with ``(y, z)`` drawn from ``dist``.

    The first alphabet is the master group, listed as sorted element tuples.
    """
    if not is_saturated(dist, me):
        raise ValueError("unsaturated input: master images must coincide as a subgroup and (y, z) must be full")
    mods = _ambient_moduli(me)
    group = sorted(me.images()[0])
    index = {g: i for i, g in enumerate(group)}
    atoms: dict[tuple, Fraction] = {}
    for (y, z), p in dist.pair_marginal(1, 2).items():
        x = tuple((-b - c) % q for b, c, q in zip(me.beta_master[y], me.gamma_master[z], mods))
        key = (index[x], y, z)
        atoms[key] = atoms.get(key, Fraction(0)) + p
    return TripartiteDistribution(tuple(group), dist.gamma, dist.phi, tuple(atoms), tuple(atoms.values()))
