import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import distributions, random_distribution
from xorrep.embed import Embedding, TargetEmbedding, enumerate_embeddings, has_nontrivial_z_embedding, master_embedding
from xorrep.game import (Strategy, TripartiteDistribution, XorGame, and_game, ghz, is_pairwise_connected,
                         value_exact, win_probability)
from xorrep.transform import (AmbiguousTarget, PipelineError, build_relaxed_base_case, maintain_threshold,
                              merge_embedding, merge_symbols, pair_support_full, path_trick, project_to_master,
                              restriction_split, saturate, transport_embedding)


def three_symbol_instance():
    syms = ("0", "1", "2")
    trip = [(x, y, z) for x in syms for y in syms for z in syms if int(x) + int(y) + int(z) in (0, 4)]
    return TripartiteDistribution.uniform(syms, syms, syms, trip)


OTHER = {0: (1, 2), 1: (0, 2), 2: (0, 1)}


# ---------------------------------------------------------------- path trick

@settings(max_examples=40)
@given(distributions(max_size=3), st.integers(0, 2))
def test_maintain_threshold_fills_pair(dist, axis):
    r = maintain_threshold(dist, axis)
    assert 2 ** (r - 1) >= min(dist.sizes[i] for i in OTHER[axis])
    res = path_trick(dist, axis, r)
    b, c = OTHER[axis]
    connected = len(is_pairwise_connected(dist)[1][{(0, 1): "xy", (1, 2): "yz", (0, 2): "xz"}[(b, c)]]) == 1
    if connected:
        assert pair_support_full(res.dist, b, c)
        assert len(res.dist.pair_marginal(b, c)) == dist.sizes[b] * dist.sizes[c]
    if is_pairwise_connected(dist)[0]:
        assert is_pairwise_connected(res.dist)[0]
    assert sum(res.dist.probs) == 1


@settings(max_examples=40)
@given(distributions(max_size=3), st.integers(1, 2))
def test_walk_law_matches_recursion(dist, r):
    res = path_trick(dist, "x", r)
    assert res.dist.label_atoms() == oracles.path_walk_law(dist, r)


@pytest.mark.parametrize("axis", [0, 1, 2])
def test_single_step_is_isomorphic(axis):
    g = ghz()
    res = path_trick(g.dist, axis, 1, g.target, 2)
    relabel = {}
    for t, p in res.dist.label_atoms().items():
        t = list(t)
        t[axis] = t[axis][0]
        relabel[tuple(t)] = p
    assert relabel == g.dist.label_atoms()
    assert {tuple(res.decode[v][0] if i == axis else v for i, v in enumerate(t)): val
            for t, val in res.target.items()} == g.target


@pytest.mark.parametrize("axis", [0, 1, 2])
def test_ghz_two_steps_fill_pair_and_keep_diagonal_target(axis):
    g = ghz()
    res = path_trick(g.dist, axis, 2, g.target, 2)
    assert res.other_pair_full()
    for t in g.dist.support:
        lifted = list(t)
        lifted[axis] = res.diagonal[t[axis]]
        assert res.target[tuple(lifted)] == g.target[t]
    # the transported target is the one the scaled embedding predicts
    te = TargetEmbedding(g, 2, 1, 2, (0, 1), (0, 1), (0, 1))
    maps = [list(te.a), list(te.b), list(te.c)]
    seqs = res.decode
    maps[axis] = [sum(maps[axis][s] * (1 if i % 2 == 0 else -1) for i, s in enumerate(seq)) for seq in seqs]
    for (x, y, z), v in res.target.items():
        assert (maps[0][x] + maps[1][y] + maps[2][z] - 2 * v) % 4 == 0


def test_ambiguous_target_detected():
    g = and_game()
    with pytest.raises(AmbiguousTarget):
        path_trick(g.dist, "x", 2, g.target, 2)


def test_tensor_transport_keeps_diagonal():
    g = ghz()
    T = np.zeros((2, 2, 2), dtype=complex)
    for t in g.dist.support:
        T[t] = (-1) ** g.target[t]
    res = path_trick(g.dist, "x", 2, tensor=T)
    for t in g.dist.support:
        assert res.tensor[(res.diagonal[t[0]], t[1], t[2])] == pytest.approx(T[t])
    assert np.all(np.abs(res.tensor) <= 1 + 1e-12)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
def test_tensor_transport_matches_recursion(seed, r):
    rng = np.random.default_rng(seed)
    dist = random_distribution(rng, 3)
    T = np.zeros(dist.sizes, dtype=complex)
    for t in dist.support:
        T[t] = rng.random() * np.exp(2j * np.pi * rng.random())
    res = path_trick(dist, "x", r, tensor=T)
    expect = oracles.path_walk_tensor(dist, r, T)
    index = {seq: i for i, seq in enumerate(res.decode)}
    assert len(expect) == len(res.dist.support)
    for (seq, y, z), v in expect.items():
        assert abs(res.tensor[index[seq], y, z] - v) <= 1e-9


# ---------------------------------------------------------------- transport

def test_transport_examples():
    g = ghz()
    res = path_trick(g.dist, "x", 2, g.target, 2)
    zero = Embedding(g.dist, 2, (0, 0), (0, 0), (0, 0))
    assert transport_embedding(zero, res).vector() == (0,) * sum(res.dist.sizes)
    shift = Embedding(g.dist, 3, (1, 1), (1, 1), (1, 1))
    moved = transport_embedding(shift, res)
    assert set(moved.alpha) == {1} and moved.beta == (1, 1) and moved.gamma == (1, 1)
    ident = Embedding(g.dist, 2, (0, 1), (0, 1), (0, 1))
    moved = transport_embedding(ident, res)
    for s, seq in enumerate(res.decode):
        assert moved.alpha[s] == sum(seq) % 2


@settings(max_examples=30)
@given(distributions(max_size=2), st.integers(0, 2), st.integers(0, 2), st.sampled_from([2, 3, 4]))
def test_transport_composes(dist, first, second, q):
    p1 = path_trick(dist, first, 2)
    p2 = path_trick(p1.dist, second, 1 if first == second else 2)
    transported = {e.vector() for e in enumerate_embeddings(p2.dist, q)}
    for e in enumerate_embeddings(dist, q):
        twice = transport_embedding(transport_embedding(e, p1), p2)
        assert twice.vector() in transported
        maps = [list(e.alpha), list(e.beta), list(e.gamma)]
        maps[first] = [sum(maps[first][s] * (-1) ** i for i, s in enumerate(seq)) % q for seq in p1.decode]
        maps[second] = [sum(maps[second][s] * (-1) ** i for i, s in enumerate(seq)) % q for seq in p2.decode]
        assert twice.vector() == tuple(itertools.chain(*maps))


# ---------------------------------------------------------------- merging

def _components_by_search(dist, axis):
    b, c = OTHER[axis]
    by_pair = {}
    for t in dist.support:
        by_pair.setdefault((t[b], t[c]), set()).add(t[axis])
    comps = [{x} for x in range(dist.sizes[axis])]
    changed = True
    while changed:
        changed = False
        for group in by_pair.values():
            hit = [cset for cset in comps if cset & group]
            if len(hit) > 1:
                merged = set().union(*hit)
                comps = [cset for cset in comps if cset not in hit] + [merged]
                changed = True
    return sorted(tuple(sorted(cset)) for cset in comps)


@given(distributions(max_size=3), st.integers(0, 2))
def test_merge_structure(dist, axis):
    mr = merge_symbols(dist, axis)
    assert sorted(mr.components) == _components_by_search(dist, axis)
    assert all(mr.representative[r] == r for r in mr.representative)
    expected = {}
    for t, p in dist.atoms():
        nt = list(t)
        nt[axis] = mr.rep[t[axis]]
        expected[tuple(nt)] = expected.get(tuple(nt), 0) + p
    assert mr.dist.prob() == expected
    for q in (2, 3):
        for e in enumerate_embeddings(dist, q):
            merge_embedding(e, mr)  # validates on construction


def test_merge_examples():
    g = ghz()
    mr = merge_symbols(g.dist, 0, g.target, 2)
    assert mr.components == ((0,), (1,)) and mr.dist == g.dist and not mr.conflicts
    dup = TripartiteDistribution.uniform("abc", "pq", "uv",
                                         [("a", "p", "u"), ("b", "p", "u"), ("a", "q", "v"), ("b", "q", "v"), ("c", "q", "u")])
    mr = merge_symbols(dup, 0)
    assert mr.components == ((0, 1), (2,))
    assert merge_symbols(and_game().dist, 0).components == ((0, 1),)


def test_merge_reports_conflicts():
    g = and_game()
    mr = merge_symbols(g.dist, 0, g.target, 2)
    assert mr.conflicts and all(len(vals) == 2 for _, vals in mr.conflicts)
    assert (0, 1, 1) in mr.target and mr.target[(0, 1, 1)] == g.target[(0, 1, 1)]


# ---------------------------------------------------------------- restriction

@given(distributions(max_size=3), st.data(), st.booleans())
def test_restriction_reconstructs(dist, data, uniform):
    k = data.draw(st.integers(1, len(dist.support)))
    chosen = data.draw(st.lists(st.sampled_from(dist.support), min_size=1, max_size=k, unique=True))
    split = restriction_split(dist, chosen, uniform=uniform)
    assert split.reconstruct() == dist.prob()
    assert 0 < split.delta <= 1
    if split.rest is not None:
        # delta is maximal: some requested atom is used up
        assert any(t not in split.rest.prob() for t in chosen)
        assert all(p > 0 for p in split.rest.probs)


def test_restriction_examples():
    g = ghz()
    whole = restriction_split(g.dist, g.dist.support)
    assert whole.delta == 1 and whole.rest is None
    half = restriction_split(g.dist, g.dist.support[:2], uniform=True)
    assert half.delta == Fraction(1, 2)
    with pytest.raises(ValueError, match="outside the support"):
        restriction_split(g.dist, [(1, 1, 1)])


# ---------------------------------------------------------------- saturation and projection

def test_saturate_ghz_zero_rounds():
    g = ghz()
    sat = saturate(g.dist, g.target, 2, r=8)
    assert sat.rounds == 0 and sat.dist == g.dist
    ia, ib, ic = sat.master.images()
    assert ia == ib == ic and len(ia) == 2


def test_saturate_full_product_is_trivial():
    sat = saturate(and_game().dist, r=8)
    assert sat.rounds == 0 and len(sat.group_elements) == 1


def test_saturate_grows_images_to_subgroup():
    sat = saturate(three_symbol_instance(), r=8)
    sizes = [row["images"][0] for row in sat.trace]
    assert sizes[0] == 3 and sizes[-1] == 4
    assert sizes == sorted(sizes)
    ia, ib, ic = sat.master.images()
    assert ia == ib == ic
    assert pair_support_full(sat.dist, 1, 2)
    nu = project_to_master(sat.dist, sat.master)
    assert nu.pair_marginal(1, 2) == sat.dist.pair_marginal(1, 2)


def test_saturate_round_cap():
    with pytest.raises(RuntimeError, match="did not close"):
        saturate(three_symbol_instance(), r=8, max_rounds=0)


def test_saturate_refuses_integer_embeddable():
    d = TripartiteDistribution.uniform("ab", "ab", "ab", [("a", "a", "a"), ("b", "b", "b")])
    with pytest.raises(ValueError, match="integer embedding"):
        saturate(d)


def test_project_ghz():
    g = ghz()
    me = master_embedding(g.dist, r=8)
    nu = project_to_master(g.dist, me)
    elems = sorted(me.images()[0])
    zero, one = elems
    assert nu.sigma == (zero, one)
    as_bits = {(int(nu.sigma[x] == one), y, z): p for (x, y, z), p in nu.atoms()}
    assert as_bits == {t: Fraction(1, 4) for t in [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]}


def test_project_trivial_group():
    d = and_game().dist
    nu = project_to_master(d, master_embedding(d, r=8))
    assert nu.sizes[0] == 1 and nu.pair_marginal(1, 2) == d.pair_marginal(1, 2)


def test_project_refuses_unsaturated():
    d = three_symbol_instance()
    with pytest.raises(ValueError, match="unsaturated"):
        project_to_master(d, master_embedding(d, r=8))


# ---------------------------------------------------------------- relaxed base case

@pytest.mark.parametrize("mode", ["effective", "master"])
def test_base_case_on_ghz(mode):
    g = ghz()
    out = build_relaxed_base_case(g.dist, g.target, 2, mode=mode, order_bound=8)
    assert out.checks == {"yz product": True, "yz determines x": True}
    assert len(out.sigma_prime) == 2
    seen = {}
    for x, y, z in out.dist.support:
        assert seen.setdefault((y, z), x) == x
    if mode == "master":
        for e in out.master.embeddings:
            assert all((e.alpha[x] + e.beta[y] + e.gamma[z]) % e.modulus == 0 for x, y, z in out.dist.support)


@pytest.mark.parametrize("r_y, r_x", [(1, None), (2, 1)])
def test_base_case_rejects_small_r(r_y, r_x):
    with pytest.raises(PipelineError, match="required r = 3"):
        build_relaxed_base_case(three_symbol_instance(), r_y=r_y, r_x=r_x)


def test_base_case_requires_connectivity():
    d = TripartiteDistribution.uniform("ab", "ab", "ab", [("a", "a", "a"), ("b", "b", "b")])
    with pytest.raises(ValueError, match="connected"):
        build_relaxed_base_case(d)


# ---------------------------------------------------------------- perfect-strategy pullback

def _perfect_game(rng, dist, m):
    f0, g0, h0 = (rng.integers(0, m, size=s) for s in dist.sizes)
    return XorGame(dist, m, {t: int(f0[t[0]] + g0[t[1]] + h0[t[2]]) % m for t in dist.support})


def _assert_pullback(src_game, out_game, lift):
    """``lift[axis][old symbol]`` is the output symbol standing for it."""
    rep = value_exact(out_game, 1)
    assert rep.value == 1
    tabs = [t[:, 0] for t in rep.witness.tables()]
    pulled = [tabs[a][list(lift[a])].reshape(-1, 1) for a in range(3)]
    strat = Strategy(1, *pulled, src_game.modulus)
    assert win_probability(src_game, strat) == 1


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2))
def test_perfect_strategies_pull_back(seed, axis):
    rng = np.random.default_rng(seed)
    dist = random_distribution(rng, 2)
    game = _perfect_game(rng, dist, int(rng.integers(2, 4)))
    res = path_trick(dist, axis, 2, game.target, game.modulus)
    lift = [list(range(s)) for s in dist.sizes]
    lift[axis] = list(res.diagonal)
    _assert_pullback(game, res.game, lift)
    mr = merge_symbols(dist, axis, game.target, game.modulus)
    lift = [list(range(s)) for s in dist.sizes]
    lift[axis] = list(mr.rep)
    if not mr.conflicts:
        _assert_pullback(game, mr.game, lift)
    else:
        # a conflict rules out every perfect strategy that is constant on merge classes
        m = game.modulus
        for f in itertools.product(range(m), repeat=len(mr.components)):
            tabs = [None, None, None]
            for g_tab in itertools.product(range(m), repeat=dist.sizes[OTHER[axis][0]]):
                for h_tab in itertools.product(range(m), repeat=dist.sizes[OTHER[axis][1]]):
                    tabs[axis] = [f[mr.rep[x]] for x in range(dist.sizes[axis])]
                    tabs[OTHER[axis][0]], tabs[OTHER[axis][1]] = g_tab, h_tab
                    assert any((tabs[0][x] + tabs[1][y] + tabs[2][z] - game.target[(x, y, z)]) % m
                               for x, y, z in dist.support)
