"""End-to-end acceptance checks.  Each test appends one PASS/FAIL line that
the terminal summary prints; wall-clock limits are asserted too."""
from __future__ import annotations

import contextlib
import json
import math
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

import oracles
from conftest import ACCEPTANCE_LINES, random_distribution, random_game
from xorrep.analytic import (apply_noise, apply_noise_direct, arithmetize_win_probability, build_decomposition_basis,
                             decompose, norm2, svd_decompose, two_player_correlation, two_player_spectral_norm)
from xorrep.cheby import audit, noise_mix_coefficients, schur_check
from xorrep.embed import (Embedding, TargetEmbedding, certify_minimal, enumerate_embeddings,
                          has_nontrivial_z_embedding, minimal_N, reduce_embedding_N, NotReducible)
from xorrep.abelian import FiniteAbelianGroup
from xorrep.additive import FunctionOnGroupBox, affine_form_extract, freiman_check
from xorrep.game import Strategy, TripartiteDistribution, ghz, is_pairwise_connected, value_exact, win_probability
from xorrep.transform import (path_trick, pair_support_full, project_to_master, restriction_split, saturate,
                              transport_embedding)

ROOT = Path(__file__).resolve().parents[1]


@contextlib.contextmanager
def criterion(index: int, title: str, limit: float):
    t0 = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"
    except BaseException as exc:
        elapsed = time.perf_counter() - t0
        ACCEPTANCE_LINES.append(f"[{index:02d}] FAIL {title} ({elapsed:.2f} s / {limit:g} s): {exc}")
        raise
    ACCEPTANCE_LINES.append(f"[{index:02d}] PASS {title} ({elapsed:.2f} s / {limit:g} s)")


def test_ghz_single_shot_value():
    with criterion(1, "GHZ single-shot value is exactly 3/4", 1):
        rep = value_exact(ghz(), 1)
        assert rep.value == Fraction(3, 4)
        assert win_probability(ghz(), rep.witness) == Fraction(3, 4)


def test_ghz_two_fold_value():
    with criterion(2, "GHZ two-fold value is exact, within [9/16, 3/4], and matches slow oracles", 300):
        g = ghz()
        v2 = value_exact(g, 2).value
        assert isinstance(v2, Fraction)
        assert Fraction(9, 16) <= v2 <= Fraction(3, 4)
        lower = oracles.brute_value(g, 2, same_fg=True)
        assert lower <= v2
        assert oracles.brute_value(g, 2) == v2
        assert v2 == Fraction(5, 8)


def test_arithmetization_matches_direct_count():
    with criterion(3, "arithmetized win probability equals the direct count (100+ instances, 1e-9)", 60):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(120):
            game = random_game(rng, 3, 4)
            n = int(rng.integers(1, 3))
            sizes = [s**n for s in game.dist.sizes]
            tabs = [rng.integers(0, game.modulus, size=(s, n)) for s in sizes]
            strat = Strategy(n, *tabs, game.modulus)
            a = arithmetize_win_probability(game, strat)
            w = win_probability(game, strat)
            worst = max(worst, abs(a - float(w)), abs(a.imag))
        assert worst <= 1e-9, worst


def test_ghz_minimal_modulus():
    with criterion(4, "GHZ minimal N = 2 with identity maps into Z_4, certified at N = 1", 1):
        te = minimal_N(ghz())
        assert te is not None and te.N == 2 and te.modulus == 4
        assert te.a == te.b == te.c == (0, 1)
        assert certify_minimal(te)


def test_two_player_tensorization():
    with criterion(5, "AND spectral norm 1/sqrt2 and |corr| <= sigma^3 on 50 instances", 60):
        P = np.full((2, 2), 0.25)
        T = np.array([[1.0, 1.0], [1.0, -1.0]])
        sig = two_player_spectral_norm(P, T)
        assert abs(sig - 1 / math.sqrt(2)) <= 1e-10
        rng = np.random.default_rng(5)
        for _ in range(50):
            a, b = (int(v) for v in rng.integers(1, 4, size=2))
            P = rng.random((a, b)) * (rng.random((a, b)) < 0.8)
            P[np.arange(a), rng.integers(0, b, size=a)] += 0.1
            P[rng.integers(0, a, size=b), np.arange(b)] += 0.1
            P /= P.sum()
            T = np.exp(2j * np.pi * rng.integers(0, 4, size=(a, b)) / 4)
            s = two_player_spectral_norm(P, T)
            F = rng.random((a,) * 3) * np.exp(2j * np.pi * rng.random((a,) * 3))
            G = rng.random((b,) * 3) * np.exp(2j * np.pi * rng.random((b,) * 3))
            assert abs(two_player_correlation(F, G, P, T, 3)) <= s**3 + 1e-9


def test_embedding_oracle_equivalence():
    with criterion(6, "embeddings and Z-embedding verdicts agree with exhaustive search (200 dists)", 120):
        rng = np.random.default_rng(6)
        for _ in range(200):
            dist = random_distribution(rng, 3)
            for q in range(2, 6):
                got = sorted(e.vector() for e in enumerate_embeddings(dist, q))
                assert got == oracles.normalized_embeddings(dist, q)
            z, wit = has_nontrivial_z_embedding(dist)
            assert z == oracles.box_z_embedding(dist, 3)
            if not z:
                assert all(oracles.pair_connected(dist, a, b) for a, b in ((0, 1), (1, 2), (0, 2)))
                assert is_pairwise_connected(dist)[0]
            else:
                assert isinstance(wit, Embedding) and not wit.trivial


def test_polynomial_mixing_suite():
    with criterion(7, "mixing coefficients audits (d <= 30) and Schur identity vs monomial sums", 30):
        for d in range(1, 31):
            for eps in (1 / 4, 1 / 16, 1 / 64):
                co = noise_mix_coefficients(d, eps)
                lines = {a.name: a for a in audit(co, kmax=200)}
                assert all(a.ok for a in lines.values()), [a for a in lines.values() if not a.ok]
                A = co.moments(200)
                tol = 1e-8 * co.abs_sum
                assert np.max(np.abs(A[: d + 1] - 1)) <= tol
                assert np.all(np.diff(A[d:]) <= tol) and A[d:].min() >= -tol and A[d:].max() <= 1 + tol
                target = oracles.chebyshev_numpy(d, (1 + eps) / (1 - eps))
                assert abs(co.abs_sum - target) <= 1e-8 * target
                assert all(c * (-1) ** j > 0 for j, c in enumerate(co.weights))
        rng = np.random.default_rng(7)
        for _ in range(20):
            d = int(rng.integers(1, 5))
            nodes = rng.random(d + 1)
            for k in range(d, d + 7):
                lhs, _, _ = schur_check(nodes, k)
                brute = oracles.complete_homogeneous_brute(k - d, list(nodes))
                assert abs(lhs - brute) <= 1e-8 * max(abs(brute), 1e-300) or abs(lhs - brute) <= 1e-12


def _variance_identity(F, basis, triple):
    lhs = sum(a**2 * decompose(R, basis).influences[0] for a, R in zip(triple.values, triple.right))
    return lhs, decompose(F, basis).influences[-1]


def test_decomposition_and_svd_suite():
    with criterion(8, "Parseval, noise routes, SVD and influence identity on 50 functions (1e-9)", 60):
        rng = np.random.default_rng(8)
        for i in range(50):
            k = int(rng.integers(2, 5))
            n = int(rng.integers(1, 5))
            mu = rng.random(k) + 0.05
            mu /= mu.sum()
            sp = sorted(rng.choice(k, size=int(rng.integers(0, k + 1)), replace=False).tolist())
            if i % 2:
                keys = [int(v) for v in rng.integers(0, 2, size=k)]
                basis = build_decomposition_basis(k, mu, sp, mode="modest", master=keys)
            else:
                basis = build_decomposition_basis(k, mu, sp)
            assert np.allclose(basis.gram(), np.eye(k), atol=1e-10)
            F = rng.normal(size=(k,) * n) + 1j * rng.normal(size=(k,) * n)
            dec = decompose(F, basis)
            total = sum(dec.parts.values())
            assert np.max(np.abs(total - F)) <= 1e-9
            assert abs(sum(norm2(p, basis.mu) for p in dec.parts.values()) - norm2(F, basis.mu)) <= 1e-9
            assert abs(dec.total_influence - sum(d * norm2(p, basis.mu) for d, p in dec.parts.items())) <= 1e-9
            rho = float(rng.random())
            spectral = apply_noise(F, basis, rho)
            direct = apply_noise_direct(F, basis, rho)
            eig = sum((1 - rho) ** d * p for d, p in dec.parts.items())
            assert np.max(np.abs(spectral - direct)) <= 1e-9
            assert np.max(np.abs(eig - direct)) <= 1e-9
            tri = svd_decompose(F, basis.mu)
            assert np.max(np.abs(tri.reconstruct() - F)) <= 1e-9
            assert abs(float(np.sum(tri.values**2)) - norm2(F, basis.mu)) <= 1e-9
            L = np.array([l.reshape(-1) for l in tri.left])
            w_left = np.ones(())
            for _ in range(n - 1):
                w_left = np.multiply.outer(w_left, basis.mu)
            gram_left = (L.conj() * np.asarray(w_left).reshape(-1)) @ L.T
            R = np.array(tri.right)
            gram_right = (R.conj() * basis.mu) @ R.T
            assert np.allclose(gram_left, np.eye(len(tri.values)), atol=1e-9)
            assert np.allclose(gram_right, np.eye(len(tri.values)), atol=1e-9)
            lhs, rhs = _variance_identity(F, basis, tri)
            assert abs(lhs - rhs) <= 1e-9


def _three_symbol_instance():
    syms = ("0", "1", "2")
    trip = [(x, y, z) for x in syms for y in syms for z in syms if int(x) + int(y) + int(z) in (0, 4)]
    return TripartiteDistribution.uniform(syms, syms, syms, trip)


def test_transform_suite():
    with criterion(9, "path trick, transport, restriction, saturation and projection checks", 60):
        g = ghz()
        # maintain threshold: 2^(r-1) = 2 >= min(|Gamma|, |Phi|)
        res = path_trick(g.dist, "x", 2, g.target, 2)
        assert pair_support_full(res.dist, 1, 2)
        for t in g.dist.support:
            assert res.target[(res.diagonal[t[0]], t[1], t[2])] == g.target[t]
        one = path_trick(g.dist, "x", 1, g.target, 2)
        assert one.dist.label_atoms() == {((x,), y, z): p for (x, y, z), p in g.dist.label_atoms().items()}
        for e in enumerate_embeddings(g.dist, 2):
            moved = transport_embedding(e, res)
            assert all((moved.alpha[x] + moved.beta[y] + moved.gamma[z]) % 2 == 0 for x, y, z in res.dist.support)
        half = restriction_split(g.dist, g.dist.support[:2], uniform=True)
        assert half.delta == Fraction(1, 2) and half.reconstruct() == g.dist.prob()
        sat = saturate(g.dist, g.target, 2, r=8)
        assert sat.rounds == 0
        ia, ib, ic = sat.master.images()
        assert ia == ib == ic and len(ia) == 2
        d3 = _three_symbol_instance()
        sat3 = saturate(d3, r=8, max_rounds=32)
        sizes = [row["images"][0] for row in sat3.trace]
        assert sizes[0] == 3 and sizes == sorted(sizes)
        ia, ib, ic = sat3.master.images()
        assert ia == ib == ic and len(ia) == sat3.master.master_group.order
        nu = project_to_master(sat.dist, sat.master)
        # send each master element back to the GHZ symbol carrying it
        back = {sat.master.alpha_master[x]: sat.dist.sigma[x] for x in range(2)}
        mapped = {(back[nu.sigma[x]], nu.gamma[y], nu.phi[z]): p for (x, y, z), p in nu.atoms()}
        assert mapped == g.dist.label_atoms()


def test_additive_suite():
    with criterion(10, "Freiman counterexample, affine rejection, and modulus reduction on GHZ", 10):
        Z5 = FiniteAbelianGroup((5,))
        sq = FunctionOnGroupBox(Z5, {(x,): x * x % 5 for x in range(5)}, 5)
        ok, (u, v) = freiman_check(sq, 2)
        assert not ok
        assert Z5.reduce(tuple(map(sum, zip(*u)))) == Z5.reduce(tuple(map(sum, zip(*v))))
        assert sum(sq.values[a] for a in u) % 5 != sum(sq.values[a] for a in v) % 5
        for c0 in range(5):
            for c1 in range(5):
                hom = FunctionOnGroupBox(Z5, {(x,): c0 + c1 * x for x in range(5)}, 5)
                assert freiman_check(hom, 3)[0]
        G = FiniteAbelianGroup((2, 2))
        assert affine_form_extract({(a, b): a * b for a in range(2) for b in range(2)}, G, 2) is None
        g = ghz()
        big = TargetEmbedding(g, 2, 1, 4, (0, 2), (0, 2), (0, 2))
        small = reduce_embedding_N(big)
        assert small.N == 2 and small.a == small.b == small.c == (0, 1)
        try:
            reduce_embedding_N(small)
        except NotReducible:
            pass
        else:
            raise AssertionError("reduced below the minimal N")


def _cli(*args, **kw):
    return subprocess.run([sys.executable, "-m", "xorrep", *args], capture_output=True, text=True, **kw)


def test_cli_contract(tmp_path):
    with criterion(11, "CLI analyze report, deterministic decay CSV, selftest exit codes", 300):
        out = _cli("analyze", str(ROOT / "games" / "ghz.json"), "--n", "1")
        assert out.returncode == 0, out.stderr
        rep = json.loads(out.stdout)
        assert rep["values"][0]["exact"] == "3/4"
        assert rep["minimal_N"][0]["N"] == 2 and rep["minimal_N"][0]["certified_minimal"]
        assert rep["z_embedding"]["exists"] is False
        assert rep["connectivity"]["pairwise_connected"] is True
        assert rep["master"]["invariants"] == [2]
        runs = [_cli("decay", str(ROOT / "games" / "ghz.json"), "--n", "1", "--mode", "search", "--seed", "9")
                for _ in range(2)]
        assert runs[0].returncode == 0 and runs[0].stdout == runs[1].stdout
        bad = tmp_path / "bad.json"
        doc = json.loads((ROOT / "games" / "ghz.json").read_text())
        doc["support"][0]["p"] = "1/0"
        bad.write_text(json.dumps(doc))
        assert _cli("analyze", str(bad)).returncode == 2
        assert _cli("selftest").returncode == 0
        broken = _cli("selftest", "--scope", "cheby", "--inject-fault", "cheby-weight")
        assert broken.returncode == 1 and "FAIL cheby: polyapprox item 1" in broken.stdout
