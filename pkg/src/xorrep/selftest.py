"""Fast invariant checks grouped by module, used by ``xorrep selftest``."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

import numpy as np

SCOPES = ("abelian", "game", "embed", "analytic", "transform", "cheby", "additive")
FAULTS = ("cheby-weight",)


@dataclass(frozen=True)
class CheckResult:
    scope: str
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.scope}: {self.name} -- {self.detail}"


_REGISTRY: list[tuple[str, Callable]] = []


def check(scope: str):
    def wrap(fn):
        _REGISTRY.append((scope, fn))
        return fn
    return wrap


@check("abelian")
def _abelian(faults):
    from .abelian import smith_normal_form, smith_diagonal, solve_mod_q, FiniteAbelianGroup, invariant_factors
    yield "smith diagonal", smith_diagonal(smith_normal_form([[2, 4], [6, 8]])[1]) == [2, 4], "diag([[2,4],[6,8]]) = (2, 4)"
    sols = sorted(tuple(s) for s in solve_mod_q([[2]], [2], 4))
    yield "modular solve", sols == [(1,), (3,)], f"2x = 2 mod 4 -> {sols}"
    G = FiniteAbelianGroup((4, 6))
    inv = invariant_factors(G, set(G.elements()))
    yield "invariant factors", tuple(inv) == (2, 12), f"Z4 x Z6 -> {tuple(inv)}"


@check("game")
def _game(faults):
    from .game import ghz, value_exact, value_search, win_probability
    from .analytic import arithmetize_win_probability
    g = ghz()
    rep = value_exact(g, 1)
    yield "ghz value", rep.value == Fraction(3, 4), f"value_exact = {rep.value}"
    s = value_search(g, 1, seed=3, iterations=200)
    yield "search below exact", s.exact <= rep.value, f"search {s.exact} <= exact {rep.value}"
    a = arithmetize_win_probability(g, rep.witness)
    w = win_probability(g, rep.witness)
    yield "arithmetization", abs(a - float(w)) < 1e-12, f"|{a.real:.12g} - {w}| < 1e-12"


@check("embed")
def _embed(faults):
    from .game import ghz
    from .embed import enumerate_embeddings, has_nontrivial_z_embedding, minimal_N, certify_minimal, master_embedding
    g = ghz()
    embs = enumerate_embeddings(g.dist, 2)
    yield "ghz embeddings mod 2", len(embs) == 2, f"{len(embs)} normalized embeddings"
    z, _ = has_nontrivial_z_embedding(g.dist)
    yield "ghz integer embedding", not z, "no nontrivial integer embedding"
    te = minimal_N(g)
    ok = te is not None and te.N == 2 and certify_minimal(te)
    yield "ghz minimal N", ok, f"N = {None if te is None else te.N}, certified"
    me = master_embedding(g.dist, 8)
    yield "ghz master group", me.master_group.invariants == (2,), f"invariants {me.master_group.invariants}"


@check("analytic")
def _analytic(faults):
    from .analytic import (two_player_spectral_norm, two_player_correlation, build_decomposition_basis,
                           decompose, apply_noise, apply_noise_direct, norm2, svd_decompose)
    P = np.full((2, 2), 0.25)
    T = np.array([[1, 1], [1, -1]])
    sig = two_player_spectral_norm(P, T)
    yield "and spectral norm", abs(sig - 1 / math.sqrt(2)) < 1e-10, f"sigma = {sig:.12g}"
    rng = np.random.default_rng(11)
    F = np.exp(2j * np.pi * rng.random((2, 2, 2)))
    G = np.exp(2j * np.pi * rng.random((2, 2, 2)))
    c = abs(two_player_correlation(F, G, P, T, 3))
    yield "tensorization", c <= sig**3 + 1e-9, f"|corr| = {c:.6g} <= sigma^3"
    mu = np.array([0.1, 0.2, 0.3, 0.4])
    basis = build_decomposition_basis(4, mu, [1, 2, 3])
    H = rng.normal(size=(4, 4, 4))
    d = decompose(H, basis)
    err = abs(float(np.sum(np.abs(d.coefficients) ** 2)) - norm2(H, mu))
    yield "parseval", err < 1e-9, f"error {err:.2e}"
    diff = float(np.max(np.abs(apply_noise(H, basis, 0.3) - apply_noise_direct(H, basis, 0.3))))
    yield "noise routes agree", diff < 1e-9, f"max diff {diff:.2e}"
    s = svd_decompose(H, mu)
    rec = float(np.max(np.abs(s.reconstruct() - H)))
    yield "svd reconstruction", rec < 1e-9, f"max diff {rec:.2e}"


@check("transform")
def _transform(faults):
    from .game import ghz
    from .transform import path_trick, restriction_split, saturate, project_to_master
    g = ghz()
    res = path_trick(g.dist, "x", 2, g.target, 2)
    yield "maintain threshold", res.other_pair_full(), "(y, z) support full after r = 2"
    sp = restriction_split(g.dist, g.dist.support[:2])
    yield "restriction reconstruction", sp.reconstruct() == g.dist.prob(), f"delta = {sp.delta}"
    sat = saturate(g.dist, g.target, 2, r=8)
    yield "ghz saturation", sat.rounds == 0, f"{sat.rounds} rounds"
    nu = project_to_master(sat.dist, sat.master)
    yield "ghz projection", len(nu.support) == 4 and set(nu.probs) == {Fraction(1, 4)}, "4 uniform atoms"


@check("cheby")
def _cheby(faults):
    from .cheby import noise_mix_coefficients, audit, schur_check
    worst: dict[str, tuple[bool, str]] = {}
    for d in range(1, 31):
        for eps in (1 / 4, 1 / 16, 1 / 64):
            co = noise_mix_coefficients(d, eps)
            if "cheby-weight" in faults and d == 5 and eps == 1 / 16:
                w = list(co.weights)
                w[0] *= 1 + 1e-3
                co = replace(co, weights=tuple(w))
            for line in audit(co):
                if line.name not in worst or (worst[line.name][0] and not line.ok):
                    worst[line.name] = (line.ok, f"d={d}, eps={eps:g}: {line.detail}")
    for name, (ok, detail) in worst.items():
        yield name, ok, detail if not ok else "all d <= 30 and eps in {1/4, 1/16, 1/64}"
    lhs, rhs, err = schur_check([0.1, 0.5, 0.7], 6)
    yield "schur identity", err <= 1e-8 * max(1.0, abs(rhs)), f"{lhs:.12g} vs {rhs:.12g}"


@check("additive")
def _additive(faults):
    from .abelian import FiniteAbelianGroup
    from .additive import FunctionOnGroupBox, freiman_check, affine_form_extract
    Z5 = FiniteAbelianGroup((5,))
    sq = FunctionOnGroupBox(Z5, {(x,): x * x for x in range(5)}, 5)
    ok, wit = freiman_check(sq, 2)
    yield "freiman counterexample", not ok, f"witness {wit}"
    lin = FunctionOnGroupBox(Z5, {(x,): 2 * x + 1 for x in range(5)}, 5)
    yield "freiman homomorphism", freiman_check(lin, 3)[0], "2x + 1 passes at order 3"
    G = FiniteAbelianGroup((2, 2))
    prod = {(a, b): a * b for a in range(2) for b in range(2)}
    yield "affine rejection", affine_form_extract(prod, G, 2) is None, "x1 x2 has no affine form mod 2"


def run(scopes=None, faults=()) -> list[CheckResult]:
    scopes = set(SCOPES if not scopes else scopes)
    unknown = scopes - set(SCOPES)
    if unknown:
        raise ValueError(f"unknown scope(s): {sorted(unknown)}")
    bad_faults = set(faults) - set(FAULTS)
    if bad_faults:
        raise ValueError(f"unknown fault(s): {sorted(bad_faults)}")
    out = []
    for scope, fn in _REGISTRY:
        if scope not in scopes:
            continue
        try:
            for name, ok, detail in fn(set(faults)):
                out.append(CheckResult(scope, name, bool(ok), detail))
        except Exception as exc:  # a crash is a failed check, not a crashed run
            out.append(CheckResult(scope, "error", False, f"{type(exc).__name__}: {exc}"))
    return out
