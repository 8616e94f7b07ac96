"""Fourier-analytic tools: arithmetized win probability, correlations,
two-player spectral norms, degree decompositions, noise and function SVD.

Everything is double precision.  Functions on ``Sigma^n`` are numpy arrays
of shape ``(|Sigma|,) * n`` indexed by question symbols.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT_TABLE_BUDGET, BudgetExceeded
from .game import PowerSupport, Strategy, TripartiteDistribution, XorGame

TOL = 1e-9


def _check_budget(entries: int, budget: int | None) -> None:
    budget = DEFAULT_TABLE_BUDGET if budget is None else budget
    if entries > budget:
        raise BudgetExceeded(f"{entries} table entries exceed the budget of {budget}")


def dense_mu(dist: TripartiteDistribution) -> np.ndarray:
    mu = np.zeros(dist.sizes)
    for t, p in dist.atoms():
        mu[t] = float(p)
    return mu


def phase_tensor(game: XorGame, s: int = 1) -> np.ndarray:
    """``omega^(-s t)`` on the support (zero elsewhere), ``omega = exp(2 pi i / m)``."""
    T = np.zeros(game.dist.sizes, dtype=complex)
    m = game.modulus
    for t in game.dist.support:
        T[t] = np.exp(-2j * np.pi * s * game.target[t] / m)
    return T


def arithmetize_win_probability(game: XorGame, strategy: Strategy, budget: int | None = None) -> complex:
    """Winning probability as an average over characters ``S`` of ``Z_m^n``.

    Each term is ``E[F_S(x) G_S(y) H_S(z) T_S(x, y, z)]`` with
    ``F_S(x) = omega^(S . f(x))`` and ``T_S = omega^(-S . t)``.  Falls back
    to the per-coordinate factored average when ``m^n`` is over budget.
    """
    strategy.check_shape(game)
    n, m = strategy.n, game.modulus
    ps = PowerSupport(game, n)
    w = ps.W.astype(float) / float(ps.denominator)
    omega = np.exp(2j * np.pi / m)
    budget = DEFAULT_TABLE_BUDGET if budget is None else budget
    if m**n * ps.size <= budget:
        S = np.array(list(itertools.product(range(m), repeat=n)), dtype=np.int64).reshape(m**n, n)
        F = omega ** ((strategy.f @ S.T) % m)
        G = omega ** ((strategy.g @ S.T) % m)
        H = omega ** ((strategy.h @ S.T) % m)
        T = omega ** (-((ps.T @ S.T) % m))
        terms = (w[:, None] * F[ps.X] * G[ps.Y] * H[ps.Z] * T).sum(axis=0)
        return complex(terms.mean())
    # E_S omega^(S.d) factors as a product of per-coordinate character averages
    d = (strategy.f[ps.X] + strategy.g[ps.Y] + strategy.h[ps.Z] - ps.T) % m
    s = np.arange(m)
    per = (omega ** (d[..., None] * s)).mean(axis=-1)
    return complex((w * per.prod(axis=1)).sum())


def _power_index(dist: TripartiteDistribution, n: int, budget: int | None):
    P = len(dist.support) ** n
    _check_budget(P, budget)
    sup = np.array(dist.support, dtype=np.int64).reshape(-1, 3)
    idx = np.array(list(itertools.product(range(len(dist.support)), repeat=n)), dtype=np.int64).reshape(P, n)
    return sup, idx


def correlation(F, G, H, T: np.ndarray, dist: TripartiteDistribution, n: int, budget: int | None = None) -> complex:
    """``E[F(x) G(y) H(z) prod_i T(x_i, y_i, z_i)]`` under the ``n``-fold product of ``dist``.

    ``F``, ``G``, ``H`` are dense arrays, or lists of ``n`` per-coordinate
    vectors for product functions (then the expectation factors).
    """
    mu = dense_mu(dist)
    W = mu * np.asarray(T)
    if all(isinstance(v, (list, tuple)) for v in (F, G, H)):
        out = 1.0 + 0j
        for fi, gi, hi in zip(F, G, H):
            out *= np.einsum("xyz,x,y,z->", W, np.asarray(fi), np.asarray(gi), np.asarray(hi))
        return complex(out)
    F, G, H = (_densify(v, n) for v in (F, G, H))
    sup, idx = _power_index(dist, n, budget)
    coords = [sup[idx, a] for a in range(3)]
    weight = np.prod(W[coords[0], coords[1], coords[2]], axis=1)
    vals = F[tuple(coords[0].T)] * G[tuple(coords[1].T)] * H[tuple(coords[2].T)]
    return complex((weight * vals).sum())


def _densify(v, n):
    if isinstance(v, (list, tuple)):
        out = np.asarray(v[0])
        for vi in v[1:]:
            out = np.multiply.outer(out, np.asarray(vi))
        return out
    return np.asarray(v)


def two_player_spectral_norm(P, T) -> float:
    """Largest singular value of ``D_x^(-1/2) [P(x, y) T(x, y)] D_y^(-1/2)``."""
    P = np.asarray(P, dtype=float)
    T = np.asarray(T)
    px, py = P.sum(axis=1), P.sum(axis=0)
    if (px <= 0).any() or (py <= 0).any():
        raise ValueError("marginals must be strictly positive")
    M = (P * T) / np.sqrt(px)[:, None] / np.sqrt(py)[None, :]
    return float(np.linalg.norm(M, 2))


def two_player_correlation(F: np.ndarray, G: np.ndarray, P, T, n: int) -> complex:
    """``E[F(x) G(y) prod_i T(x_i, y_i)]`` by contracting one coordinate at a time."""
    W = np.asarray(P, dtype=float) * np.asarray(T)
    acc = np.asarray(G, dtype=complex)
    for axis in range(n):
        acc = np.moveaxis(np.tensordot(W, acc, axes=([1], [axis])), 0, axis)
    return complex((np.asarray(F) * acc).sum())


def spectral_upper_bound(game: XorGame, n: int) -> float:
    """Upper bound on the ``n``-fold value treating the last two players as one.

    For each character ``s`` the first player faces a two-player game with
    phase ``omega^(-s t)``; tensorization bounds the character-``S`` term by
    the product of the per-coordinate norms, giving ``(mean_s sigma_s)^n``.
    """
    a, b, c = game.dist.sizes
    mu = dense_mu(game.dist).reshape(a, b * c)
    keep = mu.sum(axis=0) > 0
    sig = []
    for s in range(game.modulus):
        T = phase_tensor(game, s).reshape(a, b * c)
        sig.append(two_player_spectral_norm(mu[:, keep], T[:, keep]))
    return float(np.mean(sig)) ** n


# ---------------------------------------------------------------- degree decompositions

@dataclass(frozen=True)
class DecompositionBasis:
    """Orthonormal basis of functions on one alphabet, split by degree.

    Column ``b`` of ``vectors`` is a basis function; ``degree[b]`` is 1 for
    functions that count toward the degree and 0 for the rest.  ``resample``
    is the Markov matrix that rerandomizes a symbol inside its class.
    """

    mode: str
    mu: np.ndarray
    sigma_prime: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]
    vectors: np.ndarray
    degree: np.ndarray
    block: tuple
    resample: np.ndarray

    @property
    def size(self) -> int:
        return len(self.mu)

    def gram(self) -> np.ndarray:
        B = self.vectors
        return B.conj().T @ (self.mu[:, None] * B)


def _gram_schmidt(vectors, mu, tol=1e-12):
    out = []
    for v in vectors:
        v = np.asarray(v, dtype=complex).copy()
        for u in out:
            v = v - np.vdot(u * mu, v) * u
        norm = np.sqrt(np.real(np.vdot(v * mu, v)))
        if norm <= tol:
            out.append(None)
            continue
        v = v / norm
        lead = next(c for c in v if abs(c) > tol)
        v = v * (abs(lead) / lead)
        out.append(v)
    return out


def build_decomposition_basis(alphabet, mu_x, sigma_prime, mode: str = "effective", master=None) -> DecompositionBasis:
    """Basis adapted to a designated subset ``sigma_prime`` of the alphabet.

    Effective mode: degree-0 functions are those constant on ``sigma_prime``;
    degree-1 functions live on ``sigma_prime`` and are orthogonal to
    constants.  Modest mode splits ``sigma_prime`` further into classes
    (symbols with equal master value) and works class by class.  ``master``
    is a ``MasterEmbedding`` or a sequence of class keys indexed by symbol.
    """
    labels = list(alphabet) if not isinstance(alphabet, int) else list(range(alphabet))
    k = len(labels)
    mu = np.asarray([float(v) for v in mu_x])
    if len(mu) != k:
        raise ValueError("marginal length does not match the alphabet")
    if (mu <= 0).any():
        raise ValueError("marginal must be strictly positive on the alphabet")
    mu = mu / mu.sum()
    sp = sorted({labels.index(s) if s in labels and not isinstance(s, (int, np.integer)) else int(s) for s in sigma_prime})
    inside = set(sp)
    outside = [x for x in range(k) if x not in inside]

    def e(x):
        v = np.zeros(k)
        v[x] = 1
        return v

    def ind(xs):
        v = np.zeros(k)
        v[list(xs)] = 1
        return v

    if mode == "effective":
        classes = (tuple(sp),) if sp else ()
    elif mode == "modest":
        if master is None:
            raise ValueError("modest mode needs a master embedding")
        keys = master.alpha_master if hasattr(master, "alpha_master") else master
        groups: dict = {}
        for x in sp:
            groups.setdefault(keys[x], []).append(x)
        classes = tuple(tuple(v) for v in sorted(groups.values()))
    else:
        raise ValueError(f"unknown mode {mode!r}")

    low_span = [np.ones(k)] + [e(x) for x in outside] + [ind(c) for c in classes]
    low = [v for v in _gram_schmidt(low_span, mu) if v is not None]
    vectors = list(low)
    block: list = ["B1" if mode == "effective" else "B'"] * len(low)
    degree = [0] * len(low)
    for a, cls in enumerate(classes):
        part = _gram_schmidt([ind(cls)] + [e(x) for x in cls], mu)[1:]
        for v in part:
            if v is not None:
                vectors.append(v)
                block.append("B2" if mode == "effective" else ("B", a))
                degree.append(1)
    R = np.eye(k)
    for cls in classes:
        w = mu[list(cls)] / mu[list(cls)].sum()
        for x in cls:
            R[x] = 0
            R[x, list(cls)] = w
    return DecompositionBasis(mode, mu, tuple(sp), classes, np.array(vectors).T, np.array(degree), tuple(block), R)


def _apply_axis(F: np.ndarray, M: np.ndarray, axis: int) -> np.ndarray:
    """``out[..., i, ...] = sum_j M[i, j] F[..., j, ...]`` on one axis."""
    return np.moveaxis(np.tensordot(M, F, axes=([1], [axis])), 0, axis)


def coefficients(F: np.ndarray, basis: DecompositionBasis) -> np.ndarray:
    A = (basis.vectors.conj() * basis.mu[:, None]).T
    C = np.asarray(F, dtype=complex)
    for axis in range(C.ndim):
        C = _apply_axis(C, A, axis)
    return C


def synthesize(C: np.ndarray, basis: DecompositionBasis) -> np.ndarray:
    out = C
    for axis in range(C.ndim):
        out = _apply_axis(out, basis.vectors, axis)
    return out


def degree_tensor(basis: DecompositionBasis, n: int) -> np.ndarray:
    deg = np.zeros((basis.size,) * n, dtype=np.int64)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = basis.size
        deg = deg + basis.degree.reshape(shape)
    return deg


@dataclass
class Decomposition:
    parts: dict[int, np.ndarray]
    coefficients: np.ndarray
    influences: np.ndarray
    total_influence: float


def decompose(F: np.ndarray, basis: DecompositionBasis, budget: int | None = None) -> Decomposition:
    """Homogeneous parts by degree plus per-coordinate and total influence."""
    F = np.asarray(F, dtype=complex)
    n = F.ndim
    if any(s != basis.size for s in F.shape):
        raise ValueError("function table does not match the basis alphabet")
    _check_budget(F.size, budget)
    C = coefficients(F, basis)
    deg = degree_tensor(basis, n)
    parts = {}
    for d in range(n + 1):
        mask = deg == d
        if mask.any():
            parts[d] = synthesize(np.where(mask, C, 0), basis)
    power = np.abs(C) ** 2
    infl = np.zeros(n)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = basis.size
        infl[axis] = float((power * basis.degree.reshape(shape)).sum())
    total = float((power * deg).sum())
    return Decomposition(parts, C, infl, total)


def norm2(F: np.ndarray, mu: np.ndarray) -> float:
    """Squared L2 norm under the product measure."""
    w = np.ones(())
    for _ in range(np.ndim(F)):
        w = np.multiply.outer(w, mu)
    return float((w * np.abs(F) ** 2).sum())


def resampling_influence(F: np.ndarray, basis: DecompositionBasis, axis: int) -> float:
    """``E |F(x) - F(y)|^2 / 2`` where ``y`` rerandomizes coordinate ``axis`` in its class."""
    F = np.asarray(F, dtype=complex)
    n = F.ndim
    total = 0.0
    for v in range(basis.size):
        Fv = np.take(F, [v], axis=axis)
        diff = np.abs(F - Fv) ** 2
        shape = [1] * n
        shape[axis] = basis.size
        weight = basis.resample[:, v].reshape(shape)
        total += norm2(np.sqrt(diff * weight), basis.mu)
    return total / 2


def apply_noise(F: np.ndarray, basis: DecompositionBasis, rho: float) -> np.ndarray:
    """``sum_d (1 - rho)^d F^{=d}``."""
    if not 0 <= rho <= 1:
        raise ValueError("rho must lie in [0, 1]")
    F = np.asarray(F, dtype=complex)
    C = coefficients(F, basis)
    deg = degree_tensor(basis, F.ndim)
    return synthesize(C * (1 - rho) ** deg, basis)


def apply_noise_direct(F: np.ndarray, basis: DecompositionBasis, rho: float) -> np.ndarray:
    """Average of ``F`` over independent per-coordinate rerandomization with probability ``rho``."""
    N = (1 - rho) * np.eye(basis.size) + rho * basis.resample
    out = np.asarray(F, dtype=complex)
    for axis in range(out.ndim):
        out = _apply_axis(out, N, axis)
    return out


@dataclass
class SvdTriple:
    values: np.ndarray
    left: list[np.ndarray]
    right: list[np.ndarray]
    mu: np.ndarray

    def reconstruct(self) -> np.ndarray:
        out = 0
        for a, L, R in zip(self.values, self.left, self.right):
            out = out + a * np.multiply.outer(L, R)
        return out


def svd_decompose(F: np.ndarray, mu) -> SvdTriple:
    """Split off the last coordinate: ``F = sum_r a_r F_r(x_1..x_{n-1}) G_r(x_n)``.

    Both factor families are orthonormal under the product measure built
    from ``mu`` and ``sum a_r^2`` equals the squared norm of ``F``.
    """
    F = np.asarray(F, dtype=complex)
    n = F.ndim
    if n < 1:
        raise ValueError("need n >= 1")
    mu = np.asarray([float(v) for v in mu])
    k = len(mu)
    head = F.shape[:-1]
    rows = int(np.prod(head)) if head else 1
    w_rows = np.ones(())
    for _ in range(n - 1):
        w_rows = np.multiply.outer(w_rows, mu)
    w_rows = np.asarray(w_rows).reshape(rows)
    A = np.sqrt(w_rows)[:, None] * F.reshape(rows, k) * np.sqrt(mu)[None, :]
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    left = [(U[:, r] / np.sqrt(w_rows)).reshape(head) for r in range(len(s))]
    right = [Vh[r] / np.sqrt(mu) for r in range(len(s))]
    return SvdTriple(s, left, right, mu)
