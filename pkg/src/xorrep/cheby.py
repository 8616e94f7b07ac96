"""Chebyshev-node noise mixing coefficients and the Schur-polynomial identity.

The nodes are ``rho_j = (1 - eps)/2 * (cos(j pi / d) + 1)`` for
``j = 0..d`` and the weights ``c_j`` are the Lagrange weights that make the
mixture ``sum_j c_j rho_j^k`` equal to one for every ``k <= d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseMixCoefficients:
    d: int
    eps: float
    nodes: tuple[float, ...]
    weights: tuple[float, ...]

    @property
    def abs_sum(self) -> float:
        return float(sum(abs(c) for c in self.weights))

    def tolerance(self) -> float:
        return 1e-8 * self.abs_sum

    def moments(self, kmax: int) -> np.ndarray:
        """``A_k = sum_j c_j rho_j^k`` for ``k = 0..kmax``."""
        rho = np.array(self.nodes)
        c = np.array(self.weights)
        powers = rho[None, :] ** np.arange(kmax + 1)[:, None]
        return powers @ c


def noise_mix_coefficients(d: int, eps: float) -> NoiseMixCoefficients:
    """Nodes and weights for degree ``d``; ``d = 0`` gives the single node ``1 - eps``."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if d == 0:
        return NoiseMixCoefficients(0, eps, (1 - eps,), (1.0,))
    nodes = [(1 - eps) / 2 * (math.cos(j * math.pi / d) + 1) for j in range(d + 1)]
    nodes[d] = 0.0  # cos(pi) = -1 exactly, guard against rounding
    weights = []
    for j, rj in enumerate(nodes):
        num = 1.0
        den = 1.0
        for i, ri in enumerate(nodes):
            if i != j:
                num *= 1 - ri
                den *= rj - ri
        weights.append(num / den)
    return NoiseMixCoefficients(d, eps, tuple(nodes), tuple(weights))


def chebyshev_eval(d: int, x: float) -> float:
    """``T_d(x)`` from the trigonometric / hyperbolic closed form."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    if abs(x) <= 1:
        return math.cos(d * math.acos(x))
    val = math.cosh(d * math.acosh(abs(x)))
    return val if x > 0 or d % 2 == 0 else -val


def chebyshev_recurrence(d: int, x: float) -> float:
    prev, cur = 1.0, x
    if d == 0:
        return prev
    for _ in range(d - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def complete_homogeneous(m: int, variables) -> float:
    """``h_m`` of the given variables by the usual one-variable-at-a-time recursion."""
    if m < 0:
        return 0.0
    h = [1.0] + [0.0] * m
    for v in variables:
        for deg in range(1, m + 1):
            h[deg] += v * h[deg - 1]
    return h[m]


def schur_check(nodes, k: int) -> tuple[float, float, float]:
    """Compare ``sum_j rho_j^k / prod_{i != j}(rho_j - rho_i)`` with ``h_{k-d}(rho)``."""
    rho = [float(r) for r in nodes]
    d = len(rho) - 1
    if len(set(rho)) != len(rho):
        raise ValueError("nodes must be pairwise distinct")
    if k < d:
        raise ValueError("need k >= d")
    lhs = 0.0
    for j, rj in enumerate(rho):
        den = 1.0
        for i, ri in enumerate(rho):
            if i != j:
                den *= rj - ri
        lhs += rj**k / den
    rhs = complete_homogeneous(k - d, rho)
    return lhs, rhs, abs(lhs - rhs)


@dataclass(frozen=True)
class AuditLine:
    name: str
    ok: bool
    detail: str


def audit(coeffs: NoiseMixCoefficients, kmax: int = 200) -> list[AuditLine]:
    """Numerical checks of the mixing coefficients."""
    d, eps = coeffs.d, coeffs.eps
    tol = coeffs.tolerance()
    A = coeffs.moments(max(kmax, d + 1))
    out = []
    err1 = float(np.max(np.abs(A[: d + 1] - 1)))
    out.append(AuditLine("polyapprox item 1", err1 <= tol, f"max |A_k - 1| for k <= d: {err1:.3e} (tol {tol:.3e})"))
    tail = A[d:]
    steps = np.diff(tail)
    inc = float(steps.max()) if len(steps) else 0.0
    lo, hi = float(tail.min()), float(tail.max())
    ok2 = inc <= tol and lo >= -tol and hi <= 1 + tol
    out.append(AuditLine("polyapprox item 2", ok2, f"A_k in [{lo:.3e}, {hi:.6f}], largest increase {inc:.3e}"))
    target = chebyshev_eval(d, (1 + eps) / (1 - eps))
    rel = abs(coeffs.abs_sum - target) / target
    out.append(AuditLine("abs weight identity", rel <= 1e-8, f"sum|c| = {coeffs.abs_sum:.12g}, T_d = {target:.12g}"))
    signs = all(c * (-1) ** j > 0 for j, c in enumerate(coeffs.weights))
    out.append(AuditLine("sign alternation", signs, "c_j (-1)^j > 0" if signs else "sign pattern broken"))
    bound = math.exp(10 * d * math.sqrt(eps))
    out.append(AuditLine("growth bound", coeffs.abs_sum <= bound, f"sum|c| <= exp(10 d sqrt(eps)) = {bound:.6g}"))
    return out
