"""Exact values, abelian-embedding algebra, distribution transforms and
Fourier-analytic operators for 3-player XOR games."""
from .game import TripartiteDistribution, XorGame, Strategy, ghz, and_game, value_exact, value_search, win_probability
from .kernels import BACKEND

__all__ = [
    "TripartiteDistribution",
    "XorGame",
    "Strategy",
    "ghz",
    "and_game",
    "value_exact",
    "value_search",
    "win_probability",
    "BACKEND",
]
__version__ = "0.1.0"
