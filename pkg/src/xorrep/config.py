"""Budgets shared by the enumeration routines."""
from __future__ import annotations

import os

DEFAULT_EVENT_BUDGET = 10**9
DEFAULT_TABLE_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


def default_budget() -> int:
    """Scored-event budget; the ``XORREP_BUDGET`` environment variable overrides it."""
    env = os.environ.get("XORREP_BUDGET")
    if env:
        return int(float(env))
    return DEFAULT_EVENT_BUDGET
