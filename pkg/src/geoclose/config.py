"""Runtime knobs shared by the search-based operations."""

import os

DEFAULT_SEARCH_BUDGET = 10_000_000


def search_budget(override=None):
    """Node budget for exhaustive searches.

    Resolution order: explicit override, GEOCLOSE_BUDGET environment
    variable, package default.  Exceeding the budget is always an explicit
    error, never silent truncation.
    """
    if override is not None:
        return int(override)
    env = os.environ.get("GEOCLOSE_BUDGET")
    if env:
        return int(env)
    return DEFAULT_SEARCH_BUDGET
