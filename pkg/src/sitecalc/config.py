"""Size caps and enumeration budgets.

Every cap is a module-level default that callers may override per call.
``SITECALC_BUDGET`` in the environment overrides the family budget.
"""

import os

MAX_OBJECTS = 64
MAX_MORPHISMS = 4096
# non-identity morphisms into one object; bounds 2^h sieve/presieve enumeration
SIEVE_CAP = 16
DEFAULT_FAMILY_BUDGET = 10**7
DEFAULT_CENSUS_BUDGET = 2 * 10**6


def family_budget(override=None):
    if override is not None:
        return int(override)
    env = os.environ.get("SITECALC_BUDGET")
    if env:
        return int(env)
    return DEFAULT_FAMILY_BUDGET


def census_budget(override=None):
    if override is not None:
        return int(override)
    env = os.environ.get("SITECALC_BUDGET")
    if env:
        return int(env)
    return DEFAULT_CENSUS_BUDGET
