"""Finite sites: categories as composition tables, sieves, Grothendieck
topologies by saturation, sheaf checks and site comparison."""

from .errors import *  # noqa: F401,F403
from .fincat import (  # noqa: F401
    FinCat,
    FinFunctor,
    Presheaf,
    constant_presheaf,
    identity_functor,
    is_fully_faithful,
    representable,
    validate_category,
    validate_functor,
    validate_presheaf,
)
from .sieves import Presieve, Sieve, enumerate_sieves, generate, pullback_sieve, top_sieve  # noqa: F401

__version__ = "0.1.0"
